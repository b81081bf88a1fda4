#include <pybind11/complex.h>
#include <pybind11/pybind11.h>

#include <complex>
#include <string>

#include "json.hpp"
#include "specdens/experiment.hpp"
#include "specdens/ring_io.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using namespace specdens;

struct Parsed {
  GroupPtr group;
  RingMatrix<Cyclotomic> matrix;
};

Parsed parse_pair(const std::string& group_text, const std::string& matrix_text) {
  GroupPtr g = group_from_json(json::parse(group_text));
  return {g, parse_matrix(json::parse(matrix_text), g)};
}

json stage_to_json(const StageReport& st, const ExperimentResult& res) {
  json s;
  s["i"] = st.stage_index;
  s["size"] = st.size;
  s["dim"] = st.dim;
  s["F0"] = st.F0;
  if (st.F0_exact) s["F0_exact"] = format_rational(*st.F0_exact);
  json coeff = json::object();
  for (size_t c = 0; c < res.tracked_words.size(); c++) {
    json entry;
    entry["re"] = st.coeff[c].real();
    entry["im"] = st.coeff[c].imag();
    if (!st.coeff_exact[c].empty()) entry["exact"] = st.coeff_exact[c];
    if (c < st.delta.size()) entry["delta"] = st.delta[c];
    coeff[res.tracked_words[c]] = std::move(entry);
  }
  s["coeff"] = std::move(coeff);
  if (st.has_spectral || res.mode == "sofic") s["lndet"] = st.lndet;
  if (st.has_spectral) {
    json dev = json::object();
    for (size_t c = 0; c < res.tracked_words.size(); c++)
      dev[res.tracked_words[c]] =
          json::array({st.lndet_dev_re[c], st.lndet_dev_im[c]});
    s["lndet_dev"] = std::move(dev);
  }
  if (res.mode == "sofic") {
    s["kernel_dim"] = st.kernel_count;
    s["certified"] = st.certified;
    if (st.certified) s["certificate"] = st.certificate;
  }
  if (st.telescope) {
    s["telescope"] = json{{"power", st.telescope->power},
                          {"deviation", st.telescope->lhs},
                          {"bound", st.telescope->rhs},
                          {"ok", st.telescope->ok}};
  }
  return s;
}

std::string run_json(const std::string& config_text, const std::string& mode) {
  json doc = json::parse(config_text, nullptr, true, /*ignore_comments=*/true);
  ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  ExperimentResult res = run_experiment(cfg, mode);
  json out;
  out["mode"] = res.mode;
  out["ok"] = res.ok;
  out["failures"] = res.failures;
  out["tracked"] = res.tracked_words;
  out["class_sizes"] = res.class_sizes;
  out["kappa"] = res.kappa_value;
  out["bounds"] = json{{"b0", res.bounds.b0},
                       {"b1", res.bounds.b1},
                       {"conductor", res.bounds.conductor}};
  if (res.oracle_ran) {
    json oc = json::object();
    for (size_t c = 0; c < res.tracked_words.size(); c++)
      oc[res.tracked_words[c]] = json{{"re", res.oracle_coeffs[c].value.real()},
                                      {"im", res.oracle_coeffs[c].value.imag()},
                                      {"error", res.oracle_coeffs[c].error}};
    out["oracle"] = json{{"grid", res.oracle_grid},
                         {"F0", *res.oracle_F0},
                         {"lndet", res.oracle_lndet_value->value},
                         {"lndet_error", res.oracle_lndet_value->error},
                         {"coeff", std::move(oc)}};
  } else {
    out["oracle"] = nullptr;
    out["oracle_note"] = res.oracle_note;
  }
  json stages = json::array();
  for (const auto& st : res.stages) stages.push_back(stage_to_json(st, res));
  out["stages"] = std::move(stages);
  json csv = json::object();
  if (!res.densities_csv.empty()) csv["densities"] = res.densities_csv;
  if (!res.convergence_csv.empty()) csv["convergence"] = res.convergence_csv;
  if (!res.determinants_csv.empty()) csv["determinants"] = res.determinants_csv;
  out["csv"] = std::move(csv);
  out["report"] = res.report_text;
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_specdens, m) {
  m.doc() =
      "finite stage approximations of standard and delocalized spectral "
      "density functions over group rings";

  m.def("run_json", &run_json, py::arg("config"), py::arg("mode") = "converge",
        "Run a full experiment from a configuration document (JSON text); "
        "returns the result as JSON text.");

  m.def(
      "kappa",
      [](const std::string& g, const std::string& mat) {
        return kappa(parse_pair(g, mat).matrix).kappa;
      },
      py::arg("group"), py::arg("matrix"),
      "sqrt(S(A) S(A*)) * |A|_inf, a uniform bound on every stage spectrum.");

  m.def(
      "hermitian",
      [](const std::string& g, const std::string& mat) {
        return is_hermitian(parse_pair(g, mat).matrix);
      },
      py::arg("group"), py::arg("matrix"));

  m.def(
      "det_bounds",
      [](const std::string& g, const std::string& mat) {
        DetBoundRhs b = determinant_lower_bound_rhs(parse_pair(g, mat).matrix);
        return py::make_tuple(b.b0, b.b1, b.conductor, b.num_embeddings);
      },
      py::arg("group"), py::arg("matrix"),
      "(b0, b1, conductor, embeddings): lower bounds for the standard and "
      "deviated log determinants from the Galois conjugates.");

  m.def(
      "oracle_coefficient",
      [](const std::string& g, const std::string& mat, const std::string& word,
         long grid) {
        Parsed p = parse_pair(g, mat);
        OracleCoefficient oc =
            oracle_kernel_coefficient(p.matrix, p.group->parse(word), grid);
        return py::make_tuple(oc.value, oc.error);
      },
      py::arg("group"), py::arg("matrix"), py::arg("word"), py::arg("grid") = 256,
      "Kernel projection Fourier coefficient at a group element, computed "
      "from the torus symbol; returns (value, error).");

  m.def(
      "oracle_lndet",
      [](const std::string& g, const std::string& mat, long grid) {
        OracleEstimate e = oracle_lndet(parse_pair(g, mat).matrix, grid);
        return py::make_tuple(e.value, e.error);
      },
      py::arg("group"), py::arg("matrix"), py::arg("grid") = 256);

  m.def(
      "stage_coefficient",
      [](const std::string& g, const std::string& mat, const std::string& word,
         long modulus) {
        Parsed p = parse_pair(g, mat);
        QuotientMap q = QuotientMap::mod_quotient(p.group, modulus);
        FiniteRealization r = build_inverse_limit_stage(p.matrix, q);
        if (!r.hermitian)
          throw std::invalid_argument(
              "exact stage coefficients need a Hermitian matrix");
        ExactKernelProjection proj(r);
        ConjugacyClassInfo cls =
            q.target->conjugacy_class(q.apply(p.group->parse(word)));
        Cyclotomic v = proj.fourier_coefficient(cls);
        return py::make_tuple(v.to_complex(), v.str());
      },
      py::arg("group"), py::arg("matrix"), py::arg("word"), py::arg("modulus"),
      "Exact kernel projection coefficient on the mod-n quotient stage; "
      "returns (complex value, exact coefficient string).");

  m.def(
      "stage_lndet",
      [](const std::string& g, const std::string& mat, long modulus, double tau) {
        Parsed p = parse_pair(g, mat);
        QuotientMap q = QuotientMap::mod_quotient(p.group, modulus);
        FiniteRealization r = build_inverse_limit_stage(p.matrix, q);
        SpectralData sd =
            spectral_data(r, {}, tau >= 0 ? tau : default_tau(p.matrix));
        return fuglede_kadison(sd, DensityKind::Standard);
      },
      py::arg("group"), py::arg("matrix"), py::arg("modulus"),
      py::arg("tau") = -1.0,
      "Normalized log determinant of the mod-n quotient stage.");
}
