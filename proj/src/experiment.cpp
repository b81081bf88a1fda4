#include "specdens/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "specdens/ring_io.hpp"

namespace specdens {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

// Unknown keys are rejected so a typo cannot silently disable a check.
void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
  for (const char* k : required)
    if (!j.contains(k)) config_error(where, std::string("missing key '") + k + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required) known = known || it.key() == k;
    for (const char* k : optional) known = known || it.key() == k;
    if (!known) config_error(where, "unknown key '" + it.key() + "'");
  }
}

long get_long(const json& j, const std::string& where) {
  if (!j.is_number_integer()) config_error(where, "expected an integer");
  return j.get<long>();
}

double get_num(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where, "expected a number");
  return j.get<double>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) config_error(where, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) config_error(where, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> get_string_list(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : j) out.push_back(get_string(item, where));
  return out;
}

std::vector<long> get_stage_list(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where, "expected an array of sizes");
  std::vector<long> out;
  for (const auto& item : j) out.push_back(get_long(item, where));
  return out;
}

GroupPtr parse_group(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    config_error("group", "expected an object with a 'kind'");
  std::string kind = get_string(j.at("kind"), "group.kind");
  if (kind == "cyclic") {
    require_keys(j, "group", {"kind", "n"}, {"generator"});
    long n = get_long(j.at("n"), "group.n");
    if (n < 1) config_error("group", "cyclic order must be positive");
    std::string gen = j.contains("generator")
                          ? get_string(j.at("generator"), "group.generator")
                          : std::string("u");
    return Group::cyclic(n, gen);
  }
  if (kind == "symmetric") {
    require_keys(j, "group", {"kind", "n"}, {});
    return Group::symmetric(static_cast<int>(get_long(j.at("n"), "group.n")));
  }
  if (kind == "free_abelian" || kind == "free_group") {
    require_keys(j, "group", {"kind", "rank"}, {"names"});
    int rank = static_cast<int>(get_long(j.at("rank"), "group.rank"));
    std::vector<std::string> names;
    if (j.contains("names")) names = get_string_list(j.at("names"), "group.names");
    return kind == "free_abelian" ? Group::free_abelian(rank, names)
                                  : Group::free_group(rank, names);
  }
  if (kind == "product") {
    require_keys(j, "group", {"kind", "factors"}, {});
    if (!j.at("factors").is_array() || j.at("factors").empty())
      config_error("group", "product needs a nonempty factor list");
    std::vector<GroupPtr> factors;
    for (const auto& f : j.at("factors")) factors.push_back(parse_group(f));
    return Group::direct_product(std::move(factors));
  }
  config_error("group", "unknown kind '" + kind +
                            "' (cyclic, symmetric, free_abelian, free_group, product)");
}

void parse_scheme(const json& j, ExperimentConfig& cfg) {
  if (!j.is_object() || j.size() != 1)
    config_error("scheme",
                 "expected exactly one of inverse_limit, direct_limit, folner, sofic");
  const std::string key = j.begin().key();
  const json& body = j.begin().value();
  if (key == "inverse_limit") {
    require_keys(body, "scheme.inverse_limit", {"moduli"}, {});
    cfg.scheme = SchemeKind::InverseLimit;
    cfg.stages = get_stage_list(body.at("moduli"), "scheme.inverse_limit.moduli");
  } else if (key == "direct_limit") {
    require_keys(body, "scheme.direct_limit", {"moduli"}, {"seed"});
    cfg.scheme = SchemeKind::DirectLimit;
    cfg.stages = get_stage_list(body.at("moduli"), "scheme.direct_limit.moduli");
    if (body.contains("seed"))
      cfg.seed = static_cast<unsigned long long>(
          get_long(body.at("seed"), "scheme.direct_limit.seed"));
  } else if (key == "folner") {
    require_keys(body, "scheme.folner", {"sides"}, {});
    cfg.scheme = SchemeKind::Folner;
    cfg.stages = get_stage_list(body.at("sides"), "scheme.folner.sides");
  } else if (key == "sofic") {
    require_keys(body, "scheme.sofic", {"family"}, {"sizes", "radius", "paths"});
    cfg.scheme = SchemeKind::Sofic;
    cfg.sofic_family = get_string(body.at("family"), "scheme.sofic.family");
    if (body.contains("radius"))
      cfg.sofic_radius = get_long(body.at("radius"), "scheme.sofic.radius");
    if (body.contains("paths"))
      cfg.sofic_paths = get_string_list(body.at("paths"), "scheme.sofic.paths");
    if (body.contains("sizes"))
      cfg.stages = get_stage_list(body.at("sizes"), "scheme.sofic.sizes");
    if (cfg.sofic_family == "file") {
      if (cfg.sofic_paths.empty())
        config_error("scheme.sofic", "family 'file' needs a nonempty 'paths' list");
      if (!cfg.stages.empty())
        config_error("scheme.sofic", "family 'file' takes 'paths', not 'sizes'");
    } else if (!cfg.sofic_paths.empty()) {
      config_error("scheme.sofic", "'paths' is only meaningful for family 'file'");
    }
  } else {
    config_error("scheme", "unknown scheme '" + key + "'");
  }
}

std::vector<ConjugacyClassInfo> resolve_classes(const GroupPtr& g,
                                                const std::vector<std::string>& words) {
  std::vector<ConjugacyClassInfo> out;
  for (const auto& w : words) {
    GroupElement x;
    try {
      x = g->parse(w);
    } catch (const std::exception& e) {
      throw std::invalid_argument("tracked word '" + w + "': " + e.what());
    }
    ConjugacyClassInfo cls = g->conjugacy_class(x);
    if (cls.status == ClassStatus::Infinite)
      throw std::invalid_argument(
          "tracked word '" + w +
          "' has an infinite conjugacy class; delocalized traces need a finite class");
    if (cls.status == ClassStatus::Undecided)
      throw std::invalid_argument(
          "tracked word '" + w +
          "' has a conjugacy class that was not certified finite within the "
          "enumeration budget");
    out.push_back(std::move(cls));
  }
  return out;
}

// true when x moves only inside finite factors (no free-abelian or free part)
bool finite_direction_only(const GroupPtr& g, const GroupElement& x) {
  switch (g->kind()) {
    case GroupKind::FiniteTable:
      return true;
    case GroupKind::FreeAbelian:
    case GroupKind::FreeGroup:
      return g->is_identity(x);
    case GroupKind::DirectProduct: {
      const auto& parts = std::get<std::vector<GroupElement>>(x.v);
      for (size_t i = 0; i < parts.size(); i++)
        if (!finite_direction_only(g->factors()[i], parts[i])) return false;
      return true;
    }
  }
  return false;
}

int folner_dims(const GroupPtr& g) {
  if (g->kind() == GroupKind::FreeAbelian) return g->rank();
  if (g->kind() == GroupKind::DirectProduct && g->factors().size() == 2 &&
      g->factors()[1]->kind() == GroupKind::FreeAbelian)
    return g->factors()[1]->rank();
  throw std::invalid_argument(
      "compression windows need a group of the form Z^d or (finite) x Z^d");
}

std::string scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::InverseLimit: return "inverse_limit";
    case SchemeKind::DirectLimit: return "direct_limit";
    case SchemeKind::Folner: return "folner";
    case SchemeKind::Sofic: return "sofic";
  }
  return "?";
}

struct BuiltStage {
  long size = 0;
  FiniteRealization r;
  std::vector<ConjugacyClassInfo> classes;  // in r.stage_group
  std::optional<FolnerSet> fs;
};

BuiltStage build_stage(const ExperimentConfig& cfg, long idx) {
  const RingMatrix<Cyclotomic>& A = cfg.A();
  BuiltStage b;
  b.size = cfg.stages[idx];
  switch (cfg.scheme) {
    case SchemeKind::InverseLimit: {
      QuotientMap p = QuotientMap::mod_quotient(cfg.group, b.size);
      b.r = build_inverse_limit_stage(A, p);
      for (const auto& cls : cfg.tracked_classes)
        b.classes.push_back(p.target->conjugacy_class(p.apply(cls.representative)));
      break;
    }
    case SchemeKind::DirectLimit: {
      if (cfg.group->num_generators() != 1)
        throw std::invalid_argument(
            "direct-limit stages are built over one-generator groups");
      GroupPtr stage = Group::cyclic(b.size, cfg.group->generator_name(0));
      QuotientMap p(stage, cfg.group, {cfg.group->generator(0)});
      std::string why;
      if (!p.verify(&why))
        throw std::invalid_argument("direct-limit stage " + std::to_string(b.size) +
                                    " does not cover the group: " + why);
      DirectLimitStage st = make_direct_limit_stage(A, p, cfg.seed);
      b.r = build_direct_limit_stage(A, st);
      for (const auto& w : cfg.track)
        b.classes.push_back(stage->conjugacy_class(stage->parse(w)));
      break;
    }
    case SchemeKind::Folner: {
      FolnerSet fs = FolnerSet::box(folner_dims(cfg.group), b.size, idx);
      b.fs = fs;
      b.r = build_folner_compression(A, fs);
      b.classes = cfg.tracked_classes;
      break;
    }
    case SchemeKind::Sofic:
      throw std::logic_error("sofic stages are built separately");
  }
  b.r.stage_index = idx;
  return b;
}

StageReport compute_stage(const ExperimentConfig& cfg, const std::string& mode,
                          long idx, const DetBoundRhs& bounds, double kappa_value,
                          double tau) {
  BuiltStage b = build_stage(cfg, idx);
  const size_t C = cfg.tracked_classes.size();
  StageReport rep;
  rep.stage_index = idx;
  rep.size = b.size;
  rep.dim = b.r.dim;
  rep.coeff.assign(C, {0.0, 0.0});
  rep.coeff_exact.assign(C, "");

  // density and determinant tables need spectra even under an exact-only
  // configuration; only the convergence table can run purely exactly
  const bool want_float = cfg.path != PathMode::Exact || mode != "converge";
  const bool want_exact =
      cfg.path != PathMode::Float && b.r.has_exact && b.r.hermitian;

  if (want_float) {
    SpectralData sd = spectral_data(b.r, b.classes, tau);
    rep.has_spectral = true;
    rep.F0 = density(sd, DensityKind::Standard, 0.0);
    rep.spectral_radius = std::max(std::abs(sd.eigenvalues.front()),
                                   std::abs(sd.eigenvalues.back()));
    rep.min_eigenvalue = sd.eigenvalues.front();
    for (size_t c = 0; c < C; c++)
      rep.coeff[c] = kernel_fourier_coefficient(sd, static_cast<long>(c));
    DeterminantReport dr = determinant_report(b.r, sd, bounds);
    rep.lndet = dr.lndet;
    rep.lndet_dev_re = dr.lndet_dev_re;
    rep.lndet_dev_im = dr.lndet_dev_im;
    rep.kernel_dim_exact_value = dr.kernel_dim_exact_value;
    if (cfg.checks.kappa)
      rep.kappa_ok =
          rep.spectral_radius <= kappa_value + cfg.tol.kappa_slack * (1 + kappa_value);
    if (cfg.checks.bounds && b.r.hermitian) {
      double s0 = cfg.tol.bound_slack * (1 + std::abs(bounds.b0));
      rep.bounds_ok = rep.lndet >= bounds.b0 - s0;
      if (cfg.checks.deviated_bounds) {
        double s1 = cfg.tol.bound_slack * (1 + std::abs(bounds.b1));
        for (size_t c = 0; c < C; c++)
          rep.bounds_ok = rep.bounds_ok && rep.lndet_dev_re[c] >= bounds.b1 - s1 &&
                          rep.lndet_dev_im[c] >= bounds.b1 - s1;
      }
      // the lower bounds assume a positive operator; surface violations of
      // that assumption instead of blaming the bound
      if (rep.min_eigenvalue < -10 * tau) rep.bounds_ok = false;
    }
    if (mode == "density" || mode == "converge") {
      DensityFunction f = density_function(sd, DensityKind::Standard);
      std::vector<DensityFunction> fre, fim;
      for (size_t c = 0; c < C; c++) {
        fre.push_back(density_function(sd, DensityKind::DelocRe, static_cast<long>(c)));
        fim.push_back(density_function(sd, DensityKind::DelocIm, static_cast<long>(c)));
      }
      for (size_t k = 0; k < f.jumps.size(); k++) {
        std::string row = "stage," + std::to_string(b.size) + "," +
                          format_float(f.jumps[k]) + "," +
                          format_float(f.cumulative[k].real());
        for (size_t c = 0; c < C; c++) {
          row += "," + format_float(fre[c].at(f.jumps[k]).real());
          row += "," + format_float(fim[c].at(f.jumps[k]).real());
        }
        rep.density_rows.push_back(std::move(row));
      }
    }
    if (cfg.checks.telescope && b.fs && !b.classes.empty())
      rep.telescope = telescope_check(cfg.A(), b.r, *b.fs, cfg.checks.telescope_power,
                                      b.classes[0], DeviatedPart::Re);
  }

  if (want_exact) {
    ExactKernelProjection proj(b.r);
    for (size_t c = 0; c < C; c++) {
      Cyclotomic v = proj.fourier_coefficient(b.classes[c]);
      rep.coeff_exact[c] = v.str();
      if (!rep.has_spectral) rep.coeff[c] = v.to_complex();
    }
    if (b.r.kind == RealizationKind::FolnerCompression) {
      Cyclotomic mass = proj.kernel_mass();
      if (mass.is_rational()) rep.F0_exact = mass.rational_part();
    } else {
      rep.F0_exact = kernel_dim_exact(b.r);
    }
    if (!rep.has_spectral && rep.F0_exact) rep.F0 = to_double(*rep.F0_exact);
  }
  return rep;
}

void run_sofic_stages(const ExperimentConfig& cfg, ExperimentResult& res,
                      const DetBoundRhs& bounds, double tau) {
  std::vector<SoficParams> params;
  if (cfg.sofic_family == "file") {
    for (const auto& p : cfg.sofic_paths)
      params.push_back({"file", 0, cfg.sofic_radius, p});
  } else {
    for (long n : cfg.stages)
      params.push_back({cfg.sofic_family, n, cfg.sofic_radius, ""});
  }
  auto job = [&](long idx) {
    LabeledGraph gr = build_sofic_stage(cfg.group, params[idx]);
    SoficKernel K = sofic_kernel(cfg.A(), gr);
    SoficDetStar d = det_star(K, cfg.tol.tau);
    StageReport rep;
    rep.stage_index = idx;
    rep.size = gr.num_vertices;
    rep.dim = K.dim;
    rep.lndet = d.log_value * to_double(K.normalization);
    rep.kernel_count = d.kernel_dim;
    rep.F0 = static_cast<double>(d.kernel_dim) / static_cast<double>(gr.num_vertices);
    if (d.certificate) {
      rep.certified = true;
      std::ostringstream os;
      os << *d.certificate;
      rep.certificate = os.str();
    }
    if (cfg.checks.bounds) {
      double s0 = cfg.tol.bound_slack * (1 + std::abs(bounds.b0));
      rep.bounds_ok = rep.lndet >= bounds.b0 - s0;
    }
    return rep;
  };
  (void)tau;
  if (cfg.reproducible || params.size() < 2) {
    for (long i = 0; i < static_cast<long>(params.size()); i++)
      res.stages.push_back(job(i));
  } else {
    std::vector<std::future<StageReport>> futs;
    for (long i = 0; i < static_cast<long>(params.size()); i++)
      futs.push_back(std::async(std::launch::async, job, i));
    for (auto& f : futs) res.stages.push_back(f.get());
  }
}

void run_oracle_part(const ExperimentConfig& cfg, ExperimentResult& res,
                     const std::string& mode) {
  if (!cfg.use_oracle && mode != "oracle") {
    res.oracle_note = "disabled in the configuration";
    return;
  }
  long grid = cfg.grid;
  if (grid <= 0) {
    long top = 0;
    for (long n : cfg.stages) top = std::max(top, n);
    grid = top > 0 ? 2 * top : 256;
  }
  grid = std::max<long>(grid, 4);
  const RingMatrix<Cyclotomic>& A = cfg.A();
  try {
    build_symbol(A);
  } catch (const std::invalid_argument& e) {
    if (mode == "oracle") throw;
    res.oracle_note = e.what();
    return;
  }
  res.oracle_ran = true;
  res.oracle_grid = grid;
  res.oracle_lndet_value = oracle_lndet(A, grid);
  res.oracle_F0 = oracle_density(A, 0.0, grid).value;
  for (const auto& cls : cfg.tracked_classes) {
    OracleCoefficient acc;
    std::complex<double> sum = 0;
    for (const auto& h : cls.elements) {
      OracleCoefficient oc = oracle_kernel_coefficient(A, h, grid);
      sum += oc.value;
      acc.error = std::max(acc.error, oc.error);
      acc.separated = acc.separated && oc.separated;
      acc.tau = oc.tau;
    }
    acc.value = sum / static_cast<double>(cls.size());
    res.oracle_coeffs.push_back(acc);
  }
}

// ---- tables ----

std::string csv_header_densities(const ExperimentResult& res) {
  std::string h = "source,size,lambda,F";
  for (const auto& w : res.tracked_words) h += ",Fre[" + w + "],Fim[" + w + "]";
  return h + "\n";
}

void assemble_densities(const ExperimentConfig& cfg, ExperimentResult& res) {
  std::string out = csv_header_densities(res);
  size_t rows = 0;
  for (const auto& st : res.stages)
    for (const auto& row : st.density_rows) {
      out += row;
      out += "\n";
      rows++;
    }
  if (res.oracle_ran) {
    std::vector<double> eigs = oracle_eigenvalue_multiset(cfg.A(), res.oracle_grid);
    const double total = static_cast<double>(eigs.size());
    const int d = cfg.A().dim();
    std::string tail;
    for (const auto& w : res.tracked_words) {
      (void)w;
      tail += ",,";
    }
    size_t k = 0;
    while (k < eigs.size()) {
      size_t j = k;
      while (j < eigs.size() && eigs[j] == eigs[k]) j++;
      out += "oracle," + std::to_string(res.oracle_grid) + "," +
             format_float(eigs[k]) + "," +
             format_float(static_cast<double>(d) * static_cast<double>(j) / total) +
             tail + "\n";
      k = j;
      rows++;
    }
  }
  if (rows > 0) res.densities_csv = std::move(out);
}

void assemble_convergence(ExperimentResult& res) {
  std::string out = "i,size,F0,F0_exact";
  for (const auto& w : res.tracked_words)
    out += ",coeff_re[" + w + "],coeff_im[" + w + "],coeff_exact[" + w + "],delta[" +
           w + "]";
  out += ",lndet\n";
  for (const auto& st : res.stages) {
    out += std::to_string(st.stage_index) + "," + std::to_string(st.size) + "," +
           format_float(st.F0) + "," +
           (st.F0_exact ? format_rational(*st.F0_exact) : "");
    for (size_t c = 0; c < res.tracked_words.size(); c++) {
      out += "," + format_float(st.coeff[c].real()) + "," +
             format_float(st.coeff[c].imag()) + "," + st.coeff_exact[c] + ",";
      if (c < st.delta.size()) out += format_float(st.delta[c]);
    }
    out += ",";
    if (st.has_spectral) out += format_float(st.lndet);
    out += "\n";
  }
  if (res.oracle_ran) {
    out += "-1," + std::to_string(res.oracle_grid) + "," +
           format_float(*res.oracle_F0) + ",";
    for (const auto& oc : res.oracle_coeffs)
      out += "," + format_float(oc.value.real()) + "," +
             format_float(oc.value.imag()) + ",," + format_float(oc.error);
    out += "," + format_float(res.oracle_lndet_value->value) + "\n";
  }
  res.convergence_csv = std::move(out);
}

void assemble_determinants(ExperimentResult& res, const DetBoundRhs& bounds) {
  if (res.mode == "sofic") {
    std::string out = "i,vertices,lndet,kernel_dim,certified,certificate\n";
    for (const auto& st : res.stages)
      out += std::to_string(st.stage_index) + "," + std::to_string(st.size) + "," +
             format_float(st.lndet) + "," + std::to_string(st.kernel_count) + "," +
             (st.certified ? "1" : "0") + "," + st.certificate + "\n";
    res.determinants_csv = std::move(out);
    return;
  }
  std::string out = "i,size,lndet,kernel_dim,kernel_dim_exact,b0,b1";
  for (const auto& w : res.tracked_words) out += ",dev_re[" + w + "],dev_im[" + w + "]";
  out += "\n";
  for (const auto& st : res.stages) {
    if (!st.has_spectral) continue;
    out += std::to_string(st.stage_index) + "," + std::to_string(st.size) + "," +
           format_float(st.lndet) + "," + format_float(st.F0) + "," +
           (st.kernel_dim_exact_value ? format_rational(*st.kernel_dim_exact_value)
                                      : "") +
           "," + format_float(bounds.b0) + "," + format_float(bounds.b1);
    for (size_t c = 0; c < res.tracked_words.size(); c++)
      out += "," + format_float(st.lndet_dev_re[c]) + "," +
             format_float(st.lndet_dev_im[c]);
    out += "\n";
  }
  res.determinants_csv = std::move(out);
}

void assemble_report(const ExperimentConfig& cfg, ExperimentResult& res,
                     const DetBoundRhs& bounds, double tau) {
  std::ostringstream os;
  os << "mode " << res.mode << "\n";
  os << "group " << cfg.group->name() << "\n";
  os << "operator " << cfg.A().dim() << " x " << cfg.A().dim()
     << (is_hermitian(cfg.A()) ? ", hermitian" : ", not hermitian") << ", conductor "
     << field_conductor(cfg.A()) << "\n";
  os << "kappa " << format_float(res.kappa_value) << "\n";
  os << "tau " << format_float(tau) << "\n";
  os << "b0 " << format_float(bounds.b0) << "\nb1 " << format_float(bounds.b1) << "\n";
  os << "tracked";
  if (res.tracked_words.empty()) os << " (none)";
  for (size_t c = 0; c < res.tracked_words.size(); c++)
    os << (c ? "; " : " ") << res.tracked_words[c] << " class size "
       << res.class_sizes[c];
  os << "\n";
  if (res.mode != "oracle") {
    os << "scheme " << scheme_name(cfg.scheme);
    if (cfg.scheme == SchemeKind::Sofic)
      os << " family " << cfg.sofic_family << " radius " << cfg.sofic_radius;
    if (!cfg.stages.empty()) {
      os << ", stages";
      for (long n : cfg.stages) os << " " << n;
    }
    os << "\n";
  }

  if (res.oracle_ran) {
    os << "oracle grid " << res.oracle_grid << "\n";
    os << "oracle coefficients {";
    for (size_t c = 0; c < res.tracked_words.size(); c++)
      os << (c ? ", " : "") << res.tracked_words[c] << ": "
         << format_complex(res.oracle_coeffs[c].value);
    os << "}\n";
    os << "oracle F0 " << format_float(*res.oracle_F0) << "\n";
    os << "oracle lndet " << format_float(res.oracle_lndet_value->value) << " error "
       << format_float(res.oracle_lndet_value->error) << " excluded "
       << format_float(res.oracle_lndet_value->excluded) << "\n";
  } else {
    os << "oracle skipped: " << res.oracle_note << "\n";
  }

  for (const auto& st : res.stages) {
    os << "stage " << st.stage_index << " size " << st.size << " dim " << st.dim;
    if (res.mode == "sofic") {
      os << " lndet " << format_float(st.lndet) << " kernel_dim " << st.kernel_count;
      if (st.certified)
        os << " certificate " << st.certificate;
      else
        os << " uncertified";
      os << "\n";
      if (cfg.checks.bounds)
        os << "  lndet >= " << format_float(bounds.b0) << ": "
           << (st.bounds_ok ? "PASS" : "FAIL") << "\n";
      continue;
    }
    os << " F0 " << format_float(st.F0);
    if (st.F0_exact) os << " exact " << format_rational(*st.F0_exact);
    if (st.has_spectral) os << " lndet " << format_float(st.lndet);
    os << "\n";
    for (size_t c = 0; c < res.tracked_words.size(); c++) {
      os << "  coeff[" << res.tracked_words[c] << "] " << format_complex(st.coeff[c]);
      if (!st.coeff_exact[c].empty()) os << " exact " << st.coeff_exact[c];
      if (c < st.delta.size()) os << " delta " << format_float(st.delta[c]);
      os << "\n";
    }
    if (res.mode == "detbound" && st.has_spectral && cfg.checks.bounds) {
      os << "  lndet >= " << format_float(bounds.b0) << ": "
         << (st.lndet >= bounds.b0 - cfg.tol.bound_slack * (1 + std::abs(bounds.b0))
                 ? "PASS"
                 : "FAIL")
         << "\n";
      if (cfg.checks.deviated_bounds && !res.tracked_words.empty()) {
        double mindev = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < res.tracked_words.size(); c++)
          mindev = std::min({mindev, st.lndet_dev_re[c], st.lndet_dev_im[c]});
        os << "  deviated >= " << format_float(bounds.b1) << ": "
           << (mindev >= bounds.b1 - cfg.tol.bound_slack * (1 + std::abs(bounds.b1))
                   ? "PASS"
                   : "FAIL")
           << "\n";
      }
    }
    if (st.telescope) {
      const TelescopeReport& t = *st.telescope;
      os << "  telescope power " << t.power << " deviation " << format_float(t.lhs)
         << " bound " << format_float(t.rhs) << ": " << (t.ok ? "PASS" : "FAIL")
         << "\n";
    }
  }

  auto check_line = [&](const char* name, bool enabled, bool ok) {
    os << "check " << name << " ";
    if (!enabled)
      os << "skipped";
    else
      os << (ok ? "PASS" : "FAIL");
    os << "\n";
  };
  if (res.mode != "oracle") {
    bool kappa_all = true, bounds_all = true, delta_all = true, tel_all = true;
    bool any_spectral = false, any_tel = false;
    for (const auto& st : res.stages) {
      kappa_all = kappa_all && st.kappa_ok;
      bounds_all = bounds_all && st.bounds_ok;
      delta_all = delta_all && st.delta_ok;
      any_spectral = any_spectral || st.has_spectral;
      if (st.telescope) {
        any_tel = true;
        tel_all = tel_all && st.telescope->ok;
      }
    }
    check_line("kappa", cfg.checks.kappa && any_spectral, kappa_all);
    check_line("bounds", cfg.checks.bounds && (any_spectral || res.mode == "sofic"),
               bounds_all);
    check_line("delta", cfg.tol.delta_scale >= 0 && res.oracle_ran, delta_all);
    check_line("telescope", any_tel, tel_all);
  }
  for (const auto& f : res.failures) os << "FAIL " << f << "\n";
  os << "overall " << (res.ok ? "PASS" : "FAIL") << "\n";
  res.report_text = os.str();
}

}  // namespace

GroupPtr group_from_json(const nlohmann::json& j) { return parse_group(j); }

std::string format_float(double v) {
  if (v == 0) v = 0;  // never print -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_complex(const std::complex<double>& z) {
  if (std::abs(z.imag()) <= 1e-12 * (1 + std::abs(z.real())))
    return format_float(z.real());
  return format_float(z.real()) + (z.imag() < 0 ? "-" : "+") +
         format_float(std::abs(z.imag())) + "i";
}

void ExperimentConfig::set_track(const std::vector<std::string>& words) {
  track = words;
  if (track.empty()) track = {"e"};
  tracked_classes = resolve_classes(group, track);
  if (scheme == SchemeKind::Folner) {
    for (size_t c = 0; c < tracked_classes.size(); c++)
      for (const auto& h : tracked_classes[c].elements)
        if (!finite_direction_only(group, h))
          throw std::invalid_argument(
              "tracked word '" + track[c] +
              "' moves along the amenable direction; compression stages translate "
              "the window and only classes inside the finite factor have exact "
              "window traces");
  }
}

void ExperimentConfig::set_stages(const std::vector<long>& list) {
  stages = list;
  if (scheme == SchemeKind::Sofic && sofic_family == "file") {
    if (!stages.empty())
      config_error("scheme.sofic", "family 'file' takes 'paths', not sizes");
    return;
  }
  if (stages.empty()) config_error("scheme", "stage list must not be empty");
  for (long n : stages)
    if (n < 1) config_error("scheme", "stage sizes must be positive");
  for (size_t i = 0; i + 1 < stages.size(); i++)
    if (stages[i] >= stages[i + 1])
      config_error("scheme", "stage sizes must be strictly increasing");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) config_error("document", "expected a JSON object");
  require_keys(doc, "document", {"group", "matrix", "scheme"},
               {"track", "oracle", "grid", "path", "out", "reproducible",
                "tolerances", "checks", "seed"});
  ExperimentConfig cfg;
  cfg.group = parse_group(doc.at("group"));
  try {
    cfg.matrix = parse_matrix(doc.at("matrix"), cfg.group);
  } catch (const std::invalid_argument& e) {
    config_error("matrix", e.what());
  }
  parse_scheme(doc.at("scheme"), cfg);
  if (doc.contains("track")) cfg.track = get_string_list(doc.at("track"), "track");
  if (doc.contains("oracle")) cfg.use_oracle = get_bool(doc.at("oracle"), "oracle");
  if (doc.contains("grid")) {
    cfg.grid = get_long(doc.at("grid"), "grid");
    if (cfg.grid < 0) config_error("grid", "grid size must be nonnegative");
  }
  if (doc.contains("path")) {
    std::string p = get_string(doc.at("path"), "path");
    if (p == "float")
      cfg.path = PathMode::Float;
    else if (p == "exact")
      cfg.path = PathMode::Exact;
    else if (p == "both")
      cfg.path = PathMode::Both;
    else
      config_error("path", "expected float, exact, or both");
  }
  if (doc.contains("out")) cfg.out_dir = get_string(doc.at("out"), "out");
  if (doc.contains("reproducible"))
    cfg.reproducible = get_bool(doc.at("reproducible"), "reproducible");
  if (doc.contains("seed"))
    cfg.seed = static_cast<unsigned long long>(get_long(doc.at("seed"), "seed"));
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    require_keys(t, "tolerances", {},
                 {"tau", "kappa_slack", "bound_slack", "delta_scale"});
    if (t.contains("tau")) cfg.tol.tau = get_num(t.at("tau"), "tolerances.tau");
    if (t.contains("kappa_slack"))
      cfg.tol.kappa_slack = get_num(t.at("kappa_slack"), "tolerances.kappa_slack");
    if (t.contains("bound_slack"))
      cfg.tol.bound_slack = get_num(t.at("bound_slack"), "tolerances.bound_slack");
    if (t.contains("delta_scale"))
      cfg.tol.delta_scale = get_num(t.at("delta_scale"), "tolerances.delta_scale");
  }
  if (doc.contains("checks")) {
    const json& c = doc.at("checks");
    require_keys(c, "checks", {},
                 {"kappa", "bounds", "deviated_bounds", "telescope",
                  "telescope_power"});
    if (c.contains("kappa")) cfg.checks.kappa = get_bool(c.at("kappa"), "checks.kappa");
    if (c.contains("bounds"))
      cfg.checks.bounds = get_bool(c.at("bounds"), "checks.bounds");
    if (c.contains("deviated_bounds"))
      cfg.checks.deviated_bounds =
          get_bool(c.at("deviated_bounds"), "checks.deviated_bounds");
    if (c.contains("telescope"))
      cfg.checks.telescope = get_bool(c.at("telescope"), "checks.telescope");
    if (c.contains("telescope_power")) {
      cfg.checks.telescope_power =
          get_long(c.at("telescope_power"), "checks.telescope_power");
      if (cfg.checks.telescope_power < 1)
        config_error("checks.telescope_power", "power must be at least 1");
    }
  }
  cfg.set_stages(cfg.stages);
  cfg.set_track(cfg.track);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  return from_json(doc);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& mode) {
  if (mode != "density" && mode != "converge" && mode != "detbound" &&
      mode != "sofic" && mode != "oracle")
    throw std::invalid_argument("unknown mode " + mode);
  if (!cfg.matrix) throw std::invalid_argument("configuration has no matrix");
  if (mode == "sofic" && cfg.scheme != SchemeKind::Sofic)
    throw std::invalid_argument("the sofic command needs a sofic scheme");
  if (mode != "sofic" && mode != "oracle" && cfg.scheme == SchemeKind::Sofic)
    throw std::invalid_argument(
        "sofic stages carry no translate structure for trace tables; run the "
        "sofic command on this configuration");
  if (cfg.reproducible) {
    // keep the dense eigensolver single threaded so reruns are bitwise equal
    setenv("OPENBLAS_NUM_THREADS", "1", 1);
  }

  ExperimentResult res;
  res.mode = mode;
  const RingMatrix<Cyclotomic>& A = cfg.A();
  res.kappa_value = kappa(A).kappa;
  res.bounds = determinant_lower_bound_rhs(A);
  const double tau = cfg.tol.tau >= 0 ? cfg.tol.tau : default_tau(A);
  for (const auto& cls : cfg.tracked_classes) {
    res.tracked_words.push_back(cfg.group->format(cls.representative));
    res.class_sizes.push_back(cls.size());
  }

  run_oracle_part(cfg, res, mode);

  if (mode == "sofic") {
    run_sofic_stages(cfg, res, res.bounds, tau);
  } else if (mode != "oracle") {
    const long S = static_cast<long>(cfg.stages.size());
    if (cfg.reproducible || S < 2) {
      for (long i = 0; i < S; i++)
        res.stages.push_back(compute_stage(cfg, mode, i, res.bounds, res.kappa_value, tau));
    } else {
      std::vector<std::future<StageReport>> futs;
      for (long i = 0; i < S; i++)
        futs.push_back(std::async(std::launch::async, compute_stage, std::cref(cfg),
                                  std::cref(mode), i, std::cref(res.bounds),
                                  res.kappa_value, tau));
      for (auto& f : futs) res.stages.push_back(f.get());
    }
    if (res.oracle_ran) {
      for (auto& st : res.stages) {
        st.delta.resize(res.oracle_coeffs.size());
        for (size_t c = 0; c < res.oracle_coeffs.size(); c++) {
          st.delta[c] = std::abs(st.coeff[c] - res.oracle_coeffs[c].value);
          if (cfg.tol.delta_scale >= 0) {
            double limit = cfg.tol.delta_scale / static_cast<double>(st.size) +
                           res.oracle_coeffs[c].error + 1e-12;
            if (st.delta[c] > limit) st.delta_ok = false;
          }
        }
      }
    }
  }

  for (const auto& st : res.stages) {
    std::string tag = "stage " + std::to_string(st.stage_index) + " (size " +
                      std::to_string(st.size) + ")";
    if (!st.kappa_ok)
      res.failures.push_back(tag + ": spectral radius " +
                             format_float(st.spectral_radius) + " exceeds kappa " +
                             format_float(res.kappa_value));
    if (!st.bounds_ok)
      res.failures.push_back(tag + ": determinant below its lower bound (lndet " +
                             format_float(st.lndet) + ", b0 " +
                             format_float(res.bounds.b0) + ", b1 " +
                             format_float(res.bounds.b1) + ")");
    if (!st.delta_ok)
      res.failures.push_back(tag + ": kernel coefficient drifts from the oracle by "
                                   "more than " +
                             format_float(cfg.tol.delta_scale) + "/size");
    if (st.telescope && !st.telescope->ok)
      res.failures.push_back(tag + ": power trace deviation " +
                             format_float(st.telescope->lhs) +
                             " exceeds the window bound " +
                             format_float(st.telescope->rhs));
  }
  res.ok = res.failures.empty();

  if (mode == "density" || mode == "converge" || mode == "oracle")
    assemble_densities(cfg, res);
  if (mode == "converge") assemble_convergence(res);
  if (mode == "detbound" || mode == "sofic") assemble_determinants(res, res.bounds);
  assemble_report(cfg, res, res.bounds, tau);
  return res;
}

void write_experiment_outputs(const ExperimentResult& res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec && !fs::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory " + out_dir);
  auto put = [&](const char* name, const std::string& content) {
    if (content.empty()) return;
    fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
  };
  put("densities.csv", res.densities_csv);
  put("convergence.csv", res.convergence_csv);
  put("determinants.csv", res.determinants_csv);
  put("report.txt", res.report_text);
}

}  // namespace specdens
