#include "specdens/spectral.hpp"

#include <lapacke.h>

#include "specdens/oracle_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace specdens {

namespace {

constexpr double kAtomRelGap = 1e-8;

lapack_int checked_int(long n) {
  if (n <= 0 || n > std::numeric_limits<lapack_int>::max())
    throw std::invalid_argument("realization dimension out of range");
  return static_cast<lapack_int>(n);
}

void require_tracked(const SpectralData& sd, long cls) {
  if (cls < 0 || cls >= static_cast<long>(sd.tracked.size()))
    throw std::invalid_argument("tracked class index out of range");
}

double kind_weight(const SpectralData& sd, DensityKind kind, long cls, long j) {
  double s = sd.weights_standard[j];
  if (kind == DensityKind::Standard) return s;
  const auto& raw = sd.weights_deloc[cls][j];
  double m = static_cast<double>(sd.tracked[cls].size());
  if (kind == DensityKind::DelocRe) return s + raw.real() / m;
  if (kind == DensityKind::DelocIm) return s + raw.imag() / m;
  throw std::invalid_argument("unknown density kind");
}

}  // namespace

EighResult eigh(const FiniteRealization& r) {
  if (!r.hermitian)
    throw std::invalid_argument("eigh needs a Hermitian realization");
  lapack_int n = checked_int(r.dim);
  EighResult out;
  out.eigenvalues.resize(r.dim);

  if (r.all_real) {
    std::vector<double> a(static_cast<size_t>(r.dim) * r.dim, 0.0);
    for (const auto& t : r.entries)
      a[static_cast<size_t>(t.col) * r.dim + t.row] += t.value.real();
    double scale = 0, asym = 0;
    for (long i = 0; i < r.dim; i++)
      for (long j = 0; j <= i; j++) {
        double lo = a[static_cast<size_t>(j) * r.dim + i];
        double up = a[static_cast<size_t>(i) * r.dim + j];
        scale = std::max(scale, std::abs(lo));
        asym = std::max(asym, std::abs(lo - up));
      }
    if (asym > 1e-12 * (1 + scale))
      throw std::invalid_argument("realization matrix is not symmetric");
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n,
                                     out.eigenvalues.data());
    if (info != 0)
      throw std::runtime_error("dsyevd failed, info " + std::to_string(info));
    out.vectors = Eigen::Map<Eigen::MatrixXd>(a.data(), r.dim, r.dim)
                      .cast<std::complex<double>>();
  } else {
    std::vector<std::complex<double>> a(static_cast<size_t>(r.dim) * r.dim);
    for (const auto& t : r.entries)
      a[static_cast<size_t>(t.col) * r.dim + t.row] += t.value;
    double scale = 0, asym = 0;
    for (long i = 0; i < r.dim; i++)
      for (long j = 0; j <= i; j++) {
        auto lo = a[static_cast<size_t>(j) * r.dim + i];
        auto up = a[static_cast<size_t>(i) * r.dim + j];
        scale = std::max(scale, std::abs(lo));
        asym = std::max(asym, std::abs(lo - std::conj(up)));
      }
    if (asym > 1e-12 * (1 + scale))
      throw std::invalid_argument("realization matrix is not Hermitian");
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n,
                                     out.eigenvalues.data());
    if (info != 0)
      throw std::runtime_error("zheevd failed, info " + std::to_string(info));
    out.vectors = Eigen::Map<Eigen::MatrixXcd>(a.data(), r.dim, r.dim);
  }

  // residual against the sparse entries, not the dense copy LAPACK consumed
  Eigen::MatrixXcd HV = Eigen::MatrixXcd::Zero(r.dim, r.dim);
  for (const auto& t : r.entries)
    HV.row(t.row) += t.value * out.vectors.row(t.col);
  double lmax = 0;
  for (double v : out.eigenvalues) lmax = std::max(lmax, std::abs(v));
  for (long j = 0; j < r.dim; j++) {
    double res = (HV.col(j) - out.eigenvalues[j] * out.vectors.col(j)).norm();
    out.residual = std::max(out.residual, res);
  }
  if (out.residual > 1e-10 * (1 + lmax))
    throw std::runtime_error("eigendecomposition residual out of bounds");
  return out;
}

SpectralData spectral_data(const FiniteRealization& r,
                           const std::vector<ConjugacyClassInfo>& tracked,
                           double tau) {
  return spectral_data(r, eigh(r), tracked, tau);
}

SpectralData spectral_data(const FiniteRealization& r, const EighResult& eg,
                           const std::vector<ConjugacyClassInfo>& tracked,
                           double tau) {
  if (static_cast<long>(eg.eigenvalues.size()) != r.dim)
    throw std::invalid_argument("eigendecomposition does not match realization");
  SpectralData sd;
  sd.stage_group = r.stage_group;
  sd.stage_index = r.stage_index;
  sd.eigenvalues = eg.eigenvalues;
  sd.tracked = tracked;
  sd.normalization = r.normalization;
  sd.block_dim = r.block_dim;
  sd.tau = tau;

  double norm = to_double(r.normalization);
  const Eigen::MatrixXcd& V = eg.vectors;

  Eigen::ArrayXd std_acc = Eigen::ArrayXd::Zero(r.dim);
  for (long t : r.trace_indices) std_acc += V.row(t).array().abs2();
  std_acc *= norm;
  sd.weights_standard.assign(std_acc.data(), std_acc.data() + r.dim);

  for (const auto& cls : tracked) {
    if (cls.status != ClassStatus::Finite)
      throw std::invalid_argument("tracked class must be finite");
    Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(r.dim);
    for (long t : r.trace_indices)
      for (const auto& h : cls.elements) {
        long u = r.translate(t, h);
        if (u < 0) continue;  // translate leaves a compression window
        acc += V.row(u).array() * V.row(t).array().conjugate();
      }
    acc *= norm;
    sd.weights_deloc.emplace_back(acc.data(), acc.data() + r.dim);
  }

  for (long j = 0; j < r.dim; j++) {
    if (j == 0 || sd.eigenvalues[j] - sd.eigenvalues[j - 1] >
                      kAtomRelGap * std::max(1.0, std::abs(sd.eigenvalues[j])))
      sd.atoms.emplace_back(j, j + 1);
    else
      sd.atoms.back().second = j + 1;
  }

  // basis completeness: total standard mass is the trace of the identity
  double total = std_acc.sum();
  if (std::abs(total - r.block_dim) > 1e-7 * (1 + r.block_dim))
    throw std::runtime_error("standard weights do not sum to the block dimension");
  for (size_t c = 0; c < sd.tracked.size(); c++) {
    std::complex<double> sum = 0;
    for (const auto& w : sd.weights_deloc[c]) sum += w;
    bool is_e = sd.tracked[c].size() == 1 &&
                r.stage_group->is_identity(sd.tracked[c].representative);
    std::complex<double> want = is_e ? std::complex<double>(r.block_dim, 0) : 0.0;
    if (std::abs(sum - want) > 1e-7 * (1 + r.block_dim))
      throw std::runtime_error("delocalized weights do not sum to the identity trace");
  }
  return sd;
}

std::vector<AtomWeights> atom_weights(const SpectralData& sd) {
  std::vector<AtomWeights> out;
  out.reserve(sd.atoms.size());
  for (const auto& [lo, hi] : sd.atoms) {
    AtomWeights a;
    a.lambda = sd.eigenvalues[lo];
    a.raw.assign(sd.tracked.size(), 0.0);
    for (long j = lo; j < hi; j++) {
      a.standard += sd.weights_standard[j];
      for (size_t c = 0; c < sd.tracked.size(); c++)
        a.raw[c] += sd.weights_deloc[c][j];
    }
    out.push_back(std::move(a));
  }
  return out;
}

AtomCheck atom_invariants(const SpectralData& sd) {
  AtomCheck r;
  r.min_deviated = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& a : atom_weights(sd))
    for (size_t c = 0; c < sd.tracked.size(); c++) {
      double m = static_cast<double>(sd.tracked[c].size());
      r.domination_excess =
          std::max(r.domination_excess, std::abs(a.raw[c]) - m * a.standard);
      r.min_deviated = std::min({r.min_deviated, a.standard + a.raw[c].real() / m,
                                 a.standard + a.raw[c].imag() / m});
      any = true;
    }
  if (!any) r.min_deviated = 0.0;
  return r;
}

std::complex<double> density_value(const SpectralData& sd, DensityKind kind,
                                   double lambda, long cls) {
  if (kind != DensityKind::Standard) require_tracked(sd, cls);
  double s = 0;
  std::complex<double> raw = 0;
  for (size_t j = 0; j < sd.eigenvalues.size(); j++) {
    if (sd.eigenvalues[j] > lambda + sd.tau) break;
    s += sd.weights_standard[j];
    if (kind != DensityKind::Standard) raw += sd.weights_deloc[cls][j];
  }
  switch (kind) {
    case DensityKind::Standard: return s;
    case DensityKind::DelocRe: return s + raw.real() / static_cast<double>(sd.tracked[cls].size());
    case DensityKind::DelocIm: return s + raw.imag() / static_cast<double>(sd.tracked[cls].size());
    case DensityKind::DelocRaw: return raw;
  }
  throw std::invalid_argument("unknown density kind");
}

double density(const SpectralData& sd, DensityKind kind, double lambda, long cls) {
  if (kind == DensityKind::DelocRaw)
    throw std::invalid_argument("raw delocalized density is complex; use density_value");
  return density_value(sd, kind, lambda, cls).real();
}

std::complex<double> DensityFunction::at(double lambda) const {
  std::complex<double> v = 0;
  for (size_t k = 0; k < jumps.size(); k++) {
    if (jumps[k] > lambda + tau) break;
    v = cumulative[k];
  }
  return v;
}

DensityFunction density_function(const SpectralData& sd, DensityKind kind,
                                 long cls) {
  if (kind != DensityKind::Standard) require_tracked(sd, cls);
  DensityFunction f;
  f.kind = kind;
  f.cls = cls;
  f.tau = sd.tau;
  double s = 0;
  std::complex<double> raw = 0;
  for (const auto& [lo, hi] : sd.atoms) {
    for (long j = lo; j < hi; j++) {
      s += sd.weights_standard[j];
      if (kind != DensityKind::Standard) raw += sd.weights_deloc[cls][j];
    }
    f.jumps.push_back(sd.eigenvalues[lo]);
    switch (kind) {
      case DensityKind::Standard: f.cumulative.push_back(s); break;
      case DensityKind::DelocRe:
        f.cumulative.push_back(s + raw.real() / static_cast<double>(sd.tracked[cls].size()));
        break;
      case DensityKind::DelocIm:
        f.cumulative.push_back(s + raw.imag() / static_cast<double>(sd.tracked[cls].size()));
        break;
      case DensityKind::DelocRaw: f.cumulative.push_back(raw); break;
    }
  }
  return f;
}

std::string density_csv(const SpectralData& sd) {
  std::ostringstream os;
  os << "lambda,F";
  for (const auto& cls : sd.tracked) {
    std::string g = sd.stage_group->format(cls.representative);
    os << ",Fre[" << g << "],Fim[" << g << "]";
  }
  os << "\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
  };
  double s = 0;
  std::vector<std::complex<double>> raw(sd.tracked.size(), 0.0);
  for (const auto& [lo, hi] : sd.atoms) {
    for (long j = lo; j < hi; j++) {
      s += sd.weights_standard[j];
      for (size_t c = 0; c < sd.tracked.size(); c++)
        raw[c] += sd.weights_deloc[c][j];
    }
    put(sd.eigenvalues[lo]);
    os << ",";
    put(s);
    for (size_t c = 0; c < sd.tracked.size(); c++) {
      double m = static_cast<double>(sd.tracked[c].size());
      os << ",";
      put(s + raw[c].real() / m);
      os << ",";
      put(s + raw[c].imag() / m);
    }
    os << "\n";
  }
  return os.str();
}

double fuglede_kadison(const SpectralData& sd, DensityKind kind, long cls) {
  if (kind == DensityKind::DelocRaw)
    throw std::invalid_argument("determinant kinds are standard or deviated");
  if (kind != DensityKind::Standard) require_tracked(sd, cls);
  double acc = 0;
  bool any = false;
  for (size_t j = 0; j < sd.eigenvalues.size(); j++) {
    if (sd.eigenvalues[j] <= sd.tau) continue;
    any = true;
    acc += kind_weight(sd, kind, cls, static_cast<long>(j)) *
           std::log(sd.eigenvalues[j]);
  }
  if (!any) return -std::numeric_limits<double>::infinity();
  return acc;
}

Rational kernel_dim_exact(const FiniteRealization& r) {
  if (!r.has_exact)
    throw std::invalid_argument("exact copy absent");
  if (r.kind != RealizationKind::FolnerCompression) {
    SparseEliminator elim(r.dim);
    for (const auto& t : r.exact_entries) elim.add(t.row, t.col, t.value);
    elim.factorize();
    return Rational(elim.nullity(), r.stage_group->order());
  }
  ExactKernelProjection proj(r);
  Cyclotomic mass = proj.kernel_mass();
  if (!mass.is_rational())
    throw std::runtime_error("compression kernel mass is not rational");
  return mass.rational_part();
}

std::complex<double> kernel_fourier_coefficient(const SpectralData& sd, long cls) {
  require_tracked(sd, cls);
  std::complex<double> raw = 0;
  for (size_t j = 0; j < sd.eigenvalues.size(); j++) {
    if (sd.eigenvalues[j] > sd.tau) break;
    raw += sd.weights_deloc[cls][j];
  }
  return raw / static_cast<double>(sd.tracked[cls].size());
}

ExactKernelProjection::ExactKernelProjection(const FiniteRealization& r) : r_(r) {
  if (!r.has_exact)
    throw std::invalid_argument("exact kernel projection needs exact entries");
  if (!r.hermitian)
    throw std::invalid_argument("exact kernel projection needs a Hermitian realization");
  long n = r.dim;
  std::vector<std::map<long, Cyclotomic>> rows(n);
  for (const auto& t : r.exact_entries) {
    Cyclotomic& c = rows[t.row][t.col];
    c += t.value;
    if (c.is_zero()) rows[t.row].erase(t.col);
  }
  SparseEliminator elim(n);
  for (long i = 0; i < n; i++)
    for (const auto& [j, v] : rows[i])
      for (const auto& [k, w] : rows[j]) elim.add(i, k, v * w);
  elim.factorize();
  // ker(A^2) = ker(A) for Hermitian A
  nullity_ = elim.nullity();

  columns_.reserve(r.trace_indices.size());
  for (long t : r.trace_indices) {
    // A delta_t is column t of A
    std::vector<Cyclotomic> rhs(n);
    for (long i = 0; i < n; i++) {
      auto it = rows[i].find(t);
      if (it != rows[i].end()) rhs[i] = it->second;
    }
    auto z = elim.solve(rhs);
    if (!z)
      throw std::runtime_error("kernel projection solve failed");
    std::vector<Cyclotomic> col(n);
    col[t] = Cyclotomic(1);
    for (long i = 0; i < n; i++)
      for (const auto& [j, v] : rows[i]) col[i] -= v * (*z)[j];
    columns_.push_back(std::move(col));
  }
}

Cyclotomic ExactKernelProjection::fourier_coefficient(
    const ConjugacyClassInfo& cls) const {
  if (cls.status != ClassStatus::Finite)
    throw std::invalid_argument("kernel Fourier coefficient needs a finite class");
  Cyclotomic acc;
  for (size_t i = 0; i < columns_.size(); i++) {
    long t = r_.trace_indices[i];
    for (const auto& h : cls.elements) {
      long u = r_.translate(t, h);
      if (u >= 0) acc += columns_[i][u];
    }
  }
  return Cyclotomic(r_.normalization * Rational(1, cls.size())) * acc;
}

Cyclotomic ExactKernelProjection::kernel_mass() const {
  Cyclotomic acc;
  for (size_t i = 0; i < columns_.size(); i++)
    acc += columns_[i][r_.trace_indices[i]];
  return Cyclotomic(r_.normalization) * acc;
}

DeterminantReport determinant_report(const FiniteRealization& r,
                                     const SpectralData& sd,
                                     const std::optional<DetBoundRhs>& bounds) {
  DeterminantReport rep;
  rep.stage_index = sd.stage_index;
  rep.lndet = fuglede_kadison(sd, DensityKind::Standard);
  for (long c = 0; c < static_cast<long>(sd.tracked.size()); c++) {
    rep.lndet_dev_re.push_back(fuglede_kadison(sd, DensityKind::DelocRe, c));
    rep.lndet_dev_im.push_back(fuglede_kadison(sd, DensityKind::DelocIm, c));
  }
  rep.lower_bounds = bounds;
  rep.kernel_dim_float = density(sd, DensityKind::Standard, 0.0);
  if (r.has_exact &&
      (r.kind != RealizationKind::FolnerCompression || r.hermitian)) {
    try {
      rep.kernel_dim_exact_value = kernel_dim_exact(r);
    } catch (const std::runtime_error&) {
      // irrational compression mass: leave only the floating value
    }
  }
  return rep;
}

std::string determinant_report_text(const DeterminantReport& rep,
                                    const SpectralData& sd) {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << key << " " << buf << "\n";
  };
  os << "stage_index " << rep.stage_index << "\n";
  put("lndet", rep.lndet);
  for (size_t c = 0; c < sd.tracked.size(); c++) {
    std::string g = sd.stage_group->format(sd.tracked[c].representative);
    put("lndet_dev_re[" + g + "]", rep.lndet_dev_re[c]);
    put("lndet_dev_im[" + g + "]", rep.lndet_dev_im[c]);
  }
  if (rep.lower_bounds) {
    put("lower_bound_b0", rep.lower_bounds->b0);
    put("lower_bound_b1", rep.lower_bounds->b1);
  }
  if (rep.kernel_dim_exact_value)
    os << "kernel_dim " << format_rational(*rep.kernel_dim_exact_value) << "\n";
  put("kernel_dim_float", rep.kernel_dim_float);
  return os.str();
}

double SandwichPolynomial::operator()(double x) const {
  double t = (center - x) / halfwidth;
  t = std::clamp(t, -1.0, 1.0);
  for (int i = 0; i < iterations; i++) t = 0.5 * (3 * t - t * t * t);
  double ab = 0.5 * (1.0 + 1.0 / static_cast<double>(n));
  return ab + ab * t;
}

SandwichPolynomial make_sandwich_polynomial(double lambda, long n, double kappa) {
  if (n < 1) throw std::invalid_argument("sandwich index must be positive");
  if (!(lambda >= 0.0) || lambda > kappa)
    throw std::invalid_argument("lambda outside [0, kappa]");
  SandwichPolynomial P;
  P.lambda = lambda;
  P.kappa = kappa;
  P.n = n;
  P.center = lambda + 0.5 / static_cast<double>(n);
  P.halfwidth = std::max(P.center, kappa - P.center);
  double t1 = (0.5 / static_cast<double>(n)) / P.halfwidth;
  double threshold = (1.0 - 1.0 / n) / (1.0 + 1.0 / n);
  double g = t1;
  while (g < threshold && P.iterations < 500) {
    g = 0.5 * (3 * g - g * g * g);
    P.iterations++;
  }
  if (g < threshold)
    throw std::logic_error("sandwich iteration did not reach its threshold");

  // certify: decreasing, in range, and the two-sided step bounds
  double shift = 1.0 / static_cast<double>(n);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4096; i++) {
    double x = kappa * i / 4096.0;
    double v = P(x);
    if (v > prev + 1e-12 || v < -1e-12 || v > 1 + shift + 1e-12)
      throw std::logic_error("sandwich polynomial failed certification");
    if (x <= lambda && v < 1 - 1e-12)
      throw std::logic_error("sandwich polynomial dips below the step");
    if (x > lambda + shift && v > shift + 1e-12)
      throw std::logic_error("sandwich polynomial exceeds the shifted step");
    prev = v;
  }
  if (P(lambda) < 1 - 1e-12)
    throw std::logic_error("sandwich polynomial fails at lambda");
  if (lambda + shift <= kappa && P(lambda + shift) > shift + 1e-12)
    throw std::logic_error("sandwich polynomial fails at lambda + 1/n");
  return P;
}

SandwichReport sandwich_diagnostic(const RingMatrix<Cyclotomic>& A,
                                   const std::vector<SpectralData>& stages,
                                   DensityKind kind, double lambda, long n,
                                   long cls, long oracle_grid) {
  if (kind == DensityKind::DelocRaw)
    throw std::invalid_argument("sandwich kinds are standard or deviated");
  SandwichReport rep;
  rep.lambda = lambda;
  rep.kappa = kappa(A).kappa;
  rep.n = n;
  SandwichPolynomial P = make_sandwich_polynomial(lambda, n, rep.kappa);
  rep.iterations = P.iterations;
  int d = A.dim();
  rep.slack = 2.0 * d / static_cast<double>(n);
  double shift = 1.0 / static_cast<double>(n);
  rep.all_ok = true;

  for (const auto& sd : stages) {
    SandwichStageRow row;
    row.stage_index = sd.stage_index;
    row.F_lo = density(sd, kind, lambda, cls);
    for (size_t j = 0; j < sd.eigenvalues.size(); j++)
      row.trace_P += kind_weight(sd, kind, cls, static_cast<long>(j)) *
                     P(sd.eigenvalues[j]);
    row.F_hi_slack = density(sd, kind, lambda + shift, cls) + rep.slack;
    row.ok = row.F_lo <= row.trace_P + 1e-9 && row.trace_P <= row.F_hi_slack + 1e-9;
    rep.all_ok = rep.all_ok && row.ok;
    rep.rows.push_back(row);
  }

  if (oracle_grid > 0 && kind == DensityKind::Standard) {
    auto eigs = oracle_eigenvalue_multiset(A, oracle_grid);
    SandwichStageRow row;
    row.stage_index = -1;
    double acc = 0;
    for (double v : eigs) acc += P(v);
    row.trace_P = acc * d / static_cast<double>(eigs.size());
    auto lo = oracle_density(A, lambda, oracle_grid);
    auto hi = oracle_density(A, lambda + shift, oracle_grid);
    row.F_lo = lo.value;
    row.F_hi_slack = hi.value + rep.slack;
    double tol = 1e-7 + lo.error + hi.error;
    row.ok = row.F_lo <= row.trace_P + tol && row.trace_P <= row.F_hi_slack + tol;
    rep.all_ok = rep.all_ok && row.ok;
    rep.rows.push_back(row);
  }
  return rep;
}

double partial_integration_check(const SpectralData& sd, DensityKind kind,
                                 double kappa, long cls) {
  double lhs = fuglede_kadison(sd, kind, cls);
  if (!std::isfinite(lhs)) return 0.0;
  double mass = density(sd, kind, kappa, cls) - density(sd, kind, 0.0, cls);
  double integral = 0;
  for (size_t j = 0; j < sd.eigenvalues.size(); j++) {
    if (sd.eigenvalues[j] <= sd.tau) continue;
    integral += kind_weight(sd, kind, cls, static_cast<long>(j)) *
                (std::log(kappa) - std::log(sd.eigenvalues[j]));
  }
  double rhs = std::log(kappa) * mass - integral;
  return std::abs(lhs - rhs);
}

}  // namespace specdens
