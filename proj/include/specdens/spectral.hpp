#pragma once

// Spectral layer on top of the finite realizations: dense Hermitian
// eigendecomposition, spectral measures with standard and delocalized
// weights, step density functions, Fuglede-Kadison determinants, kernel
// Fourier coefficients (floating and exact), the step-function polynomial
// sandwich and the partial-integration identity check.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "specdens/approximation.hpp"
#include "specdens/exact_linalg.hpp"
#include "specdens/ring.hpp"

namespace specdens {

struct EighResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXcd vectors;         // orthonormal; column j pairs with eigenvalues[j]
  double residual = 0.0;            // max_j |H v_j - lambda_j v_j|_2
};

// Dense eigendecomposition via LAPACK (dsyevd when the realization is real,
// zheevd otherwise). The assembled matrix is checked to be Hermitian and
// the residual bound 1e-10 * (1 + |lambda|_max) is verified; both throw.
EighResult eigh(const FiniteRealization& r);

enum class DensityKind { Standard, DelocRe, DelocIm, DelocRaw };

// Eigenvalues with normalized trace-vector weights. weights_deloc[c][j] is
// the raw class pairing
//   norm * sum_t sum_{h in tracked[c]} v_j[translate(t,h)] * conj(v_j[t]),
// not yet divided by the class size. Raw weights are basis-dependent inside
// a degenerate eigenspace; only their sums over an atom (a cluster of
// eigenvalues agreeing up to relative gap 1e-8) are coordinate-free, so the
// domination / positivity / realness invariants are stated per atom.
struct SpectralData {
  GroupPtr stage_group;
  long stage_index = 0;
  std::vector<double> eigenvalues;
  std::vector<double> weights_standard;
  std::vector<ConjugacyClassInfo> tracked;  // classes in the stage group
  std::vector<std::vector<std::complex<double>>> weights_deloc;
  Rational normalization = Rational(1);
  int block_dim = 1;
  double tau = 0.0;
  std::vector<std::pair<long, long>> atoms;  // half-open index ranges
};

SpectralData spectral_data(const FiniteRealization& r,
                           const std::vector<ConjugacyClassInfo>& tracked,
                           double tau);
// Same, reusing a precomputed eigendecomposition.
SpectralData spectral_data(const FiniteRealization& r, const EighResult& eg,
                           const std::vector<ConjugacyClassInfo>& tracked,
                           double tau);

struct AtomWeights {
  double lambda = 0.0;    // lowest eigenvalue of the cluster
  double standard = 0.0;  // sum of standard weights
  std::vector<std::complex<double>> raw;  // one sum per tracked class
};
std::vector<AtomWeights> atom_weights(const SpectralData& sd);

// Worst per-atom invariant violations over all tracked classes:
//   domination_excess = max(|raw| - |class| * standard), at most 0 up to
//     rounding for Hermitian realizations;
//   min_deviated = min over re/im parts of standard + Re/Im(raw)/|class|.
struct AtomCheck {
  double domination_excess = 0.0;
  double min_deviated = 0.0;
};
AtomCheck atom_invariants(const SpectralData& sd);

// Cumulative mass over eigenvalues <= lambda + tau. Standard is real;
// DelocRe / DelocIm give standard + Re/Im(raw)/|class|; DelocRaw is the raw
// complex cumulative. cls indexes sd.tracked (ignored for Standard).
// Values are well defined when lambda does not split an atom.
std::complex<double> density_value(const SpectralData& sd, DensityKind kind,
                                   double lambda, long cls = -1);
double density(const SpectralData& sd, DensityKind kind, double lambda,
               long cls = -1);

// Right-continuous step function with one jump per atom.
struct DensityFunction {
  DensityKind kind = DensityKind::Standard;
  long cls = -1;
  double tau = 0.0;
  std::vector<double> jumps;                     // ascending
  std::vector<std::complex<double>> cumulative;  // value on [jumps[k], jumps[k+1])
  std::complex<double> at(double lambda) const;  // 0 below the first jump
};
DensityFunction density_function(const SpectralData& sd, DensityKind kind,
                                 long cls = -1);

// One row per atom: lambda, F, then Fre[g], Fim[g] per tracked class
// (cumulative deviated densities).
std::string density_csv(const SpectralData& sd);

// sum_{lambda_j > tau} weight_j(kind) * ln(lambda_j); -infinity when the
// whole spectrum sits at or below tau. DelocRaw is rejected.
double fuglede_kadison(const SpectralData& sd, DensityKind kind, long cls = -1);

// Normalized exact kernel mass F(0). Limit stages use nullity / |G_i|
// (pr_ker commutes with the right regular representation, so the diagonal
// is constant along the group); compressions solve for the projection
// columns and require hermiticity plus a rational total.
Rational kernel_dim_exact(const FiniteRealization& r);

// Floating Fourier coefficient of the kernel projection at tracked class
// cls: (1/|class|) * (raw delocalized mass at eigenvalues <= tau).
std::complex<double> kernel_fourier_coefficient(const SpectralData& sd, long cls);

// Exact kernel projection of a Hermitian realization with exact entries.
// P delta_t = delta_t - A z where A^2 z = A delta_t; the solve stays in the
// coefficient field and needs no orthonormalization (A z is unique although
// z is not). One column per trace vector.
class ExactKernelProjection {
 public:
  explicit ExactKernelProjection(const FiniteRealization& r);

  long nullity() const { return nullity_; }
  // (normalization / |class|) * sum_t sum_{h in class} <P delta_t, delta_{h.t}>
  Cyclotomic fourier_coefficient(const ConjugacyClassInfo& cls) const;
  // normalization * sum_t <P delta_t, delta_t>
  Cyclotomic kernel_mass() const;

 private:
  FiniteRealization r_;
  std::vector<std::vector<Cyclotomic>> columns_;  // P delta_t per trace index
  long nullity_ = 0;
};

struct DeterminantReport {
  long stage_index = 0;
  double lndet = 0.0;  // -inf when no positive spectrum
  std::vector<double> lndet_dev_re;  // per tracked class
  std::vector<double> lndet_dev_im;
  std::optional<DetBoundRhs> lower_bounds;
  std::optional<Rational> kernel_dim_exact_value;
  double kernel_dim_float = 0.0;
};

DeterminantReport determinant_report(
    const FiniteRealization& r, const SpectralData& sd,
    const std::optional<DetBoundRhs>& bounds = std::nullopt);

// Flat key-value block, one "key value" pair per line.
std::string determinant_report_text(const DeterminantReport& rep,
                                    const SpectralData& sd);

// Decreasing polynomial P with chi_[0,lambda] <= P <= chi_[0,lambda+1/n] + 1/n
// on [0, kappa]: an affine image of the odd cubic s(t) = (3t - t^3)/2
// composed `iterations` times. Only ever evaluated, never expanded.
struct SandwichPolynomial {
  double lambda = 0.0, kappa = 1.0;
  long n = 1;
  double center = 0.0, halfwidth = 1.0;
  int iterations = 0;
  double operator()(double x) const;
};

// Builds and certifies the polynomial: monotonicity, range and the two
// endpoint inequalities are checked on a 4097-point grid; failures throw.
SandwichPolynomial make_sandwich_polynomial(double lambda, long n, double kappa);

struct SandwichStageRow {
  long stage_index = 0;
  double F_lo = 0.0;       // F_i(lambda)
  double trace_P = 0.0;    // Tr_i(P(A[i]))
  double F_hi_slack = 0.0; // F_i(lambda + 1/n) + 2 d / n
  bool ok = false;
};
struct SandwichReport {
  double lambda = 0.0, kappa = 0.0;
  long n = 1;
  int iterations = 0;
  double slack = 0.0;
  std::vector<SandwichStageRow> rows;  // oracle row (if any) has stage_index -1
  bool all_ok = false;
};

// Evaluates the sandwich chain on precomputed stage spectra. For deviated
// kinds, cls indexes the tracked list of every stage (the caller tracks the
// mapped class at each stage). oracle_grid > 0 appends a Fourier-oracle row
// for the limit operator (Standard kind only).
SandwichReport sandwich_diagnostic(const RingMatrix<Cyclotomic>& A,
                                   const std::vector<SpectralData>& stages,
                                   DensityKind kind, double lambda, long n,
                                   long cls = -1, long oracle_grid = 0);

// | lndet - [ ln(kappa)(F(kappa) - F(0)) - sum_j w_j (ln kappa - ln lambda_j) ] |
// with both sides evaluated in different summation orders; 0 when there is
// no positive spectrum (the integral over (0+, kappa] is vacuous).
double partial_integration_check(const SpectralData& sd, DensityKind kind,
                                 double kappa, long cls = -1);

}  // namespace specdens
