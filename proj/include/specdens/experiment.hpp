#pragma once

// Experiment driver shared by the command line tool and the language
// bindings: one self-contained configuration document (group, matrix,
// tracked classes, approximation scheme, checks, tolerances) goes in, the
// stages run, and the convergence / density / determinant tables come back
// together with a text report and an overall pass flag.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "specdens/approximation.hpp"
#include "specdens/oracle_fourier.hpp"
#include "specdens/ring.hpp"
#include "specdens/sofic.hpp"
#include "specdens/spectral.hpp"

namespace specdens {

enum class SchemeKind { InverseLimit, DirectLimit, Folner, Sofic };

// Which of the two computation routes to run per stage. Float uses the dense
// eigendecomposition; Exact stays in the coefficient field (kernel data
// only, no spectra, no determinants).
enum class PathMode { Float, Exact, Both };

struct ToleranceSet {
  double tau = -1.0;          // spectral kernel cutoff; < 0 picks default_tau
  double kappa_slack = 1e-9;  // |eig| <= kappa * (1 + slack)
  double bound_slack = 1e-9;  // lndet >= b - slack * (1 + |b|)
  // when >= 0, require |coeff - oracle| <= delta_scale / size per stage
  double delta_scale = -1.0;
};

struct CheckSet {
  bool kappa = true;
  bool bounds = true;  // standard lndet >= b0
  // deviated determinants >= b1. Off by default: the deviated bound needs the
  // conjugate sum to dominate the full variation of ln over the spectrum,
  // which already fails for the line Laplacian (deviated determinant -1,
  // empty conjugate sum), so it is only checked where asked for.
  bool deviated_bounds = false;
  bool telescope = false;  // compression stages only
  long telescope_power = 3;
};

struct ExperimentConfig {
  GroupPtr group;
  std::optional<RingMatrix<Cyclotomic>> matrix;
  std::vector<std::string> track;                   // words in the group
  std::vector<ConjugacyClassInfo> tracked_classes;  // resolved, all Finite
  SchemeKind scheme = SchemeKind::InverseLimit;
  std::vector<long> stages;  // moduli / box sides / sofic sizes
  std::string sofic_family = "cycle";
  long sofic_radius = 2;
  std::vector<std::string> sofic_paths;  // family "file": one stage per path
  unsigned long long seed = 1;           // direct-limit lift choices
  bool use_oracle = true;
  long grid = 0;  // oracle grid; 0 = twice the largest stage
  PathMode path = PathMode::Both;
  bool reproducible = false;
  std::string out_dir = "out";
  ToleranceSet tol;
  CheckSet checks;

  const RingMatrix<Cyclotomic>& A() const { return *matrix; }

  // Re-validating setters used for command line overrides.
  void set_track(const std::vector<std::string>& words);
  void set_stages(const std::vector<long>& list);

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig from_file(const std::string& path);
};

struct StageReport {
  long stage_index = 0;  // position in the stage list
  long size = 0;         // modulus / box side / sofic size parameter
  long dim = 0;          // dimension of the finite stage
  bool has_spectral = false;
  double F0 = 0;  // normalized kernel mass
  std::optional<Rational> F0_exact;
  std::vector<std::complex<double>> coeff;  // per tracked class
  std::vector<std::string> coeff_exact;     // exact values; "" when absent
  std::vector<double> delta;  // |coeff - oracle|; empty without an oracle
  double lndet = 0;
  std::vector<double> lndet_dev_re, lndet_dev_im;
  std::optional<Rational> kernel_dim_exact_value;
  double spectral_radius = 0;
  double min_eigenvalue = 0;
  bool kappa_ok = true;
  bool bounds_ok = true;
  bool delta_ok = true;
  std::optional<TelescopeReport> telescope;
  // density table rows for this stage: one entry per spectral atom
  std::vector<std::string> density_rows;
  // sofic stages only
  long kernel_count = 0;
  bool certified = false;
  std::string certificate;  // decimal digits; empty when not certified
};

struct ExperimentResult {
  std::string mode;
  std::vector<std::string> tracked_words;  // formatted representatives
  std::vector<long> class_sizes;
  std::vector<StageReport> stages;
  bool oracle_ran = false;
  std::string oracle_note;  // why the oracle was skipped, when it was
  std::optional<OracleEstimate> oracle_lndet_value;
  std::optional<double> oracle_F0;
  std::vector<OracleCoefficient> oracle_coeffs;  // per tracked class
  long oracle_grid = 0;
  DetBoundRhs bounds;
  double kappa_value = 0;
  bool ok = true;
  std::vector<std::string> failures;  // one line per failed check

  std::string densities_csv;     // density | converge | oracle
  std::string convergence_csv;   // converge
  std::string determinants_csv;  // detbound | sofic
  std::string report_text;       // always
};

// Group descriptor: {"kind": "cyclic", "n": 8}, {"kind": "symmetric",
// "n": 3}, {"kind": "free_abelian", "rank": 1, "names": ["u"]},
// {"kind": "free_group", ...}, {"kind": "product", "factors": [...]}.
GroupPtr group_from_json(const nlohmann::json& j);

// mode is one of the subcommand names: density, converge, detbound, sofic,
// oracle. Throws std::invalid_argument for configs the mode cannot run
// (sofic mode without a sofic scheme and vice versa, oracle mode on a
// group with no symbol).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& mode);

// Writes the non-empty tables (densities.csv, convergence.csv,
// determinants.csv) and report.txt under out_dir, creating it if needed.
void write_experiment_outputs(const ExperimentResult& res, const std::string& out_dir);

// "%.12g" floats; complex values as re or re+im*i with the same digits.
std::string format_float(double v);
std::string format_complex(const std::complex<double>& z);

}  // namespace specdens
