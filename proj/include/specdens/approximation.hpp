#pragma once

// Finite approximations of a group-ring matrix: quotient stages (left regular
// representation over a finite quotient), direct-limit stages (lift the
// support into a stage group, choices recorded), and Folner compressions
// (corner of the operator over a finite window of cosets).

#include <complex>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specdens/ring.hpp"

namespace specdens {

// Finite window X in the coset space G/U (here: subsets of Z^d).
struct FolnerSet {
  int dims = 1;
  long index = 0;
  std::vector<std::vector<long>> points;  // sorted, unique

  static FolnerSet box(int dims, long side, long index = 0);
  long size() const { return static_cast<long>(points.size()); }
};

// N_K(X): points within distance K of X and within distance K of its
// complement (l^1 metric). K = 0 gives the empty set.
std::vector<std::vector<long>> neighborhood(const FolnerSet& fs, long K);
double folner_defect(const FolnerSet& fs, long K);

struct Triplet {
  long row = 0, col = 0;
  std::complex<double> value;
};
struct ExactTriplet {
  long row = 0, col = 0;
  Cyclotomic value;
};

enum class RealizationKind { InverseLimit, DirectLimit, FolnerCompression };

// A concrete finite matrix together with the labeling data needed to read
// normalized standard and delocalized traces off it.
struct FiniteRealization {
  RealizationKind kind = RealizationKind::InverseLimit;
  GroupPtr stage_group;  // finite stage group, or the ambient U x Z^d group
  GroupPtr subgroup;     // compression only: U (null when U is trivial)
  int block_dim = 1;
  long dim = 0;
  long stage_index = 0;
  Rational normalization = Rational(1);
  bool hermitian = false;
  bool all_real = false;
  bool has_exact = false;
  std::vector<Triplet> entries;
  std::vector<ExactTriplet> exact_entries;
  std::vector<long> trace_indices;
  std::string choice_record;               // direct-limit lift decisions
  std::vector<std::vector<long>> sites;    // compression: the window X

  // Basis index of h . (label of basis_index); -1 if the translate leaves
  // the window (compression only). h lives in stage_group.
  long translate(long basis_index, const GroupElement& h) const;

 private:
  std::map<std::vector<long>, long> site_index_;
  long subgroup_order_ = 1;
  friend FiniteRealization build_folner_compression(const RingMatrix<Cyclotomic>&,
                                                    const FolnerSet&);
};

FiniteRealization build_inverse_limit_stage(const RingMatrix<Cyclotomic>& A,
                                            const QuotientMap& p);

struct DirectLimitStage {
  GroupPtr group;  // finite stage group
  std::map<GroupElement, GroupElement, ElementLess> lift;
  std::string choice_record;
};

// Choose a preimage in p.source for every support element of A (p maps the
// stage group onto the group A lives over). Deterministic given the seed.
DirectLimitStage make_direct_limit_stage(const RingMatrix<Cyclotomic>& A,
                                         const QuotientMap& p,
                                         unsigned long long seed);

FiniteRealization build_direct_limit_stage(const RingMatrix<Cyclotomic>& A,
                                           const DirectLimitStage& st);

// A must live over U x Z^d (one finite factor first, then a free abelian
// factor) or over plain Z^d (trivial U).
FiniteRealization build_folner_compression(const RingMatrix<Cyclotomic>& A,
                                           const FolnerSet& fs);

// Columns of A[i]^n at the given basis indices, by repeated sparse
// application; column j of the result is A[i]^n delta_{cols[j]}.
Eigen::MatrixXcd realization_power_columns(const FiniteRealization& r, long n,
                                           const std::vector<long>& cols);

// Normalized traces of B = A[i]^n read off precomputed columns C, where
// column j corresponds to trace_indices[j].
double stage_trace_standard(const FiniteRealization& r, const Eigen::MatrixXcd& C);
std::complex<double> stage_trace_delocalized(const FiniteRealization& r,
                                             const Eigen::MatrixXcd& C,
                                             const ConjugacyClassInfo& cls);
std::complex<double> stage_trace_deviated(const FiniteRealization& r,
                                          const Eigen::MatrixXcd& C,
                                          const ConjugacyClassInfo& cls,
                                          DeviatedPart part);

// Compares the normalized deviated trace of A[i]^n at a compression stage
// with the exact group-ring value, against the window-defect bound
// c_n * |N_R(X_i)| / |X_i| with c_n = 2 n kappa(A)^n and R the support
// radius of A^n in G/U.
struct TelescopeReport {
  long power = 0;
  long R = 0;
  double lhs = 0, c_n = 0, defect = 0, rhs = 0;
  bool ok = false;
};
TelescopeReport telescope_check(const RingMatrix<Cyclotomic>& A,
                                const FiniteRealization& r, const FolnerSet& fs,
                                long n, const ConjugacyClassInfo& cls,
                                DeviatedPart part);

}  // namespace specdens
