#pragma once

#include <optional>
#include <vector>

#include "specdens/cyclotomic.hpp"

namespace specdens {

/// Exact Gaussian elimination on a sparse matrix over the cyclotomic field.
/// Built once, factorized once, then queried for rank/nullity and solved
/// against many right-hand sides (the factorization replays its recorded
/// row operations on each b).
class SparseEliminator {
 public:
  explicit SparseEliminator(long n);

  /// Accumulates v into entry (r, c). Only before factorize().
  void add(long r, long c, const Cyclotomic& v);

  void factorize();
  bool factorized() const { return factorized_; }

  long size() const { return n_; }
  long rank() const;
  long nullity() const;

  /// Solves A x = b with free variables set to zero; nullopt when b is not
  /// in the column span. Consistency is always verified against the
  /// eliminated rows, never assumed.
  std::optional<std::vector<Cyclotomic>> solve(const std::vector<Cyclotomic>& b) const;

 private:
  struct RowOp {
    long dst;
    long src;
    Cyclotomic factor;  // row[dst] += factor * row[src]
  };

  long n_;
  bool factorized_ = false;
  std::vector<std::map<long, Cyclotomic>> rows_;
  std::vector<RowOp> ops_;
  std::vector<std::pair<long, long>> pivots_;  // (row, col) in elimination order
  std::vector<char> is_pivot_row_;
};

/// Characteristic polynomial of an integer matrix, coefficients ascending
/// (index k multiplies lambda^k, leading coefficient 1). Computed modulo
/// several 31-bit primes via Hessenberg reduction and recombined by CRT
/// against a Hadamard-style coefficient bound.
std::vector<Int> charpoly_integer(const std::vector<std::vector<Int>>& M);

struct DetStarCertificate {
  Int value;        // |lowest nonzero charpoly coefficient| = product of nonzero eigenvalues
  long kernel_dim;  // multiplicity of the eigenvalue 0
};

/// Exact det* of a symmetric PSD integer matrix. Throws if the matrix is
/// zero (no nonzero eigenvalues).
DetStarCertificate det_star_certificate(const std::vector<std::vector<Int>>& M);

}  // namespace specdens
