#include "specdens/exact_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/multiprecision/miller_rabin.hpp>

namespace specdens {

SparseEliminator::SparseEliminator(long n) : n_(n), rows_(n), is_pivot_row_(n, 0) {
  if (n <= 0) throw std::invalid_argument("matrix size must be positive");
}

void SparseEliminator::add(long r, long c, const Cyclotomic& v) {
  if (factorized_) throw std::logic_error("matrix already factorized");
  if (r < 0 || r >= n_ || c < 0 || c >= n_) throw std::out_of_range("entry index");
  auto it = rows_[r].find(c);
  if (it == rows_[r].end()) {
    if (!v.is_zero()) rows_[r].emplace(c, v);
    return;
  }
  it->second = it->second + v;
  if (it->second.is_zero()) rows_[r].erase(it);
}

void SparseEliminator::factorize() {
  if (factorized_) return;
  factorized_ = true;
  // Columns in natural order; among candidate rows pick the sparsest. For
  // the banded matrices the realizations produce this keeps fill near the
  // band.
  for (long col = 0; col < n_; col++) {
    long pivot_row = -1;
    size_t best = 0;
    for (long r = 0; r < n_; r++) {
      if (is_pivot_row_[r]) continue;
      auto it = rows_[r].find(col);
      if (it == rows_[r].end()) continue;
      if (pivot_row < 0 || rows_[r].size() < best) {
        pivot_row = r;
        best = rows_[r].size();
      }
    }
    if (pivot_row < 0) continue;  // free column
    is_pivot_row_[pivot_row] = 1;
    pivots_.emplace_back(pivot_row, col);
    const Cyclotomic pivot_inv = rows_[pivot_row].at(col).inverse();
    for (long r = 0; r < n_; r++) {
      if (is_pivot_row_[r]) continue;
      auto it = rows_[r].find(col);
      if (it == rows_[r].end()) continue;
      Cyclotomic factor = (Cyclotomic() - it->second) * pivot_inv;
      for (const auto& [c2, v2] : rows_[pivot_row]) {
        auto jt = rows_[r].find(c2);
        if (jt == rows_[r].end()) {
          Cyclotomic nv = factor * v2;
          if (!nv.is_zero()) rows_[r].emplace(c2, std::move(nv));
        } else {
          jt->second = jt->second + factor * v2;
          if (jt->second.is_zero()) rows_[r].erase(jt);
        }
      }
      ops_.push_back({r, pivot_row, std::move(factor)});
    }
  }
}

long SparseEliminator::rank() const {
  if (!factorized_) throw std::logic_error("factorize first");
  return static_cast<long>(pivots_.size());
}

long SparseEliminator::nullity() const { return n_ - rank(); }

std::optional<std::vector<Cyclotomic>> SparseEliminator::solve(
    const std::vector<Cyclotomic>& b) const {
  if (!factorized_) throw std::logic_error("factorize first");
  if (static_cast<long>(b.size()) != n_) throw std::invalid_argument("rhs size");
  std::vector<Cyclotomic> y = b;
  for (const auto& op : ops_) y[op.dst] = y[op.dst] + op.factor * y[op.src];
  // Eliminated rows are zero; their rhs must be too.
  for (long r = 0; r < n_; r++)
    if (!is_pivot_row_[r] && !y[r].is_zero()) return std::nullopt;
  std::vector<Cyclotomic> x(n_);
  for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
    auto [r, c] = *it;
    Cyclotomic acc = y[r];
    for (const auto& [c2, v] : rows_[r])
      if (c2 != c) acc = acc - v * x[c2];
    x[c] = acc * rows_[r].at(c).inverse();
  }
  return x;
}

// ---------------------------------------------------------------------------
// Integer characteristic polynomial

namespace {

using u64 = std::uint64_t;

u64 mod_pow(u64 b, u64 e, u64 p) {
  u64 r = 1 % p;
  b %= p;
  while (e) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

u64 mod_inv(u64 a, u64 p) { return mod_pow(a, p - 2, p); }

// Similarity reduction to Hessenberg form over F_p, then the standard
// leading-principal-minor recurrence.
std::vector<u64> charpoly_mod_p(std::vector<std::vector<u64>> m, u64 p) {
  const long n = static_cast<long>(m.size());
  for (long j = 0; j + 2 < n; j++) {
    long piv = -1;
    for (long i = j + 1; i < n; i++)
      if (m[i][j] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != j + 1) {
      std::swap(m[piv], m[j + 1]);
      for (long i = 0; i < n; i++) std::swap(m[i][piv], m[i][j + 1]);
    }
    u64 inv = mod_inv(m[j + 1][j], p);
    for (long i = j + 2; i < n; i++) {
      if (m[i][j] == 0) continue;
      u64 f = m[i][j] * inv % p;
      // row i -= f * row j+1; column j+1 += f * column i (similarity)
      for (long c = 0; c < n; c++) m[i][c] = (m[i][c] + (p - f) * m[j + 1][c]) % p;
      for (long r = 0; r < n; r++) m[r][j + 1] = (m[r][j + 1] + f * m[r][i]) % p;
    }
  }
  // p_0 = 1; p_k from the Hessenberg recurrence. Coefficients ascending.
  std::vector<std::vector<u64>> polys(n + 1);
  polys[0] = {1};
  for (long k = 1; k <= n; k++) {
    std::vector<u64> cur(k + 1, 0);
    // (lambda - m[k-1][k-1]) * p_{k-1}
    u64 diag = m[k - 1][k - 1] % p;
    for (long i = 0; i < k; i++) {
      cur[i + 1] = (cur[i + 1] + polys[k - 1][i]) % p;
      cur[i] = (cur[i] + (p - diag) * polys[k - 1][i]) % p;
    }
    u64 subprod = 1;
    for (long mlen = 1; mlen < k; mlen++) {
      subprod = subprod * m[k - mlen][k - mlen - 1] % p;
      if (subprod == 0) break;
      u64 coeff = m[k - 1 - mlen][k - 1] % p * subprod % p;
      if (coeff == 0) continue;
      for (long i = 0; i <= k - 1 - mlen; i++)
        cur[i] = (cur[i] + (p - coeff) * polys[k - 1 - mlen][i]) % p;
    }
    polys[k] = std::move(cur);
  }
  return polys[n];
}

std::vector<u64> primes_31bit(size_t count) {
  std::vector<u64> out;
  for (u64 c = (1ULL << 31) - 1; out.size() < count && c > (1ULL << 30); c -= 2) {
    if (boost::multiprecision::miller_rabin_test(Int(c), 25)) out.push_back(c);
  }
  if (out.size() < count) throw std::logic_error("prime pool exhausted");
  return out;
}

}  // namespace

std::vector<Int> charpoly_integer(const std::vector<std::vector<Int>>& M) {
  const long n = static_cast<long>(M.size());
  if (n == 0) throw std::invalid_argument("empty matrix");
  for (const auto& row : M)
    if (static_cast<long>(row.size()) != n)
      throw std::invalid_argument("matrix not square");

  // log2 bound on any coefficient: sum over principal minors, each bounded
  // by Hadamard's inequality, with 2^n for the number of minors.
  double bound_bits = static_cast<double>(n);
  for (long i = 0; i < n; i++) {
    double norm2 = 0.0;
    for (long j = 0; j < n; j++) {
      double v = M[i][j].convert_to<double>();
      norm2 += v * v;
    }
    bound_bits += 0.5 * std::log2(std::max(norm2, 1.0));
  }

  size_t num_primes = static_cast<size_t>(bound_bits / 30.0) + 2;
  auto primes = primes_31bit(num_primes);

  std::vector<Int> coeffs(n + 1, 0);
  Int modulus = 1;
  for (u64 p : primes) {
    std::vector<std::vector<u64>> m(n, std::vector<u64>(n));
    for (long i = 0; i < n; i++)
      for (long j = 0; j < n; j++) {
        Int v = M[i][j] % static_cast<long long>(p);
        if (v < 0) v += static_cast<long long>(p);
        m[i][j] = v.convert_to<u64>();
      }
    auto cp = charpoly_mod_p(std::move(m), p);
    if (modulus == 1) {
      for (long k = 0; k <= n; k++) coeffs[k] = Int(cp[k]);
      modulus = p;
      continue;
    }
    // CRT step: x = a (mod modulus), x = cp[k] (mod p).
    Int mod_inv_p = 0;
    {
      // modular inverse of modulus mod p by Fermat
      u64 mm = (modulus % static_cast<long long>(p)).convert_to<u64>();
      mod_inv_p = Int(mod_pow(mm, p - 2, p));
    }
    for (long k = 0; k <= n; k++) {
      Int a = coeffs[k];
      Int r = a % static_cast<long long>(p);
      if (r < 0) r += static_cast<long long>(p);
      Int delta = (Int(cp[k]) - r) % static_cast<long long>(p);
      if (delta < 0) delta += static_cast<long long>(p);
      coeffs[k] = a + modulus * ((delta * mod_inv_p) % static_cast<long long>(p));
    }
    modulus *= static_cast<long long>(p);
  }
  // Symmetric lift.
  Int half = modulus / 2;
  for (auto& c : coeffs) {
    c %= modulus;
    if (c < 0) c += modulus;
    if (c > half) c -= modulus;
  }
  return coeffs;
}

DetStarCertificate det_star_certificate(const std::vector<std::vector<Int>>& M) {
  auto cp = charpoly_integer(M);
  for (size_t k = 0; k + 1 < cp.size(); k++) {
    if (cp[k] != 0) {
      DetStarCertificate cert;
      cert.kernel_dim = static_cast<long>(k);
      cert.value = cp[k] < 0 ? Int(-cp[k]) : cp[k];
      return cert;
    }
  }
  // charpoly is lambda^n: nilpotent input, no nonzero spectrum to certify
  throw std::invalid_argument("matrix has no nonzero eigenvalues");
}

}  // namespace specdens
