#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <optional>
#include <random>
#include <vector>

#include "specdens/exact_linalg.hpp"

using namespace specdens;

namespace {

using Poly = std::vector<Int>;  // ascending coefficients

Poly polymul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, Int(0));
  for (size_t i = 0; i < a.size(); i++)
    for (size_t j = 0; j < b.size(); j++) r[i + j] += a[i] * b[j];
  return r;
}

Poly polyadd(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), Int(0));
  for (size_t i = 0; i < a.size(); i++) r[i] += a[i];
  for (size_t i = 0; i < b.size(); i++) r[i] += b[i];
  return r;
}

// determinant of a polynomial matrix by cofactor expansion along the first row
Poly polydet(const std::vector<std::vector<Poly>>& m) {
  size_t n = m.size();
  if (n == 1) return m[0][0];
  Poly acc{Int(0)};
  for (size_t j = 0; j < n; j++) {
    std::vector<std::vector<Poly>> sub;
    for (size_t r = 1; r < n; r++) {
      std::vector<Poly> row;
      for (size_t c = 0; c < n; c++)
        if (c != j) row.push_back(m[r][c]);
      sub.push_back(std::move(row));
    }
    Poly term = polymul(m[0][j], polydet(sub));
    if (j % 2) for (auto& x : term) x = -x;
    acc = polyadd(acc, term);
  }
  return acc;
}

// charpoly oracle: det(lambda I - M) expanded symbolically
Poly charpoly_oracle(const std::vector<std::vector<Int>>& M) {
  size_t n = M.size();
  std::vector<std::vector<Poly>> pm(n, std::vector<Poly>(n));
  for (size_t i = 0; i < n; i++)
    for (size_t j = 0; j < n; j++) {
      pm[i][j] = (i == j) ? Poly{-M[i][j], Int(1)} : Poly{-M[i][j]};
    }
  return polydet(pm);
}

std::vector<std::vector<Int>> random_int_matrix(std::mt19937& rng, size_t n, long span) {
  std::vector<std::vector<Int>> M(n, std::vector<Int>(n));
  for (auto& row : M)
    for (auto& x : row) x = Int(static_cast<long>(rng() % (2 * span + 1)) - span);
  return M;
}

Cyclotomic random_rat(std::mt19937& rng) {
  return Cyclotomic(Rational(static_cast<long>(rng() % 9) - 4, 1 + rng() % 4));
}

std::vector<Cyclotomic> mat_apply(const std::vector<std::vector<Cyclotomic>>& M,
                              const std::vector<Cyclotomic>& x) {
  std::vector<Cyclotomic> y(M.size());
  for (size_t i = 0; i < M.size(); i++)
    for (size_t j = 0; j < x.size(); j++) y[i] = y[i] + M[i][j] * x[j];
  return y;
}

}  // namespace

TEST_CASE("eliminator rank and solve on small known systems") {
  SparseEliminator el(2);
  el.add(0, 0, Cyclotomic(1));
  el.add(0, 1, Cyclotomic(2));
  el.add(1, 0, Cyclotomic(3));
  el.add(1, 1, Cyclotomic(4));
  el.factorize();
  CHECK(el.rank() == 2);
  CHECK(el.nullity() == 0);
  auto x = el.solve({Cyclotomic(5), Cyclotomic(11)});
  REQUIRE(x.has_value());
  // unique solution of [[1,2],[3,4]] x = (5,11) is (1,2)
  CHECK((*x)[0] == Cyclotomic(1));
  CHECK((*x)[1] == Cyclotomic(2));
}

TEST_CASE("eliminator handles singular systems") {
  SparseEliminator el(2);
  el.add(0, 0, Cyclotomic(1));
  el.add(0, 1, Cyclotomic(1));
  el.add(1, 0, Cyclotomic(1));
  el.add(1, 1, Cyclotomic(1));
  el.factorize();
  CHECK(el.rank() == 1);
  CHECK(el.nullity() == 1);
  auto x = el.solve({Cyclotomic(2), Cyclotomic(2)});
  REQUIRE(x.has_value());
  // free variables are pinned to zero
  CHECK((*x)[0] == Cyclotomic(2));
  CHECK((*x)[1] == Cyclotomic(0));
  CHECK_FALSE(el.solve({Cyclotomic(1), Cyclotomic(0)}).has_value());
}

TEST_CASE("eliminator accumulates duplicate entries") {
  SparseEliminator el(1);
  el.add(0, 0, Cyclotomic(2));
  el.add(0, 0, Cyclotomic(-2));
  el.factorize();
  CHECK(el.rank() == 0);
  CHECK(el.nullity() == 1);
}

TEST_CASE("eliminator rank matches a planted-rank construction") {
  std::mt19937 rng(57);
  for (int trial = 0; trial < 20; trial++) {
    size_t n = 8 + rng() % 8;
    size_t r = 1 + rng() % (n - 1);
    // M = [[I_r, Y], [X, X*Y]] has rank exactly r
    std::vector<std::vector<Cyclotomic>> Y(r, std::vector<Cyclotomic>(n - r));
    std::vector<std::vector<Cyclotomic>> X(n - r, std::vector<Cyclotomic>(r));
    for (auto& row : Y)
      for (auto& v : row) v = random_rat(rng);
    for (auto& row : X)
      for (auto& v : row) v = random_rat(rng);

    std::vector<std::vector<Cyclotomic>> M(n, std::vector<Cyclotomic>(n));
    SparseEliminator el(n);
    for (size_t i = 0; i < r; i++) {
      M[i][i] = Cyclotomic(1);
      for (size_t j = 0; j < n - r; j++) M[i][r + j] = Y[i][j];
    }
    for (size_t i = 0; i < n - r; i++) {
      for (size_t j = 0; j < r; j++) M[r + i][j] = X[i][j];
      for (size_t j = 0; j < n - r; j++) {
        Cyclotomic s;
        for (size_t k = 0; k < r; k++) s = s + X[i][k] * Y[k][j];
        M[r + i][r + j] = s;
      }
    }
    for (size_t i = 0; i < n; i++)
      for (size_t j = 0; j < n; j++)
        if (!M[i][j].is_zero()) el.add(i, j, M[i][j]);
    el.factorize();
    CHECK(el.rank() == static_cast<long>(r));

    // a right-hand side in the column span must come back verified
    std::vector<Cyclotomic> x0(n);
    for (auto& v : x0) v = random_rat(rng);
    auto b = mat_apply(M, x0);
    auto x = el.solve(b);
    REQUIRE(x.has_value());
    auto back = mat_apply(M, *x);
    for (size_t i = 0; i < n; i++) CHECK(back[i] == b[i]);
  }
}

TEST_CASE("eliminator works over a genuine cyclotomic field") {
  // (1+i) x = 2 has solution 1-i
  SparseEliminator el(1);
  el.add(0, 0, Cyclotomic(1) + Cyclotomic::zeta(4, 1));
  el.factorize();
  auto x = el.solve({Cyclotomic(2)});
  REQUIRE(x.has_value());
  CHECK((*x)[0] == Cyclotomic(1) - Cyclotomic::zeta(4, 1));
}

TEST_CASE("characteristic polynomial on pinned cases") {
  CHECK(charpoly_integer({{Int(5)}}) == std::vector<Int>{Int(-5), Int(1)});

  std::vector<std::vector<Int>> D = {{Int(1), Int(0), Int(0)},
                                     {Int(0), Int(2), Int(0)},
                                     {Int(0), Int(0), Int(3)}};
  CHECK(charpoly_integer(D) == std::vector<Int>{Int(-6), Int(11), Int(-6), Int(1)});

  // companion matrix of x^3 + 2x^2 - 7x + 3
  std::vector<std::vector<Int>> Cp = {{Int(0), Int(0), Int(-3)},
                                      {Int(1), Int(0), Int(7)},
                                      {Int(0), Int(1), Int(-2)}};
  CHECK(charpoly_integer(Cp) == std::vector<Int>{Int(3), Int(-7), Int(2), Int(1)});
}

TEST_CASE("characteristic polynomial matches symbolic expansion") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 40; trial++) {
    size_t n = 1 + rng() % 5;
    auto M = random_int_matrix(rng, n, 9);
    CHECK(charpoly_integer(M) == charpoly_oracle(M));
  }
}

TEST_CASE("characteristic polynomial is a similarity invariant") {
  std::mt19937 rng(67);
  size_t n = 8;
  auto M = random_int_matrix(rng, n, 9);
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; i++) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Int>> P(n, std::vector<Int>(n, Int(0)));
  for (size_t i = 0; i < n; i++)
    for (size_t j = 0; j < n; j++) P[i][j] = M[perm[i]][perm[j]];
  CHECK(charpoly_integer(M) == charpoly_integer(P));
}

TEST_CASE("Cayley-Hamilton holds for the computed polynomial") {
  std::mt19937 rng(71);
  for (int trial = 0; trial < 6; trial++) {
    size_t n = 4 + trial;  // up to 9, entries up to +-50 stresses the CRT bound
    long span = (trial % 2) ? 50 : 7;
    auto M = random_int_matrix(rng, n, span);
    auto cp = charpoly_integer(M);
    REQUIRE(cp.size() == n + 1);
    CHECK(cp.back() == Int(1));

    std::vector<std::vector<Int>> acc(n, std::vector<Int>(n, Int(0)));
    std::vector<std::vector<Int>> pw(n, std::vector<Int>(n, Int(0)));
    for (size_t i = 0; i < n; i++) pw[i][i] = Int(1);
    for (size_t k = 0; k <= n; k++) {
      for (size_t i = 0; i < n; i++)
        for (size_t j = 0; j < n; j++) acc[i][j] += cp[k] * pw[i][j];
      if (k == n) break;
      std::vector<std::vector<Int>> nx(n, std::vector<Int>(n, Int(0)));
      for (size_t i = 0; i < n; i++)
        for (size_t l = 0; l < n; l++)
          for (size_t j = 0; j < n; j++) nx[i][j] += pw[i][l] * M[l][j];
      pw = std::move(nx);
    }
    for (size_t i = 0; i < n; i++)
      for (size_t j = 0; j < n; j++) CHECK(acc[i][j] == Int(0));
  }
}

TEST_CASE("det-star certificates") {
  // identity: no kernel, certificate 1
  std::vector<std::vector<Int>> I4(4, std::vector<Int>(4, Int(0)));
  for (int i = 0; i < 4; i++) I4[i][i] = Int(1);
  auto c = det_star_certificate(I4);
  CHECK(c.value == Int(1));
  CHECK(c.kernel_dim == 0);

  // cycle Laplacians: kernel is the constants, certificate is n^2
  for (size_t n = 2; n <= 12; n++) {
    std::vector<std::vector<Int>> L(n, std::vector<Int>(n, Int(0)));
    for (size_t i = 0; i < n; i++) {
      L[i][i] += Int(2);
      L[i][(i + 1) % n] -= Int(1);
      L[i][(i + n - 1) % n] -= Int(1);
    }
    auto cert = det_star_certificate(L);
    CHECK(cert.kernel_dim == 1);
    CHECK(cert.value == Int(n * n));
  }

  std::vector<std::vector<Int>> J = {{Int(2), Int(2)}, {Int(2), Int(2)}};
  auto cj = det_star_certificate(J);
  CHECK(cj.value == Int(4));
  CHECK(cj.kernel_dim == 1);

  std::vector<std::vector<Int>> Z(3, std::vector<Int>(3, Int(0)));
  CHECK_THROWS(det_star_certificate(Z));
}

TEST_CASE("certificate kernel dimension agrees with exact elimination") {
  std::mt19937 rng(73);
  for (int trial = 0; trial < 15; trial++) {
    size_t n = 3 + rng() % 5;
    auto M = random_int_matrix(rng, n, 3);
    // make it singular half the time by zeroing a row into a copy of another
    if (trial % 2 && n >= 2) M[0] = M[1];
    bool all_zero = true;
    for (auto& row : M)
      for (auto& v : row)
        if (v != 0) all_zero = false;
    if (all_zero) continue;

    auto cert = det_star_certificate(M);
    SparseEliminator el(n);
    for (size_t i = 0; i < n; i++)
      for (size_t j = 0; j < n; j++)
        if (M[i][j] != 0) el.add(i, j, Cyclotomic(Rational(M[i][j], 1)));
    el.factorize();
    // charpoly valuation at zero counts algebraic multiplicity, which can
    // exceed the geometric kernel dimension, never undershoot it
    CHECK(cert.kernel_dim >= el.nullity());
  }
}
