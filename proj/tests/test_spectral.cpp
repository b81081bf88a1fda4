#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "specdens/oracle_fourier.hpp"
#include "specdens/spectral.hpp"

using namespace specdens;
using C = Cyclotomic;

namespace {

Eigen::MatrixXcd dense(const FiniteRealization& r) {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(r.dim, r.dim);
  for (const auto& t : r.entries) M(t.row, t.col) += t.value;
  return M;
}

std::vector<double> sorted_eigs_hermitian(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  std::vector<double> v(es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

RingElement<C> elem(const GroupPtr& g, std::initializer_list<std::pair<const char*, C>> ts) {
  RingElement<C> a(g);
  for (const auto& [w, c] : ts) a.add_term(g->parse(w), c);
  return a;
}

RingMatrix<C> random_matrix(const GroupPtr& g, std::mt19937& rng, int d) {
  RingMatrix<C> A(g, d);
  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++)
      for (int t = 0; t < 3; t++) {
        GroupElement x = g->identity();
        for (int s = 0; s < 2; s++) {
          int i = rng() % g->num_generators();
          auto gen = g->generator(i);
          x = g->mul(x, (rng() % 2) ? gen : g->inverse(gen));
        }
        A.at(k, l).add_term(x, C(Rational(static_cast<long>(rng() % 5) - 2,
                                          1 + rng() % 2)));
      }
  return A;
}

FiniteRealization finite_stage(const RingMatrix<C>& A) {
  return build_inverse_limit_stage(A, QuotientMap::identity_map(A.group()));
}

GroupPtr two_sector_group() {
  return Group::direct_product({Group::cyclic(2, "t"), Group::free_abelian(1, {"u"})});
}

RingMatrix<C> two_sector_matrix(const GroupPtr& g) {
  RingMatrix<C> A(g, 1);
  A.at(0, 0) = elem(g, {{"e", C(1)}, {"t", C(-1)}}) *
               elem(g, {{"e", C(2)}, {"u", C(-1)}, {"u^-1", C(-1)}});
  return A;
}

RingMatrix<C> line_laplacian(const GroupPtr& g) {
  RingMatrix<C> A(g, 1);
  A.at(0, 0) = elem(g, {{"e", C(2)}, {"u", C(-1)}, {"u^-1", C(-1)}});
  return A;
}

}  // namespace

TEST_CASE("eigh on hand-built realizations") {
  FiniteRealization r;
  r.dim = 3;
  r.hermitian = true;
  r.all_real = true;
  r.entries = {{0, 0, 1.0}, {1, 1, 2.0}, {2, 2, 3.0}};
  auto eg = eigh(r);
  REQUIRE(eg.eigenvalues.size() == 3);
  CHECK(eg.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eg.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eg.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(eg.residual <= 1e-10 * 4);
  Eigen::MatrixXcd gram =
      eg.vectors.adjoint() * eg.vectors - Eigen::MatrixXcd::Identity(3, 3);
  CHECK(gram.norm() <= 1e-10);

  FiniteRealization r2;
  r2.dim = 2;
  r2.hermitian = true;
  r2.all_real = true;
  r2.entries = {{0, 0, 2.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 2.0}};
  auto eg2 = eigh(r2);
  CHECK(eg2.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eg2.eigenvalues[1] == doctest::Approx(4.0).epsilon(1e-12));

  // lopsided entries must be caught before LAPACK sees them
  FiniteRealization bad = r2;
  bad.entries[1].value = 3.0;
  CHECK_THROWS_AS(eigh(bad), std::invalid_argument);
}

TEST_CASE("eigh circulant stages match the Fourier formula and Eigen") {
  auto z = Group::free_abelian(1, {"u"});
  auto A = line_laplacian(z);
  auto r = build_inverse_limit_stage(A, QuotientMap::mod_quotient(z, 8));
  auto eg = eigh(r);
  std::vector<double> want;
  for (int k = 0; k < 8; k++) want.push_back(2 - 2 * std::cos(2 * M_PI * k / 8));
  std::sort(want.begin(), want.end());
  auto oracle = sorted_eigs_hermitian(dense(r));
  for (int j = 0; j < 8; j++) {
    CHECK(eg.eigenvalues[j] == doctest::Approx(want[j]).epsilon(1e-10));
    CHECK(eg.eigenvalues[j] == doctest::Approx(oracle[j]).epsilon(1e-10));
  }

  // complex Hermitian path: 2 + i u - i u^-1 has symbol 2 + 2 sin(theta)
  RingMatrix<C> B(z, 1);
  B.at(0, 0) = elem(z, {{"e", C(2)},
                        {"u", C::zeta(4, 1)},
                        {"u^-1", C(Rational(-1)) * C::zeta(4, 1)}});
  auto rb = build_inverse_limit_stage(B, QuotientMap::mod_quotient(z, 8));
  CHECK_FALSE(rb.all_real);
  auto egb = eigh(rb);
  std::vector<double> wantb;
  for (int k = 0; k < 8; k++) wantb.push_back(2 + 2 * std::sin(2 * M_PI * k / 8));
  std::sort(wantb.begin(), wantb.end());
  for (int j = 0; j < 8; j++)
    CHECK(egb.eigenvalues[j] == doctest::Approx(wantb[j]).epsilon(1e-10));

  RingMatrix<C> skew(z, 1);
  skew.at(0, 0) = elem(z, {{"u", C(1)}});
  auto rs = build_inverse_limit_stage(skew, QuotientMap::mod_quotient(z, 4));
  CHECK_THROWS_AS(eigh(rs), std::invalid_argument);
}

TEST_CASE("two-point regular representation weights") {
  auto g = Group::cyclic(2, "t");
  RingMatrix<C> A(g, 1);
  A.at(0, 0) = elem(g, {{"e", C(1)}, {"t", C(1)}});
  auto r = finite_stage(A);
  auto cls_t = g->conjugacy_class(g->parse("t"));
  auto cls_e = g->conjugacy_class(g->identity());
  auto sd = spectral_data(r, {cls_e, cls_t}, default_tau(A));

  REQUIRE(sd.eigenvalues.size() == 2);
  CHECK(sd.eigenvalues[0] == doctest::Approx(0.0));
  CHECK(sd.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(sd.weights_standard[0] == doctest::Approx(0.5));
  CHECK(sd.weights_standard[1] == doctest::Approx(0.5));
  CHECK(sd.weights_deloc[1][0].real() == doctest::Approx(-0.5));
  CHECK(sd.weights_deloc[1][1].real() == doctest::Approx(0.5));
  CHECK(sd.weights_deloc[0][0].real() == doctest::Approx(0.5));

  CHECK(density(sd, DensityKind::Standard, 0.0) == doctest::Approx(0.5));
  CHECK(density(sd, DensityKind::Standard, 2.0) == doctest::Approx(1.0));
  CHECK(density(sd, DensityKind::DelocRe, 0.0, 1) == doctest::Approx(0.0));
  CHECK(density(sd, DensityKind::DelocRe, 2.0, 1) == doctest::Approx(1.0));

  auto coeff = kernel_fourier_coefficient(sd, 1);
  CHECK(coeff.real() == doctest::Approx(-0.5));
  CHECK(std::abs(coeff.imag()) <= 1e-12);

  ExactKernelProjection proj(r);
  CHECK(proj.nullity() == 1);
  CHECK(proj.fourier_coefficient(cls_t) == C(Rational(-1, 2)));
  CHECK(proj.kernel_mass() == C(Rational(1, 2)));
  CHECK(kernel_dim_exact(r) == Rational(1, 2));
}

TEST_CASE("quotient stage kernel coefficients of the two-sector operator") {
  const long n = 8;
  auto g = two_sector_group();
  auto A = two_sector_matrix(g);
  auto p = QuotientMap::mod_quotient(g, n);
  auto r = build_inverse_limit_stage(A, p);
  auto gq = p.target;

  auto cls_e = gq->conjugacy_class(gq->identity());
  auto cls_t = gq->conjugacy_class(p.apply(g->parse("t")));
  auto cls_u = gq->conjugacy_class(p.apply(g->parse("u")));
  auto sd = spectral_data(r, {cls_e, cls_t, cls_u}, default_tau(A));

  CHECK(kernel_fourier_coefficient(sd, 0).real() ==
        doctest::Approx(0.5 + 0.5 / n).epsilon(1e-10));
  CHECK(kernel_fourier_coefficient(sd, 1).real() ==
        doctest::Approx(0.5 - 0.5 / n).epsilon(1e-10));
  CHECK(kernel_fourier_coefficient(sd, 2).real() ==
        doctest::Approx(0.5 / n).epsilon(1e-10));

  // the coefficient at e is the kernel dimension
  CHECK(kernel_fourier_coefficient(sd, 0).real() ==
        doctest::Approx(density(sd, DensityKind::Standard, 0.0)));

  ExactKernelProjection proj(r);
  CHECK(proj.nullity() == n + 1);
  CHECK(proj.fourier_coefficient(cls_e) == C(Rational(n + 1, 2 * n)));
  CHECK(proj.fourier_coefficient(cls_t) == C(Rational(n - 1, 2 * n)));
  CHECK(proj.fourier_coefficient(cls_u) == C(Rational(1, 2 * n)));
  CHECK(kernel_dim_exact(r) == Rational(n + 1, 2 * n));

  // the oracle refines to grid 2N, so N = n/2 samples exactly this quotient
  auto oc_t = oracle_kernel_coefficient(A, g->parse("t"), n / 2);
  CHECK(std::abs(oc_t.value - kernel_fourier_coefficient(sd, 1)) <= 1e-9);
  auto oc_u = oracle_kernel_coefficient(A, g->parse("u"), n / 2);
  CHECK(std::abs(oc_u.value - kernel_fourier_coefficient(sd, 2)) <= 1e-9);

  auto inv = atom_invariants(sd);
  CHECK(inv.domination_excess <= 1e-9);
  CHECK(inv.min_deviated >= -1e-9);
}

TEST_CASE("compression stage splits an exact kernel sector") {
  auto g = two_sector_group();
  auto A = two_sector_matrix(g);
  auto fs = FolnerSet::box(1, 16);
  auto r = build_folner_compression(A, fs);
  auto cls_t = g->conjugacy_class(g->parse("t"));
  auto cls_u = g->conjugacy_class(g->parse("u"));
  auto sd = spectral_data(r, {cls_t, cls_u}, default_tau(A));

  // even sector contributes 16 exact zeros; the odd sector is a positive
  // Dirichlet block, so the kernel coefficient at t is exactly one half
  CHECK(density(sd, DensityKind::Standard, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(kernel_fourier_coefficient(sd, 0).real() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(kernel_fourier_coefficient(sd, 1)) <= 1e-10);

  ExactKernelProjection proj(r);
  CHECK(proj.nullity() == 16);
  CHECK(proj.fourier_coefficient(cls_t) == C(Rational(1, 2)));
  CHECK(proj.fourier_coefficient(cls_u) == C());
  CHECK(proj.kernel_mass() == C(Rational(1, 2)));
  CHECK(kernel_dim_exact(r) == Rational(1, 2));

  auto inv = atom_invariants(sd);
  CHECK(inv.domination_excess <= 1e-9);
  CHECK(inv.min_deviated >= -1e-9);
}

TEST_CASE("density functions and csv export") {
  auto z = Group::free_abelian(1, {"u"});
  auto A = line_laplacian(z);
  auto p = QuotientMap::mod_quotient(z, 8);
  auto r = build_inverse_limit_stage(A, p);
  auto cls_u = p.target->conjugacy_class(p.apply(z->parse("u")));
  auto sd = spectral_data(r, {cls_u}, default_tau(A));

  auto f = density_function(sd, DensityKind::Standard);
  REQUIRE(!f.jumps.empty());
  CHECK(std::is_sorted(f.jumps.begin(), f.jumps.end()));
  CHECK(f.at(-1.0).real() == doctest::Approx(0.0));
  CHECK(f.at(0.0).real() == doctest::Approx(1.0 / 8));
  CHECK(f.at(5.0).real() == doctest::Approx(1.0));
  for (double lam : {0.0, 0.3, 0.6, 2.0, 3.99, 4.0})
    CHECK(f.at(lam).real() == doctest::Approx(density(sd, DensityKind::Standard, lam)));

  auto fre = density_function(sd, DensityKind::DelocRe, 0);
  CHECK(fre.at(4.0).real() == doctest::Approx(1.0));

  auto csv = density_csv(sd);
  CHECK(csv.rfind("lambda,F", 0) == 0);
  size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == sd.atoms.size() + 1);
}

TEST_CASE("fuglede-kadison determinants against closed forms") {
  auto z = Group::free_abelian(1, {"u"});

  auto I = RingMatrix<C>::identity(Group::cyclic(4), 1);
  auto sdI = spectral_data(finite_stage(I), {}, default_tau(I));
  CHECK(fuglede_kadison(sdI, DensityKind::Standard) == doctest::Approx(0.0));

  // 3 + u + u^-1: Mahler measure ln((3+sqrt 5)/2)
  RingMatrix<C> M(z, 1);
  M.at(0, 0) = elem(z, {{"e", C(3)}, {"u", C(1)}, {"u^-1", C(1)}});
  auto sdM = spectral_data(
      build_inverse_limit_stage(M, QuotientMap::mod_quotient(z, 512)), {},
      default_tau(M));
  double want = std::log((3 + std::sqrt(5.0)) / 2);
  CHECK(std::abs(fuglede_kadison(sdM, DensityKind::Standard) - want) <= 1e-3);
  // the Fourier oracle at half the grid lands on the same quotient spectrum
  auto oc = oracle_lndet(M, 256);
  CHECK(std::abs(fuglede_kadison(sdM, DensityKind::Standard) - oc.value) <= 1e-9);

  // cycle Laplacian: product of nonzero eigenvalues is n^2
  const long n = 1024;
  auto A = line_laplacian(z);
  auto p = QuotientMap::mod_quotient(z, n);
  auto sdA = spectral_data(build_inverse_limit_stage(A, p), {}, default_tau(A));
  double ld = fuglede_kadison(sdA, DensityKind::Standard);
  CHECK(std::abs(ld - std::log(static_cast<double>(n) * n) / n) <= 1e-7);
  CHECK(std::abs(ld) <= 5e-2);

  RingMatrix<C> Z(Group::cyclic(4), 1);
  auto sdZ = spectral_data(finite_stage(Z), {}, 1e-12);
  CHECK(fuglede_kadison(sdZ, DensityKind::Standard) ==
        -std::numeric_limits<double>::infinity());
  CHECK(density(sdZ, DensityKind::Standard, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("exact kernel dimensions") {
  auto z = Group::free_abelian(1, {"u"});
  auto I = RingMatrix<C>::identity(Group::cyclic(3), 2);
  CHECK(kernel_dim_exact(finite_stage(I)) == Rational(0));

  auto A = line_laplacian(z);
  auto r = build_inverse_limit_stage(A, QuotientMap::mod_quotient(z, 12));
  CHECK(kernel_dim_exact(r) == Rational(1, 12));
  auto sd = spectral_data(r, {}, default_tau(A));
  CHECK(std::abs(density(sd, DensityKind::Standard, 0.0) - 1.0 / 12) <= 1e-9);

  // non-Hermitian direct-limit lift: nullity route still works, the
  // projection route must refuse
  auto g2 = Group::cyclic(2);
  auto g4 = Group::cyclic(4);
  QuotientMap p(g4, g2, {g2->generator(0)});
  RingMatrix<C> L(g2, 1);
  L.at(0, 0) = elem(g2, {{"e", C(1)}, {"u", C(1)}});
  auto st = make_direct_limit_stage(L, p, 1);
  auto rd = build_direct_limit_stage(L, st);
  if (!rd.hermitian) {
    CHECK(kernel_dim_exact(rd) == Rational(1, 4));
    CHECK_THROWS_AS(ExactKernelProjection{rd}, std::invalid_argument);
  }
}

TEST_CASE("per-atom invariants on random positive draws") {
  std::mt19937 rng(7);
  for (auto base : {Group::cyclic(6), Group::symmetric(3)}) {
    for (int trial = 0; trial < 60; trial++) {
      auto Braw = random_matrix(base, rng, 2);
      auto A = Braw.adjoint() * Braw;
      auto r = finite_stage(A);
      auto cls_g = base->conjugacy_class(base->generator(0));
      auto cls_gi = base->conjugacy_class(base->inverse(base->generator(0)));
      auto cls_e = base->conjugacy_class(base->identity());
      auto sd = spectral_data(r, {cls_g, cls_gi, cls_e}, default_tau(A));

      auto inv = atom_invariants(sd);
      CHECK(inv.domination_excess <= 1e-9);
      CHECK(inv.min_deviated >= -1e-9);

      // inverse-class raw sums are conjugate atom by atom
      for (const auto& a : atom_weights(sd))
        CHECK(std::abs(a.raw[1] - std::conj(a.raw[0])) <= 1e-8);

      // first moments agree with the sparse power-trace route
      auto cols = realization_power_columns(r, 1, r.trace_indices);
      double m1 = 0;
      std::complex<double> md = 0;
      for (size_t j = 0; j < sd.eigenvalues.size(); j++) {
        m1 += sd.weights_standard[j] * sd.eigenvalues[j];
        md += sd.weights_deloc[0][j] * sd.eigenvalues[j];
      }
      CHECK(std::abs(m1 - stage_trace_standard(r, cols)) <= 1e-8);
      CHECK(std::abs(md - stage_trace_delocalized(r, cols, cls_g)) <= 1e-8);
    }
  }
}

TEST_CASE("determinant monotonicity on injective pairs") {
  std::mt19937 rng(11);
  auto g = Group::cyclic(5);
  for (int trial = 0; trial < 30; trial++) {
    auto D = random_matrix(g, rng, 2);
    auto Cc = random_matrix(g, rng, 2);
    auto A = D.adjoint() * D + RingMatrix<C>::identity(g, 2);
    auto B = A + Cc.adjoint() * Cc;
    auto sdA = spectral_data(finite_stage(A), {}, default_tau(A));
    auto sdB = spectral_data(finite_stage(B), {}, default_tau(B));
    double la = fuglede_kadison(sdA, DensityKind::Standard);
    double lb = fuglede_kadison(sdB, DensityKind::Standard);
    CHECK(la <= lb + 1e-8);
  }
}

TEST_CASE("sandwich polynomial construction and certification") {
  auto P = make_sandwich_polynomial(0.5, 16, 6.0);
  CHECK(P(0.0) >= 1 - 1e-12);
  CHECK(P(0.5) >= 1 - 1e-12);
  CHECK(P(0.5 + 1.0 / 16) <= 1.0 / 16 + 1e-12);
  CHECK(P(6.0) <= 1.0 / 16 + 1e-12);
  double prev = P(0.0);
  for (int i = 1; i <= 100; i++) {
    double v = P(6.0 * i / 100);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }

  auto P1 = make_sandwich_polynomial(0.25, 1, 1.0);  // degenerate slack 2d
  CHECK(P1.iterations == 0);
  CHECK(P1(0.25) >= 1 - 1e-12);

  CHECK_THROWS_AS(make_sandwich_polynomial(-0.1, 4, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sandwich_polynomial(7.0, 4, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(make_sandwich_polynomial(0.5, 0, 6.0), std::invalid_argument);
}

TEST_CASE("sandwich chain across quotient stages") {
  auto z = Group::free_abelian(1, {"u"});
  auto A = line_laplacian(z);
  std::vector<SpectralData> plain, tracked;
  for (long n : {8L, 16L, 32L}) {
    auto p = QuotientMap::mod_quotient(z, n);
    auto r = build_inverse_limit_stage(A, p);
    plain.push_back(spectral_data(r, {}, default_tau(A)));
    auto cls = p.target->conjugacy_class(p.apply(z->parse("u")));
    tracked.push_back(spectral_data(r, {cls}, default_tau(A)));
  }
  for (double lam : {0.0, 0.5, 1.0})
    for (long n : {4L, 16L, 64L}) {
      auto rep = sandwich_diagnostic(A, plain, DensityKind::Standard, lam, n,
                                     -1, 64);
      CHECK(rep.all_ok);
      REQUIRE(rep.rows.size() == 4);  // three stages and the oracle row
      CHECK(rep.rows.back().stage_index == -1);
      auto repd =
          sandwich_diagnostic(A, tracked, DensityKind::DelocRe, lam, n, 0);
      CHECK(repd.all_ok);
    }
  // chain reproduces F(0) within the slack at lambda = 0
  auto rep0 = sandwich_diagnostic(A, plain, DensityKind::Standard, 0.0, 64);
  for (const auto& row : rep0.rows) {
    CHECK(row.F_lo <= row.trace_P + 1e-9);
    CHECK(row.trace_P <= row.F_hi_slack + 1e-9);
  }

  auto I2 = RingMatrix<C>::identity(Group::cyclic(2), 1);
  std::vector<SpectralData> istages = {
      spectral_data(finite_stage(I2), {}, default_tau(I2))};
  for (long n : {1L, 4L}) {
    auto rep = sandwich_diagnostic(I2, istages, DensityKind::Standard, 0.5, n);
    CHECK(rep.all_ok);
    CHECK(rep.rows[0].F_lo == doctest::Approx(0.0));
  }
}

TEST_CASE("partial integration identity on step functions") {
  auto I = RingMatrix<C>::identity(Group::cyclic(4), 1);
  auto sdI = spectral_data(finite_stage(I), {}, default_tau(I));
  CHECK(partial_integration_check(sdI, DensityKind::Standard, 1.0) <= 1e-14);

  auto z = Group::free_abelian(1, {"u"});
  auto A = line_laplacian(z);
  auto p = QuotientMap::mod_quotient(z, 8);
  auto r = build_inverse_limit_stage(A, p);
  auto cls = p.target->conjugacy_class(p.apply(z->parse("u")));
  auto sd = spectral_data(r, {cls}, default_tau(A));
  CHECK(partial_integration_check(sd, DensityKind::Standard, 6.0) <= 1e-10);
  CHECK(partial_integration_check(sd, DensityKind::DelocRe, 6.0, 0) <= 1e-10);
  CHECK(partial_integration_check(sd, DensityKind::DelocIm, 6.0, 0) <= 1e-10);

  std::mt19937 rng(3);
  auto g = Group::cyclic(7);
  for (int trial = 0; trial < 20; trial++) {
    auto D = random_matrix(g, rng, 2);
    auto M = D.adjoint() * D;
    auto sdM = spectral_data(finite_stage(M), {}, default_tau(M));
    double kap = kappa(M).kappa;
    double ld = fuglede_kadison(sdM, DensityKind::Standard);
    double res = partial_integration_check(sdM, DensityKind::Standard,
                                           std::max(kap, 1.0));
    if (std::isfinite(ld))
      CHECK(res <= 1e-8 * (1 + std::abs(ld)));
    else
      CHECK(res == 0.0);
  }

  RingMatrix<C> Z(Group::cyclic(4), 1);
  auto sdZ = spectral_data(finite_stage(Z), {}, 1e-12);
  CHECK(partial_integration_check(sdZ, DensityKind::Standard, 1.0) == 0.0);
}

TEST_CASE("determinant report assembly") {
  auto z = Group::free_abelian(1, {"u"});
  // 2 + i u - i u^-1 = (1 + i u)(1 + i u)*: conductor 4 witness
  RingMatrix<C> W(z, 1);
  W.at(0, 0) = elem(z, {{"e", C(2)},
                        {"u", C::zeta(4, 1)},
                        {"u^-1", C(Rational(-1)) * C::zeta(4, 1)}});
  REQUIRE(is_hermitian(W));
  auto bounds = determinant_lower_bound_rhs(W);
  CHECK(bounds.b0 == doctest::Approx(-std::log(6.0)));

  auto p = QuotientMap::mod_quotient(z, 64);
  auto r = build_inverse_limit_stage(W, p);
  auto cls = p.target->conjugacy_class(p.apply(z->parse("u")));
  auto sd = spectral_data(r, {cls}, default_tau(W));
  auto rep = determinant_report(r, sd, bounds);

  CHECK(rep.lndet >= bounds.b0 - 1e-9);
  CHECK(rep.lndet >= 0.0 - 1e-9);  // integer det* certificate territory
  REQUIRE(rep.lndet_dev_re.size() == 1);
  CHECK(rep.lndet_dev_re[0] >= bounds.b1 - 1e-9);
  CHECK(rep.lndet_dev_im[0] >= bounds.b1 - 1e-9);
  REQUIRE(rep.kernel_dim_exact_value.has_value());
  CHECK(*rep.kernel_dim_exact_value == Rational(1, 64));
  CHECK(std::abs(rep.kernel_dim_float - 1.0 / 64) <= 1e-9);

  auto text = determinant_report_text(rep, sd);
  CHECK(text.find("lndet ") != std::string::npos);
  CHECK(text.find("lower_bound_b0 ") != std::string::npos);
  CHECK(text.find("kernel_dim 1/64") != std::string::npos);
}

TEST_CASE("spectral data input validation") {
  auto g = Group::cyclic(4);
  auto I = RingMatrix<C>::identity(g, 1);
  auto r = finite_stage(I);

  ConjugacyClassInfo bad;
  bad.representative = g->identity();
  bad.status = ClassStatus::Infinite;
  CHECK_THROWS_AS(spectral_data(r, {bad}, 1e-12), std::invalid_argument);

  auto sd = spectral_data(r, {}, 1e-12);
  CHECK_THROWS_AS(density(sd, DensityKind::DelocRe, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(fuglede_kadison(sd, DensityKind::DelocRaw), std::invalid_argument);
  CHECK_THROWS_AS(kernel_fourier_coefficient(sd, 2), std::invalid_argument);
}
