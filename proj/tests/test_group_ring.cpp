#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <complex>
#include <random>

#include "specdens/ring.hpp"
#include "specdens/ring_io.hpp"

using namespace specdens;
using C = Cyclotomic;

namespace {

RingElement<C> elem(const GroupPtr& g, std::initializer_list<std::pair<const char*, C>> ts) {
  RingElement<C> a(g);
  for (const auto& [w, c] : ts) a.add_term(g->parse(w), c);
  return a;
}

RingElement<C> random_element(const GroupPtr& g, std::mt19937& rng, int nterms,
                              unsigned conductor = 1) {
  RingElement<C> a(g);
  long n = g->element_count();
  for (int t = 0; t < nterms; t++) {
    C c = C(Rational(static_cast<long>(rng() % 7) - 3, 1 + rng() % 3));
    if (conductor > 1) c = c * C::zeta(conductor, rng() % conductor);
    a.add_term(g->element_at(rng() % n), c);
  }
  return a;
}

RingMatrix<C> random_matrix(const GroupPtr& g, std::mt19937& rng, int d, int nterms,
                            unsigned conductor = 1) {
  RingMatrix<C> A(g, d);
  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++) A.at(k, l) = random_element(g, rng, nterms, conductor);
  return A;
}

double cabs(const C& c) { return std::abs(c.to_complex()); }

}  // namespace

TEST_CASE("convolution identities") {
  auto z = Group::free_abelian(1);
  auto one = elem(z, {{"e", C(1)}});
  auto a = elem(z, {{"e", C(1)}, {"u", C(1)}});
  auto b = elem(z, {{"e", C(1)}, {"u", C(-1)}});
  CHECK(a * b == elem(z, {{"e", C(1)}, {"u^2", C(-1)}}));
  CHECK(one * a == a);
  CHECK(a * one == a);

  auto z2 = Group::cyclic(2, "t");
  auto c = elem(z2, {{"e", C(1)}, {"t", C(1)}});
  CHECK(c * c == elem(z2, {{"e", C(2)}, {"t", C(2)}}));
}

TEST_CASE("adjoint is an involutive antihomomorphism") {
  auto g = Group::cyclic(3);
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; trial++) {
    auto A = random_matrix(g, rng, 2, 2, 12);
    auto B = random_matrix(g, rng, 2, 2, 12);
    CHECK(A.adjoint().adjoint() == A);
    CHECK((A * B).adjoint() == B.adjoint() * A.adjoint());
    CHECK((A + B).adjoint() == A.adjoint() + B.adjoint());
  }
}

TEST_CASE("standard trace") {
  auto z = Group::free_abelian(1);
  CHECK(trace_standard(RingMatrix<C>::identity(z, 3)) == C(3));
  RingMatrix<C> U(z, 1);
  U.at(0, 0) = elem(z, {{"u", C(1)}});
  CHECK(trace_standard(U) == C(0));
  RingMatrix<C> lap(z, 1);
  lap.at(0, 0) = elem(z, {{"e", C(2)}, {"u", C(-1)}, {"u^-1", C(-1)}});
  CHECK(trace_standard(lap) == C(2));
}

TEST_CASE("delocalized trace") {
  auto z2 = Group::cyclic(2, "u");
  auto cls_u = z2->conjugacy_class(z2->generator(0));
  RingMatrix<C> A(z2, 1);
  A.at(0, 0) = elem(z2, {{"e", C(1)}, {"u", C(1)}});
  CHECK(trace_delocalized(A, cls_u) == C(1));

  auto z4 = Group::cyclic(4);
  auto cls = z4->conjugacy_class(z4->parse("u^2"));
  CHECK(trace_delocalized(RingMatrix<C>::identity(z4, 2), cls) == C(0));

  ConjugacyClassInfo inf;
  inf.status = ClassStatus::Infinite;
  CHECK_THROWS(trace_delocalized(A, inf));
}

TEST_CASE("coefficient-of-e dominates off-diagonal coefficients of b*b") {
  // For a = b*b, |<a d_e, d_g>| <= <a d_e, d_e> entrywise on the diagonal.
  std::mt19937 rng(29);
  auto z4 = Group::cyclic(4);
  auto s3 = Group::symmetric(3);
  for (auto g : {z4, s3}) {
    for (int trial = 0; trial < 250; trial++) {
      auto b = random_matrix(g, rng, 1 + static_cast<int>(rng() % 2), 3, 4);
      auto a = b.adjoint() * b;
      for (int k = 0; k < a.dim(); k++) {
        double diag = a.at(k, k).coeff(g->identity()).to_complex().real();
        for (const auto& [x, c] : a.at(k, k).terms())
          CHECK(cabs(c) <= diag + 1e-12);
      }
      // and the delocalized bound |tr^cls(a)| <= |cls| tr(a)
      auto cls = g->conjugacy_class(g->element_at(1 + rng() % (g->element_count() - 1)));
      REQUIRE(cls.status == ClassStatus::Finite);
      double lhs = cabs(trace_delocalized(a, cls));
      double rhs = cls.size() * trace_standard(a).to_complex().real();
      CHECK(lhs <= rhs + 1e-12);
    }
  }
}

TEST_CASE("deviated traces") {
  auto z2 = Group::cyclic(2, "t");
  auto cls_t = z2->conjugacy_class(z2->generator(0));
  // identity: delocalized part vanishes
  auto I3 = RingMatrix<C>::identity(z2, 3);
  CHECK(trace_deviated(I3, cls_t, DeviatedPart::Re) == C(3));
  CHECK(trace_deviated(I3, cls_t, DeviatedPart::Im) == C(3));
  // 1 + t at g = t: 1 + (1/2)(1+1) = 2
  RingMatrix<C> A(z2, 1);
  A.at(0, 0) = elem(z2, {{"e", C(1)}, {"t", C(1)}});
  CHECK(trace_deviated(A, cls_t, DeviatedPart::Re) == C(2));

  // Hermitian input gives real values; b*b gives nonnegative ones.
  std::mt19937 rng(31);
  auto z4 = Group::cyclic(4);
  auto cls_u = z4->conjugacy_class(z4->generator(0));
  for (int trial = 0; trial < 250; trial++) {
    auto b = random_matrix(z4, rng, 2, 3, 4);
    auto a = b.adjoint() * b;
    for (auto part : {DeviatedPart::Re, DeviatedPart::Im}) {
      auto v = trace_deviated(a, cls_u, part).to_complex();
      CHECK(std::abs(v.imag()) <= 1e-12);
      CHECK(v.real() >= -1e-12);
    }
  }
}

TEST_CASE("trace property on a nonabelian group") {
  auto s3 = Group::symmetric(3);
  std::mt19937 rng(37);
  auto cls = s3->conjugacy_class(s3->generator(1));  // 3-cycles, size 2
  REQUIRE(cls.size() == 2);
  for (int trial = 0; trial < 60; trial++) {
    auto A = random_matrix(s3, rng, 2, 3, 4);
    auto B = random_matrix(s3, rng, 2, 3, 4);
    CHECK(trace_standard(A * B) == trace_standard(B * A));
    CHECK(trace_delocalized(A * B, cls) == trace_delocalized(B * A, cls));
  }
}

TEST_CASE("kappa reports") {
  auto z = Group::free_abelian(1);
  auto I = RingMatrix<C>::identity(z, 2);
  auto r0 = kappa(I);
  CHECK(r0.S_A == 1);
  CHECK(r0.S_Astar == 1);
  CHECK(r0.sup_norm == doctest::Approx(1.0));
  CHECK(r0.kappa == doctest::Approx(1.0));

  RingMatrix<C> lap(z, 1);
  lap.at(0, 0) = elem(z, {{"e", C(2)}, {"u", C(-1)}, {"u^-1", C(-1)}});
  auto r1 = kappa(lap);
  CHECK(r1.S_A == 3);
  CHECK(r1.S_Astar == 3);
  CHECK(r1.sup_norm == doctest::Approx(2.0));
  CHECK(r1.kappa == doctest::Approx(6.0));

  auto g = Group::direct_product({Group::cyclic(2, "t"), Group::free_abelian(1)});
  RingMatrix<C> fac(g, 1), lap2(g, 1);
  fac.at(0, 0) = elem(g, {{"e", C(1)}, {"t", C(-1)}});
  lap2.at(0, 0) = elem(g, {{"e", C(2)}, {"u", C(-1)}, {"u^-1", C(-1)}});
  auto prod = fac * lap2;
  auto r2 = kappa(prod);
  CHECK(r2.S_A == 6);
  CHECK(r2.S_Astar == 6);
  CHECK(r2.sup_norm == doctest::Approx(2.0));
  CHECK(r2.kappa == doctest::Approx(12.0));
}

TEST_CASE("galois conjugation") {
  auto z = Group::free_abelian(1);
  std::mt19937 rng(41);
  // rational matrices are fixed
  auto A = random_matrix(Group::cyclic(3), rng, 2, 2, 1);
  CHECK(galois_conjugate(A, 5) == A);

  RingMatrix<C> B(z, 1);
  B.at(0, 0) = elem(z, {{"u", C::zeta(4, 1)}});
  auto B3 = galois_conjugate(B, 3);
  CHECK(B3.at(0, 0).coeff(z->generator(0)) == C::zeta(4, 3));

  // composition law at conductor 5
  auto Cm = random_matrix(Group::cyclic(2), rng, 2, 2, 5);
  CHECK(galois_conjugate(galois_conjugate(Cm, 2), 2) == galois_conjugate(Cm, 4));

  CHECK_THROWS(galois_conjugate(B, 2));
}

TEST_CASE("field conductor and determinant bound right-hand sides") {
  auto z = Group::free_abelian(1);
  RingMatrix<C> R(z, 1);
  R.at(0, 0) = elem(z, {{"e", C(2)}, {"u", C(-1)}});
  CHECK(field_conductor(R) == 1);
  auto b = determinant_lower_bound_rhs(R);
  CHECK(b.b0 == 0.0);
  CHECK(b.b1 == 0.0);
  CHECK(b.num_embeddings == 1);

  // conductor 4, one nontrivial embedding, kappa(sigma(A)) = 6
  RingMatrix<C> A(z, 1);
  auto i = C::zeta(4, 1);
  A.at(0, 0) = elem(z, {{"e", C(2) * i}, {"u", C(-1) * i}, {"u^-1", C(-1) * i}});
  auto d1 = determinant_lower_bound_rhs(A);
  CHECK(d1.conductor == 4);
  CHECK(d1.num_embeddings == 2);
  CHECK(d1.b0 == doctest::Approx(-std::log(6.0)));
  CHECK(d1.b1 == doctest::Approx(-2.0 * std::log(6.0)));

  // block-diagonal doubling doubles both
  RingMatrix<C> A2(z, 2);
  A2.at(0, 0) = A.at(0, 0);
  A2.at(1, 1) = A.at(0, 0);
  auto d2 = determinant_lower_bound_rhs(A2);
  CHECK(d2.b0 == doctest::Approx(2.0 * d1.b0));
  CHECK(d2.b1 == doctest::Approx(2.0 * d1.b1));

  // mixed conductors lift to the lcm
  RingMatrix<C> M(z, 1);
  M.at(0, 0) = elem(z, {{"e", C::zeta(4, 1)}, {"u", C::zeta(3, 1)}});
  CHECK(field_conductor(M) == 12);
  CHECK(determinant_lower_bound_rhs(M).num_embeddings == 4);
}

TEST_CASE("exact and float shadows agree") {
  std::mt19937 rng(43);
  auto g = Group::cyclic(6);
  for (int trial = 0; trial < 40; trial++) {
    auto A = random_matrix(g, rng, 2, 3, 12);
    auto B = random_matrix(g, rng, 2, 3, 12);
    auto exact = to_float(A * B);
    auto shadow = to_float(A) * to_float(B);
    for (int k = 0; k < 2; k++)
      for (int l = 0; l < 2; l++) {
        auto diff = exact.at(k, l) - shadow.at(k, l);
        for (const auto& [x, c] : diff.terms()) CHECK(std::abs(c) <= 1e-9);
      }
  }
}

TEST_CASE("pushforward sums collisions") {
  auto z = Group::free_abelian(1);
  auto p = QuotientMap::mod_quotient(z, 2);
  auto a = elem(z, {{"e", C(1)}, {"u", C(1)}, {"u^2", C(1)}, {"u^3", C(1)}});
  auto img = a.mapped(p);
  CHECK(img.coeff(p.target->identity()) == C(2));
  CHECK(img.coeff(p.target->generator(0)) == C(2));
  CHECK(img.support_size() == 2);
}

TEST_CASE("matrix serialization round trip") {
  auto g = Group::direct_product({Group::cyclic(2, "t"), Group::free_abelian(1)});
  std::mt19937 rng(47);
  RingMatrix<C> A(g, 2);
  A.at(0, 0) = elem(g, {{"e", C(2)}, {"t*u^3", C(Rational(-1, 2)) * C::zeta(8, 3)}});
  A.at(0, 1) = elem(g, {{"u^-2", C::zeta(4, 1)}});
  A.at(1, 0) = A.at(0, 1).adjoint();
  auto j = serialize_matrix(A);
  auto back = parse_matrix(j, g);
  CHECK(back == A);

  CHECK_THROWS(parse_matrix(nlohmann::json::array(), g));
  CHECK_THROWS(parse_element(nlohmann::json{{"not", "a list"}}, g));
}

TEST_CASE("hermitian predicate") {
  auto z = Group::free_abelian(1);
  RingMatrix<C> lap(z, 1);
  lap.at(0, 0) = elem(z, {{"e", C(2)}, {"u", C(-1)}, {"u^-1", C(-1)}});
  CHECK(is_hermitian(lap));
  RingMatrix<C> skew(z, 1);
  skew.at(0, 0) = elem(z, {{"u", C(1)}});
  CHECK_FALSE(is_hermitian(skew));
  // i*u - i*u^-1 is hermitian
  RingMatrix<C> herm(z, 1);
  herm.at(0, 0) = elem(z, {{"u", C::zeta(4, 1)}, {"u^-1", C::zeta(4, 3)}});
  CHECK(is_hermitian(herm));
}
