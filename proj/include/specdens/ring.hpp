#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "specdens/cyclotomic.hpp"
#include "specdens/groups.hpp"

namespace specdens {

/// Coefficient scalars: exact cyclotomic or complex double. The traits pin
/// down the handful of operations the templates need beyond +,-,*.
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Cyclotomic> {
  static constexpr bool exact = true;
  static Cyclotomic zero() { return Cyclotomic(); }
  static Cyclotomic one() { return Cyclotomic(1); }
  static bool is_zero(const Cyclotomic& c) { return c.is_zero(); }
  static Cyclotomic conj(const Cyclotomic& c) { return c.conj(); }
  static std::complex<double> to_complex(const Cyclotomic& c) { return c.to_complex(); }
  static Cyclotomic from_rational(const Rational& r) { return Cyclotomic(r); }
  // 1/(2i) = -zeta_4/2, exactly.
  static Cyclotomic half_over_i() {
    return Cyclotomic(Rational(-1, 2)) * Cyclotomic::zeta(4, 1);
  }
};

template <>
struct scalar_traits<std::complex<double>> {
  static constexpr bool exact = false;
  static std::complex<double> zero() { return {0.0, 0.0}; }
  static std::complex<double> one() { return {1.0, 0.0}; }
  static bool is_zero(const std::complex<double>& c) { return c == zero(); }
  static std::complex<double> conj(const std::complex<double>& c) { return std::conj(c); }
  static std::complex<double> to_complex(const std::complex<double>& c) { return c; }
  static std::complex<double> from_rational(const Rational& r) { return {to_double(r), 0.0}; }
  static std::complex<double> half_over_i() { return {0.0, -0.5}; }
};

/// Finitely supported map G -> S. Zero coefficients are never stored.
template <class S>
class RingElement {
 public:
  using Terms = std::map<GroupElement, S, ElementLess>;

  explicit RingElement(GroupPtr g) : g_(std::move(g)) {
    if (!g_) throw std::invalid_argument("null group");
  }

  static RingElement monomial(GroupPtr g, const GroupElement& x, S c) {
    RingElement r(std::move(g));
    r.add_term(x, std::move(c));
    return r;
  }

  const GroupPtr& group() const { return g_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  long support_size() const { return static_cast<long>(terms_.size()); }

  S coeff(const GroupElement& x) const {
    auto it = terms_.find(x);
    return it == terms_.end() ? scalar_traits<S>::zero() : it->second;
  }

  void add_term(const GroupElement& x, S c) {
    g_->check_element(x);
    auto it = terms_.find(x);
    if (it == terms_.end()) {
      if (!scalar_traits<S>::is_zero(c)) terms_.emplace(x, std::move(c));
      return;
    }
    it->second = it->second + c;
    if (scalar_traits<S>::is_zero(it->second)) terms_.erase(it);
  }

  RingElement operator+(const RingElement& o) const {
    require_same_group(o);
    RingElement r = *this;
    for (const auto& [x, c] : o.terms_) r.add_term(x, c);
    return r;
  }

  RingElement operator-(const RingElement& o) const {
    require_same_group(o);
    RingElement r = *this;
    for (const auto& [x, c] : o.terms_) r.add_term(x, scalar_traits<S>::zero() - c);
    return r;
  }

  RingElement scaled(const S& c) const {
    RingElement r(g_);
    for (const auto& [x, v] : terms_) r.add_term(x, c * v);
    return r;
  }

  /// Convolution: (a*b)(g) = sum_h a(h) b(h^-1 g).
  RingElement operator*(const RingElement& o) const {
    require_same_group(o);
    RingElement r(g_);
    for (const auto& [x, cx] : terms_)
      for (const auto& [y, cy] : o.terms_) r.add_term(g_->mul(x, y), cx * cy);
    return r;
  }

  /// a*(g) = conj(a(g^-1)).
  RingElement adjoint() const {
    RingElement r(g_);
    for (const auto& [x, c] : terms_)
      r.add_term(g_->inverse(x), scalar_traits<S>::conj(c));
    return r;
  }

  /// Pushforward along a homomorphism; colliding images are summed.
  RingElement mapped(const QuotientMap& p) const {
    if (!p.source->same_descriptor(*g_))
      throw std::invalid_argument("map source does not match element group");
    RingElement r(p.target);
    for (const auto& [x, c] : terms_) r.add_term(p.apply(x), c);
    return r;
  }

  bool operator==(const RingElement& o) const {
    if (!g_->same_descriptor(*o.g_)) return false;
    if (terms_.size() != o.terms_.size()) return false;
    for (auto it = terms_.begin(), jt = o.terms_.begin(); it != terms_.end();
         ++it, ++jt) {
      if (!(it->first == jt->first) || !(it->second == jt->second)) return false;
    }
    return true;
  }
  bool operator!=(const RingElement& o) const { return !(*this == o); }

 private:
  void require_same_group(const RingElement& o) const {
    if (!g_->same_descriptor(*o.g_))
      throw std::invalid_argument("ring elements over different groups");
  }

  GroupPtr g_;
  Terms terms_;
};

/// d x d matrix of ring elements over one group.
template <class S>
class RingMatrix {
 public:
  RingMatrix(GroupPtr g, int d) : g_(std::move(g)), d_(d) {
    if (d_ <= 0) throw std::invalid_argument("dimension must be positive");
    e_.assign(static_cast<size_t>(d_) * d_, RingElement<S>(g_));
  }

  static RingMatrix identity(GroupPtr g, int d) {
    RingMatrix m(std::move(g), d);
    for (int k = 0; k < d; k++)
      m.at(k, k).add_term(m.g_->identity(), scalar_traits<S>::one());
    return m;
  }

  int dim() const { return d_; }
  const GroupPtr& group() const { return g_; }
  RingElement<S>& at(int k, int l) { return e_.at(static_cast<size_t>(k) * d_ + l); }
  const RingElement<S>& at(int k, int l) const {
    return e_.at(static_cast<size_t>(k) * d_ + l);
  }

  RingMatrix operator+(const RingMatrix& o) const {
    require_compatible(o);
    RingMatrix r = *this;
    for (size_t i = 0; i < e_.size(); i++) r.e_[i] = r.e_[i] + o.e_[i];
    return r;
  }

  RingMatrix operator-(const RingMatrix& o) const {
    require_compatible(o);
    RingMatrix r = *this;
    for (size_t i = 0; i < e_.size(); i++) r.e_[i] = r.e_[i] - o.e_[i];
    return r;
  }

  RingMatrix operator*(const RingMatrix& o) const {
    require_compatible(o);
    RingMatrix r(g_, d_);
    for (int k = 0; k < d_; k++)
      for (int l = 0; l < d_; l++) {
        RingElement<S> s(g_);
        for (int m = 0; m < d_; m++) s = s + at(k, m) * o.at(m, l);
        r.at(k, l) = std::move(s);
      }
    return r;
  }

  RingMatrix scaled(const S& c) const {
    RingMatrix r(g_, d_);
    for (size_t i = 0; i < e_.size(); i++) r.e_[i] = e_[i].scaled(c);
    return r;
  }

  /// (A*)_{kl} = adjoint(A_{lk}).
  RingMatrix adjoint() const {
    RingMatrix r(g_, d_);
    for (int k = 0; k < d_; k++)
      for (int l = 0; l < d_; l++) r.at(k, l) = at(l, k).adjoint();
    return r;
  }

  RingMatrix power(int n) const {
    if (n < 0) throw std::invalid_argument("negative matrix power");
    RingMatrix acc = identity(g_, d_);
    for (int i = 0; i < n; i++) acc = acc * *this;
    return acc;
  }

  RingMatrix mapped(const QuotientMap& p) const {
    RingMatrix r(p.target, d_);
    for (size_t i = 0; i < e_.size(); i++) r.e_[i] = e_[i].mapped(p);
    return r;
  }

  bool operator==(const RingMatrix& o) const {
    if (d_ != o.d_ || !g_->same_descriptor(*o.g_)) return false;
    for (size_t i = 0; i < e_.size(); i++)
      if (e_[i] != o.e_[i]) return false;
    return true;
  }
  bool operator!=(const RingMatrix& o) const { return !(*this == o); }

 private:
  void require_compatible(const RingMatrix& o) const {
    if (d_ != o.d_) throw std::invalid_argument("matrix dimension mismatch");
    if (!g_->same_descriptor(*o.g_))
      throw std::invalid_argument("matrices over different groups");
  }

  GroupPtr g_;
  int d_;
  std::vector<RingElement<S>> e_;
};

struct KappaReport {
  long S_A = 0;
  long S_Astar = 0;
  double sup_norm = 0.0;
  double kappa = 0.0;
};

enum class DeviatedPart { Re, Im };

// Traces. The class argument is the conjugacy class of g in the element's
// group; the delocalized trace rejects infinite or undecided classes.

template <class S>
S trace_standard(const RingMatrix<S>& A) {
  S s = scalar_traits<S>::zero();
  auto e = A.group()->identity();
  for (int k = 0; k < A.dim(); k++) s = s + A.at(k, k).coeff(e);
  return s;
}

template <class S>
S trace_delocalized(const RingMatrix<S>& A, const ConjugacyClassInfo& cls) {
  if (cls.status != ClassStatus::Finite)
    throw std::invalid_argument("delocalized trace needs a finite class");
  S s = scalar_traits<S>::zero();
  for (int k = 0; k < A.dim(); k++)
    for (const auto& h : cls.elements) s = s + A.at(k, k).coeff(h);
  return s;
}

/// Class of the elementwise inverses (the class of g^-1).
ConjugacyClassInfo inverse_class(const GroupPtr& g, const ConjugacyClassInfo& cls);

/// Tr^{re} = tr + (tr^C + tr^{C^-1}) / (2|C|),
/// Tr^{im} = tr + (tr^C - tr^{C^-1}) / (2i|C|).
template <class S>
S trace_deviated(const RingMatrix<S>& A, const ConjugacyClassInfo& cls,
                 DeviatedPart part) {
  if (cls.status != ClassStatus::Finite)
    throw std::invalid_argument("deviated trace needs a finite class");
  S del = trace_delocalized(A, cls);
  S del_inv = trace_delocalized(A, inverse_class(A.group(), cls));
  S base = trace_standard(A);
  S scale = scalar_traits<S>::from_rational(Rational(1, 2 * cls.size()));
  if (part == DeviatedPart::Re) return base + scale * (del + del_inv);
  return base + scalar_traits<S>::half_over_i() *
                    scalar_traits<S>::from_rational(Rational(1, cls.size())) *
                    (del - del_inv);
}

/// S(A) = max_k sum_l |supp A_{kl}|, S(A*) the column version,
/// kappa = sqrt(S(A) S(A*)) * |A|_inf. Dominates the operator norm of every
/// finite realization (tested, not assumed).
template <class S>
KappaReport kappa(const RingMatrix<S>& A) {
  KappaReport r;
  for (int k = 0; k < A.dim(); k++) {
    long row = 0, col = 0;
    for (int l = 0; l < A.dim(); l++) {
      row += A.at(k, l).support_size();
      col += A.at(l, k).support_size();
      for (const auto& [x, c] : A.at(k, l).terms())
        r.sup_norm = std::max(r.sup_norm, std::abs(scalar_traits<S>::to_complex(c)));
    }
    r.S_A = std::max(r.S_A, row);
    r.S_Astar = std::max(r.S_Astar, col);
  }
  r.kappa = std::sqrt(static_cast<double>(r.S_A) * static_cast<double>(r.S_Astar)) *
            r.sup_norm;
  return r;
}

template <class S>
bool is_hermitian(const RingMatrix<S>& A) {
  return A == A.adjoint();
}

RingMatrix<std::complex<double>> to_float(const RingMatrix<Cyclotomic>& A);

/// Coefficientwise Galois map zeta_n -> zeta_n^j on the common conductor.
RingMatrix<Cyclotomic> galois_conjugate(const RingMatrix<Cyclotomic>& A, unsigned j);

/// lcm of the minimal conductors of all coefficients; 1 for rational A.
unsigned field_conductor(const RingMatrix<Cyclotomic>& A);

struct DetBoundRhs {
  double b0 = 0.0;  // -d * sum_{j >= 2} ln kappa(sigma_j(A))
  double b1 = 0.0;  // -2d * |sum_{j >= 2} ln kappa(sigma_j(A))|
  unsigned conductor = 1;
  int num_embeddings = 1;
};

DetBoundRhs determinant_lower_bound_rhs(const RingMatrix<Cyclotomic>& A);

/// Kernel threshold shared by the spectral computations and the Fourier
/// oracle: max(1e-10 * kappa(A), 1e-12).
double default_tau(const RingMatrix<Cyclotomic>& A);

}  // namespace specdens
