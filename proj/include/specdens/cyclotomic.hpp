#pragma once

#include "specdens/numeric.hpp"

#include <complex>
#include <string>
#include <vector>

namespace specdens {

unsigned euler_phi(unsigned n);

/// Monic n-th cyclotomic polynomial; coefficient of x^k at index k,
/// size euler_phi(n) + 1.
const std::vector<Rational>& cyclotomic_polynomial(unsigned n);

/// Element of the cyclotomic field Q(zeta_n), held in the power basis
/// 1, zeta, ..., zeta^{phi(n)-1} after reduction mod the n-th cyclotomic
/// polynomial. Conductor 1 is plain Q. Binary operations lift both sides to
/// the lcm conductor. Values are immutable in spirit: every operation
/// returns a reduced canonical representative, so operator== is exact
/// equality in the field.
class Cyclotomic {
 public:
  Cyclotomic() : n_(1), c_(1, Rational(0)) {}
  explicit Cyclotomic(const Rational& r) : n_(1), c_(1, r) {}
  explicit Cyclotomic(long v) : n_(1), c_(1, Rational(v)) {}

  /// zeta_n^power.
  static Cyclotomic zeta(unsigned n, long power = 1);

  unsigned conductor() const { return n_; }
  const std::vector<Rational>& coords() const { return c_; }

  bool is_zero() const;
  bool is_rational() const;
  /// Constant coordinate; equals the value exactly when is_rational().
  Rational rational_part() const { return c_[0]; }
  /// Smallest m dividing the conductor with value in Q(zeta_m).
  unsigned minimal_conductor() const;

  Cyclotomic conj() const;
  /// Galois action zeta -> zeta^j; requires gcd(j, conductor) = 1.
  Cyclotomic galois(unsigned j) const;
  Cyclotomic inverse() const;
  std::complex<double> to_complex() const;

  Cyclotomic lifted(unsigned m) const;

  Cyclotomic operator-() const;
  Cyclotomic operator+(const Cyclotomic& o) const;
  Cyclotomic operator-(const Cyclotomic& o) const;
  Cyclotomic operator*(const Cyclotomic& o) const;
  Cyclotomic operator/(const Cyclotomic& o) const;
  Cyclotomic& operator+=(const Cyclotomic& o) { return *this = *this + o; }
  Cyclotomic& operator-=(const Cyclotomic& o) { return *this = *this - o; }
  Cyclotomic& operator*=(const Cyclotomic& o) { return *this = *this * o; }
  bool operator==(const Cyclotomic& o) const;
  bool operator!=(const Cyclotomic& o) const { return !(*this == o); }

  /// Grammar: sum of terms "p/q", "p/q*z^k@n", "z^k@n", "z@n", with optional
  /// signs and whitespace; also plain decimals ("0.25").
  static Cyclotomic parse(const std::string& s);
  std::string str() const;

 private:
  unsigned n_;
  std::vector<Rational> c_;  // size euler_phi(n_)

  // Reduces a raw power-coefficient vector (any length) mod Phi_n.
  static std::vector<Rational> reduce_raw(unsigned n, std::vector<Rational> raw);
  Cyclotomic(unsigned n, std::vector<Rational> reduced)
      : n_(n), c_(std::move(reduced)) {}
};

}  // namespace specdens
