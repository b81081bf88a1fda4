#include "specdens/cyclotomic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace specdens {

namespace {

// cpp_int's string constructor treats a leading 0 as an octal prefix, so
// integers are parsed digit by digit here.
Int parse_int_base10(const std::string& t) {
  size_t i = 0;
  bool neg = false;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) neg = t[i++] == '-';
  if (i >= t.size()) throw std::invalid_argument("bad integer literal '" + t + "'");
  Int v = 0;
  for (; i < t.size(); i++) {
    if (t[i] < '0' || t[i] > '9')
      throw std::invalid_argument("bad integer literal '" + t + "'");
    v = v * 10 + (t[i] - '0');
  }
  return neg ? -v : v;
}

}  // namespace

Rational parse_rational(const std::string& s) {
  std::string t;
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  if (t.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = t.find('/');
  if (slash != std::string::npos) {
    Int p = parse_int_base10(t.substr(0, slash));
    Int q = parse_int_base10(t.substr(slash + 1));
    if (q == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return Rational(p, q);
  }
  auto dot = t.find('.');
  if (dot != std::string::npos) {
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    size_t frac_len = t.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
      throw std::invalid_argument("bad decimal '" + s + "'");
    Int p = parse_int_base10(digits);
    Int q = 1;
    for (size_t i = 0; i < frac_len; i++) q *= 10;
    return Rational(p, q);
  }
  return Rational(parse_int_base10(t));
}

std::string format_rational(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << "/" << denominator(r);
  return os.str();
}

unsigned euler_phi(unsigned n) {
  unsigned result = n, m = n;
  for (unsigned p = 2; p * p <= m; p++) {
    if (m % p == 0) {
      while (m % p == 0) m /= p;
      result -= result / p;
    }
  }
  if (m > 1) result -= result / m;
  return result;
}

namespace {

// Exact division of polynomials over Q; remainder must vanish.
std::vector<Rational> poly_div_exact(std::vector<Rational> num,
                                     const std::vector<Rational>& den) {
  if (den.empty() || den.back() == 0) throw std::logic_error("bad divisor");
  if (num.size() < den.size()) throw std::logic_error("bad division");
  std::vector<Rational> quot(num.size() - den.size() + 1, Rational(0));
  for (size_t k = quot.size(); k-- > 0;) {
    Rational f = num[k + den.size() - 1] / den.back();
    quot[k] = f;
    if (f != 0)
      for (size_t j = 0; j < den.size(); j++) num[k + j] -= f * den[j];
  }
  for (const auto& c : num)
    if (c != 0) throw std::logic_error("inexact polynomial division");
  return quot;
}

std::vector<unsigned> divisors_of(unsigned n) {
  std::vector<unsigned> d;
  for (unsigned i = 1; i <= n; i++)
    if (n % i == 0) d.push_back(i);
  return d;
}

}  // namespace

const std::vector<Rational>& cyclotomic_polynomial(unsigned n) {
  if (n == 0) throw std::invalid_argument("conductor must be positive");
  static std::map<unsigned, std::vector<Rational>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  // Ascending fill: every proper divisor of a divisor of n is an earlier
  // divisor of n, so Phi_d = (x^d - 1) / prod Phi_dd is always resolvable.
  for (unsigned d : divisors_of(n)) {
    if (cache.count(d)) continue;
    if (d == 1) {
      cache[1] = {Rational(-1), Rational(1)};  // x - 1
      continue;
    }
    std::vector<Rational> num(d + 1, Rational(0));
    num[0] = -1;
    num[d] = 1;  // x^d - 1
    for (unsigned dd : divisors_of(d))
      if (dd != d) num = poly_div_exact(num, cache.at(dd));
    cache[d] = std::move(num);
  }
  return cache.at(n);
}

std::vector<Rational> Cyclotomic::reduce_raw(unsigned n, std::vector<Rational> raw) {
  const auto& phi = cyclotomic_polynomial(n);
  size_t deg = phi.size() - 1;  // = euler_phi(n)
  if (raw.size() < deg) raw.resize(deg, Rational(0));
  // Long division remainder; phi is monic.
  for (size_t k = raw.size(); k-- > deg;) {
    Rational f = raw[k];
    if (f == 0) continue;
    raw[k] = 0;
    for (size_t j = 0; j < deg; j++) raw[k - deg + j] -= f * phi[j];
  }
  raw.resize(deg);
  return raw;
}

Cyclotomic Cyclotomic::zeta(unsigned n, long power) {
  if (n == 0) throw std::invalid_argument("conductor must be positive");
  long k = power % static_cast<long>(n);
  if (k < 0) k += n;
  std::vector<Rational> raw(static_cast<size_t>(k) + 1, Rational(0));
  raw[static_cast<size_t>(k)] = 1;
  return Cyclotomic(n, reduce_raw(n, std::move(raw)));
}

bool Cyclotomic::is_zero() const {
  for (const auto& c : c_)
    if (c != 0) return false;
  return true;
}

bool Cyclotomic::is_rational() const {
  for (size_t i = 1; i < c_.size(); i++)
    if (c_[i] != 0) return false;
  return true;
}

Cyclotomic Cyclotomic::lifted(unsigned m) const {
  if (m == n_) return *this;
  if (m % n_ != 0) throw std::invalid_argument("lift target not a multiple of conductor");
  unsigned step = m / n_;
  std::vector<Rational> raw(static_cast<size_t>(euler_phi(n_) - 1) * step + 1,
                            Rational(0));
  for (size_t k = 0; k < c_.size(); k++)
    if (c_[k] != 0) raw[k * step] += c_[k];
  return Cyclotomic(m, reduce_raw(m, std::move(raw)));
}

Cyclotomic Cyclotomic::operator-() const {
  Cyclotomic r = *this;
  for (auto& c : r.c_) c = -c;
  return r;
}

Cyclotomic Cyclotomic::operator+(const Cyclotomic& o) const {
  unsigned m = std::lcm(n_, o.n_);
  Cyclotomic a = lifted(m), b = o.lifted(m);
  for (size_t i = 0; i < a.c_.size(); i++) a.c_[i] += b.c_[i];
  return a;
}

Cyclotomic Cyclotomic::operator-(const Cyclotomic& o) const { return *this + (-o); }

Cyclotomic Cyclotomic::operator*(const Cyclotomic& o) const {
  unsigned m = std::lcm(n_, o.n_);
  Cyclotomic a = lifted(m), b = o.lifted(m);
  std::vector<Rational> raw(a.c_.size() + b.c_.size() - 1, Rational(0));
  for (size_t i = 0; i < a.c_.size(); i++) {
    if (a.c_[i] == 0) continue;
    for (size_t j = 0; j < b.c_.size(); j++)
      if (b.c_[j] != 0) raw[i + j] += a.c_[i] * b.c_[j];
  }
  return Cyclotomic(m, reduce_raw(m, std::move(raw)));
}

namespace {

// Extended gcd over Q[x]: returns (g, u) with u*a == g mod modulus and g a
// nonzero constant when gcd(a, modulus) = 1.
std::pair<std::vector<Rational>, std::vector<Rational>> poly_inverse_pair(
    std::vector<Rational> a, std::vector<Rational> m) {
  auto trim = [](std::vector<Rational>& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
  };
  auto is_zero_poly = [](const std::vector<Rational>& p) { return p.empty(); };
  trim(a);
  trim(m);
  // Invariant: r0 = u0 * a (mod original m), r1 = u1 * a (mod original m).
  std::vector<Rational> r0 = m, r1 = a;
  std::vector<Rational> u0 = {}, u1 = {Rational(1)};
  while (!is_zero_poly(r1)) {
    // quotient/remainder r0 / r1
    std::vector<Rational> q, rem = r0;
    if (rem.size() >= r1.size()) {
      q.assign(rem.size() - r1.size() + 1, Rational(0));
      for (size_t k = q.size(); k-- > 0;) {
        if (rem.size() < k + r1.size()) continue;
        Rational f = rem[k + r1.size() - 1] / r1.back();
        q[k] = f;
        if (f != 0)
          for (size_t j = 0; j < r1.size(); j++) rem[k + j] -= f * r1[j];
        trim(rem);
      }
    }
    // (r0, r1) <- (r1, rem); (u0, u1) <- (u1, u0 - q*u1)
    std::vector<Rational> qu1(q.size() + u1.size(), Rational(0));
    if (!u1.empty())
      for (size_t i = 0; i < q.size(); i++)
        if (q[i] != 0)
          for (size_t j = 0; j < u1.size(); j++) qu1[i + j] += q[i] * u1[j];
    std::vector<Rational> nu = u0;
    if (nu.size() < qu1.size()) nu.resize(qu1.size(), Rational(0));
    for (size_t i = 0; i < qu1.size(); i++) nu[i] -= qu1[i];
    trim(nu);
    r0 = std::move(r1);
    r1 = std::move(rem);
    u0 = std::move(u1);
    u1 = std::move(nu);
  }
  return {r0, u0};
}

}  // namespace

Cyclotomic Cyclotomic::inverse() const {
  if (is_zero()) throw std::domain_error("inverse of zero");
  if (is_rational()) return Cyclotomic(Rational(1) / c_[0]).lifted(n_);
  std::vector<Rational> a(c_.begin(), c_.end());
  auto [g, u] = poly_inverse_pair(a, cyclotomic_polynomial(n_));
  if (g.size() != 1 || g[0] == 0)
    throw std::logic_error("element not invertible mod cyclotomic polynomial");
  std::vector<Rational> raw = u;
  for (auto& c : raw) c /= g[0];
  return Cyclotomic(n_, reduce_raw(n_, std::move(raw)));
}

Cyclotomic Cyclotomic::operator/(const Cyclotomic& o) const {
  return *this * o.inverse();
}

bool Cyclotomic::operator==(const Cyclotomic& o) const {
  unsigned m = std::lcm(n_, o.n_);
  return lifted(m).c_ == o.lifted(m).c_;
}

Cyclotomic Cyclotomic::galois(unsigned j) const {
  j %= n_;
  if (std::gcd(j, n_) != 1)
    throw std::invalid_argument("galois exponent not coprime to conductor");
  std::vector<Rational> raw(static_cast<size_t>(n_), Rational(0));
  for (size_t k = 0; k < c_.size(); k++)
    if (c_[k] != 0) raw[(k * j) % n_] += c_[k];
  return Cyclotomic(n_, reduce_raw(n_, std::move(raw)));
}

Cyclotomic Cyclotomic::conj() const {
  if (n_ == 1) return *this;
  return galois(n_ - 1);
}

std::complex<double> Cyclotomic::to_complex() const {
  std::complex<double> s(0.0, 0.0);
  for (size_t k = 0; k < c_.size(); k++) {
    if (c_[k] == 0) continue;
    double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / n_;
    s += to_double(c_[k]) * std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return s;
}

unsigned Cyclotomic::minimal_conductor() const {
  if (is_rational()) return 1;
  for (unsigned m : divisors_of(n_)) {
    if (m == 1) continue;
    bool invariant = true;
    for (unsigned j = 2; j < n_ && invariant; j++) {
      if (std::gcd(j, n_) != 1) continue;
      if (j % m != 1) continue;
      if (galois(j) != *this) invariant = false;
    }
    if (invariant) return m;
  }
  return n_;
}

Cyclotomic Cyclotomic::parse(const std::string& s) {
  // Split into signed terms at top-level '+'/'-'.
  std::vector<std::pair<int, std::string>> terms;
  std::string cur;
  int sign = 1;
  char prev = 0;
  for (size_t i = 0; i < s.size(); i++) {
    char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if ((ch == '+' || ch == '-') && !cur.empty() && prev != '*' && prev != '^' &&
        prev != '@' && prev != '/') {
      terms.push_back({sign, cur});
      cur.clear();
      sign = (ch == '-') ? -1 : 1;
      prev = 0;
      continue;
    }
    if ((ch == '+' || ch == '-') && cur.empty() && prev == 0) {
      sign = (ch == '-') ? -sign : sign;
      continue;
    }
    cur.push_back(ch);
    prev = ch;
  }
  if (!cur.empty()) terms.push_back({sign, cur});
  if (terms.empty()) throw std::invalid_argument("empty coefficient literal");

  Cyclotomic total;
  for (auto& [sg, t] : terms) {
    Rational coeff(1);
    std::string zpart;
    auto star = t.find("*z");
    if (star != std::string::npos) {
      coeff = parse_rational(t.substr(0, star));
      zpart = t.substr(star + 1);
    } else if (!t.empty() && t[0] == 'z') {
      zpart = t;
    } else {
      total += Cyclotomic(Rational(sg) * parse_rational(t));
      continue;
    }
    // zpart: z@n or z^k@n
    long k = 1;
    auto at = zpart.find('@');
    if (at == std::string::npos)
      throw std::invalid_argument("cyclotomic term missing conductor: '" + t + "'");
    std::string head = zpart.substr(0, at);
    unsigned n = static_cast<unsigned>(std::stoul(zpart.substr(at + 1)));
    if (head != "z") {
      if (head.rfind("z^", 0) != 0)
        throw std::invalid_argument("bad cyclotomic term '" + t + "'");
      k = std::stol(head.substr(2));
    }
    total += Cyclotomic(Rational(sg) * coeff) * zeta(n, k);
  }
  return total;
}

std::string Cyclotomic::str() const {
  if (is_rational()) return format_rational(c_[0]);
  std::ostringstream os;
  bool first = true;
  for (size_t k = 0; k < c_.size(); k++) {
    if (c_[k] == 0) continue;
    Rational v = c_[k];
    if (first) {
      if (v < 0) {
        os << "-";
        v = -v;
      }
      first = false;
    } else {
      os << (v < 0 ? " - " : " + ");
      if (v < 0) v = -v;
    }
    if (k == 0) {
      os << format_rational(v);
    } else {
      if (v != 1) os << format_rational(v) << "*";
      os << "z^" << k << "@" << n_;
    }
  }
  if (first) return "0";
  return os.str();
}

}  // namespace specdens
