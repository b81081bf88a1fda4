#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <string>

namespace specdens {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Parses "p", "p/q", or a plain decimal like "0.25" into an exact rational.
Rational parse_rational(const std::string& s);

/// Canonical form "p" or "p/q" with q > 0.
std::string format_rational(const Rational& r);

}  // namespace specdens
