#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace mustab {

/// Exact rational number. Every distance, weight and threshold in the
/// library is one of these; there is no floating-point path.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p/q", "p" or "-p/q" (whitespace not allowed). Throws
/// std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical form: "p/q" in lowest terms, or "p" when q == 1.
std::string format_rational(const Rational& value);

}  // namespace mustab
