#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>

#include "bdssd/error.hpp"

namespace bdssd {

using Rational = mpq_class;

enum class NumericMode { Float, Rational };

std::string_view to_string(NumericMode mode);
NumericMode parse_numeric_mode(std::string_view text);

/// Per-scalar policy for the two arithmetic modes. Exact mode compares with
/// zero tolerance; float mode uses an absolute per-row tolerance.
template <class T>
struct Scalar;

template <>
struct Scalar<double> {
  static constexpr bool exact = false;
  static double tolerance() { return 1e-10; }
  static double to_double(double x) { return x; }
  static bool finite(double x) { return std::isfinite(x); }
  static double abs(double x) { return std::fabs(x); }
  static std::string to_string(double x);
};

template <>
struct Scalar<Rational> {
  static constexpr bool exact = true;
  static Rational tolerance() { return Rational(0); }
  static double to_double(const Rational& x) { return x.get_d(); }
  static bool finite(const Rational&) { return true; }
  static Rational abs(const Rational& x) { return ::abs(x); }
  static std::string to_string(const Rational& x) { return x.get_str(); }
};

template <class T>
double to_double(const T& x) {
  return Scalar<T>::to_double(x);
}

template <class To, class From>
To scalar_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_same_v<To, double>) {
    return Scalar<From>::to_double(x);
  } else {
    // double -> Rational is exact (binary value).
    return Rational(x);
  }
}

/// A number read from text, kept both exactly and as the nearest double.
struct ParsedNumber {
  Rational exact;
  double value = 0.0;
};

/// Accepts integers, decimals with optional exponent, and "a/b" fractions.
ParsedNumber parse_number(std::string_view text);

/// Shortest decimal text that round-trips the given double.
std::string shortest_repr(double x);

}  // namespace bdssd
