#include "bdssd/numeric.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace bdssd {

std::string_view to_string(NumericMode mode) {
  return mode == NumericMode::Rational ? "rational" : "float";
}

NumericMode parse_numeric_mode(std::string_view text) {
  if (text == "rational" || text == "exact") return NumericMode::Rational;
  if (text == "float" || text == "double") return NumericMode::Float;
  throw Error(ErrorCode::InvalidArgument, "unknown numeric mode '" + std::string(text) + "'");
}

std::string Scalar<double>::to_string(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string shortest_repr(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

Rational parse_decimal(std::string_view s, std::string_view whole) {
  std::string_view body = s;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp = body.substr(e + 1);
    body = body.substr(0, e);
    bool exp_neg = false;
    if (!exp.empty() && (exp.front() == '-' || exp.front() == '+')) {
      exp_neg = exp.front() == '-';
      exp.remove_prefix(1);
    }
    if (!all_digits(exp) || exp.size() > 6)
      throw Error(ErrorCode::ParseError, "malformed exponent in '" + std::string(whole) + "'");
    exponent = std::stol(std::string(exp));
    if (exp_neg) exponent = -exponent;
  }
  std::string digits;
  if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view ip = body.substr(0, dot), fp = body.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
        (!fp.empty() && !all_digits(fp)))
      throw Error(ErrorCode::ParseError, "malformed number '" + std::string(whole) + "'");
    digits = std::string(ip) + std::string(fp);
    exponent -= static_cast<long>(fp.size());
  } else {
    if (!all_digits(body))
      throw Error(ErrorCode::ParseError, "malformed number '" + std::string(whole) + "'");
    digits = std::string(body);
  }
  mpz_class num(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational q = exponent < 0 ? Rational(num, scale) : Rational(mpz_class(num * scale));
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

ParsedNumber parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty number");
  ParsedNumber out;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash), text);
    Rational den = parse_decimal(text.substr(slash + 1), text);
    if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
    out.exact = num / den;
    out.value = std::strtod(std::string(text.substr(0, slash)).c_str(), nullptr) /
                std::strtod(std::string(text.substr(slash + 1)).c_str(), nullptr);
  } else {
    out.exact = parse_decimal(text, text);
    out.value = std::strtod(std::string(text).c_str(), nullptr);
  }
  return out;
}

}  // namespace bdssd
