#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace granular {

// Exact arithmetic only. Every quantity in this library is a Rational or an
// Int; floating point never enters any computation or serialized artifact.
using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct ZeroDivisor : std::domain_error {
  ZeroDivisor() : std::domain_error("division step requires a positive divisor") {}
};

inline int sign_of(const Rational& x) {
  if (x > 0) return 1;
  if (x < 0) return -1;
  return 0;
}

inline Rational abs_of(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline bool is_integer(const Rational& x) { return denominator(x) == 1; }

// floor(x) as an exact integer.
inline Int floor_of(const Rational& x) {
  Int q = numerator(x) / denominator(x);
  if (numerator(x) < 0 && q * denominator(x) != numerator(x)) --q;
  return q;
}

inline Int ceil_of(const Rational& x) {
  Int q = numerator(x) / denominator(x);
  if (numerator(x) > 0 && q * denominator(x) != numerator(x)) ++q;
  return q;
}

// 2^k for any integer k, exact.
inline Rational pow2(long k) {
  if (k >= 0) return Rational(Int(1) << static_cast<unsigned>(k));
  return Rational(Int(1), Int(1) << static_cast<unsigned>(-k));
}

// True iff x is an integer multiple of unit (unit > 0).
inline bool is_multiple_of(const Rational& x, const Rational& unit) {
  if (unit <= 0) throw ZeroDivisor();
  return is_integer(Rational(x / unit));
}

// Division with remainder for capitals: the largest integer q with q*m <= t,
// plus r = t - q*m, so 0 <= r < m. Requires t >= 0 and m > 0.
struct DivisionResult {
  Int quotient;
  Rational remainder;
};

inline DivisionResult divide(const Rational& t, const Rational& m) {
  if (m <= 0) throw ZeroDivisor();
  if (t < 0) throw std::invalid_argument("divide: dividend must be nonnegative");
  Int q = (numerator(t) * denominator(m)) / (denominator(t) * numerator(m));
  return {q, Rational(t - q * m)};
}

// Serialized form used by every file format: "numerator/denominator".
inline std::string fraction_string(const Rational& x) {
  if (denominator(x) == 1) return numerator(x).str();
  return numerator(x).str() + "/" + denominator(x).str();
}

inline std::string fraction_string(const Int& x) { return x.str(); }

inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { return std::invalid_argument("not a rational: '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  std::size_t slash = text.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(Int(std::string(text)));
    Int num{std::string(text.substr(0, slash))};
    Int den{std::string(text.substr(slash + 1))};
    if (den <= 0) throw bad();
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw bad();
  }
}

}  // namespace granular
