#ifndef MOMEXT_RATIONAL_HPP
#define MOMEXT_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace momext {

using Rational = mpq_class;
using RationalPoint = std::vector<Rational>;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got, std::string_view what)
      : std::invalid_argument(std::string(what) + ": expected dimension " + std::to_string(expected) +
                              ", got " + std::to_string(got)) {}
};

/// Parses "p/q" or "p" (decimal integers, optional sign). Throws std::invalid_argument.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  auto is_int = [](std::string_view t) {
    if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
    if (t.empty()) return false;
    for (char c : t)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (slash == std::string::npos) {
    if (!is_int(s)) throw std::invalid_argument("malformed rational literal '" + s + "'");
    if (s.front() == '+') s.erase(0, 1);
    return Rational(mpz_class(s, 10));
  }
  std::string num = s.substr(0, slash);
  std::string den = s.substr(slash + 1);
  if (!is_int(num) || !is_int(den) || den.front() == '-' || den.front() == '+')
    throw std::invalid_argument("malformed rational literal '" + s + "'");
  if (num.front() == '+') num.erase(0, 1);
  mpz_class d(den, 10);
  if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
  Rational r(mpz_class(num, 10), d);
  r.canonicalize();
  return r;
}

/// num/den in canonical form (gmpxx does not canonicalize on construction).
inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline std::string format_rational(const Rational& r) { return r.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }
inline double to_double(double x) { return x; }

/// Exact binary value of a double.
inline Rational from_double(double x) {
  Rational r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

inline Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  mpz_pow_ui(result.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(result.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  result.canonicalize();
  return result;
}

inline int sign(const Rational& r) { return sgn(r); }

inline Rational abs_value(const Rational& r) { return abs(r); }

}  // namespace momext

#endif  // MOMEXT_RATIONAL_HPP
