#ifndef MOMEXT_TESTS_SUPPORT_HPP
#define MOMEXT_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "momext/momext.hpp"

namespace testing_support {

using namespace momext;

inline Rational q(long n, long d = 1) { return make_rational(n, d); }

inline Rational random_rational(std::mt19937_64& rng, int num_range = 6, int den_max = 4) {
  std::uniform_int_distribution<int> num(-num_range, num_range), den(1, den_max);
  return make_rational(num(rng), den(rng));
}

inline RationalPoint random_nonzero_point(std::mt19937_64& rng, std::size_t d, int num_range = 6, int den_max = 4) {
  for (;;) {
    RationalPoint x;
    bool nonzero = false;
    for (std::size_t i = 0; i < d; ++i) {
      x.push_back(random_rational(rng, num_range, den_max));
      nonzero = nonzero || x.back() != 0;
    }
    if (nonzero) return x;
  }
}

inline Poly random_poly(std::mt19937_64& rng, std::size_t d, unsigned lo, unsigned hi, int terms = 3) {
  Poly p(d);
  auto mons = exponents_in_degree_range(d, lo, hi);
  std::uniform_int_distribution<std::size_t> pick(0, mons.size() - 1);
  for (int t = 0; t < terms; ++t) p.add_term(mons[pick(rng)], random_rational(rng));
  return p;
}

/// h / |x|^{2m} with every monomial of degree >= 2m.
inline AElement random_aplus(std::mt19937_64& rng, std::size_t d, unsigned max_pole = 2, unsigned extra_degree = 2) {
  std::uniform_int_distribution<unsigned> pole(0, max_pole);
  unsigned m = pole(rng);
  return a_normalize(random_poly(rng, d, 2 * m, 2 * m + extra_degree), m, Mode::Aplus);
}

/// Value of h/|x|^{2m} at x computed straight from the representation.
inline Rational direct_value(const AElement& a, const RationalPoint& x) {
  Rational n(0);
  for (const auto& c : x) n += c * c;
  Rational v(0);
  for (const auto& [e, c] : a.numerator.terms()) {
    Rational t = c;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (unsigned k = 0; k < e[i]; ++k) t *= x[i];
    v += t;
  }
  for (unsigned k = 0; k < a.pole; ++k) v /= n;
  return v;
}

/// Up to max_atoms atoms with small rational coordinates, optional origin mass.
inline DiscreteMeasure<Rational> random_measure(std::mt19937_64& rng, std::size_t d, int max_atoms, bool allow_origin) {
  DiscreteMeasure<Rational> mu;
  mu.dim = d;
  std::uniform_int_distribution<int> count(1, max_atoms), w(1, 5), coin(0, 1);
  int n = count(rng);
  for (int i = 0; i < n; ++i) mu.atoms.push_back({make_rational(w(rng), 2), random_nonzero_point(rng, d, 3, 3)});
  if (allow_origin && coin(rng)) mu.origin_mass = make_rational(w(rng), 3);
  return mu;
}

}  // namespace testing_support

#endif  // MOMEXT_TESTS_SUPPORT_HPP
