#ifndef MOMEXT_EXTALG_HPP
#define MOMEXT_EXTALG_HPP

// The algebra of functions on R^d \ {0} generated by polynomials and
// f_kl = x_k x_l / |x|^2, stored as reduced fractions h / |x|^{2m}.
// Laurent mode drops the degree condition and models the algebra generated
// by x_j and y_j = x_j / |x|^2.

#include <compare>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "momext/poly.hpp"

namespace momext {

enum class Mode { Aplus, Laurent };

inline std::string to_string(Mode m) { return m == Mode::Aplus ? "Aplus" : "Laurent"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "Aplus") return Mode::Aplus;
  if (s == "Laurent") return Mode::Laurent;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

class MembershipError : public std::invalid_argument {
 public:
  MembershipError(const Exponent& offending, unsigned pole)
      : std::invalid_argument("monomial " + Poly::monomial(offending).to_string() + " has degree " +
                              std::to_string(total_degree(offending)) + " < 2*" + std::to_string(pole) +
                              " (not in the extension algebra)"),
        offending_monomial(offending) {}
  Exponent offending_monomial;
};

class ModeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reduced representative numerator / |x|^{2*pole}.
struct AElement {
  Poly numerator;
  unsigned pole = 0;
  Mode mode = Mode::Aplus;

  std::size_t nvars() const { return numerator.nvars(); }
  bool is_zero() const { return numerator.is_zero(); }
  friend bool operator==(const AElement&, const AElement&) = default;

  std::string to_string() const {
    std::string s = numerator.to_string();
    if (pole == 0) return s;
    return "(" + s + ") / |x|^" + std::to_string(2 * pole);
  }
};

/// Numerator of `a` re-expressed over |x|^{2*target_pole}.
inline Poly lift_numerator(const AElement& a, unsigned target_pole) {
  if (target_pole < a.pole) throw std::invalid_argument("lift_numerator: target pole below element pole");
  if (target_pole == a.pole) return a.numerator;
  return a.numerator * Poly::norm_squared(a.nvars()).pow(target_pole - a.pole);
}

inline AElement a_normalize(Poly h, unsigned m, Mode mode) {
  if (mode == Mode::Aplus) {
    for (const auto& [e, c] : h.terms())
      if (total_degree(e) < 2 * m) throw MembershipError(e, m);
  }
  if (h.is_zero()) return AElement{std::move(h), 0, mode};
  while (m > 0) {
    auto q = divide_by_norm_squared(h);
    if (!q) break;
    h = std::move(*q);
    --m;
  }
  return AElement{std::move(h), m, mode};
}

enum class AOp { Add, Sub, Mul };

inline AElement a_arith(const AElement& a, const AElement& b, AOp op) {
  if (a.mode != b.mode) throw ModeMismatch("a_arith: mode mismatch (" + to_string(a.mode) + " vs " + to_string(b.mode) + ")");
  if (a.nvars() != b.nvars()) throw DimensionMismatch(a.nvars(), b.nvars(), "a_arith");
  if (op == AOp::Mul) return a_normalize(a.numerator * b.numerator, a.pole + b.pole, a.mode);
  unsigned p = std::max(a.pole, b.pole);
  Poly ha = lift_numerator(a, p);
  Poly hb = lift_numerator(b, p);
  return a_normalize(op == AOp::Add ? ha + hb : ha - hb, p, a.mode);
}

inline AElement operator+(const AElement& a, const AElement& b) { return a_arith(a, b, AOp::Add); }
inline AElement operator-(const AElement& a, const AElement& b) { return a_arith(a, b, AOp::Sub); }
inline AElement operator*(const AElement& a, const AElement& b) { return a_arith(a, b, AOp::Mul); }
inline AElement operator*(const Rational& s, const AElement& a) {
  return a_normalize(a.numerator * s, s == 0 ? 0 : a.pole, a.mode);
}

inline AElement embed_poly(const Poly& p, Mode mode = Mode::Aplus) { return AElement{p, 0, mode}; }

inline AElement a_constant(std::size_t d, const Rational& c, Mode mode = Mode::Aplus) {
  return embed_poly(Poly::constant(d, c), mode);
}

inline AElement a_power(const AElement& a, unsigned k) {
  return a_normalize(a.numerator.pow(k), a.pole * k, a.mode);
}

/// f_kl = x_k x_l / |x|^2 with 0-based indices; for d = 1 this is the constant 1.
inline AElement generator_f(std::size_t k, std::size_t l, std::size_t d) {
  if (d == 0 || k >= d || l >= d)
    throw std::out_of_range("generator_f: index (" + std::to_string(k) + "," + std::to_string(l) +
                            ") out of range for d=" + std::to_string(d));
  Exponent e(d, 0);
  e[k] += 1;
  e[l] += 1;
  return a_normalize(Poly::monomial(e), 1, Mode::Aplus);
}

/// A character of the algebra: evaluation at a nonzero point, or the
/// direction character chi^t (x_j -> 0, f_kl -> t_k t_l) for a unit vector t.
class Character {
 public:
  enum class Kind { PointAt, SphereAt };

  static Character point_at(RationalPoint x) {
    bool nonzero = false;
    for (const auto& v : x) nonzero = nonzero || v != 0;
    if (!nonzero) throw std::invalid_argument("PointAt character requires a nonzero point");
    return Character(Kind::PointAt, std::move(x));
  }
  static Character sphere_at(RationalPoint t) {
    Rational n(0);
    for (const auto& v : t) n += v * v;
    if (n != 1) throw std::invalid_argument("SphereAt character requires |t|^2 = 1 exactly (got " + n.get_str() + ")");
    return Character(Kind::SphereAt, std::move(t));
  }
  /// The limit character f -> lim_{t->0} f(t,0,...,0).
  static Character origin_limit(std::size_t d) { return sphere_at(unit_point(d)); }

  Kind kind() const { return kind_; }
  const RationalPoint& point() const { return point_; }
  std::size_t dim() const { return point_.size(); }

 private:
  Character(Kind k, RationalPoint p) : kind_(k), point_(std::move(p)) {}
  static RationalPoint unit_point(std::size_t d) {
    RationalPoint t(d, Rational(0));
    t.at(0) = 1;
    return t;
  }
  Kind kind_;
  RationalPoint point_;
};

inline Rational norm_squared(std::span<const Rational> x) {
  Rational n(0);
  for (const auto& v : x) n += v * v;
  return n;
}

inline Rational char_eval(const Character& chi, const AElement& a) {
  if (chi.dim() != a.nvars()) throw DimensionMismatch(a.nvars(), chi.dim(), "char_eval");
  if (chi.kind() == Character::Kind::PointAt) {
    Rational v = a.numerator.eval(chi.point());
    if (a.pole) v /= momext::pow(norm_squared(chi.point()), a.pole);
    return v;
  }
  if (a.mode == Mode::Laurent)
    throw ModeMismatch("char_eval: no character of the Laurent algebra annihilates every x_j");
  // components of degree > 2m vanish in the limit; degree 2m is homogeneous of degree 0
  return a.numerator.homogeneous_component(2 * a.pole).eval(chi.point());
}

/// Float evaluation at a nonzero point.
inline double eval_at_point(const AElement& a, std::span<const double> x) {
  double v = a.numerator.eval_float(x);
  double n = 0.0;
  for (double c : x) n += c * c;
  for (unsigned k = 0; k < a.pole; ++k) v /= n;
  return v;
}

/// Canonical basis key x^exp / |x|^{2*pole}; keys are not reduced.
struct BasisKey {
  Exponent exp;
  unsigned pole = 0;

  friend bool operator==(const BasisKey&, const BasisKey&) = default;
  friend bool operator<(const BasisKey& a, const BasisKey& b) {
    if (a.pole != b.pole) return a.pole < b.pole;
    return GrlexLess{}(a.exp, b.exp);
  }
  std::string to_string() const {
    return "x^[" + [&] {
      std::string s;
      for (std::size_t i = 0; i < exp.size(); ++i) s += (i ? "," : "") + std::to_string(exp[i]);
      return s;
    }() + "]/|x|^" + std::to_string(2 * pole);
  }
};

inline BasisKey key_product(const BasisKey& a, const BasisKey& b) {
  return BasisKey{add_exponents(a.exp, b.exp), a.pole + b.pole};
}

inline AElement key_element(const BasisKey& k, Mode mode) {
  return a_normalize(Poly::monomial(k.exp), k.pole, mode);
}

/// Keys x^g / |x|^{2M}: Aplus uses 2M <= |g| <= D, Laurent 0 <= |g| <= D. Ascending grlex.
inline std::vector<BasisKey> truncated_keys(unsigned M, unsigned D, std::size_t d, Mode mode) {
  if (mode == Mode::Aplus && D < 2 * M)
    throw std::invalid_argument("truncated_basis: D=" + std::to_string(D) + " < 2M=" + std::to_string(2 * M));
  unsigned lo = mode == Mode::Aplus ? 2 * M : 0;
  std::vector<BasisKey> keys;
  for (auto& e : exponents_in_degree_range(d, lo, D)) keys.push_back(BasisKey{std::move(e), M});
  return keys;
}

inline std::vector<AElement> truncated_basis(unsigned M, unsigned D, std::size_t d, Mode mode) {
  std::vector<AElement> out;
  for (const auto& k : truncated_keys(M, D, d, mode)) out.push_back(key_element(k, mode));
  return out;
}

}  // namespace momext

#endif  // MOMEXT_EXTALG_HPP
