#ifndef MOMEXT_FUNCTIONALS_HPP
#define MOMEXT_FUNCTIONALS_HPP

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "momext/extalg.hpp"
#include "momext/psd.hpp"

namespace momext {

enum class ScalarKind { ExactRational, Float };

template <typename S>
constexpr ScalarKind scalar_kind_of() {
  return std::is_same_v<S, Rational> ? ScalarKind::ExactRational : ScalarKind::Float;
}

template <typename S>
S scalar_from_rational(const Rational& r) {
  if constexpr (std::is_same_v<S, Rational>)
    return r;
  else
    return r.get_d();
}

template <typename S>
S scalar_pow(const S& base, unsigned k) {
  if constexpr (std::is_same_v<S, Rational>) {
    return momext::pow(base, k);
  } else {
    S r(1);
    for (unsigned i = 0; i < k; ++i) r *= base;
    return r;
  }
}

class DomainOverflow : public std::out_of_range {
 public:
  explicit DomainOverflow(const BasisKey& k)
      : std::out_of_range("functional is not defined on key " + k.to_string()), missing(k) {}
  BasisKey missing;
};

/// A linear map from canonical basis keys to scalars.
template <typename S>
class LinearFunctional {
 public:
  using Scalar = S;

  LinearFunctional(std::size_t nvars, Mode mode) : nvars_(nvars), mode_(mode) {}

  std::size_t nvars() const { return nvars_; }
  Mode mode() const { return mode_; }
  static constexpr ScalarKind scalar_kind() { return scalar_kind_of<S>(); }
  const std::map<BasisKey, S>& values() const { return values_; }
  bool empty() const { return values_.empty(); }

  void set(const BasisKey& k, S v) {
    if (k.exp.size() != nvars_) throw DimensionMismatch(nvars_, k.exp.size(), "LinearFunctional::set");
    if (mode_ == Mode::Aplus && total_degree(k.exp) < 2 * k.pole)
      throw MembershipError(k.exp, k.pole);
    max_pole_ = std::max(max_pole_, k.pole);
    values_[k] = std::move(v);
  }
  bool contains(const BasisKey& k) const { return values_.count(k) != 0; }
  std::optional<S> find(const BasisKey& k) const {
    auto it = values_.find(k);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  /// (max pole order, max numerator degree) over stored keys.
  std::pair<unsigned, unsigned> domain_bounds() const {
    unsigned mp = 0, md = 0;
    for (const auto& [k, v] : values_) {
      mp = std::max(mp, k.pole);
      md = std::max(md, total_degree(k.exp));
    }
    return {mp, md};
  }

  /// L(h / |x|^{2m}); lifts the representation to higher pole orders when
  /// the stored keys live there.
  S apply_fraction(const Poly& h, unsigned m) const {
    if (h.nvars() != nvars_) throw DimensionMismatch(nvars_, h.nvars(), "LinearFunctional::apply");
    if (h.is_zero()) return S(0);
    if (auto v = try_apply_lifted(h, m)) return *v;
    AElement reduced = a_normalize(h, m, mode_);
    if (reduced.pole != m)
      if (auto v = try_apply_lifted(reduced.numerator, reduced.pole)) return *v;
    throw DomainOverflow(BasisKey{h.leading_term().first, m});
  }

  S apply(const AElement& a) const {
    if (a.mode != mode_) throw ModeMismatch("functional/element mode mismatch");
    return apply_fraction(a.numerator, a.pole);
  }

  S apply_key(const BasisKey& k) const {
    if (auto it = values_.find(k); it != values_.end()) return it->second;
    return apply_fraction(Poly::monomial(k.exp), k.pole);
  }

  LinearFunctional restrict_to_polynomials() const {
    LinearFunctional out(nvars_, mode_);
    for (const auto& [k, v] : values_)
      if (k.pole == 0) out.set(k, v);
    return out;
  }

  /// Keys (g, m) violating sum_k L(g + 2e_k, m + 1) = L(g, m) where all lifts exist.
  std::vector<BasisKey> reduction_violations(double tol = 0.0) const {
    std::vector<BasisKey> bad;
    for (const auto& [k, v] : values_) {
      S sum(0);
      bool complete = true;
      for (std::size_t i = 0; i < nvars_ && complete; ++i) {
        Exponent e = k.exp;
        e[i] += 2;
        auto it = values_.find(BasisKey{e, k.pole + 1});
        if (it == values_.end())
          complete = false;
        else
          sum += it->second;
      }
      if (!complete) continue;
      if constexpr (std::is_same_v<S, Rational>) {
        if (sum != v) bad.push_back(k);
      } else {
        if (std::abs(sum - v) > tol * std::max(1.0, std::abs(v))) bad.push_back(k);
      }
    }
    return bad;
  }

  template <typename T>
  LinearFunctional<T> convert() const {
    LinearFunctional<T> out(nvars_, mode_);
    for (const auto& [k, v] : values_) {
      if constexpr (std::is_same_v<T, S>)
        out.set(k, v);
      else if constexpr (std::is_same_v<T, double>)
        out.set(k, to_double(v));
      else
        out.set(k, from_double(v));
    }
    return out;
  }

 private:
  std::optional<S> try_apply_lifted(const Poly& h, unsigned m) const {
    const unsigned max_pole = max_pole_;
    Poly num = h;
    const Poly norm = Poly::norm_squared(nvars_);
    for (unsigned p = m;; ++p) {
      S sum(0);
      bool ok = true;
      for (const auto& [e, c] : num.terms()) {
        auto it = values_.find(BasisKey{e, p});
        if (it == values_.end()) {
          ok = false;
          break;
        }
        sum += scalar_from_rational<S>(c) * it->second;
      }
      if (ok) return sum;
      if (p >= max_pole) return std::nullopt;
      num *= norm;
    }
  }

  std::size_t nvars_;
  Mode mode_;
  unsigned max_pole_ = 0;
  std::map<BasisKey, S> values_;
};

template <typename S>
struct Atom {
  S weight;
  std::vector<S> point;
};

/// Finitely atomic measure; origin mass enters through the limit character
/// along the first axis, sphere atoms through direction characters.
template <typename S>
struct DiscreteMeasure {
  std::size_t dim = 1;
  std::vector<Atom<S>> atoms;
  S origin_mass{0};
  std::vector<Atom<S>> sphere_atoms;

  bool empty() const { return atoms.empty() && sphere_atoms.empty() && origin_mass == 0; }
  S total_mass() const {
    S m = origin_mass;
    for (const auto& a : atoms) m += a.weight;
    for (const auto& a : sphere_atoms) m += a.weight;
    return m;
  }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const {
    auto check_len = [&](const Atom<S>& a, const char* what) {
      if (a.point.size() != dim) throw DimensionMismatch(dim, a.point.size(), what);
    };
    if (origin_mass < 0) throw std::invalid_argument("measure: negative origin mass");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& a = atoms[i];
      check_len(a, "measure atom");
      if (!(a.weight > 0)) throw std::invalid_argument("measure: atom " + std::to_string(i) + " has nonpositive weight");
      bool nonzero = false;
      for (const auto& c : a.point) nonzero = nonzero || c != 0;
      if (!nonzero) throw std::invalid_argument("measure: atom " + std::to_string(i) + " sits at the origin (use origin_mass)");
    }
    for (std::size_t i = 0; i < sphere_atoms.size(); ++i) {
      const auto& a = sphere_atoms[i];
      check_len(a, "measure sphere atom");
      if (!(a.weight > 0)) throw std::invalid_argument("measure: sphere atom " + std::to_string(i) + " has nonpositive weight");
      S n(0);
      for (const auto& c : a.point) n += c * c;
      bool unit;
      if constexpr (std::is_same_v<S, Rational>)
        unit = n == 1;
      else
        unit = std::abs(n - 1.0) < 1e-12;
      if (!unit) throw std::invalid_argument("measure: sphere atom " + std::to_string(i) + " is not a unit vector");
    }
  }
};

namespace detail {

template <typename S>
S monomial_at(const Exponent& e, const std::vector<S>& x) {
  S v(1);
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i]) v *= scalar_pow(x[i], e[i]);
  return v;
}

template <typename S>
S key_at_point(const BasisKey& k, const std::vector<S>& x) {
  S v = monomial_at(k.exp, x);
  if (k.pole) {
    S n(0);
    for (const auto& c : x) n += c * c;
    v /= scalar_pow(n, k.pole);
  }
  return v;
}

// direction character on a key: only the degree-2m part survives
template <typename S>
S key_at_direction(const BasisKey& k, const std::vector<S>& t) {
  if (total_degree(k.exp) != 2 * k.pole) return S(0);
  return monomial_at(k.exp, t);
}

}  // namespace detail

template <typename S>
S measure_value_on_key(const DiscreteMeasure<S>& mu, const BasisKey& k) {
  S v(0);
  for (const auto& a : mu.atoms) v += a.weight * detail::key_at_point(k, a.point);
  if (mu.origin_mass != 0) {
    std::vector<S> e1(mu.dim, S(0));
    e1[0] = S(1);
    v += mu.origin_mass * detail::key_at_direction(k, e1);
  }
  for (const auto& a : mu.sphere_atoms) v += a.weight * detail::key_at_direction(k, a.point);
  return v;
}

template <typename S>
LinearFunctional<S> moments_of_measure(const DiscreteMeasure<S>& mu, const std::vector<BasisKey>& keys, Mode mode) {
  mu.validate();
  if (mode == Mode::Laurent && (mu.origin_mass != 0 || !mu.sphere_atoms.empty()))
    throw ModeMismatch("moments_of_measure: Laurent mode admits only atoms at nonzero points");
  LinearFunctional<S> L(mu.dim, mode);
  for (const auto& k : keys) L.set(k, measure_value_on_key(mu, k));
  return L;
}

/// Keys (g, m), m <= top_pole, spanned by the pole-`top_pole` keys of degree <= top_degree.
inline std::vector<BasisKey> window_keys(unsigned top_pole, unsigned top_degree, std::size_t d, Mode mode) {
  std::vector<BasisKey> keys;
  for (unsigned m = 0; m <= top_pole; ++m) {
    if (top_degree < 2 * (top_pole - m)) continue;
    unsigned hi = top_degree - 2 * (top_pole - m);
    unsigned lo = mode == Mode::Aplus ? 2 * m : 0;
    if (hi < lo) continue;
    for (auto& e : exponents_in_degree_range(d, lo, hi)) keys.push_back(BasisKey{std::move(e), m});
  }
  return keys;
}

/// All keys with pole 0 and degree <= max_degree.
inline std::vector<BasisKey> polynomial_keys(std::size_t d, unsigned max_degree) {
  std::vector<BasisKey> keys;
  for (auto& e : exponents_in_degree_range(d, 0, max_degree)) keys.push_back(BasisKey{std::move(e), 0});
  return keys;
}

template <typename S>
DenseMatrix<S> gram_matrix(const LinearFunctional<S>& L, const std::vector<BasisKey>& basis) {
  const std::size_t n = basis.size();
  DenseMatrix<S> g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      g(i, j) = L.apply_key(key_product(basis[i], basis[j]));
      if (j != i) g(j, i) = g(i, j);
    }
  return g;
}

/// Extension of the moment functional of mu to the span of products of
/// truncated_basis(M, D): keys up to pole 2M whose lifts to pole 2M have degree <= 2D.
inline LinearFunctional<Rational> extend_from_measure(const DiscreteMeasure<Rational>& mu, unsigned M, unsigned D) {
  if (D < 2 * M) throw std::invalid_argument("extend_from_measure: D < 2M");
  return moments_of_measure(mu, window_keys(2 * M, 2 * D, mu.dim, Mode::Aplus), Mode::Aplus);
}

struct CsChainReport {
  std::vector<Rational> power_values;  // L(a^{2^j}), j = 0..k
  Rational l_one{0};
  std::vector<Rational> chain;  // chain[0] = |L(a)|^{2^k}, chain[j] = L(a^{2^j})^{2^{k-j}} L(1)^{2^k - 2^{k-j}}
  bool chain_holds = true;
  bool degenerate_ok = true;  // L(a^{2^k}) = 0 implies L(a) = 0

  bool ok() const { return chain_holds && degenerate_ok; }
};

/// Iterated Cauchy-Schwarz: |L(a)|^{2^k} <= ... <= L(a^{2^k}) L(1)^{2^k - 1}.
inline CsChainReport cs_chain_check(const LinearFunctional<Rational>& L, const AElement& a, unsigned k) {
  CsChainReport r;
  r.l_one = L.apply(a_constant(a.nvars(), Rational(1), a.mode));
  AElement power = a;
  for (unsigned j = 0; j <= k; ++j) {
    r.power_values.push_back(L.apply(power));
    if (j < k) power = power * power;
  }
  const unsigned top = 1u << k;
  r.chain.push_back(momext::pow(abs(r.power_values[0]), top));
  for (unsigned j = 1; j <= k; ++j) {
    unsigned e = 1u << (k - j);
    r.chain.push_back(momext::pow(r.power_values[j], e) * momext::pow(r.l_one, top - e));
  }
  for (std::size_t j = 0; j + 1 < r.chain.size(); ++j)
    if (r.chain[j] > r.chain[j + 1]) r.chain_holds = false;
  if (r.power_values[k] == 0 && r.power_values[0] != 0) r.degenerate_ok = false;
  return r;
}

}  // namespace momext

#endif  // MOMEXT_FUNCTIONALS_HPP
