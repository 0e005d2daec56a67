#ifndef MOMEXT_POLY_HPP
#define MOMEXT_POLY_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "momext/rational.hpp"

namespace momext {

using Exponent = std::vector<unsigned>;

inline unsigned total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0u); }

/// Graded lexicographic order with x1 > x2 > ... > xd.
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

inline Exponent unit_exponent(std::size_t nvars, std::size_t i, unsigned power = 1) {
  Exponent e(nvars, 0);
  e[i] = power;
  return e;
}

inline Exponent add_exponents(const Exponent& a, const Exponent& b) {
  Exponent r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

/// All exponent vectors in `nvars` variables with lo <= |e| <= hi, ascending grlex.
inline std::vector<Exponent> exponents_in_degree_range(std::size_t nvars, unsigned lo, unsigned hi) {
  std::vector<Exponent> out;
  Exponent e(nvars, 0);
  // enumerate compositions of each degree
  for (unsigned deg = lo; deg <= hi; ++deg) {
    std::vector<Exponent> level;
    auto rec = [&](auto&& self, std::size_t pos, unsigned left) -> void {
      if (pos + 1 == nvars) {
        e[pos] = left;
        level.push_back(e);
        return;
      }
      for (unsigned k = 0; k <= left; ++k) {
        e[pos] = k;
        self(self, pos + 1, left - k);
      }
    };
    if (nvars == 0) {
      if (deg == 0) level.push_back({});
    } else {
      rec(rec, 0, deg);
    }
    std::sort(level.begin(), level.end(), GrlexLess{});
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

struct DegreeRange {
  unsigned min_degree;
  unsigned max_degree;
  bool operator==(const DegreeRange&) const = default;
};

/// Sparse multivariate polynomial with exact rational coefficients.
class Poly {
 public:
  using TermMap = std::map<Exponent, Rational, GrlexLess>;

  explicit Poly(std::size_t nvars = 1) : nvars_(nvars) {}

  static Poly constant(std::size_t nvars, const Rational& c) {
    Poly p(nvars);
    p.add_term(Exponent(nvars, 0), c);
    return p;
  }
  static Poly variable(std::size_t nvars, std::size_t index) {
    Poly p(nvars);
    p.add_term(unit_exponent(nvars, index), Rational(1));
    return p;
  }
  static Poly monomial(const Exponent& e, const Rational& c = Rational(1)) {
    Poly p(e.size());
    p.add_term(e, c);
    return p;
  }
  /// x1^2 + ... + xd^2
  static Poly norm_squared(std::size_t nvars) {
    Poly p(nvars);
    for (std::size_t i = 0; i < nvars; ++i) p.add_term(unit_exponent(nvars, i, 2), Rational(1));
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Rational coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const Exponent& e, const Rational& c) {
    if (e.size() != nvars_) throw DimensionMismatch(nvars_, e.size(), "Poly::add_term");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  /// Largest term under grlex. Precondition: nonzero.
  const std::pair<const Exponent, Rational>& leading_term() const { return *terms_.rbegin(); }

  Poly& operator+=(const Poly& q) {
    check_dims(q, "poly add");
    for (const auto& [e, c] : q.terms_) add_term(e, c);
    return *this;
  }
  Poly& operator-=(const Poly& q) {
    check_dims(q, "poly sub");
    for (const auto& [e, c] : q.terms_) add_term(e, -c);
    return *this;
  }
  Poly& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Poly operator+(Poly p, const Poly& q) { return p += q; }
  friend Poly operator-(Poly p, const Poly& q) { return p -= q; }
  friend Poly operator*(Poly p, const Rational& s) { return p *= s; }
  friend Poly operator*(const Rational& s, Poly p) { return p *= s; }
  friend Poly operator-(Poly p) { return p *= Rational(-1); }

  friend Poly operator*(const Poly& p, const Poly& q) {
    p.check_dims(q, "poly mul");
    Poly r(p.nvars_);
    for (const auto& [ea, ca] : p.terms_)
      for (const auto& [eb, cb] : q.terms_) r.add_term(add_exponents(ea, eb), ca * cb);
    return r;
  }
  Poly& operator*=(const Poly& q) { return *this = *this * q; }

  friend bool operator==(const Poly& p, const Poly& q) { return p.nvars_ == q.nvars_ && p.terms_ == q.terms_; }

  Poly pow(unsigned k) const {
    Poly r = constant(nvars_, Rational(1));
    Poly base = *this;
    while (k) {
      if (k & 1u) r *= base;
      k >>= 1u;
      if (k) base *= base;
    }
    return r;
  }

  Rational eval(std::span<const Rational> point) const {
    if (point.size() != nvars_) throw DimensionMismatch(nvars_, point.size(), "poly eval");
    Rational sum(0);
    for (const auto& [e, c] : terms_) {
      Rational t = c;
      for (std::size_t i = 0; i < nvars_; ++i)
        if (e[i]) t *= momext::pow(point[i], e[i]);
      sum += t;
    }
    return sum;
  }

  double eval_float(std::span<const double> point) const {
    if (point.size() != nvars_) throw DimensionMismatch(nvars_, point.size(), "poly eval");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c.get_d();
      for (std::size_t i = 0; i < nvars_; ++i)
        for (unsigned k = 0; k < e[i]; ++k) t *= point[i];
      sum += t;
    }
    return sum;
  }

  Poly homogeneous_component(unsigned degree) const {
    Poly r(nvars_);
    for (const auto& [e, c] : terms_)
      if (total_degree(e) == degree) r.terms_.emplace(e, c);
    return r;
  }

  /// Terms in descending grlex order, e.g. "x1^2 - 1/2*x1*x2 + 3".
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [e, c] = *it;
      Rational mag = abs(c);
      if (first) {
        if (c < 0) os << "-";
      } else {
        os << (c < 0 ? " - " : " + ");
      }
      first = false;
      bool constant_term = total_degree(e) == 0;
      if (mag != 1 || constant_term) {
        os << mag.get_str();
        if (!constant_term) os << "*";
      }
      bool first_var = true;
      for (std::size_t i = 0; i < nvars_; ++i) {
        if (!e[i]) continue;
        if (!first_var) os << "*";
        first_var = false;
        os << "x" << (i + 1);
        if (e[i] > 1) os << "^" << e[i];
      }
    }
    return os.str();
  }

 private:
  void check_dims(const Poly& q, std::string_view what) const {
    if (q.nvars_ != nvars_) throw DimensionMismatch(nvars_, q.nvars_, what);
  }

  std::size_t nvars_;
  TermMap terms_;
};

enum class ArithOp { Add, Sub, Mul };

inline Poly poly_arith(const Poly& p, const Poly& q, ArithOp op) {
  switch (op) {
    case ArithOp::Add: return p + q;
    case ArithOp::Sub: return p - q;
    case ArithOp::Mul: return p * q;
  }
  return Poly(p.nvars());
}

inline Rational poly_eval(const Poly& p, std::span<const Rational> point) { return p.eval(point); }

/// Exact quotient p / (x1^2+...+xd^2) when it exists.
///
/// Leading-term division under grlex: the divisor's leading term is x1^2, so a
/// leading term of p not divisible by x1^2 proves p is not a multiple.
inline std::optional<Poly> divide_by_norm_squared(const Poly& p) {
  const std::size_t d = p.nvars();
  if (d == 0) return std::nullopt;
  Poly rest = p;
  Poly quotient(d);
  const Poly norm = Poly::norm_squared(d);
  while (!rest.is_zero()) {
    const auto& [lead_exp, lead_coeff] = rest.leading_term();
    if (lead_exp[0] < 2) return std::nullopt;
    Exponent q_exp = lead_exp;
    q_exp[0] -= 2;
    Rational c = lead_coeff;
    quotient.add_term(q_exp, c);
    rest -= Poly::monomial(q_exp, c) * norm;
  }
  return quotient;
}

/// nullopt for the zero polynomial.
inline std::optional<DegreeRange> degree_range(const Poly& p) {
  if (p.is_zero()) return std::nullopt;
  // map is grlex-sorted, so first/last carry the extreme degrees
  return DegreeRange{total_degree(p.terms().begin()->first), total_degree(p.terms().rbegin()->first)};
}

}  // namespace momext

#endif  // MOMEXT_POLY_HPP
