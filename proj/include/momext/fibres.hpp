#ifndef MOMEXT_FIBRES_HPP
#define MOMEXT_FIBRES_HPP

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "momext/functionals.hpp"

namespace momext {

/// Finitely generated preorder; the unit 1 is implicit.
struct Preorder {
  std::size_t dim = 1;
  std::vector<Poly> generators;

  void validate() const {
    for (const auto& g : generators)
      if (g.nvars() != dim) throw DimensionMismatch(dim, g.nvars(), "preorder generator");
  }
};

struct FibreSpec {
  std::vector<Poly> h;
  std::vector<Rational> lambda;

  void validate() const {
    if (h.size() != lambda.size())
      throw std::invalid_argument("fibre spec: " + std::to_string(h.size()) + " bounded elements but " +
                                  std::to_string(lambda.size()) + " lambda values");
  }
};

/// Exact membership in K(T).
inline bool kT_membership(const Preorder& T, std::span<const Rational> x) {
  if (x.size() != T.dim) throw DimensionMismatch(T.dim, x.size(), "kT_membership");
  for (const auto& f : T.generators)
    if (f.eval(x) < 0) return false;
  return true;
}

inline bool kT_membership(const Preorder& T, std::span<const double> x, double tol) {
  if (x.size() != T.dim) throw DimensionMismatch(T.dim, x.size(), "kT_membership");
  for (const auto& f : T.generators)
    if (f.eval_float(x) < -tol) return false;
  return true;
}

/// f(lambda) = {f_1..f_k, h_1 - lambda_1, lambda_1 - h_1, ...}
inline Preorder fibre_generators(const Preorder& T, const FibreSpec& spec) {
  spec.validate();
  Preorder out = T;
  for (std::size_t j = 0; j < spec.h.size(); ++j) {
    if (spec.h[j].nvars() != T.dim) throw DimensionMismatch(T.dim, spec.h[j].nvars(), "fibre_generators");
    Poly shifted = spec.h[j] - Poly::constant(T.dim, spec.lambda[j]);
    out.generators.push_back(shifted);
    out.generators.push_back(-shifted);
  }
  return out;
}

/// Generators h_j - lambda_j of the fibre ideal.
inline std::vector<Poly> fibre_ideal_generators(const FibreSpec& spec) {
  spec.validate();
  std::vector<Poly> out;
  for (std::size_t j = 0; j < spec.h.size(); ++j)
    out.push_back(spec.h[j] - Poly::constant(spec.h[j].nvars(), spec.lambda[j]));
  return out;
}

struct HRange {
  Rational min{0};
  Rational max{0};
  bool flagged_unbounded = false;
};

struct PartitionReport {
  std::map<std::vector<Rational>, std::vector<std::size_t>> buckets;  // lambda -> sample indices
  std::vector<std::size_t> outside;  // samples not in K(T)
  std::vector<HRange> h_ranges;      // over in-K(T) samples
  bool disjoint = true;
  bool any_flagged() const {
    for (const auto& r : h_ranges)
      if (r.flagged_unbounded) return true;
    return false;
  }
};

/// Buckets K(T) samples by exact fibre value lambda = h(sample). Ranges whose
/// width exceeds `unbounded_threshold` are flagged (a heuristic, not a proof).
inline PartitionReport fibre_partition_check(const Preorder& T, const std::vector<Poly>& h,
                                             const std::vector<RationalPoint>& samples,
                                             std::optional<Rational> unbounded_threshold = std::nullopt) {
  T.validate();
  PartitionReport rep;
  rep.h_ranges.resize(h.size());
  bool first = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i];
    if (!kT_membership(T, x)) {
      rep.outside.push_back(i);
      continue;
    }
    std::vector<Rational> lambda;
    for (const auto& hj : h) lambda.push_back(hj.eval(x));
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (first || lambda[j] < rep.h_ranges[j].min) rep.h_ranges[j].min = lambda[j];
      if (first || lambda[j] > rep.h_ranges[j].max) rep.h_ranges[j].max = lambda[j];
    }
    first = false;
    // membership in K(T)_lambda holds by construction
    FibreSpec own{h, lambda};
    if (!kT_membership(fibre_generators(T, own), x))
      throw std::logic_error("fibre_partition_check: sample not in its own fibre");
    rep.buckets[lambda].push_back(i);
  }
  // disjointness: each sample sits in exactly one bucket, and fails every other fibre
  for (const auto& [lam, idx] : rep.buckets)
    for (const auto& [other, unused] : rep.buckets) {
      if (other == lam) continue;
      FibreSpec spec{h, other};
      Preorder g = fibre_generators(T, spec);
      for (auto i : idx)
        if (kT_membership(g, samples[i])) rep.disjoint = false;
    }
  if (unbounded_threshold)
    for (auto& r : rep.h_ranges) r.flagged_unbounded = (r.max - r.min) > *unbounded_threshold;
  return rep;
}

/// Float samples: fibre keys are h-values rounded to multiples of `step`.
inline PartitionReport fibre_partition_check(const Preorder& T, const std::vector<Poly>& h,
                                             const std::vector<std::vector<double>>& samples, double step, double tol,
                                             std::optional<Rational> unbounded_threshold = std::nullopt) {
  if (!(step > 0)) throw std::invalid_argument("fibre_partition_check: quantization step must be positive");
  T.validate();
  PartitionReport rep;
  rep.h_ranges.resize(h.size());
  bool first = true;
  const Rational q = from_double(step);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!kT_membership(T, samples[i], tol)) {
      rep.outside.push_back(i);
      continue;
    }
    std::vector<Rational> lambda;
    for (const auto& hj : h) lambda.push_back(Rational(mpz_class(std::to_string(std::llround(hj.eval_float(samples[i]) / step)), 10)) * q);
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (first || lambda[j] < rep.h_ranges[j].min) rep.h_ranges[j].min = lambda[j];
      if (first || lambda[j] > rep.h_ranges[j].max) rep.h_ranges[j].max = lambda[j];
    }
    first = false;
    rep.buckets[lambda].push_back(i);
  }
  if (unbounded_threshold)
    for (auto& r : rep.h_ranges) r.flagged_unbounded = (r.max - r.min) > *unbounded_threshold;
  return rep;
}

struct LocalizingVerdict {
  std::vector<bool> subset;  // generator i included in the product
  Poly product;
  PsdVerdict verdict;
};

struct TPositivityReport {
  std::vector<LocalizingVerdict> entries;
  bool positive() const {
    for (const auto& e : entries)
      if (!e.verdict.psd()) return false;
    return true;
  }
};

/// M_g[a][b] = L(g x^a x^b), |a|,|b| <= D.
inline RationalMatrix localizing_matrix(const LinearFunctional<Rational>& L, const Poly& g, unsigned D) {
  const auto mons = exponents_in_degree_range(L.nvars(), 0, D);
  const std::size_t n = mons.size();
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Poly p = g * Poly::monomial(add_exponents(mons[i], mons[j]));
      m(i, j) = L.apply_fraction(p, 0);
      m(j, i) = m(i, j);
    }
  return m;
}

/// Localizing-matrix verdicts for every squarefree product of generators.
inline TPositivityReport t_positivity_check(const LinearFunctional<Rational>& L, const Preorder& T, unsigned D) {
  T.validate();
  if (L.nvars() != T.dim) throw DimensionMismatch(T.dim, L.nvars(), "t_positivity_check");
  const std::size_t k = T.generators.size();
  if (k >= 20) throw std::invalid_argument("t_positivity_check: too many generators for subset enumeration");
  TPositivityReport rep;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    LocalizingVerdict e;
    e.subset.assign(k, false);
    e.product = Poly::constant(T.dim, Rational(1));
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::size_t{1} << i)) {
        e.subset[i] = true;
        e.product *= T.generators[i];
      }
    e.verdict = psd_check_exact(localizing_matrix(L, e.product, D));
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

/// L(g x^a) = 0 for every generator g and |a| <= D.
template <typename S>
bool functional_annihilates_ideal(const LinearFunctional<S>& L, const std::vector<Poly>& gens, unsigned D, double tol = 0.0) {
  const auto mons = exponents_in_degree_range(L.nvars(), 0, D);
  for (const auto& g : gens)
    for (const auto& a : mons) {
      S v = L.apply_fraction(g * Poly::monomial(a), 0);
      if constexpr (std::is_same_v<S, Rational>) {
        if (v != 0) return false;
      } else {
        if (std::abs(v) > tol) return false;
      }
    }
  return true;
}

struct PointTypeFibre {};

/// x_l -> ratios[l] * x_pivot on the fibre.
struct SubstitutionMap {
  std::size_t pivot = 0;
  std::vector<Rational> ratios;

  Poly image_of_variable(std::size_t l) const {
    return Poly::monomial(Exponent{1}, ratios.at(l));
  }
  /// p restricted to the fibre line, as a univariate polynomial in x_pivot.
  Poly reduce(const Poly& p) const {
    Poly out(1);
    for (const auto& [e, c] : p.terms()) {
      Rational coeff = c;
      unsigned deg = 0;
      for (std::size_t l = 0; l < e.size(); ++l) {
        coeff *= momext::pow(ratios[l], e[l]);
        deg += e[l];
      }
      out.add_term(Exponent{deg}, coeff);
    }
    return out;
  }
};

using SphereFibre = std::variant<PointTypeFibre, SubstitutionMap>;

/// Fibre of the f_kl at lambda: point-type unless trace(lambda) = 1, else
/// the line x_l = (lambda_kl / lambda_kk) x_k with k the smallest index with lambda_kk != 0.
inline SphereFibre sphere_fibre_reduction(const RationalMatrix& lambda) {
  if (!lambda.is_symmetric()) throw NotSymmetric("sphere_fibre_reduction: lambda is not symmetric");
  const std::size_t d = lambda.rows();
  Rational trace(0);
  for (std::size_t k = 0; k < d; ++k) trace += lambda(k, k);
  if (trace != 1) return PointTypeFibre{};
  std::size_t k = 0;
  while (k < d && lambda(k, k) == 0) ++k;
  SubstitutionMap m;
  m.pivot = k;
  for (std::size_t l = 0; l < d; ++l) m.ratios.push_back(lambda(k, l) / lambda(k, k));
  return m;
}

/// lambda_kl = f_kl(x).
inline RationalMatrix f_values_at(std::span<const Rational> x) {
  const std::size_t d = x.size();
  Rational n = norm_squared(x);
  if (n == 0) throw std::invalid_argument("f_values_at: point must be nonzero");
  RationalMatrix m(d, d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) m(k, l) = x[k] * x[l] / n;
  return m;
}

/// s_j = L(x_pivot^j), j = 0..2N, for the univariate Hankel test on the fibre.
inline std::vector<Rational> fibre_moments(const LinearFunctional<Rational>& L, const SubstitutionMap& m, unsigned N) {
  std::vector<Rational> s;
  for (unsigned j = 0; j <= 2 * N; ++j) s.push_back(L.apply_key(BasisKey{unit_exponent(L.nvars(), m.pivot, j), 0}));
  return s;
}

}  // namespace momext

#endif  // MOMEXT_FIBRES_HPP
