#ifndef MOMEXT_SEMIGROUPS_HPP
#define MOMEXT_SEMIGROUPS_HPP

// The *-semigroups N0^2, N+ = {m + n >= 0} and Z^2 with (m,n)* = (n,m),
// their moment matrices, and the translation z^m zbar^n -> functions of
// (x1, x2) with z = x1 + i x2.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "momext/recovery.hpp"

namespace momext {

/// Exact complex scalar re + i im.
struct GaussRational {
  Rational re{0};
  Rational im{0};

  GaussRational() = default;
  GaussRational(Rational r, Rational i = Rational(0)) : re(std::move(r)), im(std::move(i)) {}
  GaussRational(int r) : re(r) {}

  GaussRational conj() const { return {re, -im}; }
  Rational norm() const { return re * re + im * im; }
  bool is_zero() const { return re == 0 && im == 0; }
  GaussRational inverse() const {
    Rational n = norm();
    if (n == 0) throw std::domain_error("GaussRational: inverse of zero");
    return {re / n, -im / n};
  }
  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  friend GaussRational operator+(const GaussRational& a, const GaussRational& b) { return {a.re + b.re, a.im + b.im}; }
  friend GaussRational operator-(const GaussRational& a, const GaussRational& b) { return {a.re - b.re, a.im - b.im}; }
  friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  GaussRational& operator+=(const GaussRational& b) { return *this = *this + b; }
  friend bool operator==(const GaussRational& a, const GaussRational& b) { return a.re == b.re && a.im == b.im; }

  std::string to_string() const { return re.get_str() + (im < 0 ? " - " : " + ") + Rational(abs(im)).get_str() + "i"; }
};

/// z^k for any integer k; 0^0 = 1.
inline GaussRational gauss_pow(const GaussRational& z, long k) {
  if (k < 0) return gauss_pow(z.inverse(), -k);
  GaussRational r(1), b = z;
  auto e = static_cast<unsigned long>(k);
  while (e) {
    if (e & 1u) r = r * b;
    e >>= 1u;
    if (e) b = b * b;
  }
  return r;
}

enum class SgDomain { N02, Nplus, Z2 };

inline std::string to_string(SgDomain d) {
  switch (d) {
    case SgDomain::N02: return "N02";
    case SgDomain::Nplus: return "Nplus";
    case SgDomain::Z2: return "Z2";
  }
  return "?";
}

inline SgDomain parse_domain(std::string_view s) {
  if (s == "N02") return SgDomain::N02;
  if (s == "Nplus") return SgDomain::Nplus;
  if (s == "Z2") return SgDomain::Z2;
  throw std::invalid_argument("unknown semigroup domain '" + std::string(s) + "'");
}

inline bool in_domain(long m, long n, SgDomain d) {
  switch (d) {
    case SgDomain::N02: return m >= 0 && n >= 0;
    case SgDomain::Nplus: return m + n >= 0;
    case SgDomain::Z2: return true;
  }
  return false;
}

struct SgElement {
  long m = 0;
  long n = 0;
  SgDomain domain = SgDomain::N02;

  static SgElement make(long m, long n, SgDomain d) {
    if (!in_domain(m, n, d))
      throw std::invalid_argument("(" + std::to_string(m) + "," + std::to_string(n) + ") is not in " + to_string(d));
    return {m, n, d};
  }
  friend bool operator==(const SgElement&, const SgElement&) = default;
};

inline SgElement sg_product(const SgElement& u, const SgElement& v) {
  if (u.domain != v.domain) throw std::invalid_argument("sg_product: domain mismatch");
  return SgElement::make(u.m + v.m, u.n + v.n, u.domain);
}

inline SgElement sg_involution(const SgElement& u) { return {u.n, u.m, u.domain}; }

/// Box {|m|,|n| <= radius} intersected with the domain, ordered by (m, n).
inline std::vector<SgElement> sg_window(SgDomain d, long radius) {
  std::vector<SgElement> w;
  for (long m = -radius; m <= radius; ++m)
    for (long n = -radius; n <= radius; ++n)
      if (in_domain(m, n, d)) w.push_back({m, n, d});
  return w;
}

class MissingEntry : public std::out_of_range {
 public:
  MissingEntry(long m, long n)
      : std::out_of_range("sequence has no entry at (" + std::to_string(m) + "," + std::to_string(n) + ")"), m(m), n(n) {}
  long m, n;
};

class AsymmetricWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Complex sequence on a finite index window; Hermitian means s(n,m) = conj s(m,n).
struct HermitianSequence {
  SgDomain domain = SgDomain::N02;
  std::map<std::pair<long, long>, GaussRational> entries;

  const GaussRational& at(long m, long n) const {
    auto it = entries.find({m, n});
    if (it == entries.end()) throw MissingEntry(m, n);
    return it->second;
  }
  bool contains(long m, long n) const { return entries.count({m, n}) != 0; }

  /// First (m,n) whose mirror entry is missing.
  std::optional<std::pair<long, long>> asymmetric_index() const {
    for (const auto& [k, v] : entries)
      if (!contains(k.second, k.first)) return k;
    return std::nullopt;
  }
  /// First (m,n) with s(n,m) != conj s(m,n).
  std::optional<std::pair<long, long>> hermitian_violation() const {
    for (const auto& [k, v] : entries) {
      auto it = entries.find({k.second, k.first});
      if (it != entries.end() && !(it->second == v.conj())) return k;
    }
    return std::nullopt;
  }
  /// Largest R with the whole box of radius R (intersected with the domain) present.
  long box_radius() const {
    long r = -1;
    for (long c = 0;; ++c) {
      for (const auto& u : sg_window(domain, c))
        if (!contains(u.m, u.n)) return r;
      r = c;
      if (c > 1000) return r;
    }
  }
};

using HermitianMatrix = DenseMatrix<GaussRational>;

/// M[u][v] = s(u* v).
inline HermitianMatrix sg_moment_matrix(const HermitianSequence& s, const std::vector<SgElement>& window) {
  const std::size_t n = window.size();
  HermitianMatrix M(n, n, GaussRational(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      SgElement p = sg_product(sg_involution(window[i]), window[j]);
      M(i, j) = s.at(p.m, p.n);
    }
  return M;
}

/// Exact PSD decision via the real embedding [[Re, -Im], [Im, Re]].
inline PsdVerdict hermitian_psd_check(const HermitianMatrix& H) {
  const std::size_t n = H.rows();
  RationalMatrix R(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      R(i, j) = H(i, j).re;
      R(i + n, j + n) = H(i, j).re;
      R(i, j + n) = -H(i, j).im;
      R(i + n, j) = H(i, j).im;
    }
  return psd_check_exact(R);
}

/// Polynomial with Gaussian-rational coefficients stored as re + i im.
struct ComplexPoly {
  Poly re;
  Poly im;

  friend ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
};

/// z^m zbar^n as (real part, imaginary part), z = x1 + i x2. N+ maps into
/// Aplus mode, Z2 into Laurent mode; poles cleared with c = max(0, -m, -n).
inline std::pair<AElement, AElement> sg_to_functions(const SgElement& u) {
  if (u.domain == SgDomain::Nplus && u.m + u.n < 0)
    throw std::invalid_argument("sg_to_functions: (m,n) violates m + n >= 0");
  if (u.domain == SgDomain::N02 && (u.m < 0 || u.n < 0))
    throw std::invalid_argument("sg_to_functions: N02 element with negative index");
  const long c = std::max({0L, -u.m, -u.n});
  const Mode mode = u.domain == SgDomain::Z2 ? Mode::Laurent : Mode::Aplus;
  const ComplexPoly z{Poly::variable(2, 0), Poly::variable(2, 1)};
  const ComplexPoly zbar{Poly::variable(2, 0), -Poly::variable(2, 1)};
  ComplexPoly acc{Poly::constant(2, Rational(1)), Poly(2)};
  for (long k = 0; k < u.m + c; ++k) acc = acc * z;
  for (long k = 0; k < u.n + c; ++k) acc = acc * zbar;
  auto pole = static_cast<unsigned>(c);
  return {a_normalize(acc.re, pole, mode), a_normalize(acc.im, pole, mode)};
}

struct ComplexAtom {
  Rational weight;
  GaussRational z;
};

/// s(m,n) = sum w z^m conj(z)^n over the radius box of the domain.
inline HermitianSequence sequence_from_measure(const std::vector<ComplexAtom>& atoms, SgDomain domain, long radius) {
  HermitianSequence s;
  s.domain = domain;
  for (const auto& a : atoms) {
    if (!(a.weight > 0)) throw std::invalid_argument("sequence_from_measure: nonpositive weight");
    if (a.z.is_zero() && domain != SgDomain::N02)
      throw std::invalid_argument("sequence_from_measure: atom at 0 with negative-power window");
  }
  for (const auto& u : sg_window(domain, radius)) {
    GaussRational v(0);
    for (const auto& a : atoms) v += GaussRational(a.weight) * gauss_pow(a.z, u.m) * gauss_pow(a.z.conj(), u.n);
    s.entries[{u.m, u.n}] = v;
  }
  return s;
}

inline DiscreteMeasure<Rational> planar_measure(const std::vector<ComplexAtom>& atoms) {
  DiscreteMeasure<Rational> mu;
  mu.dim = 2;
  for (const auto& a : atoms) mu.atoms.push_back({a.weight, {a.z.re, a.z.im}});
  return mu;
}

struct NplusReport {
  bool restriction_ok = true;
  std::optional<std::pair<long, long>> restriction_mismatch;
  PsdVerdict psd;
  bool cross_path_ok = true;
  std::optional<std::pair<long, long>> cross_path_mismatch;

  bool passed() const { return restriction_ok && psd.psd() && cross_path_ok; }
};

/// Extends s (on N0^2) to N+ from the atoms, then checks restriction,
/// positivity on the radius-N window, and agreement with the extension
/// functional on the algebra side.
inline NplusReport nplus_extension_check(const HermitianSequence& s, const std::vector<ComplexAtom>& atoms, long N) {
  NplusReport rep;
  const HermitianSequence ext = sequence_from_measure(atoms, SgDomain::Nplus, 2 * N);
  for (const auto& [k, v] : s.entries) {
    if (k.first < 0 || k.second < 0) continue;
    auto it = ext.entries.find(k);
    if (it == ext.entries.end() || !(it->second == v)) {
      rep.restriction_ok = false;
      rep.restriction_mismatch = k;
      break;
    }
  }
  rep.psd = hermitian_psd_check(sg_moment_matrix(ext, sg_window(SgDomain::Nplus, N)));

  const auto M = static_cast<unsigned>(N);
  const LinearFunctional<Rational> L = extend_from_measure(planar_measure(atoms), M, 4 * M);
  for (const auto& [k, v] : ext.entries) {
    auto [re, im] = sg_to_functions(SgElement::make(k.first, k.second, SgDomain::Nplus));
    GaussRational alg(L.apply(re), L.apply(im));
    if (!(alg == v)) {
      rep.cross_path_ok = false;
      rep.cross_path_mismatch = k;
      break;
    }
  }
  return rep;
}

/// (1 + v)/2 = f11 + i f12 and (1 - v)/2 = f22 - i f12 with v = z / zbar.
inline bool five_generator_identities_hold() {
  auto [vre, vim] = sg_to_functions(SgElement::make(1, -1, SgDomain::Nplus));
  const AElement one = a_constant(2, Rational(1));
  const Rational half(1, 2);
  bool plus = half * (one + vre) == generator_f(0, 0, 2) && half * vim == generator_f(0, 1, 2);
  bool minus = half * (one - vre) == generator_f(1, 1, 2) && Rational(-1, 2) * vim == Rational(-1) * generator_f(0, 1, 2);
  return plus && minus;
}

struct RecoveredComplexAtom {
  double weight;
  std::complex<double> z;
};

struct BisgaardReport {
  bool hermitian_ok = true;
  std::optional<std::pair<long, long>> hermitian_violation;
  std::optional<PsdVerdict> psd;  // absent when (a) fails
  long window_radius = 0;
  bool recovery_attempted = false;
  bool recovery_ok = false;
  std::string recovery_message;
  std::vector<RecoveredComplexAtom> atoms;
  double residual = 0.0;

  bool passed() const { return hermitian_ok && psd && psd->psd() && (!recovery_attempted || recovery_ok); }
};

namespace detail {

// x1^a x2^b = ((z + zbar)/2)^a ((z - zbar)/(2i))^b as sum over z^p zbar^q
inline std::map<std::pair<long, long>, GaussRational> real_monomial_in_z(unsigned a, unsigned b) {
  using Key = std::pair<long, long>;
  std::map<Key, GaussRational> acc{{{0, 0}, GaussRational(1)}};
  auto mul = [&](const GaussRational& cz, const GaussRational& czbar) {
    std::map<Key, GaussRational> next;
    for (const auto& [k, v] : acc) {
      next[{k.first + 1, k.second}] += v * cz;
      next[{k.first, k.second + 1}] += v * czbar;
    }
    acc = std::move(next);
  };
  const Rational half(1, 2);
  for (unsigned i = 0; i < a; ++i) mul(GaussRational(half), GaussRational(half));
  for (unsigned i = 0; i < b; ++i) mul(GaussRational(0, -half), GaussRational(0, half));
  return acc;
}

}  // namespace detail

/// Positivity and atom recovery for a sequence on a Z^2 window.
inline BisgaardReport bisgaard_check(const HermitianSequence& s, bool try_recovery, const RecoveryOptions& opt = {}) {
  if (auto bad = s.asymmetric_index())
    throw AsymmetricWindow("bisgaard_check: window not closed under involution at (" + std::to_string(bad->first) + "," +
                           std::to_string(bad->second) + ")");
  BisgaardReport rep;
  if (auto bad = s.hermitian_violation()) {
    rep.hermitian_ok = false;
    rep.hermitian_violation = bad;
    return rep;
  }
  const long R = s.box_radius();
  if (R < 0) throw MissingEntry(0, 0);
  rep.window_radius = R / 2;
  rep.psd = hermitian_psd_check(sg_moment_matrix(s, sg_window(SgDomain::Z2, rep.window_radius)));
  if (!try_recovery || !rep.psd->psd()) return rep;

  // moments of |z|^{-2c} mu are s(m - c, n - c); recover on the polynomial side
  rep.recovery_attempted = true;
  const long c = R / 2;
  const auto Nrec = static_cast<unsigned>((R + c) / 2);
  if (Nrec == 0) {
    rep.recovery_message = "window too small for recovery";
    return rep;
  }
  LinearFunctional<Rational> L(2, Mode::Aplus);
  for (const auto& e : exponents_in_degree_range(2, 0, 2 * Nrec)) {
    GaussRational v(0);
    for (const auto& [pq, coeff] : detail::real_monomial_in_z(e[0], e[1])) v += coeff * s.at(pq.first - c, pq.second - c);
    if (v.im != 0) {
      rep.recovery_message = "polynomial moment has nonzero imaginary part";
      return rep;
    }
    L.set(BasisKey{e, 0}, v.re);
  }
  // lowest flat order first: fewer moments, better conditioned extraction
  for (unsigned N = 1; N <= Nrec; ++N) {
    try {
      RecoveryResult rr = recover_atoms(L, 2, N, opt);
      if (rr.measure.origin_mass != 0.0) throw RecoveryFailed("recovered mass at the origin", 0.0);
      std::vector<RecoveredComplexAtom> atoms;
      for (const auto& a : rr.measure.atoms) {
        std::complex<double> z(a.point[0], a.point[1]);
        atoms.push_back({a.weight * std::pow(std::norm(z), static_cast<double>(c)), z});
      }
      double worst = 0.0, scale = 1.0;
      for (const auto& [k, v] : s.entries) {
        std::complex<double> model(0.0, 0.0);
        for (const auto& a : atoms)
          model += a.weight * std::pow(a.z, static_cast<int>(k.first)) * std::pow(std::conj(a.z), static_cast<int>(k.second));
        worst = std::max(worst, std::abs(model - v.to_complex()));
        scale = std::max(scale, std::abs(v.to_complex()));
      }
      rep.atoms = std::move(atoms);
      rep.residual = worst / scale;
      rep.recovery_ok = rep.residual <= opt.residual_tol;
      rep.recovery_message = rep.recovery_ok ? "ok" : "moment mismatch on the Z2 window";
      if (rep.recovery_ok) break;
    } catch (const RecoveryError& e) {
      rep.recovery_message = e.what();
    }
  }
  return rep;
}

/// x_j <-> y_j = x_j / |x|^2 on the Laurent algebra: x^g / |x|^{2m} -> x^g / |x|^{2(|g| - m)}.
inline AElement laurent_swap(const AElement& a) {
  if (a.mode != Mode::Laurent) throw ModeMismatch("laurent_swap: Laurent mode required");
  const std::size_t d = a.nvars();
  long top = 0;
  for (const auto& [e, c] : a.numerator.terms()) top = std::max(top, static_cast<long>(total_degree(e)) - static_cast<long>(a.pole));
  Poly num(d);
  const Poly norm = Poly::norm_squared(d);
  for (const auto& [e, c] : a.numerator.terms()) {
    long p = static_cast<long>(total_degree(e)) - static_cast<long>(a.pole);
    num += Poly::monomial(e, c) * norm.pow(static_cast<unsigned>(top - p));
  }
  return a_normalize(std::move(num), static_cast<unsigned>(top), Mode::Laurent);
}

struct NamedCheck {
  std::string name;
  bool passed;
};

struct RelationsReport {
  std::vector<NamedCheck> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const NamedCheck& c) { return c.passed; });
  }
};

inline AElement random_laurent_element(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nterms(1, 3), deg(0, 3), pole(0, 2), num(-5, 5), den(1, 4);
  Poly h(2);
  unsigned m = static_cast<unsigned>(pole(rng));
  int terms = nterms(rng);
  for (int t = 0; t < terms; ++t) {
    int total = deg(rng);
    std::uniform_int_distribution<int> split(0, total);
    int a = split(rng);
    Exponent e{static_cast<unsigned>(a), static_cast<unsigned>(total - a)};
    int nn = num(rng);
    if (nn == 0) nn = 1;
    h += Poly::monomial(e, make_rational(nn, den(rng)));
  }
  return a_normalize(std::move(h), m, Mode::Laurent);
}

/// The exact identities of the Laurent algebra generated by x_j, y_j.
inline RelationsReport laurent_relations_check(std::uint64_t seed = 0x1aa5, int random_pairs = 100) {
  RelationsReport rep;
  auto add = [&](std::string name, bool ok) { rep.checks.push_back({std::move(name), ok}); };
  const Mode L = Mode::Laurent;
  const AElement one = a_constant(2, Rational(1), L);
  const AElement zero = a_constant(2, Rational(0), L);
  const AElement x1 = embed_poly(Poly::variable(2, 0), L);
  const AElement x2 = embed_poly(Poly::variable(2, 1), L);
  const AElement y1 = a_normalize(Poly::variable(2, 0), 1, L);
  const AElement y2 = a_normalize(Poly::variable(2, 1), 1, L);

  add("x1*y1 + x2*y2 = 1", x1 * y1 + x2 * y2 == one);
  add("(x1^2 + x2^2)(y1^2 + y2^2) = 1", (x1 * x1 + x2 * x2) * (y1 * y1 + y2 * y2) == one);
  // (y1 + i y2)(x1 - i x2) = (y1 x1 + y2 x2) + i (y2 x1 - y1 x2)
  add("Re (y1 + i y2)(x1 - i x2) = 1", y1 * x1 + y2 * x2 == one);
  add("Im (y1 + i y2)(x1 - i x2) = 0", y2 * x1 - y1 * x2 == zero);
  add("Phi(x_j) = y_j", laurent_swap(x1) == y1 && laurent_swap(x2) == y2);
  add("Phi(y_j) = x_j", laurent_swap(y1) == x1 && laurent_swap(y2) == x2);
  const AElement px1 = laurent_swap(x1), px2 = laurent_swap(x2), py1 = laurent_swap(y1), py2 = laurent_swap(y2);
  add("Phi preserves x1*y1 + x2*y2 = 1", px1 * py1 + px2 * py2 == one);
  add("Phi preserves (x1^2 + x2^2)(y1^2 + y2^2) = 1", (px1 * px1 + px2 * px2) * (py1 * py1 + py2 * py2) == one);

  std::mt19937_64 rng(seed);
  bool involutive = true, multiplicative = true, additive = true;
  for (int i = 0; i < random_pairs; ++i) {
    AElement a = random_laurent_element(rng);
    AElement b = random_laurent_element(rng);
    involutive = involutive && laurent_swap(laurent_swap(a)) == a;
    multiplicative = multiplicative && laurent_swap(a * b) == laurent_swap(a) * laurent_swap(b);
    additive = additive && laurent_swap(a + b) == laurent_swap(a) + laurent_swap(b);
  }
  add("Phi(Phi(a)) = a on random elements", involutive);
  add("Phi(ab) = Phi(a)Phi(b) on random pairs", multiplicative);
  add("Phi(a + b) = Phi(a) + Phi(b) on random pairs", additive);
  return rep;
}

}  // namespace momext

#endif  // MOMEXT_SEMIGROUPS_HPP
