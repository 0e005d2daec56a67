#ifndef MOMEXT_IO_HPP
#define MOMEXT_IO_HPP

// JSON file forms. Exact scalars travel as "p/q" strings; float scalars as
// JSON numbers. Readers accept either and report the failing location.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "momext/fibres.hpp"
#include "momext/semigroups.hpp"

namespace momext::io {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& where, const std::string& what) : std::runtime_error(where + ": " + what) {}
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path, e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline Rational rational_from_json(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(mpz_class(std::to_string(j.get<long long>()), 10));
    if (j.is_number()) return from_double(j.get<double>());
  } catch (const std::invalid_argument& e) {
    throw FormatError(where, e.what());
  }
  throw FormatError(where, "expected a rational string or number");
}

inline double double_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  return rational_from_json(j, where).get_d();
}

inline unsigned natural_from_json(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw FormatError(where, "expected a nonnegative integer");
  return static_cast<unsigned>(j.get<long long>());
}

inline json to_json(const Rational& r) { return r.get_str(); }

inline json exponent_to_json(const Exponent& e) { return json(e); }

inline Exponent exponent_from_json(const json& j, std::size_t nvars, const std::string& where) {
  if (!j.is_array()) throw FormatError(where, "exponent must be an array");
  if (j.size() != nvars) throw FormatError(where, "exponent has length " + std::to_string(j.size()) + ", expected " + std::to_string(nvars));
  Exponent e;
  for (std::size_t i = 0; i < j.size(); ++i) e.push_back(natural_from_json(j[i], where + "/" + std::to_string(i)));
  return e;
}

// --- polynomials ---

inline json to_json(const Poly& p) {
  json terms = json::array();
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it)
    terms.push_back({{"coeff", it->second.get_str()}, {"exp", it->first}});
  return {{"nvars", p.nvars()}, {"terms", terms}};
}

inline Poly poly_from_json(const json& j, const std::string& where) {
  unsigned d = natural_from_json(field(j, "nvars", where), where + "/nvars");
  if (d == 0) throw FormatError(where + "/nvars", "must be positive");
  const json& terms = field(j, "terms", where);
  if (!terms.is_array()) throw FormatError(where + "/terms", "must be an array");
  Poly p(d);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    std::string w = where + "/terms/" + std::to_string(i);
    p.add_term(exponent_from_json(field(terms[i], "exp", w), d, w + "/exp"), rational_from_json(field(terms[i], "coeff", w), w + "/coeff"));
  }
  return p;
}

inline json to_json(const AElement& a) {
  return {{"numerator", to_json(a.numerator)}, {"pole_order", a.pole}, {"mode", to_string(a.mode)}};
}

inline AElement aelement_from_json(const json& j, const std::string& where) {
  Poly h = poly_from_json(field(j, "numerator", where), where + "/numerator");
  unsigned m = natural_from_json(field(j, "pole_order", where), where + "/pole_order");
  Mode mode = Mode::Aplus;
  if (j.contains("mode")) {
    try {
      mode = parse_mode(j.at("mode").get<std::string>());
    } catch (const std::exception& e) {
      throw FormatError(where + "/mode", e.what());
    }
  }
  try {
    return a_normalize(std::move(h), m, mode);
  } catch (const MembershipError& e) {
    throw FormatError(where, e.what());
  }
}

// --- measures ---

template <typename S>
json scalar_to_json(const S& v) {
  if constexpr (std::is_same_v<S, Rational>)
    return v.get_str();
  else
    return v;
}

template <typename S>
json to_json(const DiscreteMeasure<S>& mu) {
  auto atoms_json = [](const std::vector<Atom<S>>& atoms) {
    json arr = json::array();
    for (const auto& a : atoms) {
      json pt = json::array();
      for (const auto& c : a.point) pt.push_back(scalar_to_json(c));
      arr.push_back({{"weight", scalar_to_json(a.weight)}, {"point", pt}});
    }
    return arr;
  };
  return {{"dim", mu.dim},
          {"atoms", atoms_json(mu.atoms)},
          {"origin_mass", scalar_to_json(mu.origin_mass)},
          {"sphere_atoms", atoms_json(mu.sphere_atoms)}};
}

inline DiscreteMeasure<Rational> measure_from_json(const json& j, const std::string& where) {
  DiscreteMeasure<Rational> mu;
  mu.dim = natural_from_json(field(j, "dim", where), where + "/dim");
  if (mu.dim == 0) throw FormatError(where + "/dim", "must be positive");
  auto read_atoms = [&](const char* key, std::vector<Atom<Rational>>& out) {
    if (!j.contains(key)) return;
    const json& arr = j.at(key);
    if (!arr.is_array()) throw FormatError(where + "/" + key, "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string w = where + "/" + key + "/" + std::to_string(i);
      Atom<Rational> a;
      a.weight = rational_from_json(field(arr[i], "weight", w), w + "/weight");
      const json& pt = field(arr[i], "point", w);
      if (!pt.is_array() || pt.size() != mu.dim) throw FormatError(w + "/point", "expected " + std::to_string(mu.dim) + " coordinates");
      for (std::size_t k = 0; k < pt.size(); ++k) a.point.push_back(rational_from_json(pt[k], w + "/point/" + std::to_string(k)));
      out.push_back(std::move(a));
    }
  };
  read_atoms("atoms", mu.atoms);
  read_atoms("sphere_atoms", mu.sphere_atoms);
  if (j.contains("origin_mass")) mu.origin_mass = rational_from_json(j.at("origin_mass"), where + "/origin_mass");
  try {
    mu.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(where, e.what());
  }
  return mu;
}

// --- functionals ---

template <typename S>
json to_json(const LinearFunctional<S>& L) {
  json entries = json::array();
  for (const auto& [k, v] : L.values())
    entries.push_back({{"exp", k.exp}, {"pole_order", k.pole}, {"value", scalar_to_json(v)}});
  return {{"scalar_kind", std::is_same_v<S, Rational> ? "exact" : "float"},
          {"nvars", L.nvars()},
          {"mode", to_string(L.mode())},
          {"entries", entries}};
}

/// Reads as exact rationals; float files are converted by exact binary value.
inline LinearFunctional<Rational> functional_from_json(const json& j, const std::string& where) {
  const json& entries = field(j, "entries", where);
  if (!entries.is_array()) throw FormatError(where + "/entries", "must be an array");
  std::size_t d = 0;
  if (j.contains("nvars"))
    d = natural_from_json(j.at("nvars"), where + "/nvars");
  else if (!entries.empty())
    d = field(entries[0], "exp", where + "/entries/0").size();
  if (d == 0) throw FormatError(where, "cannot determine nvars");
  Mode mode = Mode::Aplus;
  if (j.contains("mode")) {
    try {
      mode = parse_mode(j.at("mode").get<std::string>());
    } catch (const std::exception& e) {
      throw FormatError(where + "/mode", e.what());
    }
  }
  LinearFunctional<Rational> L(d, mode);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string w = where + "/entries/" + std::to_string(i);
    BasisKey k{exponent_from_json(field(entries[i], "exp", w), d, w + "/exp"), 0};
    if (entries[i].contains("pole_order")) k.pole = natural_from_json(entries[i].at("pole_order"), w + "/pole_order");
    try {
      L.set(k, rational_from_json(field(entries[i], "value", w), w + "/value"));
    } catch (const MembershipError& e) {
      throw FormatError(w, e.what());
    }
  }
  return L;
}

// --- matrices ---

template <typename S>
json matrix_to_json(const DenseMatrix<S>& m, const std::vector<BasisKey>& basis) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(scalar_to_json(m(i, j)));
    rows.push_back(r);
  }
  json manifest = json::array();
  for (const auto& k : basis) manifest.push_back({{"exp", k.exp}, {"pole_order", k.pole}});
  return {{"rows", rows}, {"basis", manifest}};
}

inline json to_json(const PsdVerdict& v) {
  json out{{"outcome", v.psd() ? "PSD" : "NotPSD"}};
  if (v.psd()) {
    out["rank"] = v.rank;
    if (v.factorization) {
      json diag = json::array();
      for (const auto& d : v.factorization->diag) diag.push_back(d.get_str());
      out["permutation"] = v.factorization->perm;
      out["ldl_diagonal"] = diag;
    }
  } else {
    json w = json::array();
    for (const auto& c : v.witness) w.push_back(c.get_str());
    out["witness"] = w;
    out["witness_value"] = v.witness_value.get_str();
  }
  return out;
}

// --- fibres ---

inline json to_json(const Preorder& T) {
  json gens = json::array();
  for (const auto& g : T.generators) gens.push_back(to_json(g));
  return {{"dim", T.dim}, {"generators", gens}};
}

inline Preorder preorder_from_json(const json& j, const std::string& where) {
  Preorder T;
  T.dim = natural_from_json(field(j, "dim", where), where + "/dim");
  const json& gens = field(j, "generators", where);
  if (!gens.is_array()) throw FormatError(where + "/generators", "must be an array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Poly g = poly_from_json(gens[i], where + "/generators/" + std::to_string(i));
    if (g.nvars() != T.dim) throw FormatError(where + "/generators/" + std::to_string(i), "dimension mismatch");
    T.generators.push_back(std::move(g));
  }
  return T;
}

inline json to_json(const FibreSpec& s) {
  json h = json::array(), lam = json::array();
  for (const auto& p : s.h) h.push_back(to_json(p));
  for (const auto& l : s.lambda) lam.push_back(l.get_str());
  return {{"h", h}, {"lambda", lam}};
}

inline FibreSpec fibre_spec_from_json(const json& j, const std::string& where) {
  FibreSpec s;
  const json& h = field(j, "h", where);
  if (!h.is_array()) throw FormatError(where + "/h", "must be an array");
  for (std::size_t i = 0; i < h.size(); ++i) s.h.push_back(poly_from_json(h[i], where + "/h/" + std::to_string(i)));
  if (j.contains("lambda")) {
    const json& lam = j.at("lambda");
    if (!lam.is_array()) throw FormatError(where + "/lambda", "must be an array");
    for (std::size_t i = 0; i < lam.size(); ++i) s.lambda.push_back(rational_from_json(lam[i], where + "/lambda/" + std::to_string(i)));
  } else {
    s.lambda.assign(s.h.size(), Rational(0));
  }
  if (s.h.size() != s.lambda.size()) throw FormatError(where, "h and lambda lengths differ");
  return s;
}

inline json samples_to_json(std::size_t dim, const std::vector<RationalPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) {
    json row = json::array();
    for (const auto& c : p) row.push_back(c.get_str());
    arr.push_back(row);
  }
  return {{"dim", dim}, {"points", arr}};
}

inline std::vector<RationalPoint> samples_from_json(const json& j, std::size_t dim, const std::string& where) {
  const json& pts = field(j, "points", where);
  if (!pts.is_array()) throw FormatError(where + "/points", "must be an array");
  std::vector<RationalPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::string w = where + "/points/" + std::to_string(i);
    if (!pts[i].is_array() || pts[i].size() != dim) throw FormatError(w, "expected " + std::to_string(dim) + " coordinates");
    RationalPoint p;
    for (std::size_t k = 0; k < dim; ++k) p.push_back(rational_from_json(pts[i][k], w + "/" + std::to_string(k)));
    out.push_back(std::move(p));
  }
  return out;
}

// --- semigroups ---

inline json to_json(const HermitianSequence& s) {
  json entries = json::array();
  for (const auto& [k, v] : s.entries) entries.push_back({{"m", k.first}, {"n", k.second}, {"re", v.re.get_str()}, {"im", v.im.get_str()}});
  return {{"domain", to_string(s.domain)}, {"entries", entries}};
}

inline HermitianSequence sequence_from_json(const json& j, const std::string& where) {
  HermitianSequence s;
  try {
    s.domain = parse_domain(field(j, "domain", where).get<std::string>());
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(where + "/domain", e.what());
  }
  const json& entries = field(j, "entries", where);
  if (!entries.is_array()) throw FormatError(where + "/entries", "must be an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string w = where + "/entries/" + std::to_string(i);
    const json& e = entries[i];
    if (!field(e, "m", w).is_number_integer() || !field(e, "n", w).is_number_integer())
      throw FormatError(w, "m and n must be integers");
    long m = e.at("m").get<long>(), n = e.at("n").get<long>();
    if (!in_domain(m, n, s.domain)) throw FormatError(w, "index outside the " + to_string(s.domain) + " domain");
    GaussRational v(rational_from_json(field(e, "re", w), w + "/re"),
                    e.contains("im") ? rational_from_json(e.at("im"), w + "/im") : Rational(0));
    if (!s.entries.emplace(std::make_pair(m, n), v).second) throw FormatError(w, "duplicate index");
  }
  return s;
}

/// Complex atoms from a dim-2 measure file (point = [Re z, Im z]).
inline std::vector<ComplexAtom> complex_atoms_from_measure(const DiscreteMeasure<Rational>& mu, const std::string& where) {
  if (mu.dim != 2) throw FormatError(where, "complex measures need dim 2");
  if (mu.origin_mass != 0 || !mu.sphere_atoms.empty()) throw FormatError(where, "complex measures on C\\{0} admit only atoms");
  std::vector<ComplexAtom> atoms;
  for (const auto& a : mu.atoms) atoms.push_back({a.weight, GaussRational(a.point[0], a.point[1])});
  return atoms;
}

}  // namespace momext::io

#endif  // MOMEXT_IO_HPP
