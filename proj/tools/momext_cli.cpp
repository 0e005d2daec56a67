// momext: command-line front end. Exit codes: 0 positive verdict, 1 negative
// verdict, 2 usage or input error, 3 unresolved or indeterminate.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "momext/io.hpp"
#include "momext/momext.hpp"

using namespace momext;
using io::json;

namespace {

enum Exit { kOk = 0, kNegative = 1, kInput = 2, kUnresolved = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string scalar = "exact";
  double tol = 1e-7;
  std::uint64_t seed = 0x5eed;
  unsigned jobs = 1;
  std::string out;

  bool exact() const { return scalar == "exact"; }
};

struct Report {
  json doc;
  std::vector<std::string> summary;
  int code = kOk;
};

int emit(const Global& g, const Report& r) {
  if (!g.out.empty()) {
    io::write_json_file(g.out, r.doc);
    for (const auto& s : r.summary) std::cout << s << '\n';
  } else {
    for (const auto& s : r.summary) std::cerr << s << '\n';
    std::cout << r.doc.dump(2) << '\n';
  }
  return r.code;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_rational(item));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--hankel: ") + e.what());
    }
  }
  return out;
}

json keys_to_json(const std::vector<BasisKey>& keys) {
  json arr = json::array();
  for (const auto& k : keys) arr.push_back({{"exp", k.exp}, {"pole_order", k.pole}});
  return arr;
}

LinearFunctional<Rational> load_functional(const std::string& path) {
  return io::functional_from_json(io::read_json_file(path), path);
}

// --- psd-check ---

struct PsdArgs {
  std::string functional;
  std::string hankel;
  unsigned M = 1, D = 2;
};

Report cmd_psd_check(const Global& g, const PsdArgs& a) {
  Report r;
  r.doc["command"] = "psd-check";
  r.doc["scalar_kind"] = g.scalar;
  if (!a.hankel.empty()) {
    auto s = parse_rational_list(a.hankel);
    if (s.size() % 2 == 0) throw InputError("--hankel needs an odd number of moments s0..s2n");
    r.doc["hankel"] = json::array();
    for (const auto& v : s) r.doc["hankel"].push_back(v.get_str());
    if (g.exact()) {
      auto v = hamburger_check(s);
      r.doc["verdict"] = io::to_json(v);
      r.code = v.psd() ? kOk : kNegative;
    } else {
      const std::size_t n = s.size() / 2 + 1;
      Eigen::MatrixXd h(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) = s[i + j].get_d();
      auto v = psd_check_float(h, g.tol);
      r.doc["verdict"] = {{"outcome", v.psd ? "PSD" : "NotPSD"}, {"min_eigenvalue", v.min_eigenvalue}};
      r.code = v.psd ? kOk : kNegative;
    }
  } else {
    if (a.functional.empty()) throw InputError("psd-check needs --functional or --hankel");
    auto L = load_functional(a.functional);
    if (auto bad = L.reduction_violations(); !bad.empty())
      throw InputError(a.functional + ": reduction relation violated at " + bad.front().to_string());
    const auto keys = truncated_keys(a.M, a.D, L.nvars(), L.mode());
    r.doc["basis"] = keys_to_json(keys);
    RationalMatrix gm = gram_matrix(L, keys);
    if (g.exact()) {
      auto v = psd_check_exact(gm);
      r.doc["verdict"] = io::to_json(v);
      r.code = v.psd() ? kOk : kNegative;
    } else {
      auto v = psd_check_float(to_eigen(gm), g.tol);
      r.doc["verdict"] = {{"outcome", v.psd ? "PSD" : "NotPSD"}, {"min_eigenvalue", v.min_eigenvalue}};
      r.code = v.psd ? kOk : kNegative;
    }
  }
  r.summary.push_back(std::string("psd-check: ") + r.doc["verdict"]["outcome"].get<std::string>());
  return r;
}

// --- extend ---

struct ExtendArgs {
  std::string measure;
  unsigned M = 1, D = 2;
  std::string mode = "aplus";
};

Report cmd_extend(const Global& g, const ExtendArgs& a) {
  auto mu = io::measure_from_json(io::read_json_file(a.measure), a.measure);
  Mode mode = a.mode == "laurent" ? Mode::Laurent : Mode::Aplus;
  if (a.D < 2 * a.M) throw InputError("extend: D < 2M");
  LinearFunctional<Rational> L = mode == Mode::Aplus
                                     ? extend_from_measure(mu, a.M, a.D)
                                     : moments_of_measure(mu, window_keys(2 * a.M, 2 * a.D, mu.dim, Mode::Laurent), Mode::Laurent);
  Report r;
  r.doc = g.exact() ? io::to_json(L) : io::to_json(L.convert<double>());
  r.summary.push_back("extend: " + std::to_string(L.values().size()) + " keys, mode " + to_string(mode));
  return r;
}

// --- feasibility ---

struct FeasArgs {
  std::string functional;
  unsigned M = 1, D = 2, iters = 5000;
  bool no_measure_start = false;
};

Report cmd_feasibility(const Global& g, const FeasArgs& a) {
  auto L = load_functional(a.functional);
  FeasibilityOptions opt;
  opt.max_iters = a.iters;
  opt.tol = g.tol;
  opt.seed = g.seed;
  opt.measure_start = !a.no_measure_start;
  FeasibilityResult res;
  try {
    res = extension_feasibility(L, a.M, a.D, opt);
  } catch (const InfeasibleInput& e) {
    throw InputError(e.what());
  }
  Report r;
  r.doc = {{"command", "feasibility"},
           {"status", res.feasible() ? "Feasible" : "Unresolved"},
           {"gap", res.gap},
           {"min_eigenvalue", res.min_eigenvalue},
           {"constraint_residual", res.constraint_residual},
           {"iterations", res.iterations},
           {"measure_start", res.measure_start}};
  if (res.feasible()) r.doc["extension"] = io::to_json(res.extension);
  r.code = res.feasible() ? kOk : kUnresolved;
  std::ostringstream s;
  s << "feasibility: " << r.doc["status"].get<std::string>() << " after " << res.iterations << " iterations, gap "
    << res.gap;
  r.summary.push_back(s.str());
  return r;
}

// --- fibres ---

struct FibreArgs {
  std::string preorder, fibre, samples, functional;
  unsigned D = 1;
  double step = 1e-9;
};

Report cmd_fibres(const Global& g, const FibreArgs& a) {
  auto T = io::preorder_from_json(io::read_json_file(a.preorder), a.preorder);
  auto spec = io::fibre_spec_from_json(io::read_json_file(a.fibre), a.fibre);
  auto pts = io::samples_from_json(io::read_json_file(a.samples), T.dim, a.samples);
  PartitionReport part;
  if (g.exact()) {
    part = fibre_partition_check(T, spec.h, pts);
  } else {
    std::vector<std::vector<double>> fp;
    for (const auto& p : pts) {
      fp.emplace_back();
      for (const auto& c : p) fp.back().push_back(c.get_d());
    }
    part = fibre_partition_check(T, spec.h, fp, a.step, g.tol);
  }
  Report r;
  r.doc["command"] = "fibres";
  json buckets = json::array();
  for (const auto& [lam, idx] : part.buckets) {
    json l = json::array();
    for (const auto& v : lam) l.push_back(v.get_str());
    buckets.push_back({{"lambda", l}, {"samples", idx}});
  }
  json ranges = json::array();
  for (const auto& h : part.h_ranges)
    ranges.push_back({{"min", h.min.get_str()}, {"max", h.max.get_str()}, {"flagged_unbounded", h.flagged_unbounded}});
  r.doc["partition"] = {{"disjoint", part.disjoint}, {"buckets", buckets}, {"outside", part.outside}, {"h_ranges", ranges}};
  bool ok = part.disjoint;
  r.summary.push_back("fibres: " + std::to_string(part.buckets.size()) + " fibres, " + std::to_string(part.outside.size()) +
                      " samples outside K(T), " + (part.disjoint ? "disjoint" : "overlapping"));

  if (!a.functional.empty()) {
    auto L = load_functional(a.functional);
    auto pos = t_positivity_check(L, fibre_generators(T, spec), a.D);
    bool ann = functional_annihilates_ideal(L, fibre_ideal_generators(spec), a.D);
    json entries = json::array();
    for (const auto& e : pos.entries)
      entries.push_back({{"subset", e.subset}, {"product", io::to_json(e.product)}, {"verdict", io::to_json(e.verdict)}});
    r.doc["fibre"] = {{"t_positive", pos.positive()}, {"annihilates_ideal", ann}, {"localizing", entries}};
    ok = ok && pos.positive() && ann;
    r.summary.push_back(std::string("fibres: functional ") + (pos.positive() ? "T-positive" : "not T-positive") + ", ideal " +
                        (ann ? "annihilated" : "not annihilated"));
  }
  r.code = ok ? kOk : kNegative;
  return r;
}

// --- semigroup ---

struct SgArgs {
  std::string pipeline;
  std::string sequence, measure;
  long N = 2;
};

HermitianSequence load_sequence(const std::string& path) { return io::sequence_from_json(io::read_json_file(path), path); }

Report cmd_semigroup(const Global& g, const SgArgs& a) {
  Report r;
  r.doc["command"] = "semigroup";
  r.doc["pipeline"] = a.pipeline;
  if (a.pipeline == "relations") {
    auto rep = laurent_relations_check(g.seed);
    json checks = json::array();
    bool all = true;
    for (const auto& c : rep.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}});
      all = all && c.passed;
    }
    r.doc["checks"] = checks;
    r.code = all ? kOk : kNegative;
    r.summary.push_back(std::string("relations: ") + (all ? "all hold" : "violated"));
    return r;
  }
  std::vector<ComplexAtom> atoms;
  if (!a.measure.empty()) atoms = io::complex_atoms_from_measure(io::measure_from_json(io::read_json_file(a.measure), a.measure), a.measure);

  if (a.pipeline == "nplus") {
    if (a.measure.empty()) throw InputError("nplus pipeline needs --measure");
    HermitianSequence s = a.sequence.empty() ? sequence_from_measure(atoms, SgDomain::N02, 2 * a.N) : load_sequence(a.sequence);
    if (s.domain != SgDomain::N02) throw InputError("nplus pipeline needs an N02 sequence");
    if (auto bad = s.hermitian_violation())
      throw InputError("sequence violates s(n,m) = conj s(m,n) at (" + std::to_string(bad->first) + "," + std::to_string(bad->second) + ")");
    auto rep = nplus_extension_check(s, atoms, a.N);
    r.doc["restriction_ok"] = rep.restriction_ok;
    r.doc["psd"] = io::to_json(rep.psd);
    r.doc["cross_path_ok"] = rep.cross_path_ok;
    if (rep.restriction_mismatch) r.doc["restriction_mismatch"] = {rep.restriction_mismatch->first, rep.restriction_mismatch->second};
    if (rep.cross_path_mismatch) r.doc["cross_path_mismatch"] = {rep.cross_path_mismatch->first, rep.cross_path_mismatch->second};
    r.doc["five_generator_identities"] = five_generator_identities_hold();
    r.code = rep.passed() ? kOk : kNegative;
    r.summary.push_back(std::string("nplus: ") + (rep.passed() ? "passed" : "failed"));
    return r;
  }
  if (a.pipeline == "bisgaard") {
    HermitianSequence s;
    if (!a.sequence.empty())
      s = load_sequence(a.sequence);
    else if (!a.measure.empty())
      s = sequence_from_measure(atoms, SgDomain::Z2, 2 * a.N);
    else
      throw InputError("bisgaard pipeline needs --sequence or --measure");
    if (s.domain != SgDomain::Z2) throw InputError("bisgaard pipeline needs a Z2 sequence");
    RecoveryOptions ro;
    ro.seed = g.seed;
    BisgaardReport rep;
    try {
      rep = bisgaard_check(s, true, ro);
    } catch (const AsymmetricWindow& e) {
      throw InputError(e.what());
    } catch (const MissingEntry& e) {
      throw InputError(e.what());
    }
    if (!rep.hermitian_ok)
      throw InputError("sequence violates s(n,m) = conj s(m,n) at (" + std::to_string(rep.hermitian_violation->first) + "," +
                       std::to_string(rep.hermitian_violation->second) + ")");
    r.doc["window_radius"] = rep.window_radius;
    r.doc["psd"] = io::to_json(*rep.psd);
    r.doc["recovery"] = {{"attempted", rep.recovery_attempted}, {"ok", rep.recovery_ok}, {"message", rep.recovery_message},
                         {"residual", rep.residual}};
    json at = json::array();
    for (const auto& x : rep.atoms) at.push_back({{"weight", x.weight}, {"re", x.z.real()}, {"im", x.z.imag()}});
    r.doc["recovery"]["atoms"] = at;
    if (!rep.psd->psd())
      r.code = kNegative;
    else
      r.code = rep.recovery_ok ? kOk : kUnresolved;
    r.summary.push_back(std::string("bisgaard: ") + (rep.psd->psd() ? "PSD" : "NotPSD") + ", " + std::to_string(rep.atoms.size()) +
                        " atoms recovered, " + rep.recovery_message);
    return r;
  }
  throw InputError("unknown pipeline '" + a.pipeline + "'");
}

// --- recover-atoms ---

struct RecoverArgs {
  std::string functional;
  unsigned N = 2;
  double rank_tol = 1e-9;
};

Report cmd_recover(const Global& g, const RecoverArgs& a) {
  auto L = load_functional(a.functional);
  RecoveryOptions ro;
  ro.rank_tol = a.rank_tol;
  ro.seed = g.seed;
  Report r;
  r.doc["command"] = "recover-atoms";
  try {
    RecoveryResult rec = g.exact() ? recover_atoms(L, L.nvars(), a.N, ro) : recover_atoms(L.convert<double>(), L.nvars(), a.N, ro);
    r.doc["measure"] = io::to_json(rec.measure);
    r.doc["rank"] = rec.rank;
    r.doc["residual"] = rec.residual;
    r.doc["singular_values"] = rec.singular_values;
    r.summary.push_back("recover-atoms: " + std::to_string(rec.measure.atoms.size()) + " atoms, rank " + std::to_string(rec.rank));
  } catch (const IndeterminateRank& e) {
    r.doc["error"] = {{"kind", "IndeterminateRank"}, {"message", e.what()}};
    r.code = kUnresolved;
    r.summary.push_back(std::string("recover-atoms: indeterminate rank: ") + e.what());
  } catch (const RecoveryFailed& e) {
    r.doc["error"] = {{"kind", "RecoveryFailed"}, {"message", e.what()}, {"residual", e.residual}};
    r.code = std::string(e.what()).find("not positive semidefinite") != std::string::npos ? kNegative : kUnresolved;
    r.summary.push_back(std::string("recover-atoms: ") + e.what());
  }
  return r;
}

// --- gen-examples ---

struct GenArgs {
  std::string scenario;
};

int cmd_gen_examples(const Global& g, const GenArgs& a) {
  namespace fs = std::filesystem;
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  std::vector<std::pair<std::string, json>> files;
  if (a.scenario == "strip") {
    Poly x1 = Poly::variable(2, 0);
    files.emplace_back("preorder.json", io::to_json(Preorder{2, {x1, Poly::constant(2, Rational(1)) - x1}}));
    files.emplace_back("fibre.json", io::to_json(FibreSpec{{x1}, {make_rational(1, 2)}}));
    std::vector<RationalPoint> grid;
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) grid.push_back({make_rational(i, 20), make_rational(j - 10, 2)});
    files.emplace_back("samples.json", io::samples_to_json(2, grid));
    DiscreteMeasure<Rational> mu;
    mu.dim = 2;
    mu.atoms = {{Rational(1), {make_rational(1, 2), Rational(3)}}, {Rational(2), {make_rational(1, 2), Rational(-1)}}};
    files.emplace_back("fibre_functional.json", io::to_json(moments_of_measure(mu, polynomial_keys(2, 6), Mode::Aplus)));
  } else if (a.scenario == "bisgaard-two-atoms") {
    std::vector<ComplexAtom> atoms{{Rational(2), GaussRational(Rational(1), Rational(0))},
                                   {Rational(1), GaussRational(Rational(0), Rational(-2))}};
    files.emplace_back("sequence.json", io::to_json(sequence_from_measure(atoms, SgDomain::Z2, 4)));
    files.emplace_back("measure.json", io::to_json(planar_measure(atoms)));
  } else if (a.scenario == "random-measure") {
    std::mt19937_64 rng(g.seed);
    std::uniform_int_distribution<int> count(1, 4), num(-6, 6), den(1, 3), w(1, 5);
    DiscreteMeasure<Rational> mu;
    mu.dim = 2;
    for (int n = count(rng); n > 0; --n) {
      RationalPoint p;
      do p = {make_rational(num(rng), den(rng)), make_rational(num(rng), den(rng))};
      while (p[0] == 0 && p[1] == 0);
      mu.atoms.push_back({make_rational(w(rng), 2), p});
    }
    files.emplace_back("measure.json", io::to_json(mu));
    files.emplace_back("functional.json", io::to_json(moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus)));
  } else {
    throw InputError("unknown scenario '" + a.scenario + "' (expected strip, bisgaard-two-atoms or random-measure)");
  }
  fs::create_directories(dir);
  for (const auto& [name, doc] : files) {
    io::write_json_file((dir / name).string(), doc);
    std::cout << (dir / name).string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive extensions of moment functionals: exact PSD certificates, fibres, semigroup pipelines"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--scalar", g.scalar, "exact or float")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--tol", g.tol, "float tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed for every random choice");
  app.add_option("--jobs", g.jobs, "worker count (work is sequential; accepted for interface stability)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "report file (gen-examples: output directory)");

  PsdArgs psd;
  auto* c_psd = app.add_subcommand("psd-check", "Gram matrix PSD verdict for a functional, or a Hankel check");
  c_psd->add_option("--functional", psd.functional, "functional file");
  c_psd->add_option("--hankel", psd.hankel, "comma separated moments s0,...,s2n (univariate)");
  c_psd->add_option("--M", psd.M, "pole order of the basis");
  c_psd->add_option("--D", psd.D, "degree bound of the basis");

  ExtendArgs ext;
  auto* c_ext = app.add_subcommand("extend", "Extension functional of a measure on window keys");
  c_ext->add_option("--measure", ext.measure, "measure file")->required();
  c_ext->add_option("--M", ext.M);
  c_ext->add_option("--D", ext.D);
  c_ext->add_option("--mode", ext.mode, "aplus or laurent")->transform(CLI::IsMember({"aplus", "laurent"}, CLI::ignore_case));

  FeasArgs fea;
  auto* c_fea = app.add_subcommand("feasibility", "Search for a positive extension by alternating projections");
  c_fea->add_option("--functional", fea.functional, "functional on polynomial keys")->required();
  c_fea->add_option("--M", fea.M);
  c_fea->add_option("--D", fea.D);
  c_fea->add_option("--iters", fea.iters, "iteration budget");
  c_fea->add_flag("--no-measure-start", fea.no_measure_start, "start from zero instead of a constructed measure");

  FibreArgs fib;
  auto* c_fib = app.add_subcommand("fibres", "Fibre partition and per-fibre positivity");
  c_fib->add_option("--preorder", fib.preorder)->required();
  c_fib->add_option("--fibre", fib.fibre, "bounded elements h and fibre value lambda")->required();
  c_fib->add_option("--samples", fib.samples)->required();
  c_fib->add_option("--functional", fib.functional, "functional to test on the fibre");
  c_fib->add_option("--D", fib.D, "localizing degree");
  c_fib->add_option("--step", fib.step, "quantization step for float samples")->check(CLI::PositiveNumber);

  SgArgs sg;
  auto* c_sg = app.add_subcommand("semigroup", "Semigroup pipelines");
  c_sg->add_option("--pipeline", sg.pipeline)->required()->check(CLI::IsMember({"nplus", "bisgaard", "relations"}));
  c_sg->add_option("--sequence", sg.sequence);
  c_sg->add_option("--measure", sg.measure, "dim-2 measure read as atoms on C\\{0}");
  c_sg->add_option("--N", sg.N, "window radius")->check(CLI::PositiveNumber);

  RecoverArgs rec;
  auto* c_rec = app.add_subcommand("recover-atoms", "Atoms of a flat truncated moment functional");
  c_rec->add_option("--functional", rec.functional)->required();
  c_rec->add_option("--N", rec.N)->check(CLI::PositiveNumber);
  c_rec->add_option("--rank-tol", rec.rank_tol)->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-examples", "Write scenario input files");
  c_gen->add_option("--scenario", gen.scenario)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*c_psd) return emit(g, cmd_psd_check(g, psd));
    if (*c_ext) return emit(g, cmd_extend(g, ext));
    if (*c_fea) return emit(g, cmd_feasibility(g, fea));
    if (*c_fib) return emit(g, cmd_fibres(g, fib));
    if (*c_sg) return emit(g, cmd_semigroup(g, sg));
    if (*c_rec) return emit(g, cmd_recover(g, rec));
    if (*c_gen) return cmd_gen_examples(g, gen);
  } catch (const io::FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const DomainOverflow& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}
