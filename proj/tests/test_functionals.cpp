#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "momext/feasibility.hpp"
#include "support.hpp"

using namespace momext;
using testing_support::q;

namespace {

DiscreteMeasure<Rational> measure(std::size_t d, std::vector<Atom<Rational>> atoms, Rational origin = 0) {
  DiscreteMeasure<Rational> mu;
  mu.dim = d;
  mu.atoms = std::move(atoms);
  mu.origin_mass = origin;
  return mu;
}

RationalMatrix from_rows(std::vector<std::vector<long>> rows) {
  RationalMatrix m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  return m;
}

BasisKey key(Exponent e, unsigned pole = 0) { return BasisKey{std::move(e), pole}; }

// v^T G v = sum_atoms w (sum_i v_i b_i(x))^2, evaluated straight from the atoms
Rational measure_quadratic_form(const DiscreteMeasure<Rational>& mu, const std::vector<BasisKey>& basis,
                                const std::vector<Rational>& v) {
  Rational total(0);
  for (const auto& a : mu.atoms) {
    Rational s(0);
    for (std::size_t i = 0; i < basis.size(); ++i) s += v[i] * detail::key_at_point(basis[i], a.point);
    total += a.weight * s * s;
  }
  return total;
}

}  // namespace

TEST(Psd, IdentityAndSwap) {
  auto v = psd_check_exact(RationalMatrix::identity(3));
  EXPECT_TRUE(v.psd());
  EXPECT_EQ(v.rank, 3u);
  EXPECT_TRUE(certificate_reproduces(RationalMatrix::identity(3), v));

  RationalMatrix s = from_rows({{0, 1}, {1, 0}});
  auto w = psd_check_exact(s);
  ASSERT_FALSE(w.psd());
  EXPECT_EQ(w.witness, (std::vector<Rational>{q(1), q(-1)}));
  EXPECT_EQ(w.witness_value, -2);
  EXPECT_EQ(quadratic_form(s, w.witness), -2);
}

TEST(Psd, RejectsAsymmetric) {
  RationalMatrix m = from_rows({{1, 2}, {0, 1}});
  EXPECT_THROW(psd_check_exact(m), NotSymmetric);
}

TEST(Psd, RandomCertificatesReproduce) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 60; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 5);
    const std::size_t r = static_cast<std::size_t>(i % 3) + 1;
    RationalMatrix b(r, n);
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t c = 0; c < n; ++c) b(a, c) = testing_support::random_rational(rng, 3, 2);
    RationalMatrix g(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t k = 0; k < r; ++k) g(a, c) += b(k, a) * b(k, c);
    if (i % 2) g(n - 1, n - 1) -= 1;  // may or may not break positivity
    auto v = psd_check_exact(g);
    EXPECT_TRUE(certificate_reproduces(g, v));
    if (!v.psd()) EXPECT_LT(quadratic_form(g, v.witness), 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(g));
    if (v.psd())
      EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
    else
      EXPECT_LT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Psd, FloatExamples) {
  Eigen::MatrixXd a = Eigen::Vector2d(1.0, 1e-12).asDiagonal();
  EXPECT_TRUE(psd_check_float(a, 1e-9).psd);
  Eigen::MatrixXd b = Eigen::Vector2d(1.0, -1e-3).asDiagonal();
  EXPECT_FALSE(psd_check_float(b, 1e-9).psd);
  std::mt19937_64 rng(32);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(5, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  Eigen::MatrixXd g = m.transpose() * m + 1e-8 * Eigen::MatrixXd::Identity(5, 5);
  EXPECT_TRUE(psd_check_float(g, 1e-9).psd);
}

TEST(Psd, Hamburger) {
  auto one = hamburger_check({q(1), q(1), q(1), q(1), q(1)});
  EXPECT_TRUE(one.psd());
  EXPECT_EQ(one.rank, 1u);
  EXPECT_FALSE(hamburger_check({q(1), q(0), q(-1)}).psd());
  auto two = hamburger_check({q(2), q(0), q(2), q(0), q(2)});
  EXPECT_TRUE(two.psd());
  EXPECT_EQ(two.rank, 2u);
  EXPECT_THROW(hamburger_check({q(1), q(0)}), std::invalid_argument);
}

TEST(Functionals, MomentsOfMeasureExamples) {
  auto keys = window_keys(1, 4, 2, Mode::Aplus);
  auto empty = moments_of_measure(measure(2, {}), keys, Mode::Aplus);
  for (const auto& [k, v] : empty.values()) EXPECT_EQ(v, 0);

  auto L = moments_of_measure(measure(2, {{q(1), {q(1), q(0)}}}), keys, Mode::Aplus);
  EXPECT_EQ(L.apply_key(key({1, 0})), 1);
  EXPECT_EQ(L.apply_key(key({0, 1})), 0);
  EXPECT_EQ(L.apply(generator_f(0, 0, 2)), 1);
  EXPECT_EQ(L.apply(generator_f(0, 1, 2)), 0);

  auto O = moments_of_measure(measure(2, {}, q(1)), keys, Mode::Aplus);
  EXPECT_EQ(O.apply_key(key({0, 0})), 1);
  EXPECT_EQ(O.apply_key(key({1, 0})), 0);
  EXPECT_EQ(O.apply_key(key({0, 2})), 0);
  EXPECT_EQ(O.apply(generator_f(0, 0, 2)), 1);
  EXPECT_EQ(O.apply(generator_f(1, 1, 2)), 0);
}

TEST(Functionals, LaurentModeRejectsOriginMass) {
  auto keys = truncated_keys(1, 2, 2, Mode::Laurent);
  EXPECT_THROW(moments_of_measure(measure(2, {}, q(1)), keys, Mode::Laurent), ModeMismatch);
}

TEST(Functionals, MeasureValidation) {
  EXPECT_THROW(measure(2, {{q(1), {q(0), q(0)}}}).validate(), std::invalid_argument);
  EXPECT_THROW(measure(2, {{q(-1), {q(1), q(0)}}}).validate(), std::invalid_argument);
  auto mu = measure(2, {});
  mu.sphere_atoms.push_back({q(1), {q(1), q(1)}});
  EXPECT_THROW(mu.validate(), std::invalid_argument);
}

TEST(Functionals, GramExamples) {
  const std::vector<BasisKey> basis{key({0, 0}), key({1, 0}), key({0, 1})};
  auto L1 = moments_of_measure(measure(2, {{q(1), {q(1), q(0)}}}), polynomial_keys(2, 2), Mode::Aplus);
  auto G1 = gram_matrix(L1, basis);
  RationalMatrix E1 = from_rows({{1, 1, 0}, {1, 1, 0}, {0, 0, 0}});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(G1(i, j), E1(i, j));
  EXPECT_EQ(psd_check_exact(G1).rank, 1u);

  auto L2 = moments_of_measure(measure(2, {{q(1), {q(1), q(0)}}, {q(1), {q(0), q(1)}}}), polynomial_keys(2, 2), Mode::Aplus);
  auto G2 = gram_matrix(L2, basis);
  RationalMatrix E2 = from_rows({{2, 1, 1}, {1, 1, 0}, {1, 0, 1}});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(G2(i, j), E2(i, j));

  LinearFunctional<Rational> Z(2, Mode::Aplus);
  for (const auto& k : polynomial_keys(2, 2)) Z.set(k, 0);
  auto G0 = gram_matrix(Z, basis);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(G0(i, j), 0);
}

TEST(Functionals, GramOverflowNamesKey) {
  auto L = moments_of_measure(measure(2, {{q(1), {q(1), q(0)}}}), polynomial_keys(2, 1), Mode::Aplus);
  try {
    gram_matrix(L, polynomial_keys(2, 1));
    FAIL() << "expected DomainOverflow";
  } catch (const DomainOverflow& e) {
    EXPECT_EQ(total_degree(e.missing.exp), 2u);
  }
}

TEST(Functionals, MeasureGramIsPsdWithMatchingQuadraticForm) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 12; ++i) {
    auto mu = testing_support::random_measure(rng, 2, 4, false);
    auto basis = truncated_keys(1, 3, 2, Mode::Aplus);
    auto L = extend_from_measure(mu, 1, 3);
    auto G = gram_matrix(L, basis);
    auto v = psd_check_exact(G);
    EXPECT_TRUE(v.psd());
    EXPECT_TRUE(certificate_reproduces(G, v));
    std::vector<Rational> probe;
    for (std::size_t j = 0; j < basis.size(); ++j) probe.push_back(testing_support::random_rational(rng));
    EXPECT_EQ(quadratic_form(G, probe), measure_quadratic_form(mu, basis, probe));
  }
}

TEST(Functionals, ExtendFromMeasureExamples) {
  auto L = extend_from_measure(measure(2, {{q(1), {q(1), q(1)}}}), 1, 2);
  EXPECT_EQ(L.apply(generator_f(0, 1, 2)), q(1, 2));

  auto O = extend_from_measure(measure(2, {}, q(3)), 1, 2);
  const auto restricted = O.restrict_to_polynomials();
  for (const auto& [k, v] : restricted.values())
    EXPECT_EQ(v, total_degree(k.exp) == 0 ? q(3) : q(0)) << k.to_string();

  auto T = extend_from_measure(measure(2, {{q(1), {q(1), q(0)}}, {q(1), {q(0), q(1)}}}), 1, 2);
  EXPECT_EQ(T.apply(generator_f(0, 0, 2)), 1);
  EXPECT_EQ(T.apply(generator_f(1, 1, 2)), 1);
  EXPECT_EQ(T.apply(generator_f(0, 1, 2)), 0);
  EXPECT_THROW(extend_from_measure(measure(2, {}), 2, 3), std::invalid_argument);
}

TEST(Functionals, ExtensionSatisfiesReductionAndRestriction) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 6; ++i) {
    auto mu = testing_support::random_measure(rng, 2, 3, true);
    auto L = extend_from_measure(mu, 1, 3);
    EXPECT_TRUE(L.reduction_violations().empty());
    // products of the basis reach pole 2M with degree <= 2D, so polynomials up to 2D - 4M
    auto P = moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus);
    auto R = L.restrict_to_polynomials();
    EXPECT_EQ(R.values(), P.values());
  }
}

TEST(Functionals, CauchySchwarzChain) {
  auto L = extend_from_measure(measure(2, {{q(1), {q(1), q(0)}}}), 2, 8);
  auto r = cs_chain_check(L, embed_poly(Poly::variable(2, 0)), 2);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.chain.front(), 1);
  EXPECT_EQ(r.chain.back(), 1);

  // supported on {x2 = 0}, a = x2
  auto V = extend_from_measure(measure(2, {{q(2), {q(1), q(0)}}, {q(1), {q(-3), q(0)}}}), 2, 8);
  auto z = cs_chain_check(V, embed_poly(Poly::variable(2, 1)), 2);
  EXPECT_TRUE(z.ok());
  EXPECT_EQ(z.power_values.back(), 0);
  EXPECT_EQ(z.power_values.front(), 0);

  std::mt19937_64 rng(43);
  for (int i = 0; i < 10; ++i) {
    auto mu = testing_support::random_measure(rng, 2, 2, true);
    auto W = extend_from_measure(mu, 4, 8);
    AElement a = testing_support::random_aplus(rng, 2, 1, 0);
    auto rep = cs_chain_check(W, a, 2);
    EXPECT_TRUE(rep.ok());
  }
}

TEST(Feasibility, MeasureFunctionalIsFeasible) {
  auto mu = measure(2, {{q(1), {q(1), q(0)}}, {q(1), {q(0), q(1)}}});
  auto L = moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus);
  auto res = extension_feasibility(L, 1, 4);
  EXPECT_TRUE(res.feasible()) << "gap " << res.gap;
  EXPECT_LT(res.constraint_residual, 1e-7);
  EXPECT_TRUE(res.extension.reduction_violations(1e-10).empty());
  // the extension still agrees with L on the fixed keys
  for (const auto& [k, v] : L.values()) EXPECT_NEAR(res.extension.apply_key(k), to_double(v), 1e-7);
  // the exact extension from the measure is a feasible point of the same problem
  auto exact = extend_from_measure(mu, 1, 4);
  EXPECT_TRUE(psd_check_exact(gram_matrix(exact, truncated_keys(1, 4, 2, Mode::Aplus))).psd());
}

TEST(Feasibility, ProjectionsAloneConvergeWithInterior) {
  auto mu = measure(2, {{q(1), {q(1), q(2)}}, {q(2), {q(-1), q(1)}}, {q(1), {q(2), q(-1)}}, {q(1, 2), {q(-1), q(-2)}}});
  auto L = moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus);
  FeasibilityOptions opt;
  opt.measure_start = false;
  auto res = extension_feasibility(L, 1, 3, opt);
  ASSERT_TRUE(res.feasible()) << "gap " << res.gap;
  EXPECT_FALSE(res.measure_start);
  EXPECT_GT(res.iterations, 0u);
  const auto basis = truncated_keys(1, 3, 2, Mode::Aplus);
  Eigen::MatrixXd g(basis.size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) g(i, j) = res.extension.apply_key(key_product(basis[i], basis[j]));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff(), -1e-7);
}

TEST(Feasibility, ZeroAndNegativeMass) {
  LinearFunctional<Rational> Z(2, Mode::Aplus);
  for (const auto& k : polynomial_keys(2, 2)) Z.set(k, 0);
  auto res = extension_feasibility(Z, 1, 4);
  EXPECT_TRUE(res.feasible());
  for (const auto& [k, v] : res.extension.values()) EXPECT_NEAR(v, 0.0, 1e-7);

  LinearFunctional<Rational> N(2, Mode::Aplus);
  N.set(key({0, 0}), -1);
  EXPECT_THROW(extension_feasibility(N, 1, 4), InfeasibleInput);
}

TEST(Feasibility, TinyBudgetIsUnresolved) {
  auto mu = measure(2, {{q(1), {q(1), q(2)}}, {q(2), {q(-1), q(1)}}, {q(1), {q(2), q(-1)}}});
  auto L = moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus);
  FeasibilityOptions opt;
  opt.max_iters = 0;
  opt.measure_start = false;
  opt.tol = 1e-14;
  auto res = extension_feasibility(L, 1, 3, opt);
  EXPECT_FALSE(res.feasible());
  EXPECT_GT(res.gap, 0.0);
}

TEST(Feasibility, RejectsBrokenReductionRelation) {
  auto L = extend_from_measure(measure(2, {{q(1), {q(1), q(0)}}}), 1, 2);
  LinearFunctional<Rational> T = L;
  T.set(key({2, 0}, 1), q(7));
  EXPECT_THROW(extension_feasibility(T, 1, 2), InfeasibleInput);
}

TEST(Recovery, SingleAtom) {
  auto L = moments_of_measure(measure(2, {{q(1), {q(1), q(2)}}}), polynomial_keys(2, 6), Mode::Aplus);
  auto r = recover_atoms(L, 2, 2);
  ASSERT_EQ(r.measure.atoms.size(), 1u);
  EXPECT_NEAR(r.measure.atoms[0].weight, 1.0, 1e-8);
  EXPECT_NEAR(r.measure.atoms[0].point[0], 1.0, 1e-8);
  EXPECT_NEAR(r.measure.atoms[0].point[1], 2.0, 1e-8);
}

TEST(Recovery, TwoAtoms) {
  auto L = moments_of_measure(measure(2, {{q(2), {q(1), q(0)}}, {q(3), {q(0), q(1)}}}), polynomial_keys(2, 4), Mode::Aplus);
  auto r = recover_atoms(L, 2, 2);
  ASSERT_EQ(r.measure.atoms.size(), 2u);
  auto atoms = r.measure.atoms;
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.point[0] > b.point[0]; });
  EXPECT_NEAR(atoms[0].weight, 2.0, 1e-8);
  EXPECT_NEAR(atoms[0].point[0], 1.0, 1e-8);
  EXPECT_NEAR(atoms[0].point[1], 0.0, 1e-8);
  EXPECT_NEAR(atoms[1].weight, 3.0, 1e-8);
  EXPECT_NEAR(atoms[1].point[0], 0.0, 1e-8);
  EXPECT_NEAR(atoms[1].point[1], 1.0, 1e-8);
}

TEST(Recovery, ZeroFunctionalGivesEmptyMeasure) {
  LinearFunctional<Rational> Z(2, Mode::Aplus);
  for (const auto& k : polynomial_keys(2, 4)) Z.set(k, 0);
  auto r = recover_atoms(Z, 2, 2);
  EXPECT_TRUE(r.measure.atoms.empty());
  EXPECT_EQ(r.measure.origin_mass, 0.0);
}

TEST(Recovery, NonFlatInputIsReported) {
  // five generic atoms need more than degree-1 columns
  std::mt19937_64 rng(44);
  DiscreteMeasure<Rational> mu = measure(2, {});
  for (int i = 0; i < 5; ++i) mu.atoms.push_back({q(1), testing_support::random_nonzero_point(rng, 2, 5, 3)});
  auto L = moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus);
  EXPECT_THROW(recover_atoms(L, 2, 1), RecoveryError);
}

TEST(Recovery, WideUnivariateSpread) {
  // raw Hankel matrices here have normalized singular values near 1e-9
  auto mu = measure(1, {{q(1), {q(7)}}, {q(2), {q(2, 3)}}, {q(1, 3), {q(-8)}}});
  auto L = moments_of_measure(mu, polynomial_keys(1, 10), Mode::Aplus);
  auto rec = recover_atoms(L, 1, 5);
  ASSERT_EQ(rec.measure.atoms.size(), 3u);
  for (const auto& truth : mu.atoms) {
    bool found = false;
    for (const auto& a : rec.measure.atoms)
      if (std::abs(a.point[0] - truth.point[0].get_d()) < 1e-8) {
        found = true;
        EXPECT_NEAR(a.weight, truth.weight.get_d(), 1e-8);
      }
    EXPECT_TRUE(found) << truth.point[0];
  }
}

TEST(Feasibility, MeasureStartStaysOffOrigin) {
  // mean (1,0), unit variance along x1: the symmetric split would put an atom at 0
  auto mu = measure(2, {{q(1), {q(2), q(0)}}}, q(1));
  auto L = moments_of_measure(mu, polynomial_keys(2, 2), Mode::Aplus);
  auto res = extension_feasibility(L, 1, 4);
  EXPECT_TRUE(res.measure_start);
  EXPECT_TRUE(res.feasible()) << "gap " << res.gap;
  for (const auto& [k, v] : L.values()) EXPECT_NEAR(res.extension.apply_key(k), to_double(v), 1e-9);
}
