#ifndef MOMEXT_FEASIBILITY_HPP
#define MOMEXT_FEASIBILITY_HPP

// Search for a positive extension of a functional on polynomial keys to the
// truncated extension algebra. Unknowns are the values on the top-pole keys
// x^g / |x|^{4M}, 4M <= |g| <= 2D; every lower key is a fixed linear
// combination of those, so the reduction relations hold by construction.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "momext/functionals.hpp"
#include "momext/recovery.hpp"

namespace momext {

class InfeasibleInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FeasibilityOptions {
  unsigned max_iters = 5000;
  double tol = 1e-7;
  /// Eigenvalues are clamped to eigen_floor * scale in the cone projection, so
  /// the iteration lands strictly inside the cone once the sets overlap.
  double eigen_floor = 1e-6;
  /// Start from the moments of a measure built from the data when one can be
  /// found (quadratic construction for degree <= 2, flat recovery otherwise).
  bool measure_start = true;
  std::uint64_t seed = 0x5eed;
};

enum class FeasibilityStatus { Feasible, Unresolved };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Unresolved;
  LinearFunctional<double> extension{1, Mode::Aplus};
  double gap = 0.0;  // Frobenius distance from the affine iterate to the PSD cone
  double min_eigenvalue = 0.0;
  double constraint_residual = 0.0;
  unsigned iterations = 0;
  bool measure_start = false;  // iteration began at the moments of a constructed measure

  bool feasible() const { return status == FeasibilityStatus::Feasible; }
};

namespace detail {

// coefficients of x^g |x|^{2(top - m)} on top-pole keys
inline std::vector<std::pair<std::size_t, double>> lift_row(const BasisKey& k, unsigned top_pole,
                                                            const std::map<Exponent, std::size_t, GrlexLess>& top_index) {
  Poly lifted = lift_numerator(AElement{Poly::monomial(k.exp), k.pole, Mode::Aplus}, top_pole);
  std::vector<std::pair<std::size_t, double>> row;
  for (const auto& [e, c] : lifted.terms()) {
    auto it = top_index.find(e);
    if (it == top_index.end()) return {};
    row.emplace_back(it->second, c.get_d());
  }
  return row;
}

// Atomic measure with the given moments of degree <= 2: 2r atoms at
// mean +- scaled principal axes, r = rank of the covariance. Candidate frames
// are drawn until no atom is close to the origin.
inline std::optional<DiscreteMeasure<double>> quadratic_measure(double m0, const Eigen::VectorXd& m1,
                                                                const Eigen::MatrixXd& m2, std::uint64_t seed) {
  const std::size_t d = m1.size();
  DiscreteMeasure<double> mu;
  mu.dim = d;
  if (!(m0 > 0)) return std::nullopt;
  const Eigen::VectorXd mean = m1 / m0;
  Eigen::MatrixXd cov = m2 / m0 - mean * mean.transpose();
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double tiny = 1e-12 * std::max(1.0, m2.cwiseAbs().maxCoeff() / m0);
  if (es.eigenvalues().minCoeff() < -tiny) return std::nullopt;
  std::vector<std::size_t> axes;
  for (std::size_t k = 0; k < d; ++k)
    if (es.eigenvalues()(k) > tiny) axes.push_back(k);
  const std::size_t r = axes.size();
  if (r == 0) {
    if (mean.norm() == 0.0)
      mu.origin_mass = m0;
    else
      mu.atoms.push_back({m0, std::vector<double>(mean.data(), mean.data() + d)});
    return mu;
  }
  Eigen::MatrixXd frame(d, r);
  for (std::size_t k = 0; k < r; ++k) frame.col(k) = es.eigenvectors().col(axes[k]) * std::sqrt(es.eigenvalues()(axes[k]));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> split(0.2, 0.8);
  const double clearance = 1e-3 * (1.0 + mean.norm());
  std::optional<DiscreteMeasure<double>> best;
  double best_clearance = -1.0;
  for (int attempt = 0; attempt < 32 && best_clearance < clearance; ++attempt) {
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(r, r);
    std::vector<double> p(r, 0.5);
    if (attempt > 0) {
      Eigen::MatrixXd g(r, r);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) g(i, j) = gauss(rng);
      rot = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
      for (auto& pk : p) pk = split(rng);
    }
    Eigen::MatrixXd f = frame * rot;
    DiscreteMeasure<double> cand;
    cand.dim = d;
    double clear = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r; ++k) {
      // weights p, 1-p at distances a, b along the axis keep the mean and variance
      const double s = std::sqrt(double(r));
      const double a = s * std::sqrt((1 - p[k]) / p[k]);
      const double b = s * std::sqrt(p[k] / (1 - p[k]));
      const Eigen::VectorXd plus = mean + a * f.col(k);
      const Eigen::VectorXd minus = mean - b * f.col(k);
      for (const auto& [w, x] : {std::pair{p[k], plus}, std::pair{1 - p[k], minus}}) {
        clear = std::min(clear, x.norm());
        if (x.norm() == 0.0)
          cand.origin_mass += w * m0 / r;
        else
          cand.atoms.push_back(Atom<double>{w * m0 / r, std::vector<double>(x.data(), x.data() + d)});
      }
    }
    if (clear > best_clearance) {
      best_clearance = clear;
      best = std::move(cand);
    }
  }
  return best;
}

template <typename S>
std::optional<DiscreteMeasure<double>> measure_for_data(const LinearFunctional<S>& L, std::uint64_t seed) {
  const std::size_t d = L.nvars();
  unsigned top = 0;
  for (const auto& [k, v] : L.values()) {
    if (k.pole != 0) return std::nullopt;
    top = std::max(top, total_degree(k.exp));
  }
  if (top < 2) return std::nullopt;
  for (const auto& k : polynomial_keys(d, top - top % 2))
    if (!L.find(k)) return std::nullopt;
  auto val = [&](Exponent e) { return to_double(*L.find(BasisKey{std::move(e), 0})); };
  if (top == 2) {
    Eigen::VectorXd m1(d);
    Eigen::MatrixXd m2(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      Exponent e(d, 0);
      e[i] = 1;
      m1(i) = val(e);
      for (std::size_t j = 0; j < d; ++j) {
        Exponent f(d, 0);
        f[i] += 1;
        f[j] += 1;
        m2(i, j) = val(f);
      }
    }
    return quadratic_measure(val(Exponent(d, 0)), m1, m2, seed);
  }
  try {
    RecoveryOptions ro;
    ro.seed = seed;
    return recover_atoms(L, d, top / 2, ro).measure;
  } catch (const RecoveryError&) {
    return std::nullopt;
  }
}

}  // namespace detail

template <typename S>
FeasibilityResult extension_feasibility(const LinearFunctional<S>& L, unsigned M, unsigned D,
                                        const FeasibilityOptions& opt = {}) {
  if (L.mode() != Mode::Aplus) throw InfeasibleInput("extension_feasibility: Aplus mode required");
  if (D < 2 * M) throw InfeasibleInput("extension_feasibility: D < 2M");
  const std::size_t d = L.nvars();

  if (auto one = L.find(BasisKey{Exponent(d, 0), 0}); one && *one < 0)
    throw InfeasibleInput("extension_feasibility: L(1) < 0");
  if (auto bad = L.reduction_violations(1e-12); !bad.empty())
    throw InfeasibleInput("extension_feasibility: functional violates the reduction relation at " + bad.front().to_string());

  const unsigned top_pole = 2 * M;
  const auto top_keys = truncated_keys(top_pole, 2 * D, d, Mode::Aplus);
  std::map<Exponent, std::size_t, GrlexLess> top_index;
  for (std::size_t i = 0; i < top_keys.size(); ++i) top_index.emplace(top_keys[i].exp, i);
  const std::size_t nt = top_keys.size();

  // affine constraints A y = b
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> rhs;
  for (const auto& [k, v] : L.values()) {
    if (k.pole > top_pole) throw InfeasibleInput("extension_feasibility: key " + k.to_string() + " exceeds pole order 2M");
    auto row = detail::lift_row(k, top_pole, top_index);
    if (row.empty()) throw InfeasibleInput("extension_feasibility: key " + k.to_string() + " does not embed in the truncation");
    rows.push_back(std::move(row));
    rhs.push_back(to_double(v));
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows.size(), nt);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (auto [j, c] : rows[r]) A(r, j) += c;
    b(r) = rhs[r];
  }

  // Gram pattern
  const auto basis = truncated_keys(M, D, d, Mode::Aplus);
  const std::size_t n = basis.size();
  std::vector<std::size_t> pattern(n * n);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(nt);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t k = top_index.at(add_exponents(basis[i].exp, basis[j].exp));
      pattern[i * n + j] = k;
      counts(k) += 1.0;
    }
  const Eigen::VectorXd winv = counts.cwiseInverse();

  Eigen::MatrixXd K = A * winv.asDiagonal() * A.transpose();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> kcod(K);
  if (A.rows() > 0) {
    Eigen::VectorXd y0 = winv.asDiagonal() * A.transpose() * kcod.solve(b);
    double res = (A * y0 - b).norm();
    if (res > 1e-9 * std::max(1.0, b.norm()))
      throw InfeasibleInput("extension_feasibility: inconsistent affine constraints (residual " + std::to_string(res) + ")");
  }

  auto gram_of = [&](const Eigen::VectorXd& y) {
    Eigen::MatrixXd G(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) G(i, j) = y(pattern[i * n + j]);
    return G;
  };
  auto project_affine = [&](const Eigen::MatrixXd& X) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nt);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y(pattern[i * n + j]) += X(i, j);
    y = y.cwiseProduct(winv);
    if (A.rows() > 0) y += winv.asDiagonal() * A.transpose() * kcod.solve(b - A * y);
    return y;
  };

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double floor = opt.eigen_floor * scale;

  FeasibilityResult result;
  Eigen::VectorXd y = project_affine(Eigen::MatrixXd::Zero(n, n));
  if (opt.measure_start) {
    if (auto mu = detail::measure_for_data(L, opt.seed)) {
      Eigen::VectorXd y0(nt);
      for (std::size_t j = 0; j < nt; ++j) y0(j) = measure_value_on_key(*mu, top_keys[j]);
      if (y0.allFinite()) {
        y = project_affine(gram_of(y0));
        result.measure_start = true;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (unsigned it = 0;; ++it) {
    Eigen::MatrixXd G = gram_of(y);
    es.compute(G);
    const Eigen::VectorXd& ev = es.eigenvalues();
    double gap = std::sqrt(ev.cwiseMin(0.0).squaredNorm());
    result.gap = gap;
    result.min_eigenvalue = n ? ev.minCoeff() : 0.0;
    result.iterations = it;
    if (gap < opt.tol) {
      result.status = FeasibilityStatus::Feasible;
      break;
    }
    if (it >= opt.max_iters) break;
    Eigen::MatrixXd Z = es.eigenvectors() * ev.cwiseMax(floor).asDiagonal() * es.eigenvectors().transpose();
    y = project_affine(Z);
  }
  result.constraint_residual = A.rows() ? (A * y - b).cwiseAbs().maxCoeff() : 0.0;

  LinearFunctional<double> ext(d, Mode::Aplus);
  for (const auto& k : window_keys(top_pole, 2 * D, d, Mode::Aplus)) {
    double v = 0.0;
    for (auto [j, c] : detail::lift_row(k, top_pole, top_index)) v += c * y(j);
    ext.set(k, v);
  }
  result.extension = std::move(ext);
  return result;
}

}  // namespace momext

#endif  // MOMEXT_FEASIBILITY_HPP
