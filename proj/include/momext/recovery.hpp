#ifndef MOMEXT_RECOVERY_HPP
#define MOMEXT_RECOVERY_HPP

// Flat-extension atom extraction from a truncated moment functional on
// polynomial keys: numerical rank, shift operators on the column space,
// joint diagonalization, Vandermonde weights.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "momext/functionals.hpp"

namespace momext {

class RecoveryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndeterminateRank : public RecoveryError {
 public:
  using RecoveryError::RecoveryError;
};

class RecoveryFailed : public RecoveryError {
 public:
  RecoveryFailed(const std::string& what, double res) : RecoveryError(what), residual(res) {}
  double residual;
};

struct RecoveryOptions {
  double rank_tol = 1e-9;      // relative to the largest singular value (float input)
  double float_resolution = 1e-13;  // exact input: smallest normalized singular value float extraction can use
  double residual_tol = 1e-8;  // relative moment mismatch allowed after reconstruction
  std::uint64_t seed = 0x5eed;
};

struct RecoveryResult {
  DiscreteMeasure<double> measure;
  std::size_t rank = 0;
  double residual = 0.0;                // relative, in centred and scaled coordinates
  std::vector<double> singular_values;  // normalized by the largest
};

namespace detail {

struct RankDecision {
  std::size_t rank;
  bool ambiguous;
};

// normalized singular values must avoid the band [tol/10, 10 tol]
inline RankDecision numerical_rank(const Eigen::VectorXd& sv_desc, double tol) {
  std::size_t r = 0;
  bool ambiguous = false;
  for (Eigen::Index i = 0; i < sv_desc.size(); ++i) {
    double s = sv_desc(i);
    if (s > tol) ++r;
    if (s >= tol / 10 && s <= tol * 10) ambiguous = true;
  }
  return {r, ambiguous};
}

inline Eigen::VectorXd normalized_singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  Eigen::VectorXd s = svd.singularValues();
  double top = s.size() ? s(0) : 0.0;
  return top > 0 ? Eigen::VectorXd(s / top) : Eigen::VectorXd::Zero(s.size());
}

}  // namespace detail

template <typename S>
RecoveryResult recover_atoms(const LinearFunctional<S>& L, std::size_t d, unsigned N, const RecoveryOptions& opt = {}) {
  if (L.nvars() != d) throw DimensionMismatch(d, L.nvars(), "recover_atoms");
  if (N == 0) throw std::invalid_argument("recover_atoms: N must be >= 1");

  const auto rows_n = exponents_in_degree_range(d, 0, N);
  const auto rows_n1 = exponents_in_degree_range(d, 0, N - 1);
  auto raw = [&](const Exponent& e) { return L.apply_key(BasisKey{e, 0}); };

  // moments of (x - c) / s with c the mean and s the spread; an affine change
  // keeps ranks and atoms but tames the conditioning of the monomial basis
  std::vector<S> center(d, S(0));
  S spread(1);
  const S mass = raw(Exponent(d, 0));
  if (mass > 0) {
    for (std::size_t v = 0; v < d; ++v) {
      Exponent e(d, 0);
      e[v] = 1;
      center[v] = raw(e) / mass;
    }
    double widest = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
      Exponent e(d, 0), f(d, 0);
      e[v] = 2;
      f[v] = 1;
      widest = std::max(widest, to_double((raw(e) - 2 * center[v] * raw(f) + center[v] * center[v] * mass) / mass));
    }
    if (widest > 0) {
      if constexpr (std::is_same_v<S, Rational>)
        spread = from_double(std::sqrt(widest));
      else
        spread = std::sqrt(widest);
    }
  }
  std::map<Exponent, S, GrlexLess> shifted;
  for (const auto& a : exponents_in_degree_range(d, 0, 2 * N)) {
    // sum over b <= a of prod binom(a_v, b_v) (-c_v)^{a_v - b_v} L(x^b)
    S acc(0);
    for (const auto& b : exponents_in_degree_range(d, 0, total_degree(a))) {
      bool below = true;
      for (std::size_t v = 0; v < d; ++v) below = below && b[v] <= a[v];
      if (!below) continue;
      S coeff(1);
      for (std::size_t v = 0; v < d; ++v) {
        long binom = 1;
        for (unsigned t = 0; t < b[v]; ++t) binom = binom * long(a[v] - t) / long(t + 1);
        coeff *= S(binom) * scalar_pow(S(-center[v]), a[v] - b[v]);
      }
      if (coeff != 0) acc += coeff * raw(b);
    }
    shifted.emplace(a, acc / scalar_pow(spread, total_degree(a)));
  }
  auto moment = [&](const Exponent& e) { return shifted.at(e); };

  const std::size_t sn = rows_n.size();
  DenseMatrix<S> mn(sn, sn);
  for (std::size_t i = 0; i < sn; ++i)
    for (std::size_t j = 0; j < sn; ++j) mn(i, j) = moment(add_exponents(rows_n[i], rows_n[j]));
  Eigen::MatrixXd mf(sn, sn);
  for (std::size_t i = 0; i < sn; ++i)
    for (std::size_t j = 0; j < sn; ++j) mf(i, j) = to_double(mn(i, j));

  RecoveryResult out;
  out.measure.dim = d;
  if (mf.cwiseAbs().maxCoeff() == 0.0) return out;

  Eigen::VectorXd sv = detail::normalized_singular_values(mf);
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  const std::size_t s1 = rows_n1.size();
  std::size_t r = 0, r_n1 = 0;
  bool ambiguous_n1 = false;

  if constexpr (std::is_same_v<S, Rational>) {
    // exact ranks decide; the float spectrum only has to resolve them
    PsdVerdict v = psd_check_exact(mn);
    if (!v.psd()) throw RecoveryFailed("recover_atoms: moment matrix is not positive semidefinite", 0.0);
    r = v.rank;
    if (r > 0 && sv(r - 1) < opt.float_resolution)
      throw IndeterminateRank("recover_atoms: exact rank " + std::to_string(r) + " but singular value " + std::to_string(r) +
                              " is below float resolution (atoms closer than float resolution)");
    DenseMatrix<S> m1(s1, s1);
    for (std::size_t i = 0; i < s1; ++i)
      for (std::size_t j = 0; j < s1; ++j) m1(i, j) = mn(i, j);
    r_n1 = psd_check_exact(m1).rank;
  } else {
    auto decision = detail::numerical_rank(sv, opt.rank_tol);
    if (decision.ambiguous)
      throw IndeterminateRank("recover_atoms: singular values fall within a decade of rank_tol");
    r = decision.rank;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mf, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -opt.rank_tol * sv.size() * mf.norm())
      throw RecoveryFailed("recover_atoms: moment matrix is not positive semidefinite", 0.0);
    auto decision_n1 = detail::numerical_rank(detail::normalized_singular_values(mf.topLeftCorner(s1, s1)), opt.rank_tol);
    r_n1 = decision_n1.rank;
    ambiguous_n1 = decision_n1.ambiguous;
  }
  if (ambiguous_n1 || r_n1 != r)
    throw RecoveryFailed("recover_atoms: moment matrix is not flat (rank " + std::to_string(r_n1) + " at degree " +
                             std::to_string(N - 1) + " vs " + std::to_string(r) + " at degree " + std::to_string(N) +
                             "); increase N",
                         0.0);

  // H0 = U diag(lambda) U^T, A_i = lambda^{-1/2} U^T H_i U lambda^{-1/2}
  Eigen::MatrixXd h0 = mf.topLeftCorner(s1, s1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(h0);
  Eigen::MatrixXd u = es0.eigenvectors().rightCols(r);
  Eigen::VectorXd lam = es0.eigenvalues().tail(r);
  Eigen::VectorXd isq = lam.cwiseSqrt().cwiseInverse();

  std::vector<Eigen::MatrixXd> shifts;
  for (std::size_t v = 0; v < d; ++v) {
    Eigen::MatrixXd hi(s1, s1);
    for (std::size_t i = 0; i < s1; ++i)
      for (std::size_t j = 0; j < s1; ++j) {
        Exponent e = add_exponents(rows_n1[i], rows_n1[j]);
        e[v] += 1;
        hi(i, j) = to_double(moment(e));
      }
    Eigen::MatrixXd a = isq.asDiagonal() * (u.transpose() * hi * u) * isq.asDiagonal();
    shifts.push_back(0.5 * (a + a.transpose()));
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(r, r);
  for (auto& a : shifts) combo += unif(rng) * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esc(combo);
  Eigen::MatrixXd q = esc.eigenvectors();

  std::vector<std::vector<double>> points(r, std::vector<double>(d));
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t v = 0; v < d; ++v) points[j][v] = q.col(j).dot(shifts[v] * q.col(j));

  // weights from all available moments up to degree 2N
  const auto all = exponents_in_degree_range(d, 0, 2 * N);
  Eigen::MatrixXd vand(all.size(), r);
  Eigen::VectorXd rhs(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    rhs(i) = to_double(moment(all[i]));
    for (std::size_t j = 0; j < r; ++j) vand(i, j) = detail::monomial_at(all[i], points[j]);
  }
  Eigen::VectorXd w = vand.colPivHouseholderQr().solve(rhs);

  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  double residual = (vand * w - rhs).cwiseAbs().maxCoeff() / scale;
  out.rank = r;
  out.residual = residual;
  for (auto& pt : points)
    for (std::size_t v = 0; v < d; ++v) pt[v] = to_double(center[v]) + to_double(spread) * pt[v];
  for (std::size_t j = 0; j < r; ++j) {
    if (!(w(j) > 0)) throw RecoveryFailed("recover_atoms: recovered nonpositive weight", residual);
    bool nonzero = false;
    for (double c : points[j]) nonzero = nonzero || c != 0.0;
    if (nonzero)
      out.measure.atoms.push_back(Atom<double>{w(j), points[j]});
    else
      out.measure.origin_mass += w(j);
  }
  if (residual > opt.residual_tol) throw RecoveryFailed("recover_atoms: moment mismatch after reconstruction", residual);
  return out;
}

}  // namespace momext

#endif  // MOMEXT_RECOVERY_HPP
