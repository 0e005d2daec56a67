#ifndef MOMEXT_PSD_HPP
#define MOMEXT_PSD_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "momext/rational.hpp"

namespace momext {

/// Row-major dense matrix; used for exact rational matrices where Eigen's
/// expression templates do not mix with gmpxx.
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using RationalMatrix = DenseMatrix<Rational>;

inline Eigen::MatrixXd to_eigen(const RationalMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
  return out;
}

inline Rational quadratic_form(const RationalMatrix& g, const std::vector<Rational>& v) {
  Rational s(0);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (v[i] == 0) continue;
    Rational row(0);
    for (std::size_t j = 0; j < g.cols(); ++j)
      if (v[j] != 0) row += g(i, j) * v[j];
    s += v[i] * row;
  }
  return s;
}

enum class PsdOutcome { PSD, NotPSD };

/// P G P^T = L diag(D) L^T with L unit lower triangular and D >= 0.
/// perm[i] is the original index placed at position i.
struct LdlCertificate {
  std::vector<std::size_t> perm;
  RationalMatrix lower;
  std::vector<Rational> diag;
};

struct PsdVerdict {
  PsdOutcome outcome = PsdOutcome::PSD;
  std::optional<LdlCertificate> factorization;  // PSD
  std::vector<Rational> witness;                // NotPSD: v^T G v < 0
  Rational witness_value{0};
  std::size_t rank = 0;  // positive pivots (PSD only)

  bool psd() const { return outcome == PsdOutcome::PSD; }
};

class NotSymmetric : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact PSD decision by symmetric-pivoted LDL^T over the rationals.
inline PsdVerdict psd_check_exact(const RationalMatrix& g) {
  if (!g.is_symmetric()) throw NotSymmetric("psd_check_exact: matrix is not symmetric");
  const std::size_t n = g.rows();
  RationalMatrix a = g;
  RationalMatrix lower = RationalMatrix::identity(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Rational> diag(n, Rational(0));

  auto swap_positions = [&](std::size_t k, std::size_t p) {
    if (k == p) return;
    for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
    for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, p));
    for (std::size_t j = 0; j < k; ++j) std::swap(lower(k, j), lower(p, j));
    std::swap(perm[k], perm[p]);
  };

  // y lives in permuted coordinates with support on the Schur block
  auto make_witness = [&](std::vector<Rational> y) {
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j)
        if (lower(j, ii) != 0) y[ii] -= lower(j, ii) * y[j];
    }
    std::vector<Rational> x(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) x[perm[i]] = y[i];
    PsdVerdict v;
    v.outcome = PsdOutcome::NotPSD;
    v.witness_value = quadratic_form(g, x);
    v.witness = std::move(x);
    return v;
  };

  std::size_t rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (a(i, i) > a(best, best)) best = i;

    if (a(best, best) == 0) {
      for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (a(i, j) != 0) {
            std::vector<Rational> y(n, Rational(0));
            y[i] = 1;
            y[j] = a(i, j) > 0 ? -1 : 1;
            return make_witness(std::move(y));
          }
      break;  // Schur complement vanishes
    }
    if (a(best, best) < 0) {
      std::vector<Rational> y(n, Rational(0));
      y[best] = 1;
      return make_witness(std::move(y));
    }

    swap_positions(k, best);
    const Rational pivot = a(k, k);
    diag[k] = pivot;
    ++rank;
    for (std::size_t i = k + 1; i < n; ++i) lower(i, k) = a(i, k) / pivot;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = k + 1; j < n; ++j)
        if (a(k, j) != 0) a(i, j) -= lower(i, k) * a(k, j);
    }
    for (std::size_t i = k + 1; i < n; ++i) a(i, k) = a(k, i) = 0;
  }

  // any untouched trailing block is zero; also negative pivots cannot remain
  for (std::size_t i = 0; i < n; ++i)
    if (a(i, i) < 0) {
      std::vector<Rational> y(n, Rational(0));
      y[i] = 1;
      return make_witness(std::move(y));
    }

  PsdVerdict v;
  v.outcome = PsdOutcome::PSD;
  v.rank = rank;
  v.factorization = LdlCertificate{std::move(perm), std::move(lower), std::move(diag)};
  return v;
}

/// Recomputes the verdict from its certificate by direct multiplication.
inline bool certificate_reproduces(const RationalMatrix& g, const PsdVerdict& v) {
  const std::size_t n = g.rows();
  if (!v.psd()) {
    if (v.witness.size() != n) return false;
    Rational q = quadratic_form(g, v.witness);
    return q < 0 && q == v.witness_value;
  }
  if (!v.factorization) return false;
  const auto& f = *v.factorization;
  for (const auto& d : f.diag)
    if (d < 0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (f.lower(i, i) != 1) return false;
    for (std::size_t j = i + 1; j < n; ++j)
      if (f.lower(i, j) != 0) return false;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      Rational s(0);
      for (std::size_t k = 0; k <= j; ++k)
        if (f.diag[k] != 0) s += f.lower(i, k) * f.diag[k] * f.lower(j, k);
      if (s != g(f.perm[i], f.perm[j])) return false;
    }
  return true;
}

struct FloatPsdVerdict {
  bool psd = true;
  double min_eigenvalue = 0.0;
};

/// PSD iff the smallest eigenvalue is >= -tol.
inline FloatPsdVerdict psd_check_float(const Eigen::MatrixXd& g, double tol) {
  if (g.rows() != g.cols()) throw std::invalid_argument("psd_check_float: matrix not square");
  if (g.size() == 0) return {};
  if (((g - g.transpose()).cwiseAbs().maxCoeff()) > tol)
    throw NotSymmetric("psd_check_float: matrix not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  return FloatPsdVerdict{lo >= -tol, lo};
}

/// Hankel matrix H[i][j] = s[i+j] from an odd-length moment list.
inline PsdVerdict hamburger_check(const std::vector<Rational>& moments) {
  if (moments.empty() || moments.size() % 2 == 0)
    throw std::invalid_argument("hamburger_check: need an odd number of moments s_0..s_2N, got " +
                                std::to_string(moments.size()));
  const std::size_t n = moments.size() / 2 + 1;
  RationalMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = moments[i + j];
  return psd_check_exact(h);
}

}  // namespace momext

#endif  // MOMEXT_PSD_HPP
