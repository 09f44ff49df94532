#pragma once

// Dense SVD, Moore-Penrose pseudoinverse and minimum-norm least squares.
//
// The SVD is a one-sided (Hestenes) Jacobi iteration with a fixed cyclic
// sweep order, so results are bit-reproducible for a given input. Everything
// is templated on the scalar type and accepts any Eigen dense expression.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "examweight/errors.hpp"

namespace examweight {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

namespace linalg {

inline constexpr int kMaxJacobiSweeps = 60;

/// Thin SVD: A (n x p) = U * diag(singular_values) * V^T with r = min(n, p).
template <typename Scalar>
struct Svd {
  Matrix<Scalar> U;
  Vector<Scalar> singular_values;  // nonincreasing, >= 0
  Matrix<Scalar> V;
  int sweeps = 0;

  Scalar largest() const {
    return singular_values.size() ? singular_values(0) : Scalar(0);
  }
};

/// Conventional relative cutoff: max(rows, cols) * machine epsilon.
template <typename Scalar>
Scalar default_rank_cutoff(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<Scalar>(std::max(rows, cols)) *
         std::numeric_limits<Scalar>::epsilon();
}

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.size() == 0) {
    throw ContractError(std::string(what) + ": empty input");
  }
  if (!a.allFinite()) {
    throw ContractError(std::string(what) + ": input contains NaN or Inf");
  }
}

// Replace the zero columns of `u` (marked in `missing`) by unit vectors
// orthogonal to every other column. Candidates are the standard basis
// vectors in index order, orthogonalized twice (Gram-Schmidt).
template <typename Scalar>
void complete_orthonormal(Matrix<Scalar>& u, const std::vector<bool>& missing) {
  const Eigen::Index n = u.rows();
  std::vector<bool> filled(missing.size());
  for (std::size_t k = 0; k < missing.size(); ++k) filled[k] = !missing[k];

  for (std::size_t k = 0; k < missing.size(); ++k) {
    if (!missing[k]) continue;
    Vector<Scalar> best;
    Scalar best_norm = Scalar(-1);
    for (Eigen::Index e = 0; e < n; ++e) {
      Vector<Scalar> v = Vector<Scalar>::Unit(n, e);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < filled.size(); ++j) {
          if (!filled[j]) continue;
          v -= u.col(static_cast<Eigen::Index>(j)).dot(v) *
               u.col(static_cast<Eigen::Index>(j));
        }
      }
      const Scalar norm = v.norm();
      if (norm > best_norm + Scalar(1e-3)) {
        best_norm = norm;
        best = v;
      }
    }
    u.col(static_cast<Eigen::Index>(k)) = best / best_norm;
    filled[k] = true;
  }
}

// One-sided Jacobi on a tall (rows >= cols) matrix.
template <typename Scalar>
Svd<Scalar> jacobi_svd_tall(Matrix<Scalar> w, int max_sweeps) {
  const Eigen::Index n = w.rows();
  const Eigen::Index p = w.cols();
  Matrix<Scalar> v = Matrix<Scalar>::Identity(p, p);
  const Scalar tol = static_cast<Scalar>(n) * std::numeric_limits<Scalar>::epsilon();

  int sweep = 0;
  bool converged = p < 2;
  while (!converged) {
    if (sweep == max_sweeps) {
      throw ConvergenceError("svd: no convergence within " +
                             std::to_string(max_sweeps) + " Jacobi sweeps");
    }
    ++sweep;
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const Scalar alpha = w.col(i).squaredNorm();
        const Scalar beta = w.col(j).squaredNorm();
        const Scalar gamma = w.col(i).dot(w.col(j));
        if (gamma == Scalar(0) ||
            std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) {
          continue;
        }
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (std::abs(zeta) + std::sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar wi = w(r, i);
          const Scalar wj = w(r, j);
          w(r, i) = c * wi - s * wj;
          w(r, j) = s * wi + c * wj;
        }
        for (Eigen::Index r = 0; r < p; ++r) {
          const Scalar vi = v(r, i);
          const Scalar vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    converged = !rotated;
  }

  Vector<Scalar> sv(p);
  for (Eigen::Index k = 0; k < p; ++k) sv(k) = w.col(k).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return sv(a) > sv(b); });

  Svd<Scalar> out;
  out.U.resize(n, p);
  out.V.resize(p, p);
  out.singular_values.resize(p);
  out.sweeps = sweep;
  std::vector<bool> missing(static_cast<std::size_t>(p), false);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    const Scalar s = sv(src);
    out.singular_values(k) = s;
    out.V.col(k) = v.col(src);
    if (s > Scalar(0)) {
      out.U.col(k) = w.col(src) / s;
    } else {
      out.U.col(k).setZero();
      missing[static_cast<std::size_t>(k)] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
    complete_orthonormal(out.U, missing);
  }
  return out;
}

}  // namespace detail

/// Thin singular value decomposition.
///
/// Throws ContractError for empty or non-finite input and ConvergenceError
/// when `max_sweeps` cyclic Jacobi sweeps do not orthogonalize the columns.
template <typename Derived>
Svd<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& a,
                                  int max_sweeps = kMaxJacobiSweeps) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(a, "svd");
  if (a.rows() >= a.cols()) {
    return detail::jacobi_svd_tall<Scalar>(Matrix<Scalar>(a), max_sweeps);
  }
  // A^T = U' S V'^T  =>  A = V' S U'^T
  Svd<Scalar> t = detail::jacobi_svd_tall<Scalar>(Matrix<Scalar>(a.transpose()),
                                                  max_sweeps);
  std::swap(t.U, t.V);
  return t;
}

/// Reciprocals of the singular values, zeroed at or below cutoff * sigma_max.
template <typename Scalar>
Vector<Scalar> pseudo_reciprocals(const Svd<Scalar>& d, Scalar rank_cutoff) {
  const Scalar threshold = rank_cutoff * d.largest();
  Vector<Scalar> inv(d.singular_values.size());
  for (Eigen::Index k = 0; k < inv.size(); ++k) {
    const Scalar s = d.singular_values(k);
    inv(k) = (s > threshold && s > Scalar(0)) ? Scalar(1) / s : Scalar(0);
  }
  return inv;
}

/// Number of singular values above rank_cutoff * sigma_max.
template <typename Scalar>
Eigen::Index numerical_rank(const Svd<Scalar>& d, Scalar rank_cutoff) {
  return (pseudo_reciprocals(d, rank_cutoff).array() != Scalar(0)).count();
}

namespace detail {
template <typename Scalar>
Scalar resolve_cutoff(std::optional<Scalar> rank_cutoff, Eigen::Index rows,
                      Eigen::Index cols) {
  if (!rank_cutoff) return default_rank_cutoff<Scalar>(rows, cols);
  if (!(*rank_cutoff > Scalar(0))) {
    throw ContractError("rank_cutoff must be > 0");
  }
  return *rank_cutoff;
}
}  // namespace detail

/// Moore-Penrose pseudoinverse via SVD.
template <typename Derived>
Matrix<typename Derived::Scalar> pinv(
    const Eigen::MatrixBase<Derived>& a,
    std::optional<typename Derived::Scalar> rank_cutoff = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  const Scalar cutoff = detail::resolve_cutoff(rank_cutoff, a.rows(), a.cols());
  const Svd<Scalar> d = svd(a);
  return d.V * pseudo_reciprocals(d, cutoff).asDiagonal() * d.U.transpose();
}

/// Minimum-norm least-squares solution x = pinv(A) y.
template <typename DerivedA, typename DerivedY>
Vector<typename DerivedA::Scalar> solve_min_norm(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedY>& y,
    std::optional<typename DerivedA::Scalar> rank_cutoff = std::nullopt) {
  using Scalar = typename DerivedA::Scalar;
  if (y.cols() != 1 || y.rows() != a.rows()) {
    throw ContractError("solve_min_norm: y has " + std::to_string(y.rows()) +
                        " entries but A has " + std::to_string(a.rows()) + " rows");
  }
  detail::require_finite(y, "solve_min_norm");
  const Scalar cutoff = detail::resolve_cutoff(rank_cutoff, a.rows(), a.cols());
  const Svd<Scalar> d = svd(a);
  const Vector<Scalar> coeffs =
      pseudo_reciprocals(d, cutoff).cwiseProduct(d.U.transpose() * y);
  return d.V * coeffs;
}

}  // namespace linalg
}  // namespace examweight
