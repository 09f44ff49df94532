#pragma once

// Lawson-Hanson active-set non-negative least squares:
//   minimize ||A x - y||_2  subject to  x >= 0.

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "examweight/linalg.hpp"

namespace examweight {

template <typename Scalar>
struct NnlsResult {
  Vector<Scalar> x;
  Vector<Scalar> dual;  // A^T (y - A x); <= tolerance on the active set, ~0 on the passive set
  Scalar tolerance = 0;  // absolute tolerance actually used
  int iterations = 0;
};

/// Absolute KKT tolerance used by nnls(): relative tolerance scaled by
/// max(1, ||A||_F * ||y||_2), which keeps the active set invariant under
/// rescaling of y.
template <typename DerivedA, typename DerivedY>
typename DerivedA::Scalar nnls_effective_tolerance(const Eigen::MatrixBase<DerivedA>& a,
                                                   const Eigen::MatrixBase<DerivedY>& y,
                                                   typename DerivedA::Scalar relative) {
  using Scalar = typename DerivedA::Scalar;
  return relative * std::max(Scalar(1), a.norm() * y.norm());
}

/// Throws ConvergenceError when more than `max_iterations` variables have
/// been moved into the passive set.
template <typename DerivedA, typename DerivedY>
NnlsResult<typename DerivedA::Scalar> nnls(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedY>& y,
    typename DerivedA::Scalar relative_tolerance, int max_iterations,
    std::optional<typename DerivedA::Scalar> rank_cutoff = std::nullopt) {
  using Scalar = typename DerivedA::Scalar;
  using Index = Eigen::Index;
  linalg::detail::require_finite(a, "nnls");
  linalg::detail::require_finite(y, "nnls");
  if (y.rows() != a.rows() || y.cols() != 1) {
    throw ContractError("nnls: y has " + std::to_string(y.rows()) +
                        " entries but A has " + std::to_string(a.rows()) + " rows");
  }
  if (!(relative_tolerance > Scalar(0))) {
    throw ContractError("nnls: tolerance must be > 0");
  }

  const Index p = a.cols();
  const Scalar tol = nnls_effective_tolerance(a, y, relative_tolerance);
  std::vector<bool> passive(static_cast<std::size_t>(p), false);
  // Variables whose entry was rejected since the last change of x.
  std::vector<bool> blocked(static_cast<std::size_t>(p), false);
  Vector<Scalar> x = Vector<Scalar>::Zero(p);

  auto solve_passive = [&]() {
    std::vector<Index> cols;
    for (Index j = 0; j < p; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Vector<Scalar> z = Vector<Scalar>::Zero(p);
    if (cols.empty()) return z;
    Matrix<Scalar> sub(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      sub.col(static_cast<Index>(k)) = a.col(cols[k]);
    }
    const Vector<Scalar> zs = linalg::solve_min_norm(sub, y, rank_cutoff);
    for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zs(static_cast<Index>(k));
    return z;
  };

  NnlsResult<Scalar> out;
  out.tolerance = tol;
  int iterations = 0;
  Vector<Scalar> dual = a.transpose() * (y - a * x);
  for (;;) {
    Index t = -1;
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < p; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (!passive[sj] && !blocked[sj] && dual(j) > best) best = dual(j);
    }
    if (!(best > tol)) break;
    // smallest index within tolerance of the maximum
    for (Index j = 0; j < p; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (!passive[sj] && !blocked[sj] && dual(j) >= best - tol) {
        t = j;
        break;
      }
    }
    if (iterations == max_iterations) {
      throw ConvergenceError("nnls: no convergence within " +
                             std::to_string(max_iterations) + " iterations");
    }
    ++iterations;
    passive[static_cast<std::size_t>(t)] = true;

    Vector<Scalar> z = solve_passive();
    if (!(z(t) > Scalar(0))) {
      // Rounding made the entering variable non-positive; reject it for now.
      passive[static_cast<std::size_t>(t)] = false;
      blocked[static_cast<std::size_t>(t)] = true;
      continue;
    }
    for (;;) {
      bool feasible = true;
      Scalar step = Scalar(1);
      Index limiting = -1;
      for (Index j = 0; j < p; ++j) {
        if (!passive[static_cast<std::size_t>(j)] || z(j) > Scalar(0)) continue;
        feasible = false;
        const Scalar denom = x(j) - z(j);
        const Scalar s = denom > Scalar(0) ? x(j) / denom : Scalar(0);
        if (limiting < 0 || s < step) {
          step = s;
          limiting = j;
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += step * (z - x);
      for (Index j = 0; j < p; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (passive[sj] && (j == limiting || x(j) <= Scalar(0))) {
          passive[sj] = false;
          x(j) = Scalar(0);
        }
      }
      z = solve_passive();
    }
    std::fill(blocked.begin(), blocked.end(), false);
    dual = a.transpose() * (y - a * x);
  }

  out.x = std::move(x);
  out.dual = std::move(dual);
  out.iterations = iterations;
  return out;
}

}  // namespace examweight
