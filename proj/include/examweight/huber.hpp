#pragma once

// Huber regression with a jointly estimated (concomitant) scale sigma:
//
//   F(w, c, sigma) = sum_i [ sigma + H_eps(r_i / sigma) * sigma ] + alpha * ||w||^2
//   r_i = a_i - c - S_i . w
//   H_eps(z) = z^2 for |z| < eps,  2 eps |z| - eps^2 otherwise
//
// F is jointly convex in (w, c, sigma) for sigma > 0 and homogeneous of
// degree one in (a, w, c, sigma) when alpha = 0, so the fit is equivariant
// under rescaling of the target.

#include <vector>

#include "examweight/linalg.hpp"

namespace examweight::huber {

/// Smallest admissible sigma relative to max|a|.
inline constexpr double kRelativeScaleFloor = 1e-5;

double loss(double z, double epsilon);

double objective(const MatrixXd& scores, const VectorXd& ability, const VectorXd& weights,
                 double intercept, double scale, double epsilon, double alpha);

struct Options {
  double epsilon = 1.8;
  double alpha = 0.1;
  double tolerance = 1e-8;
  int max_iterations = 500;
};

struct Fit {
  VectorXd weights;
  double intercept = 0.0;
  double scale = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  bool scale_at_floor = false;
  std::vector<double> objective_history;  // initial value, then one per accepted step
};

/// Damped semismooth Newton on (w, c, sigma) with a backtracking Armijo line
/// search. Accepted steps decrease F, up to rounding of F near the optimum
/// where only the gradient norm is required to shrink. Starts from the ridge
/// least-squares fit. Returns the last iterate with converged = false when
/// the cap is hit or the line search stalls above tolerance.
Fit minimize(const MatrixXd& scores, const VectorXd& ability, const Options& opts);

}  // namespace examweight::huber
