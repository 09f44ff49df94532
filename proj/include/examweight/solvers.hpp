#pragma once

// Weight-fitting schemes mapping a score matrix S (students x questions,
// fractional credit) and an ability target a to per-question weights.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examweight/linalg.hpp"

namespace examweight {

enum class SolverId { ols_closed_form, linear_intercept, huber, nnls, uniform, actual };

/// Table order: baselines first, then the fitted approaches.
inline constexpr SolverId kAllApproaches[] = {
    SolverId::uniform, SolverId::actual,          SolverId::linear_intercept,
    SolverId::huber,   SolverId::ols_closed_form, SolverId::nnls};

inline constexpr SolverId kFittedSolvers[] = {SolverId::linear_intercept, SolverId::huber,
                                              SolverId::ols_closed_form, SolverId::nnls};

std::string_view to_string(SolverId id);
/// Accepts canonical ids and the short CLI names (ols, linear).
SolverId parse_solver_id(std::string_view name);
bool is_fitted(SolverId id);

struct SolverConfig {
  double huber_epsilon = 1.8;
  double huber_regularization = 0.1;
  double huber_tolerance = 1e-8;
  int huber_max_iterations = 500;
  double nnls_tolerance = 1e-11;
  std::optional<int> nnls_max_iterations;  // 3 * questions when unset
  std::optional<double> rank_cutoff;       // linalg default when unset

  /// Throws ContractError on an ill-posed configuration.
  void validate() const;
};

struct WeightSolution {
  VectorXd question_weights;
  double intercept = 0.0;
  SolverId solver = SolverId::uniform;
  bool converged = true;
  int iterations = 0;
  // Huber only: fitted concomitant scale and final (projected) gradient norm.
  std::optional<double> scale;
  double gradient_norm = 0.0;
};

WeightSolution fit_ols_closed_form(const MatrixXd& scores, const VectorXd& ability,
                                   const SolverConfig& cfg = {});
WeightSolution fit_linear_intercept(const MatrixXd& scores, const VectorXd& ability,
                                    const SolverConfig& cfg = {});
WeightSolution fit_huber(const MatrixXd& scores, const VectorXd& ability,
                         const SolverConfig& cfg = {});
WeightSolution fit_nnls(const MatrixXd& scores, const VectorXd& ability,
                        const SolverConfig& cfg = {});

/// Dispatch to one of the four fitted solvers. Baselines are rejected here.
WeightSolution fit(SolverId solver, const MatrixXd& scores, const VectorXd& ability,
                   const SolverConfig& cfg = {});

WeightSolution baseline_uniform(Eigen::Index questions, double total_points = 100.0);

/// Declared per-question points. With `total_points` set the points are
/// rescaled proportionally so they sum to that total.
WeightSolution baseline_actual(const VectorXd& points,
                               std::optional<double> total_points = std::nullopt);

/// intercept + S * w
VectorXd predict(const WeightSolution& sol, const MatrixXd& scores);

double mean_absolute_error(const VectorXd& predictions, const VectorXd& targets);

}  // namespace examweight
