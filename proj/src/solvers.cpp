#include "examweight/solvers.hpp"

#include <cmath>
#include <string>

#include "examweight/huber.hpp"
#include "examweight/nnls.hpp"

namespace examweight {

namespace {

void check_problem(const MatrixXd& scores, const VectorXd& ability, const char* who) {
  if (scores.rows() < 1 || scores.cols() < 1) {
    throw ContractError(std::string(who) + ": need at least one student and one question");
  }
  if (scores.rows() != ability.size()) {
    throw ContractError(std::string(who) + ": ability has " + std::to_string(ability.size()) +
                        " entries but scores have " + std::to_string(scores.rows()) +
                        " rows");
  }
  linalg::detail::require_finite(scores, who);
  linalg::detail::require_finite(ability, who);
}

}  // namespace

std::string_view to_string(SolverId id) {
  switch (id) {
    case SolverId::ols_closed_form: return "ols_closed_form";
    case SolverId::linear_intercept: return "linear_intercept";
    case SolverId::huber: return "huber";
    case SolverId::nnls: return "nnls";
    case SolverId::uniform: return "uniform";
    case SolverId::actual: return "actual";
  }
  return "unknown";
}

SolverId parse_solver_id(std::string_view name) {
  if (name == "ols" || name == "ols_closed_form") return SolverId::ols_closed_form;
  if (name == "linear" || name == "linear_intercept") return SolverId::linear_intercept;
  if (name == "huber") return SolverId::huber;
  if (name == "nnls") return SolverId::nnls;
  if (name == "uniform") return SolverId::uniform;
  if (name == "actual") return SolverId::actual;
  throw ContractError("unknown solver '" + std::string(name) + "'");
}

bool is_fitted(SolverId id) { return id != SolverId::uniform && id != SolverId::actual; }

void SolverConfig::validate() const {
  if (!(huber_epsilon > 1.0)) throw ContractError("huber_epsilon must be > 1");
  if (!(huber_regularization >= 0.0)) throw ContractError("huber_regularization must be >= 0");
  if (!(huber_tolerance > 0.0)) throw ContractError("huber_tolerance must be > 0");
  if (huber_max_iterations < 0) throw ContractError("huber_max_iterations must be >= 0");
  if (!(nnls_tolerance > 0.0)) throw ContractError("nnls_tolerance must be > 0");
  if (nnls_max_iterations && *nnls_max_iterations < 1) {
    throw ContractError("nnls_max_iterations must be >= 1");
  }
  if (rank_cutoff && !(*rank_cutoff > 0.0)) throw ContractError("rank_cutoff must be > 0");
}

WeightSolution fit_ols_closed_form(const MatrixXd& scores, const VectorXd& ability,
                                   const SolverConfig& cfg) {
  check_problem(scores, ability, "ols_closed_form");
  cfg.validate();
  const Eigen::Index m = scores.cols();
  MatrixXd design(scores.rows(), m + 1);
  design.leftCols(m) = scores;
  design.col(m).setOnes();  // dummy question 0, unscaled
  const VectorXd x = linalg::solve_min_norm(design, ability, cfg.rank_cutoff);

  WeightSolution sol;
  sol.solver = SolverId::ols_closed_form;
  sol.question_weights = x.head(m);
  sol.intercept = x(m);
  return sol;
}

WeightSolution fit_linear_intercept(const MatrixXd& scores, const VectorXd& ability,
                                    const SolverConfig& cfg) {
  check_problem(scores, ability, "linear_intercept");
  cfg.validate();
  const Eigen::RowVectorXd col_means = scores.colwise().mean();
  const double target_mean = ability.mean();
  const MatrixXd centered = scores.rowwise() - col_means;
  const VectorXd centered_target = ability.array() - target_mean;

  WeightSolution sol;
  sol.solver = SolverId::linear_intercept;
  sol.question_weights = linalg::solve_min_norm(centered, centered_target, cfg.rank_cutoff);
  sol.intercept = target_mean - col_means.dot(sol.question_weights);
  return sol;
}

WeightSolution fit_huber(const MatrixXd& scores, const VectorXd& ability,
                         const SolverConfig& cfg) {
  check_problem(scores, ability, "huber");
  cfg.validate();
  huber::Options opts;
  opts.epsilon = cfg.huber_epsilon;
  opts.alpha = cfg.huber_regularization;
  opts.tolerance = cfg.huber_tolerance;
  opts.max_iterations = cfg.huber_max_iterations;
  huber::Fit f = huber::minimize(scores, ability, opts);

  WeightSolution sol;
  sol.solver = SolverId::huber;
  sol.question_weights = std::move(f.weights);
  sol.intercept = f.intercept;
  sol.converged = f.converged;
  sol.iterations = f.iterations;
  sol.scale = f.scale;
  sol.gradient_norm = f.gradient_norm;
  return sol;
}

WeightSolution fit_nnls(const MatrixXd& scores, const VectorXd& ability,
                        const SolverConfig& cfg) {
  check_problem(scores, ability, "nnls");
  cfg.validate();
  const int cap = cfg.nnls_max_iterations.value_or(3 * static_cast<int>(scores.cols()));
  const NnlsResult<double> r = nnls(scores, ability, cfg.nnls_tolerance, cap, cfg.rank_cutoff);

  WeightSolution sol;
  sol.solver = SolverId::nnls;
  sol.question_weights = r.x;
  sol.intercept = 0.0;
  sol.iterations = r.iterations;
  return sol;
}

WeightSolution fit(SolverId solver, const MatrixXd& scores, const VectorXd& ability,
                   const SolverConfig& cfg) {
  switch (solver) {
    case SolverId::ols_closed_form: return fit_ols_closed_form(scores, ability, cfg);
    case SolverId::linear_intercept: return fit_linear_intercept(scores, ability, cfg);
    case SolverId::huber: return fit_huber(scores, ability, cfg);
    case SolverId::nnls: return fit_nnls(scores, ability, cfg);
    case SolverId::uniform:
    case SolverId::actual: break;
  }
  throw ContractError("fit: '" + std::string(to_string(solver)) +
                      "' is a baseline, not a fitted solver");
}

WeightSolution baseline_uniform(Eigen::Index questions, double total_points) {
  if (questions < 1) throw ContractError("baseline_uniform: need at least one question");
  if (!(total_points > 0.0) || !std::isfinite(total_points)) {
    throw ContractError("baseline_uniform: total_points must be > 0");
  }
  WeightSolution sol;
  sol.solver = SolverId::uniform;
  sol.question_weights =
      VectorXd::Constant(questions, total_points / static_cast<double>(questions));
  return sol;
}

WeightSolution baseline_actual(const VectorXd& points, std::optional<double> total_points) {
  if (points.size() < 1) throw ContractError("baseline_actual: need at least one question");
  for (Eigen::Index j = 0; j < points.size(); ++j) {
    if (!(points(j) > 0.0) || !std::isfinite(points(j))) {
      throw ContractError("baseline_actual: points must be > 0 (question " +
                          std::to_string(j) + ")");
    }
  }
  WeightSolution sol;
  sol.solver = SolverId::actual;
  sol.question_weights = points;
  if (total_points) {
    if (!(*total_points > 0.0)) throw ContractError("baseline_actual: total_points must be > 0");
    sol.question_weights *= *total_points / points.sum();
  }
  return sol;
}

VectorXd predict(const WeightSolution& sol, const MatrixXd& scores) {
  if (scores.cols() != sol.question_weights.size()) {
    throw ContractError("predict: scores have " + std::to_string(scores.cols()) +
                        " questions but the solution has " +
                        std::to_string(sol.question_weights.size()));
  }
  return (scores * sol.question_weights).array() + sol.intercept;
}

double mean_absolute_error(const VectorXd& predictions, const VectorXd& targets) {
  if (predictions.size() != targets.size() || predictions.size() == 0) {
    throw ContractError("mean_absolute_error: length mismatch or empty input");
  }
  return (predictions - targets).cwiseAbs().sum() / static_cast<double>(predictions.size());
}

}  // namespace examweight
