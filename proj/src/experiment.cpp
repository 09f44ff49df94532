#include "examweight/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "examweight/errors.hpp"

namespace examweight {

namespace {

template <typename F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const ContractError& e) {
    throw ContractError(context + ": " + e.what());
  }
}

MatrixXd drop_row(const MatrixXd& m, Eigen::Index k) {
  MatrixXd out(m.rows() - 1, m.cols());
  out.topRows(k) = m.topRows(k);
  out.bottomRows(m.rows() - 1 - k) = m.bottomRows(m.rows() - 1 - k);
  return out;
}

VectorXd drop_entry(const VectorXd& v, Eigen::Index k) {
  VectorXd out(v.size() - 1);
  out.head(k) = v.head(k);
  out.tail(v.size() - 1 - k) = v.tail(v.size() - 1 - k);
  return out;
}

}  // namespace

WeightSolution average_solutions(std::span<const WeightSolution> folds) {
  if (folds.empty()) throw ContractError("average_solutions: no folds");
  WeightSolution avg;
  avg.solver = folds.front().solver;
  avg.question_weights = VectorXd::Zero(folds.front().question_weights.size());
  double scale_sum = 0.0;
  bool all_scaled = true;
  for (const WeightSolution& f : folds) {
    if (f.question_weights.size() != avg.question_weights.size()) {
      throw ContractError("average_solutions: folds disagree on question count");
    }
    avg.question_weights += f.question_weights;
    avg.intercept += f.intercept;
    avg.converged = avg.converged && f.converged;
    avg.iterations += f.iterations;
    avg.gradient_norm = std::max(avg.gradient_norm, f.gradient_norm);
    if (f.scale) {
      scale_sum += *f.scale;
    } else {
      all_scaled = false;
    }
  }
  const auto k = static_cast<double>(folds.size());
  avg.question_weights /= k;
  avg.intercept /= k;
  if (all_scaled) avg.scale = scale_sum / k;
  return avg;
}

LoocvResult loocv_fit(const MatrixXd& scores, const VectorXd& ability, SolverId solver,
                      const SolverConfig& cfg) {
  const Eigen::Index n = scores.rows();
  if (n < 2) throw ContractError("loocv_fit: need at least two students");
  if (ability.size() != n) {
    throw ContractError("loocv_fit: ability has " + std::to_string(ability.size()) +
                        " entries but scores have " + std::to_string(n) + " rows");
  }
  LoocvResult out;
  out.folds.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::string ctx = "fold " + std::to_string(k);
    WeightSolution sol = with_context(ctx, [&] {
      return fit(solver, drop_row(scores, k), drop_entry(ability, k), cfg);
    });
    if (!sol.converged && !(sol.gradient_norm < kFoldGradientLimit)) {
      throw ConvergenceError(ctx + ": " + std::string(to_string(solver)) +
                             " stopped with gradient norm " + std::to_string(sol.gradient_norm));
    }
    out.folds.push_back(std::move(sol));
  }
  out.averaged = average_solutions(out.folds);
  return out;
}

const ApproachRecord& EvaluationReport::find(SolverId approach, ScoreScale scale,
                                             Exclusion exclusion) const {
  for (const ApproachRecord& r : records) {
    if (r.approach == approach && r.scale == scale && r.exclusion == exclusion) return r;
  }
  throw ContractError("report has no record for " + std::string(to_string(approach)) + "/" +
                      std::string(to_string(scale)) + "/" + std::string(to_string(exclusion)));
}

EvaluationReport evaluate(const Gradebook& g, std::string_view exam, const SolverConfig& cfg,
                          std::span<const ScoreScale> scales,
                          std::span<const Exclusion> exclusions,
                          std::span<const SolverId> approaches) {
  cfg.validate();
  const Exam& e = g.exam(exam);
  EvaluationReport report;
  report.exam = e.name;
  report.students = g.students();
  report.question_ids = e.question_ids();
  const auto n = static_cast<std::size_t>(g.student_count());

  for (ScoreScale scale : scales) {
    for (Exclusion exclusion : exclusions) {
      const AbilityVector target = ability(g, exam, scale, exclusion);
      for (SolverId approach : approaches) {
        const std::string ctx = std::string(to_string(approach)) + "/" +
                                std::string(to_string(scale)) + "/" +
                                std::string(to_string(exclusion));
        ApproachRecord rec;
        rec.approach = approach;
        rec.scale = scale;
        rec.exclusion = exclusion;
        rec.targets = target.values;
        if (is_fitted(approach)) {
          LoocvResult cv = with_context(ctx, [&] {
            return loocv_fit(e.scores, target.values, approach, cfg);
          });
          rec.fold_weights = std::move(cv.folds);
          rec.averaged_weights = std::move(cv.averaged);
        } else {
          const WeightSolution base = approach == SolverId::uniform
                                          ? baseline_uniform(e.question_count())
                                          : baseline_actual(e.max_points(), 100.0);
          rec.fold_weights.assign(n, base);
          rec.averaged_weights = base;
        }
        rec.converged = rec.averaged_weights.converged;
        rec.predictions = predict(rec.averaged_weights, e.scores);
        rec.mae = mean_absolute_error(rec.predictions, rec.targets);
        report.records.push_back(std::move(rec));
      }
    }
  }
  return report;
}

ExclusionComparison exclusion_comparison(const Gradebook& g, std::string_view exam,
                                         const SolverConfig& cfg,
                                         std::span<const ScoreScale> scales) {
  static constexpr Exclusion kInclude[] = {Exclusion::include_exam};
  static constexpr Exclusion kExclude[] = {Exclusion::exclude_exam};
  ExclusionComparison out;
  out.include = evaluate(g, exam, cfg, scales, kInclude);
  out.exclude = evaluate(g, exam, cfg, scales, kExclude);

  for (ScoreScale scale : scales) {
    for (SolverId approach : kAllApproaches) {
      const ApproachRecord& in = out.include.find(approach, scale, Exclusion::include_exam);
      const ApproachRecord& ex = out.exclude.find(approach, scale, Exclusion::exclude_exam);
      out.mae.push_back({approach, scale, in.mae, ex.mae});
      if (!is_fitted(approach)) continue;
      for (std::size_t j = 0; j < out.include.question_ids.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double wi = in.averaged_weights.question_weights(jj);
        const double we = ex.averaged_weights.question_weights(jj);
        out.deltas.push_back({approach, scale, out.include.question_ids[j], wi, we, we - wi});
      }
    }
  }
  std::stable_sort(out.deltas.begin(), out.deltas.end(),
                   [](const WeightDelta& a, const WeightDelta& b) {
                     return std::abs(a.delta) > std::abs(b.delta);
                   });
  return out;
}

}  // namespace examweight
