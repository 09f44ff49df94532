#pragma once

// Leave-one-out fitting with weight averaging, and the MAE comparison of
// every approach against the ability target.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "examweight/gradebook.hpp"
#include "examweight/solvers.hpp"

namespace examweight {

/// A Huber fold that misses the configured tolerance is still accepted when
/// its gradient norm is below this bound.
inline constexpr double kFoldGradientLimit = 1e-4;

struct LoocvResult {
  std::vector<WeightSolution> folds;  // fold k omits student k
  WeightSolution averaged;
};

/// Coordinate-wise mean of the fold solutions (weights and intercept).
WeightSolution average_solutions(std::span<const WeightSolution> folds);

LoocvResult loocv_fit(const MatrixXd& scores, const VectorXd& ability, SolverId solver,
                      const SolverConfig& cfg = {});

struct ApproachRecord {
  SolverId approach = SolverId::uniform;
  ScoreScale scale = ScoreScale::actual;
  Exclusion exclusion = Exclusion::include_exam;
  std::vector<WeightSolution> fold_weights;  // one per student; constant for baselines
  WeightSolution averaged_weights;
  VectorXd targets;
  VectorXd predictions;
  double mae = 0.0;
  bool converged = true;
};

struct EvaluationReport {
  std::string exam;
  std::vector<std::string> students;
  std::vector<std::string> question_ids;
  std::vector<ApproachRecord> records;  // scale-major, then exclusion, then approach

  const ApproachRecord& find(SolverId approach, ScoreScale scale,
                             Exclusion exclusion = Exclusion::include_exam) const;
};

inline constexpr ScoreScale kBothScales[] = {ScoreScale::normalized, ScoreScale::actual};
inline constexpr Exclusion kIncludeOnly[] = {Exclusion::include_exam};

/// MAE of every approach on every requested (scale, exclusion) cell. Fitted
/// approaches predict with their averaged LOOCV weights on all students;
/// baselines use their constant weights (points rescaled to 100).
EvaluationReport evaluate(const Gradebook& g, std::string_view exam, const SolverConfig& cfg,
                          std::span<const ScoreScale> scales = kBothScales,
                          std::span<const Exclusion> exclusions = kIncludeOnly,
                          std::span<const SolverId> approaches = kAllApproaches);

struct MaeComparison {
  SolverId approach;
  ScoreScale scale;
  double include_mae;
  double exclude_mae;
};

struct WeightDelta {
  SolverId approach;
  ScoreScale scale;
  std::string question;
  double include_weight;
  double exclude_weight;
  double delta;  // exclude - include
};

struct ExclusionComparison {
  EvaluationReport include;
  EvaluationReport exclude;
  std::vector<MaeComparison> mae;
  std::vector<WeightDelta> deltas;  // fitted approaches, by |delta| descending
};

ExclusionComparison exclusion_comparison(const Gradebook& g, std::string_view exam,
                                         const SolverConfig& cfg,
                                         std::span<const ScoreScale> scales = kBothScales);

}  // namespace examweight
