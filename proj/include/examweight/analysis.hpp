#pragma once

// Question-level diagnostics: extreme weights, score-vs-ability tables and
// degenerate or duplicated questions.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examweight/experiment.hpp"
#include "examweight/gradebook.hpp"
#include "examweight/solvers.hpp"

namespace examweight {

struct RankedQuestion {
  std::string question;
  double weight = 0.0;
};

struct ExtremeQuestions {
  SolverId solver = SolverId::ols_closed_form;
  ScoreScale scale = ScoreScale::actual;
  std::vector<RankedQuestion> top;     // largest weight first
  std::vector<RankedQuestion> bottom;  // smallest weight first
};

/// k largest and k smallest averaged weights; equal weights are ordered by
/// question id. Lists are truncated when k exceeds the question count.
ExtremeQuestions extreme_questions(const std::vector<std::string>& question_ids,
                                   const ApproachRecord& record, std::size_t k = 3);

/// Uses the first record of `solver` in the report unless a scale is given.
ExtremeQuestions extreme_questions(const EvaluationReport& report, SolverId solver,
                                   std::size_t k = 3,
                                   std::optional<ScoreScale> scale = std::nullopt);

enum class FlagKind { all_correct, all_zero, duplicate_of, top_only };

struct QuestionFlag {
  FlagKind kind = FlagKind::all_correct;
  std::string other;  // duplicate_of target
  int k = 0;          // top_only count

  std::string to_string() const;  // "all_correct", "duplicate_of:MC1", "top_only:1", ...
  bool operator==(const QuestionFlag&) const = default;
};

struct DistributionRow {
  std::string student;
  double score = 0.0;
  double ability = 0.0;
};

struct QuestionDiagnostic {
  std::string exam;
  std::string question;
  std::map<SolverId, double> weight_by_solver;
  std::vector<QuestionFlag> flags;
  std::vector<DistributionRow> distribution;  // ascending ability

  bool has_flag(FlagKind kind) const;
};

/// Largest k for which top_only:k is reported.
inline constexpr int kMaxTopOnly = 2;

/// Per-student (score, ability) rows for one question, ordered by ability
/// with student order breaking ties. Flags are filled in as well.
QuestionDiagnostic distribution_table(const Gradebook& g, std::string_view exam,
                                      std::string_view question, const AbilityVector& ability);

/// Every question carrying at least one flag, in exam order. Duplicates point
/// to the first question (exam order) with the same column. top_only uses the
/// given ability, or the actual include-exam ability when available.
std::vector<QuestionDiagnostic> degenerate_questions(
    const Gradebook& g, std::string_view exam,
    const std::optional<AbilityVector>& ability = std::nullopt);

/// Fill weight_by_solver from the report's records on one scale.
void attach_weights(QuestionDiagnostic& diag, const EvaluationReport& report, ScoreScale scale,
                    Exclusion exclusion = Exclusion::include_exam);

}  // namespace examweight
