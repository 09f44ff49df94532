#include "examweight/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>

#include "examweight/errors.hpp"

namespace examweight {

namespace {

bool same_bits(const MatrixXd& s, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (std::bit_cast<std::uint64_t>(s(i, a)) != std::bit_cast<std::uint64_t>(s(i, b))) {
      return false;
    }
  }
  return true;
}

std::optional<int> top_only(const MatrixXd& s, Eigen::Index j, const VectorXd& ability) {
  const Eigen::Index n = s.rows();
  double lowest_correct = std::numeric_limits<double>::infinity();
  double highest_other = -std::numeric_limits<double>::infinity();
  int k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s(i, j) == 1.0) {
      ++k;
      lowest_correct = std::min(lowest_correct, ability(i));
    } else {
      highest_other = std::max(highest_other, ability(i));
    }
  }
  if (k < 1 || k > kMaxTopOnly || k >= n) return std::nullopt;
  if (!(lowest_correct > highest_other)) return std::nullopt;
  return k;
}

std::vector<QuestionFlag> flags_for(const Exam& e, Eigen::Index j, const VectorXd* ability) {
  std::vector<QuestionFlag> flags;
  const auto col = e.scores.col(j);
  if ((col.array() == 1.0).all()) flags.push_back({FlagKind::all_correct, {}, 0});
  if ((col.array() == 0.0).all()) flags.push_back({FlagKind::all_zero, {}, 0});
  for (Eigen::Index i = 0; i < j; ++i) {
    if (same_bits(e.scores, i, j)) {
      flags.push_back({FlagKind::duplicate_of, e.questions[static_cast<std::size_t>(i)].id, 0});
      break;
    }
  }
  if (ability) {
    if (const auto k = top_only(e.scores, j, *ability)) {
      flags.push_back({FlagKind::top_only, {}, *k});
    }
  }
  return flags;
}

Eigen::Index require_question(const Exam& e, std::string_view question) {
  const auto j = e.find_question(question);
  if (!j) {
    throw DataError("exam '" + e.name + "' has no question '" + std::string(question) + "'");
  }
  return *j;
}

}  // namespace

ExtremeQuestions extreme_questions(const std::vector<std::string>& question_ids,
                                   const ApproachRecord& record, std::size_t k) {
  if (k < 1) throw ContractError("extreme_questions: k must be >= 1");
  const VectorXd& w = record.averaged_weights.question_weights;
  if (static_cast<std::size_t>(w.size()) != question_ids.size()) {
    throw ContractError("extreme_questions: " + std::to_string(question_ids.size()) +
                        " question ids for " + std::to_string(w.size()) + " weights");
  }
  std::vector<RankedQuestion> ranked;
  ranked.reserve(question_ids.size());
  for (std::size_t j = 0; j < question_ids.size(); ++j) {
    ranked.push_back({question_ids[j], w(static_cast<Eigen::Index>(j))});
  }
  ExtremeQuestions out;
  out.solver = record.approach;
  out.scale = record.scale;
  const std::size_t take = std::min(k, ranked.size());
  std::sort(ranked.begin(), ranked.end(), [](const RankedQuestion& a, const RankedQuestion& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.question < b.question;
  });
  out.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(ranked.begin(), ranked.end(), [](const RankedQuestion& a, const RankedQuestion& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.question < b.question;
  });
  out.bottom.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take));
  return out;
}

ExtremeQuestions extreme_questions(const EvaluationReport& report, SolverId solver,
                                   std::size_t k, std::optional<ScoreScale> scale) {
  for (const ApproachRecord& r : report.records) {
    if (r.approach == solver && (!scale || r.scale == *scale)) {
      return extreme_questions(report.question_ids, r, k);
    }
  }
  throw ContractError("report has no record for " + std::string(to_string(solver)));
}

std::string QuestionFlag::to_string() const {
  switch (kind) {
    case FlagKind::all_correct: return "all_correct";
    case FlagKind::all_zero: return "all_zero";
    case FlagKind::duplicate_of: return "duplicate_of:" + other;
    case FlagKind::top_only: return "top_only:" + std::to_string(k);
  }
  return "?";
}

bool QuestionDiagnostic::has_flag(FlagKind kind) const {
  return std::any_of(flags.begin(), flags.end(),
                     [kind](const QuestionFlag& f) { return f.kind == kind; });
}

QuestionDiagnostic distribution_table(const Gradebook& g, std::string_view exam,
                                      std::string_view question, const AbilityVector& ability) {
  const Exam& e = g.exam(exam);
  const Eigen::Index j = require_question(e, question);
  const Eigen::Index n = g.student_count();
  if (ability.values.size() != n) {
    throw ContractError("distribution_table: ability has " +
                        std::to_string(ability.values.size()) + " entries for " +
                        std::to_string(n) + " students");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ability.values(a) < ability.values(b);
  });

  QuestionDiagnostic d;
  d.exam = e.name;
  d.question = e.questions[static_cast<std::size_t>(j)].id;
  d.flags = flags_for(e, j, &ability.values);
  for (Eigen::Index i : order) {
    d.distribution.push_back(
        {g.students()[static_cast<std::size_t>(i)], e.scores(i, j), ability.values(i)});
  }
  return d;
}

std::vector<QuestionDiagnostic> degenerate_questions(const Gradebook& g, std::string_view exam,
                                                     const std::optional<AbilityVector>& ability) {
  const Exam& e = g.exam(exam);
  std::optional<VectorXd> a;
  if (ability) {
    a = ability->values;
  } else {
    try {
      a = examweight::ability(g, exam, ScoreScale::actual, Exclusion::include_exam).values;
    } catch (const DataError&) {
      // Incomplete components: report everything except top_only.
    }
  }
  if (a && a->size() != g.student_count()) {
    throw ContractError("degenerate_questions: ability has " + std::to_string(a->size()) +
                        " entries for " + std::to_string(g.student_count()) + " students");
  }
  std::vector<QuestionDiagnostic> out;
  for (Eigen::Index j = 0; j < e.question_count(); ++j) {
    auto flags = flags_for(e, j, a ? &*a : nullptr);
    if (flags.empty()) continue;
    QuestionDiagnostic d;
    d.exam = e.name;
    d.question = e.questions[static_cast<std::size_t>(j)].id;
    d.flags = std::move(flags);
    out.push_back(std::move(d));
  }
  return out;
}

void attach_weights(QuestionDiagnostic& diag, const EvaluationReport& report, ScoreScale scale,
                    Exclusion exclusion) {
  const auto it = std::find(report.question_ids.begin(), report.question_ids.end(), diag.question);
  if (it == report.question_ids.end()) {
    throw ContractError("report for exam '" + report.exam + "' has no question '" +
                        diag.question + "'");
  }
  const auto j = static_cast<Eigen::Index>(it - report.question_ids.begin());
  for (const ApproachRecord& r : report.records) {
    if (r.scale == scale && r.exclusion == exclusion) {
      diag.weight_by_solver[r.approach] = r.averaged_weights.question_weights(j);
    }
  }
}

}  // namespace examweight
