#include "examweight/gradebook.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "examweight/errors.hpp"

namespace examweight {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::multiple_choice: return "mc";
    case QuestionKind::true_false: return "tf";
    case QuestionKind::analytical_subpart: return "sub";
  }
  return "?";
}

std::string_view to_string(Component c) {
  switch (c) {
    case Component::homework: return "homework";
    case Component::midterm: return "midterm";
    case Component::project: return "project";
    case Component::final: return "final";
  }
  return "?";
}

std::optional<Component> component_for_exam(std::string_view exam) {
  if (exam == "midterm") return Component::midterm;
  if (exam == "final") return Component::final;
  return std::nullopt;
}

std::string_view to_string(ScoreScale s) {
  return s == ScoreScale::actual ? "actual" : "normalized";
}

std::string_view to_string(Exclusion e) {
  return e == Exclusion::include_exam ? "include_exam" : "exclude_exam";
}

ScoreScale parse_scale(std::string_view s) {
  if (s == "actual") return ScoreScale::actual;
  if (s == "normalized") return ScoreScale::normalized;
  throw ContractError("unknown scale '" + std::string(s) + "'");
}

std::optional<Eigen::Index> Exam::find_question(std::string_view id) const {
  for (std::size_t j = 0; j < questions.size(); ++j) {
    if (questions[j].id == id) return static_cast<Eigen::Index>(j);
  }
  return std::nullopt;
}

VectorXd Exam::max_points() const {
  VectorXd p(question_count());
  for (std::size_t j = 0; j < questions.size(); ++j) {
    p(static_cast<Eigen::Index>(j)) = questions[j].max_points;
  }
  return p;
}

std::vector<std::string> Exam::question_ids() const {
  std::vector<std::string> ids;
  ids.reserve(questions.size());
  for (const auto& q : questions) ids.push_back(q.id);
  return ids;
}

VectorXd exam_percent_totals(const Exam& exam) {
  const VectorXd p = exam.max_points();
  return exam.scores * (p * (100.0 / p.sum()));
}

Gradebook::Gradebook(std::vector<std::string> students, std::vector<Exam> exams,
                     std::vector<ComponentScores> components, GradebookChecks checks)
    : students_(std::move(students)), exams_(std::move(exams)), components_(std::move(components)) {
  const auto n = static_cast<Eigen::Index>(students_.size());
  {
    std::set<std::string> seen;
    for (const auto& s : students_) {
      if (!seen.insert(s).second) throw DataError("duplicate student id '" + s + "'");
    }
  }
  if (static_cast<Eigen::Index>(components_.size()) != n) {
    throw DataError("components cover " + std::to_string(components_.size()) +
                    " students but the gradebook has " + std::to_string(n));
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (Component c : kComponents) {
      const auto& v = components_[i][c];
      if (v && !(std::isfinite(*v) && *v >= 0.0 && *v <= 100.0)) {
        throw DataError("component " + std::string(to_string(c)) + " of student '" +
                        students_[i] + "' is " + num(*v) + ", outside [0, 100]");
      }
    }
  }

  std::set<std::string> exam_names;
  for (const Exam& e : exams_) {
    if (!exam_names.insert(e.name).second) throw DataError("duplicate exam '" + e.name + "'");
    if (e.questions.empty()) throw DataError("exam '" + e.name + "' has no questions");
    if (e.scores.rows() != n || e.scores.cols() != e.question_count()) {
      throw DataError("exam '" + e.name + "' score matrix is " + std::to_string(e.scores.rows()) +
                      "x" + std::to_string(e.scores.cols()) + ", expected " + std::to_string(n) +
                      "x" + std::to_string(e.question_count()));
    }
    std::set<std::string> ids;
    std::map<std::string, double> subpart_sums;
    for (const Question& q : e.questions) {
      if (!ids.insert(q.id).second) {
        throw DataError("exam '" + e.name + "': duplicate question id '" + q.id + "'");
      }
      if (!(q.max_points > 0.0) || !std::isfinite(q.max_points)) {
        throw DataError("exam '" + e.name + "': question '" + q.id + "' has max_points " +
                        num(q.max_points) + ", must be > 0");
      }
      const bool is_sub = q.kind == QuestionKind::analytical_subpart;
      if (is_sub != (q.parent.has_value() && !q.parent->empty())) {
        throw DataError("exam '" + e.name + "': question '" + q.id +
                        (is_sub ? "' is a subpart without a parent" : "' has a parent but is not a subpart"));
      }
      if (is_sub) subpart_sums[*q.parent] += q.max_points;
    }
    for (const auto& [parent, total] : e.analytical_totals) {
      const auto it = subpart_sums.find(parent);
      const double sum = it == subpart_sums.end() ? 0.0 : it->second;
      if (std::abs(sum - total) > 1e-9 * std::max(1.0, total)) {
        throw DataError("exam '" + e.name + "': subparts of '" + parent + "' sum to " + num(sum) +
                        " points, declared total is " + num(total));
      }
    }
    for (Eigen::Index i = 0; i < e.scores.rows(); ++i) {
      for (Eigen::Index j = 0; j < e.scores.cols(); ++j) {
        const double v = e.scores(i, j);
        if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0)) {
          throw DataError("exam '" + e.name + "': score of student '" +
                          students_[static_cast<std::size_t>(i)] + "' on question '" +
                          e.questions[static_cast<std::size_t>(j)].id + "' is " + num(v) +
                          ", outside [0, 1]");
        }
      }
    }
    const auto comp = component_for_exam(e.name);
    if (checks.consistency && comp) {
      const VectorXd totals = exam_percent_totals(e);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = components_[static_cast<std::size_t>(i)][*comp];
        if (v && std::abs(*v - totals(i)) > checks.consistency_tolerance) {
          throw DataError("student '" + students_[static_cast<std::size_t>(i)] + "': component " +
                          std::string(to_string(*comp)) + " is " + num(*v) +
                          " but the exam total is " + num(totals(i)));
        }
      }
    }
  }
}

const Exam& Gradebook::exam(std::string_view name) const {
  for (const Exam& e : exams_) {
    if (e.name == name) return e;
  }
  throw DataError("unknown exam '" + std::string(name) + "'");
}

bool Gradebook::has_exam(std::string_view name) const {
  for (const Exam& e : exams_) {
    if (e.name == name) return true;
  }
  return false;
}

VectorXd overall_score(const Gradebook& g, Exclusion exclusion, std::string_view exam) {
  std::optional<Component> skip;
  if (exclusion == Exclusion::exclude_exam) {
    skip = component_for_exam(exam);
    if (!skip) {
      throw DataError("exam '" + std::string(exam) +
                      "' has no matching course component to exclude");
    }
  }
  const Eigen::Index n = g.student_count();
  VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ComponentScores& cs = g.components()[static_cast<std::size_t>(i)];
    double sum = 0.0;
    int count = 0;
    for (Component c : kComponents) {
      if (skip && c == *skip) continue;
      if (!cs[c]) {
        throw DataError("student '" + g.students()[static_cast<std::size_t>(i)] +
                        "' is missing component " + std::string(to_string(c)));
      }
      sum += *cs[c];
      ++count;
    }
    out(i) = sum / count;
  }
  return out;
}

VectorXd normalize_ability(const VectorXd& overall, double exam_mean, double overall_mean) {
  if (!(overall_mean > 0.0)) {
    throw DataError("normalize_ability: overall mean is " + num(overall_mean) + ", must be > 0");
  }
  return overall * (exam_mean / overall_mean);
}

AbilityVector ability(const Gradebook& g, std::string_view exam, ScoreScale mode,
                      Exclusion exclusion) {
  const Exam& e = g.exam(exam);
  AbilityVector out;
  out.mode = mode;
  out.exclusion = exclusion;
  out.exam = e.name;
  out.values = overall_score(g, exclusion, exam);
  if (mode == ScoreScale::normalized) {
    const double exam_mean = exam_percent_totals(e).mean();
    out.values = normalize_ability(out.values, exam_mean, out.values.mean());
  }
  return out;
}

}  // namespace examweight
