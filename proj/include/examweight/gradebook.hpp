#pragma once

// Students, exams, questions and course components, and the ability targets
// derived from them.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examweight/linalg.hpp"

namespace examweight {

enum class QuestionKind { multiple_choice, true_false, analytical_subpart };

std::string_view to_string(QuestionKind kind);

struct Question {
  std::string id;
  QuestionKind kind = QuestionKind::multiple_choice;
  double max_points = 1.0;
  std::optional<std::string> parent;  // analytical subparts only
};

enum class Component { homework, midterm, project, final };

inline constexpr std::array<Component, 4> kComponents = {Component::homework, Component::midterm,
                                                         Component::project, Component::final};

std::string_view to_string(Component c);

/// The component an exam feeds into ("midterm" and "final"), if any.
std::optional<Component> component_for_exam(std::string_view exam);

/// Per-student course component scores on a 0-100 scale; missing ones are empty.
struct ComponentScores {
  std::array<std::optional<double>, 4> values;

  std::optional<double>& operator[](Component c) { return values[static_cast<std::size_t>(c)]; }
  const std::optional<double>& operator[](Component c) const {
    return values[static_cast<std::size_t>(c)];
  }
};

struct Exam {
  std::string name;
  std::vector<Question> questions;
  MatrixXd scores;  // students x questions, fraction of credit in [0, 1]
  /// Declared totals of analytical questions, keyed by parent id. Optional;
  /// when present the subparts' points must add up to them.
  std::map<std::string, double> analytical_totals;

  Eigen::Index question_count() const { return static_cast<Eigen::Index>(questions.size()); }
  std::optional<Eigen::Index> find_question(std::string_view id) const;
  VectorXd max_points() const;
  std::vector<std::string> question_ids() const;
};

/// Exam score with the declared points, expressed as a percentage of the
/// exam's total points.
VectorXd exam_percent_totals(const Exam& exam);

struct GradebookChecks {
  bool consistency = true;               // component vs exam total within tolerance
  double consistency_tolerance = 0.01;   // points
};

/// Immutable after construction; the constructor validates everything.
class Gradebook {
 public:
  Gradebook(std::vector<std::string> students, std::vector<Exam> exams,
            std::vector<ComponentScores> components, GradebookChecks checks = {});

  const std::vector<std::string>& students() const { return students_; }
  Eigen::Index student_count() const { return static_cast<Eigen::Index>(students_.size()); }
  const std::vector<Exam>& exams() const { return exams_; }
  const Exam& exam(std::string_view name) const;
  bool has_exam(std::string_view name) const;
  const std::vector<ComponentScores>& components() const { return components_; }

 private:
  std::vector<std::string> students_;
  std::vector<Exam> exams_;
  std::vector<ComponentScores> components_;
};

enum class ScoreScale { actual, normalized };
enum class Exclusion { include_exam, exclude_exam };

std::string_view to_string(ScoreScale s);
std::string_view to_string(Exclusion e);
ScoreScale parse_scale(std::string_view s);

struct AbilityVector {
  VectorXd values;
  ScoreScale mode = ScoreScale::actual;
  Exclusion exclusion = Exclusion::include_exam;
  std::string exam;
};

/// Equal-weight mean of the four components, or of the three remaining ones
/// when the exam's own component is excluded.
VectorXd overall_score(const Gradebook& g, Exclusion exclusion, std::string_view exam);

/// Scale by exam_mean / overall_mean.
VectorXd normalize_ability(const VectorXd& overall, double exam_mean, double overall_mean);

AbilityVector ability(const Gradebook& g, std::string_view exam, ScoreScale mode,
                      Exclusion exclusion);

}  // namespace examweight
