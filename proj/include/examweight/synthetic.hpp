#pragma once

// Synthetic cohorts from a logistic item-response model.
//
// Each student draws an ability in points; the probability of answering a
// question is logistic(discrimination * (z - difficulty)) with z the
// standardized ability. Multiple-choice and true/false answers are 0 or 1;
// analytical subparts are graded in quarters (Binomial(4, p) / 4).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "examweight/gradebook.hpp"

namespace examweight {

struct SyntheticExamSpec {
  std::string name;
  int multiple_choice = 30;
  int true_false = 15;
  std::vector<int> subparts;  // one entry per analytical question
  double mc_points = 3.0;
  double tf_points = 4.0;
  double analytical_points = 10.0;  // split over the subparts in whole points where possible

  Eigen::Index question_count() const;
};

struct SyntheticSpec {
  int students = 9;
  std::vector<SyntheticExamSpec> exams = {
      {"final", 30, 15, {2, 2, 2, 1, 1}},
      {"midterm", 30, 15, {3, 2, 2, 2, 2}},
  };
  double ability_mean = 67.92;
  double ability_stddev = 10.18;
  double difficulty_min = -1.5;
  double difficulty_max = 1.5;
  double discrimination = 1.7;
  double noise = 3.0;  // stddev of the homework and project components, points
  /// Every component equals the (single) exam's percentage total, so the
  /// overall score is an exact linear function of the question scores.
  bool exact_target = false;
  std::uint64_t seed = 7;

  /// Throws ContractError naming the offending field.
  void validate() const;
};

/// Reads the SyntheticSpec fields from a JSON object; unknown keys are an error.
SyntheticSpec parse_synthetic_spec(std::string_view json_text);

/// Deterministic for a given spec on every platform: the generator is
/// mt19937_64 with its own uniform and normal transforms.
Gradebook generate_synthetic(const SyntheticSpec& spec);

}  // namespace examweight
