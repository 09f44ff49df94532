#include "examweight/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "examweight/errors.hpp"

namespace examweight {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // 53 random bits in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp_percent(double v) { return std::clamp(v, 0.0, 100.0); }

std::string padded(int i, int total) {
  const std::string digits = std::to_string(total);
  std::string s = std::to_string(i);
  return "S" + std::string(digits.size() - std::min(digits.size(), s.size()), '0') + s;
}

std::vector<Question> build_questions(const SyntheticExamSpec& e) {
  std::vector<Question> qs;
  for (int i = 1; i <= e.multiple_choice; ++i) {
    qs.push_back({"MC" + std::to_string(i), QuestionKind::multiple_choice, e.mc_points, {}});
  }
  for (int i = 1; i <= e.true_false; ++i) {
    qs.push_back({"TF" + std::to_string(i), QuestionKind::true_false, e.tf_points, {}});
  }
  for (std::size_t a = 0; a < e.subparts.size(); ++a) {
    const std::string parent = "AE" + std::to_string(a + 1);
    const int k = e.subparts[a];
    const double whole = std::floor(e.analytical_points);
    const bool integral = whole == e.analytical_points && whole >= k;
    const auto base = static_cast<long long>(whole) / k;
    const auto extra = static_cast<long long>(whole) % k;
    for (int s = 0; s < k; ++s) {
      const double pts = integral ? static_cast<double>(base + (s < extra ? 1 : 0))
                                  : e.analytical_points / k;
      qs.push_back({parent + static_cast<char>('a' + s), QuestionKind::analytical_subpart, pts,
                    parent});
    }
  }
  return qs;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ContractError(std::string("synthetic spec: field '") + key + "' has the wrong type");
  }
}

}  // namespace

Eigen::Index SyntheticExamSpec::question_count() const {
  Eigen::Index n = multiple_choice + true_false;
  for (int k : subparts) n += k;
  return n;
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ContractError("synthetic spec: " + msg); };
  if (students < 1) fail("students must be >= 1");
  if (exams.empty()) fail("at least one exam is required");
  for (const SyntheticExamSpec& e : exams) {
    if (e.name.empty()) fail("exam name is empty");
    if (e.multiple_choice < 0 || e.true_false < 0) fail("question counts must be >= 0");
    if (e.question_count() < 1) fail("exam '" + e.name + "' has no questions");
    for (int k : e.subparts) {
      if (k < 1 || k > 26) fail("exam '" + e.name + "': subparts per question must be in 1..26");
    }
    if (!(e.mc_points > 0.0 && e.tf_points > 0.0 && e.analytical_points > 0.0)) {
      fail("exam '" + e.name + "': points must be > 0");
    }
  }
  for (std::size_t a = 0; a < exams.size(); ++a) {
    for (std::size_t b = a + 1; b < exams.size(); ++b) {
      if (exams[a].name == exams[b].name) fail("duplicate exam '" + exams[a].name + "'");
    }
  }
  if (!(ability_stddev >= 0.0) || !std::isfinite(ability_stddev)) fail("ability_stddev must be >= 0");
  if (!std::isfinite(ability_mean)) fail("ability_mean must be finite");
  if (!(noise >= 0.0) || !std::isfinite(noise)) fail("noise must be >= 0");
  if (!(difficulty_min <= difficulty_max)) fail("difficulty_min must not exceed difficulty_max");
  if (!std::isfinite(discrimination)) fail("discrimination must be finite");
  if (exact_target && exams.size() != 1) fail("exact_target needs exactly one exam");
}

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("synthetic spec: ") + e.what());
  }
  if (!j.is_object()) throw DataError("synthetic spec: expected a JSON object");
  static const char* kKeys[] = {"students",       "exams",          "ability_mean",
                                "ability_stddev", "difficulty_min", "difficulty_max",
                                "discrimination", "noise",          "exact_target",
                                "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&](const char* k) { return key == k; }) == std::end(kKeys)) {
      throw DataError("synthetic spec: unknown field '" + key + "'");
    }
  }
  SyntheticSpec s;
  read_field(j, "students", s.students);
  read_field(j, "ability_mean", s.ability_mean);
  read_field(j, "ability_stddev", s.ability_stddev);
  read_field(j, "difficulty_min", s.difficulty_min);
  read_field(j, "difficulty_max", s.difficulty_max);
  read_field(j, "discrimination", s.discrimination);
  read_field(j, "noise", s.noise);
  read_field(j, "exact_target", s.exact_target);
  read_field(j, "seed", s.seed);
  if (j.contains("exams")) {
    if (!j["exams"].is_array()) throw DataError("synthetic spec: 'exams' must be an array");
    s.exams.clear();
    for (const auto& ej : j["exams"]) {
      SyntheticExamSpec e;
      read_field(ej, "name", e.name);
      read_field(ej, "multiple_choice", e.multiple_choice);
      read_field(ej, "true_false", e.true_false);
      read_field(ej, "subparts", e.subparts);
      read_field(ej, "mc_points", e.mc_points);
      read_field(ej, "tf_points", e.tf_points);
      read_field(ej, "analytical_points", e.analytical_points);
      s.exams.push_back(std::move(e));
    }
  }
  s.validate();
  return s;
}

Gradebook generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n = spec.students;

  std::vector<std::string> students;
  VectorXd ability(n);
  VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    students.push_back(padded(i + 1, n));
    ability(i) = clamp_percent(spec.ability_mean + spec.ability_stddev * rng.normal());
    z(i) = spec.ability_stddev > 0.0 ? (ability(i) - spec.ability_mean) / spec.ability_stddev
                                     : 0.0;
  }

  std::vector<Exam> exams;
  for (const SyntheticExamSpec& es : spec.exams) {
    Exam e;
    e.name = es.name;
    e.questions = build_questions(es);
    const Eigen::Index m = e.question_count();
    VectorXd difficulty(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      difficulty(j) =
          spec.difficulty_min + (spec.difficulty_max - spec.difficulty_min) * rng.uniform();
    }
    e.scores.resize(n, m);
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double p = logistic(spec.discrimination * (z(i) - difficulty(j)));
        if (e.questions[static_cast<std::size_t>(j)].kind == QuestionKind::analytical_subpart) {
          int quarters = 0;
          for (int t = 0; t < 4; ++t) quarters += rng.bernoulli(p) ? 1 : 0;
          e.scores(i, j) = quarters / 4.0;
        } else {
          e.scores(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
        }
      }
    }
    exams.push_back(std::move(e));
  }

  std::vector<ComponentScores> comps(static_cast<std::size_t>(n));
  if (spec.exact_target) {
    const VectorXd totals = exam_percent_totals(exams.front());
    for (int i = 0; i < n; ++i) {
      for (Component c : kComponents) comps[static_cast<std::size_t>(i)][c] = totals(i);
    }
  } else {
    std::array<std::optional<VectorXd>, 4> exam_totals;
    for (const Exam& e : exams) {
      if (const auto c = component_for_exam(e.name)) {
        exam_totals[static_cast<std::size_t>(*c)] = exam_percent_totals(e);
      }
    }
    for (int i = 0; i < n; ++i) {
      ComponentScores& cs = comps[static_cast<std::size_t>(i)];
      cs[Component::homework] = clamp_percent(10.0 + 0.9 * ability(i) + spec.noise * rng.normal());
      cs[Component::project] = clamp_percent(5.0 + 0.95 * ability(i) + spec.noise * rng.normal());
      for (Component c : {Component::midterm, Component::final}) {
        const auto& t = exam_totals[static_cast<std::size_t>(c)];
        cs[c] = t ? (*t)(i) : clamp_percent(ability(i) + spec.noise * rng.normal());
      }
    }
  }
  return Gradebook(std::move(students), std::move(exams), std::move(comps));
}

}  // namespace examweight
