// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exits nonzero when any criterion fails, unless every failing criterion
// was named with --allow-fail. Allowed failures are still printed as FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "examweight/cli.hpp"
#include "examweight/experiment.hpp"
#include "examweight/gradebook.hpp"
#include "examweight/linalg.hpp"
#include "examweight/nnls.hpp"
#include "examweight/solvers.hpp"
#include "examweight/synthetic.hpp"
#include "nnls_oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace examweight;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. Normalization of the published final-score column.
Outcome normalization() {
  const VectorXd overall = (VectorXd(9) << 50.32, 59.89, 61.63, 66.50, 67.54, 67.92, 69.57,
                            83.16, 84.73).finished();
  const VectorXd expected = (VectorXd(9) << 36.67, 43.65, 44.92, 48.46, 49.23, 49.50, 50.70,
                             60.61, 61.75).finished();
  const double mean = overall.mean();
  const VectorXd got = normalize_ability(overall, 49.5, mean);
  const double worst = (got - expected).cwiseAbs().maxCoeff();
  return {std::abs(mean - 67.92) <= 0.01 && worst <= 0.01,
          "mean " + num(mean) + ", max column error " + num(worst)};
}

// 2. Moore-Penrose conditions.
Outcome pseudoinverse() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 12);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index r = dim(rng), c = dim(rng);
    MatrixXd a;
    if (trial % 2) {
      const Eigen::Index full = std::min(r, c);
      const Eigen::Index rank = full > 1 ? std::uniform_int_distribution<Eigen::Index>(1, full - 1)(rng) : 0;
      a = rank ? testing::low_rank(rng, r, c, rank) : MatrixXd::Zero(r, c);
    } else {
      a = testing::gaussian(rng, r, c);
    }
    const MatrixXd x = linalg::pinv(a);
    const double na = std::max(1.0, a.norm());
    const double nx = std::max(1.0, x.norm());
    worst = std::max({worst, (a * x * a - a).norm() / na, (x * a * x - x).norm() / nx,
                      ((a * x).transpose() - a * x).norm() / std::max(1.0, (a * x).norm()),
                      ((x * a).transpose() - x * a).norm() / std::max(1.0, (x * a).norm())});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0,
          "max relative residual " + num(worst) + ", " + num(secs) + " s"};
}

// 3. NNLS against enumeration of supports.
Outcome nnls_oracle() {
  std::mt19937_64 rng(3);
  double obj_gap = 0.0, weight_gap = 0.0, kkt = 0.0, negative = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index n = p + static_cast<Eigen::Index>(rng() % 8);
    const MatrixXd a = testing::gaussian(rng, n, p);
    const VectorXd y = testing::gaussian_vector(rng, n);
    const auto got = nnls(a, y, 1e-11, 3 * static_cast<int>(p));
    const auto ref = testing::enumerate_nnls(a, y);
    const double f = 0.5 * (a * got.x - y).squaredNorm();
    obj_gap = std::max(obj_gap, std::abs(f - ref.objective));
    weight_gap = std::max(weight_gap, (got.x - ref.x).cwiseAbs().maxCoeff());
    negative = std::max(negative, -got.x.minCoeff());
    const VectorXd dual = a.transpose() * (y - a * got.x);
    for (Eigen::Index j = 0; j < p; ++j) {
      // dual <= 0 at the bound, dual = 0 off it
      kkt = std::max(kkt, got.x(j) > 0.0 ? std::abs(dual(j)) : std::max(0.0, dual(j)));
    }
  }
  const bool pass = obj_gap < 1e-9 && weight_gap < 1e-7 && negative <= 0.0 && kkt < 1e-8;
  return {pass, "objective gap " + num(obj_gap) + ", weight gap " + num(weight_gap) +
                    ", KKT violation " + num(kkt)};
}

// 4. Huber with a huge threshold is least squares; the 1-D outlier fixture.
Outcome huber_degeneration() {
  std::mt19937_64 rng(4);
  SolverConfig cfg;
  cfg.huber_epsilon = 1e6;
  cfg.huber_regularization = 0.0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 8);
    const Eigen::Index n = 2 * p + 5 + static_cast<Eigen::Index>(rng() % 20);
    const MatrixXd s = testing::uniform01(rng, n, p);
    const VectorXd a = VectorXd((10.0 * testing::gaussian_vector(rng, n)).array() + 40.0);
    const WeightSolution hub = fit_huber(s, a, cfg);
    const WeightSolution lin = fit_linear_intercept(s, a);
    VectorXd h(p + 1), l(p + 1);
    h << hub.question_weights, hub.intercept;
    l << lin.question_weights, lin.intercept;
    worst = std::max(worst, (h - l).norm() / l.norm());
  }

  const MatrixXd x = Eigen::Vector4d(1, 2, 3, 4);
  const VectorXd a = Eigen::Vector4d(1, 2, 3, 100);
  SolverConfig robust;
  robust.huber_epsilon = 1.35;
  robust.huber_regularization = 0.0;
  const double hub_err = std::abs(fit_huber(x, a, robust).question_weights(0) - 1.0);
  const double ols_err = std::abs(fit_linear_intercept(x, a).question_weights(0) - 1.0);
  return {worst <= 1e-6 && hub_err < ols_err,
          "tall max relative gap " + num(worst) + "; 1-D slope error huber " + num(hub_err) +
              " vs ols " + num(ols_err)};
}

// 5. Zero and duplicate columns.
Outcome degenerate_columns() {
  std::mt19937_64 rng(5);
  double zero = 0.0, dup = 0.0;
  for (const Eigen::Index n : {9, 30}) {
    MatrixXd s = (testing::uniform01(rng, n, 12).array() > 0.4).cast<double>();
    s.col(3).setZero();
    s.col(7) = s.col(2);
    const VectorXd a = VectorXd((10.0 * testing::gaussian_vector(rng, n)).array() + 60.0);
    for (SolverId id : kFittedSolvers) {
      const WeightSolution w = fit(id, s, a);
      zero = std::max(zero, std::abs(w.question_weights(3)));
      if (id != SolverId::nnls) {
        dup = std::max(dup, std::abs(w.question_weights(7) - w.question_weights(2)));
      }
    }
  }
  return {zero < 1e-8 && dup < 1e-8,
          "max |w_zero| " + num(zero) + ", max duplicate gap " + num(dup)};
}

// 6. Exact-linear cohort evaluated under the leave-one-out protocol.
Outcome exact_linear() {
  const auto t0 = Clock::now();
  SyntheticSpec spec;
  spec.students = 9;
  spec.exams.resize(1);
  spec.noise = 0.0;
  spec.exact_target = true;
  const Gradebook g = generate_synthetic(spec);
  const ScoreScale actual[] = {ScoreScale::actual};
  const EvaluationReport r = evaluate(g, "final", SolverConfig{}, actual);
  const double lin = r.find(SolverId::linear_intercept, ScoreScale::actual).mae;
  const double ols = r.find(SolverId::ols_closed_form, ScoreScale::actual).mae;
  const double uni = r.find(SolverId::uniform, ScoreScale::actual).mae;

  // In-sample fit on all nine students, for reference only.
  const MatrixXd& s = g.exam("final").scores;
  const VectorXd target = ability(g, "final", ScoreScale::actual, Exclusion::include_exam).values;
  const double full = mean_absolute_error(predict(fit_linear_intercept(s, target), s), target);

  const double secs = seconds_since(t0);
  return {lin < 1e-6 && ols < 1e-6 && uni > 1.0 && secs < 10.0,
          "LOOCV MAE linear " + num(lin) + ", ols " + num(ols) + ", uniform " + num(uni) +
              "; single full fit " + num(full) + "; " + num(secs) + " s"};
}

// 7. Weights scale with the target.
Outcome scale_equivariance() {
  const double c = 49.5 / 67.92;
  SolverConfig cfg;
  cfg.huber_regularization = 0.0;
  std::mt19937_64 rng(7);
  std::vector<std::pair<MatrixXd, VectorXd>> problems;
  for (const Eigen::Index n : {9, 25, 60}) {
    problems.emplace_back((testing::uniform01(rng, n, 10).array() > 0.3).cast<double>(),
                          VectorXd((12.0 * testing::gaussian_vector(rng, n)).array() + 60.0));
  }
  const Gradebook g = generate_synthetic(SyntheticSpec{});
  problems.emplace_back(g.exam("final").scores,
                        ability(g, "final", ScoreScale::actual, Exclusion::include_exam).values);

  double worst = 0.0;
  for (const auto& [s, a] : problems) {
    for (SolverId id : kFittedSolvers) {
      const WeightSolution base = fit(id, s, a, cfg);
      const WeightSolution scaled = fit(id, s, VectorXd(c * a), cfg);
      VectorXd x(s.cols() + 1), y(s.cols() + 1);
      x << base.question_weights, base.intercept;
      y << scaled.question_weights, scaled.intercept;
      worst = std::max(worst, (y - c * x).norm() / (c * x).norm());
    }
  }
  return {worst <= 1e-8, "max relative deviation " + num(worst)};
}

// 8. Averaging and self-consistency of the evaluation report.
Outcome loocv_protocol() {
  const Gradebook g = generate_synthetic(SyntheticSpec{});
  const EvaluationReport r = evaluate(g, "final", SolverConfig{});
  const MatrixXd& s = g.exam("final").scores;
  double avg_gap = 0.0, mae_gap = 0.0, pred_gap = 0.0;
  for (const ApproachRecord& rec : r.records) {
    if (rec.fold_weights.size() != 9) return {false, "expected 9 folds"};
    VectorXd mean = VectorXd::Zero(s.cols());
    double intercept = 0.0;
    for (const WeightSolution& f : rec.fold_weights) {
      mean += f.question_weights;
      intercept += f.intercept;
    }
    mean /= 9.0;
    intercept /= 9.0;
    avg_gap = std::max({avg_gap, (mean - rec.averaged_weights.question_weights).cwiseAbs().maxCoeff(),
                        std::abs(intercept - rec.averaged_weights.intercept)});
    const double mae = (rec.predictions - rec.targets).cwiseAbs().mean();
    mae_gap = std::max(mae_gap, std::abs(mae - rec.mae));
    pred_gap = std::max(pred_gap,
                        (predict(rec.averaged_weights, s) - rec.predictions).cwiseAbs().maxCoeff());
  }
  return {avg_gap <= 1e-12 && mae_gap <= 1e-12 && pred_gap <= 1e-12,
          "average gap " + num(avg_gap) + ", MAE gap " + num(mae_gap) + ", prediction gap " +
              num(pred_gap)};
}

// 9. generate -> evaluate -> analyze, twice.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), "examweight");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  return code;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() /
                        ("examweight_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::string> runs;
  for (const char* tag : {"a", "b"}) {
    const fs::path dir = root / tag;
    std::string out, all;
    if (cli({"generate", "--seed", "7", "--out", dir.string()}, out) != 0) {
      fs::remove_all(root);
      return {false, "generate failed"};
    }
    for (const auto& f : {"components.csv", "final_scores.csv", "final_questions.csv",
                          "midterm_scores.csv", "midterm_questions.csv"}) {
      all += slurp(dir / f);
    }
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"evaluate", "--data", dir.string(), "--exam", "final", "--exam",
                                   "midterm"},
          std::vector<std::string>{"analyze", "--data", dir.string(), "--extremes", "3"},
          std::vector<std::string>{"analyze", "--data", dir.string()}}) {
      if (cli(args, out) != 0) {
        fs::remove_all(root);
        return {false, args[0] + " failed"};
      }
      all += out;
    }
    runs.push_back(std::move(all));
  }
  fs::remove_all(root);
  return {runs[0] == runs[1] && !runs[0].empty(),
          std::to_string(runs[0].size()) + " bytes compared"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"examweight acceptance suite"};
  std::vector<int> allowed;
  app.add_option("--allow-fail", allowed, "criteria whose failure does not fail the run")
      ->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> allow(allowed.begin(), allowed.end());

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"normalization cross-check", normalization},
      {"pseudoinverse Moore-Penrose conditions", pseudoinverse},
      {"NNLS matches support enumeration", nnls_oracle},
      {"Huber degeneration and 1-D outlier", huber_degeneration},
      {"zero and duplicate question columns", degenerate_columns},
      {"exact-linear recovery", exact_linear},
      {"scale equivariance", scale_equivariance},
      {"LOOCV averaging and MAE", loocv_protocol},
      {"end-to-end determinism", determinism},
  };

  int blocking = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::string note;
    if (!o.pass && allow.count(id)) note = " (allowed)";
    if (o.pass && allow.count(id)) note = " (listed in --allow-fail but passed)";
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[k].first << ": "
              << o.detail << note << "\n";
    if (!o.pass && !allow.count(id)) ++blocking;
  }
  return blocking ? 1 : 0;
}
