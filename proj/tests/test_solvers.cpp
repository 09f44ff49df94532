#include <random>

#include <Eigen/QR>

#include "doctest.h"
#include "examweight/solvers.hpp"
#include "test_support.hpp"

using namespace examweight;

namespace {

// Independent min-norm reference (Eigen COD).
VectorXd reference_min_norm(const MatrixXd& a, const VectorXd& y) {
  return a.completeOrthogonalDecomposition().pseudoInverse() * y;
}

SolverConfig unregularized() {
  SolverConfig cfg;
  cfg.huber_regularization = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("ols_closed_form appends an unscaled bias column") {
  // pinv([[1,0,1],[0,1,1]]) (1,2) = A^T (A A^T)^{-1} (1,2) = (0, 1, 1)
  const WeightSolution s = fit_ols_closed_form(MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 2));
  CHECK(std::abs(s.question_weights(0)) < 1e-14);
  CHECK(s.question_weights(1) == doctest::Approx(1.0));
  CHECK(s.intercept == doctest::Approx(1.0));

  MatrixXd aug(2, 3);
  aug << 1, 0, 1, 0, 1, 1;
  const VectorXd ref = reference_min_norm(aug, Eigen::Vector2d(1, 2));
  CHECK(std::abs(s.question_weights(0) - ref(0)) < 1e-12);
  CHECK(std::abs(s.question_weights(1) - ref(1)) < 1e-12);
  CHECK(std::abs(s.intercept - ref(2)) < 1e-12);
}

TEST_CASE("ols_closed_form with a zero target") {
  std::mt19937_64 rng(1);
  const WeightSolution s = fit_ols_closed_form(testing::uniform01(rng, 5, 7), VectorXd::Zero(5));
  CHECK(s.question_weights.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.intercept == 0.0);
}

TEST_CASE("ols_closed_form gives an all-ones question the intercept's weight") {
  std::mt19937_64 rng(2);
  MatrixXd s = testing::uniform01(rng, 9, 6);
  s.col(3).setOnes();
  const VectorXd a = 60.0 * testing::uniform01(rng, 9, 1).array() + 20.0;
  const WeightSolution sol = fit_ols_closed_form(s, a);
  CHECK(std::abs(sol.question_weights(3) - sol.intercept) < 1e-10);
}

TEST_CASE("linear_intercept examples") {
  MatrixXd s(2, 1);
  s << 0, 1;
  const WeightSolution line = fit_linear_intercept(s, Eigen::Vector2d(10, 20));
  CHECK(line.question_weights(0) == doctest::Approx(10.0));
  CHECK(line.intercept == doctest::Approx(10.0));

  std::mt19937_64 rng(3);
  MatrixXd c = testing::uniform01(rng, 7, 5);
  c.col(1).setOnes();
  const VectorXd a = 100.0 * testing::uniform01(rng, 7, 1);
  CHECK(fit_linear_intercept(c, a).question_weights(1) == 0.0);
}

TEST_CASE("linear_intercept on an underdetermined system interpolates with minimal norm") {
  std::mt19937_64 rng(4);
  const MatrixXd s = testing::uniform01(rng, 4, 8);
  const VectorXd a = 100.0 * testing::uniform01(rng, 4, 1);
  const WeightSolution sol = fit_linear_intercept(s, a);
  CHECK((predict(sol, s) - a).cwiseAbs().maxCoeff() < 1e-9);

  const Eigen::RowVectorXd means = s.colwise().mean();
  const MatrixXd centered = s.rowwise() - means;
  const VectorXd ref = reference_min_norm(centered, (a.array() - a.mean()).matrix());
  CHECK((sol.question_weights - ref).norm() < 1e-10 * ref.norm());
}

TEST_CASE("linear_intercept training residuals sum to zero") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 15);
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 10);
    const MatrixXd s = testing::uniform01(rng, n, m);
    const VectorXd a = 100.0 * testing::uniform01(rng, n, 1);
    const WeightSolution sol = fit_linear_intercept(s, a);
    const double tol = 1e-9 * static_cast<double>(n) * a.cwiseAbs().maxCoeff();
    CHECK(std::abs((a - predict(sol, s)).sum()) < tol);
  }
}

TEST_CASE("baselines") {
  const WeightSolution u = baseline_uniform(4);
  CHECK(u.question_weights.size() == 4);
  CHECK((u.question_weights.array() == 25.0).all());
  CHECK(u.intercept == 0.0);
  CHECK(baseline_uniform(53).question_weights(0) == doctest::Approx(100.0 / 53.0));
  CHECK(baseline_uniform(1).question_weights(0) == 100.0);
  CHECK_THROWS_AS(baseline_uniform(0), ContractError);
  CHECK_THROWS_AS(baseline_uniform(3, 0.0), ContractError);

  // multiple choice 3, true/false 4, analytical subparts summing to 10
  VectorXd pts(5);
  pts << 3, 4, 5, 3, 2;
  const WeightSolution act = baseline_actual(pts);
  CHECK(act.question_weights(0) == 3.0);
  CHECK(act.question_weights(1) == 4.0);
  CHECK(act.question_weights.tail(3).sum() == 10.0);
  CHECK(act.solver == SolverId::actual);

  const WeightSolution scaled = baseline_actual(pts, 100.0);
  CHECK(scaled.question_weights.sum() == doctest::Approx(100.0));
  CHECK(scaled.question_weights(0) / scaled.question_weights(1) == doctest::Approx(0.75));

  pts(2) = 0.0;
  CHECK_THROWS_AS(baseline_actual(pts), ContractError);
}

TEST_CASE("predict") {
  WeightSolution z;
  z.question_weights = VectorXd::Zero(3);
  z.intercept = 5.0;
  CHECK((predict(z, MatrixXd::Ones(4, 3)).array() == 5.0).all());

  MatrixXd row(1, 2);
  row << 1, 0.5;
  CHECK(predict(baseline_uniform(2), row)(0) == doctest::Approx(75.0));

  VectorXd pts(3);
  pts << 3, 4, 10;
  CHECK(predict(baseline_actual(pts), MatrixXd::Ones(1, 3))(0) == doctest::Approx(17.0));

  CHECK_THROWS_AS(predict(z, MatrixXd::Ones(4, 2)), ContractError);
}

TEST_CASE("solver ids round-trip through their names") {
  for (SolverId id : kAllApproaches) CHECK(parse_solver_id(to_string(id)) == id);
  CHECK(parse_solver_id("ols") == SolverId::ols_closed_form);
  CHECK(parse_solver_id("linear") == SolverId::linear_intercept);
  CHECK_THROWS_AS(parse_solver_id("lasso"), ContractError);
  CHECK_THROWS_AS(fit(SolverId::uniform, MatrixXd::Ones(2, 2), VectorXd::Ones(2)), ContractError);
}

TEST_CASE("config validation") {
  SolverConfig cfg;
  cfg.huber_epsilon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = {};
  cfg.nnls_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = {};
  cfg.rank_cutoff = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  CHECK_NOTHROW(SolverConfig{}.validate());
}

TEST_CASE("a question nobody answered gets zero weight from every fitted solver") {
  std::mt19937_64 rng(6);
  for (const Eigen::Index n : {9, 30}) {
    MatrixXd s = testing::uniform01(rng, n, 12);
    s.col(4).setZero();
    const VectorXd a = 40.0 + 50.0 * testing::uniform01(rng, n, 1).array();
    for (SolverId id : kFittedSolvers) {
      const WeightSolution sol = fit(id, s, a);
      CHECK_MESSAGE(std::abs(sol.question_weights(4)) < 1e-8, to_string(id));
    }
  }
}

TEST_CASE("duplicate questions get equal weights from min-norm and regularized solvers") {
  std::mt19937_64 rng(7);
  for (const Eigen::Index n : {9, 30}) {
    MatrixXd s = testing::uniform01(rng, n, 10);
    s.col(7) = s.col(2);
    const VectorXd a = 40.0 + 50.0 * testing::uniform01(rng, n, 1).array();
    for (SolverId id : {SolverId::ols_closed_form, SolverId::linear_intercept, SolverId::huber}) {
      const WeightSolution sol = fit(id, s, a);
      CHECK_MESSAGE(std::abs(sol.question_weights(2) - sol.question_weights(7)) < 1e-8,
                    to_string(id));
    }
  }
}

TEST_CASE("every solver is equivariant under target scaling") {
  std::mt19937_64 rng(8);
  const double c = 49.5 / 67.92;
  const SolverConfig cfg = unregularized();
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd s = testing::uniform01(rng, 25, 6);
    const VectorXd a = 30.0 + 60.0 * testing::uniform01(rng, 25, 1).array();
    for (SolverId id : kFittedSolvers) {
      const WeightSolution s1 = fit(id, s, a, cfg);
      const WeightSolution s2 = fit(id, s, (c * a).eval(), cfg);
      const double ref = std::max(c * s1.question_weights.norm(), 1e-300);
      CHECK_MESSAGE((s2.question_weights - c * s1.question_weights).norm() <= 1e-8 * ref,
                    to_string(id));
      CHECK_MESSAGE(std::abs(s2.intercept - c * s1.intercept) <=
                        1e-8 * std::max(std::abs(c * s1.intercept), ref),
                    to_string(id));
    }
  }
}
