#include "examweight/huber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace examweight::huber {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 80;

struct State {
  VectorXd beta;  // (w, c)
  double scale = 0.0;
};

struct Evaluation {
  double value = 0.0;
  VectorXd grad;  // (d/dw, d/dc, d/dsigma)
};

// Design matrix with the intercept column appended.
MatrixXd augment(const MatrixXd& scores) {
  MatrixXd x(scores.rows(), scores.cols() + 1);
  x.leftCols(scores.cols()) = scores;
  x.col(scores.cols()).setOnes();
  return x;
}

class Problem {
 public:
  Problem(const MatrixXd& scores, const VectorXd& ability, const Options& opts)
      : x_(augment(scores)), a_(ability), m_(scores.cols()), opts_(opts) {}

  Eigen::Index params() const { return m_ + 2; }

  double value(const State& s) const {
    const VectorXd r = a_ - x_ * s.beta;
    double f = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      f += s.scale + loss(r(i) / s.scale, opts_.epsilon) * s.scale;
    }
    return f + opts_.alpha * s.beta.head(m_).squaredNorm();
  }

  Evaluation evaluate(const State& s) const {
    const double eps = opts_.epsilon;
    const VectorXd r = a_ - x_ * s.beta;
    VectorXd psi(r.size());
    double dscale = 0.0;
    double f = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double z = r(i) / s.scale;
      f += s.scale + loss(z, eps) * s.scale;
      if (std::abs(z) < eps) {
        psi(i) = z;
        dscale += 1.0 - z * z;
      } else {
        psi(i) = z > 0 ? eps : -eps;
        dscale += 1.0 - eps * eps;
      }
    }
    Evaluation e;
    e.value = f + opts_.alpha * s.beta.head(m_).squaredNorm();
    e.grad.resize(params());
    e.grad.head(m_ + 1) = -2.0 * x_.transpose() * psi;
    e.grad.head(m_) += 2.0 * opts_.alpha * s.beta.head(m_);
    e.grad(m_ + 1) = dscale;
    return e;
  }

  // Generalized Hessian: only samples in the quadratic regime contribute.
  MatrixXd hessian(const State& s) const {
    const Eigen::Index p = params();
    MatrixXd h = MatrixXd::Zero(p, p);
    const VectorXd r = a_ - x_ * s.beta;
    const double sig = s.scale;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      if (std::abs(r(i) / sig) >= opts_.epsilon) continue;
      const auto xi = x_.row(i).transpose();
      h.topLeftCorner(m_ + 1, m_ + 1).noalias() += (2.0 / sig) * xi * xi.transpose();
      h.col(m_ + 1).head(m_ + 1) += (2.0 * r(i) / (sig * sig)) * xi;
      h(m_ + 1, m_ + 1) += 2.0 * r(i) * r(i) / (sig * sig * sig);
    }
    h.row(m_ + 1).head(m_ + 1) = h.col(m_ + 1).head(m_ + 1).transpose();
    for (Eigen::Index j = 0; j < m_; ++j) h(j, j) += 2.0 * opts_.alpha;
    return h;
  }

  const MatrixXd& design() const { return x_; }
  const VectorXd& target() const { return a_; }
  Eigen::Index questions() const { return m_; }

 private:
  MatrixXd x_;
  VectorXd a_;
  Eigen::Index m_;
  Options opts_;
};

// Solve (H + mu I) d = -g, raising mu until the factorization succeeds.
VectorXd newton_direction(const MatrixXd& h, const VectorXd& g) {
  const double diag = h.diagonal().cwiseAbs().maxCoeff();
  if (!(diag > 0.0)) return -g;
  double mu = 1e-12 * diag;
  const MatrixXd id = MatrixXd::Identity(h.rows(), h.cols());
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LLT<MatrixXd> llt(h + mu * id);
    if (llt.info() == Eigen::Success) {
      VectorXd d = llt.solve(-g);
      if (d.allFinite() && d.dot(g) < 0.0) return d;
    }
    mu *= 100.0;
  }
  return -g;
}

}  // namespace

double loss(double z, double epsilon) {
  const double az = std::abs(z);
  return az < epsilon ? z * z : 2.0 * epsilon * az - epsilon * epsilon;
}

double objective(const MatrixXd& scores, const VectorXd& ability, const VectorXd& weights,
                 double intercept, double scale, double epsilon, double alpha) {
  Options o;
  o.epsilon = epsilon;
  o.alpha = alpha;
  const Problem prob(scores, ability, o);
  State s;
  s.beta.resize(weights.size() + 1);
  s.beta << weights, intercept;
  s.scale = scale;
  return prob.value(s);
}

Fit minimize(const MatrixXd& scores, const VectorXd& ability, const Options& opts) {
  if (scores.rows() != ability.size()) {
    throw ContractError("huber: ability has " + std::to_string(ability.size()) +
                        " entries but scores have " + std::to_string(scores.rows()) +
                        " rows");
  }
  if (!(opts.epsilon > 1.0)) throw ContractError("huber: epsilon must be > 1");
  if (!(opts.alpha >= 0.0)) throw ContractError("huber: alpha must be >= 0");
  if (!(opts.tolerance > 0.0)) throw ContractError("huber: tolerance must be > 0");
  linalg::detail::require_finite(scores, "huber");
  linalg::detail::require_finite(ability, "huber");

  const Problem prob(scores, ability, opts);
  const Eigen::Index n = scores.rows();
  const Eigen::Index m = scores.cols();
  const Eigen::Index p = prob.params();
  const double amax = ability.cwiseAbs().maxCoeff();
  const double floor = kRelativeScaleFloor * (amax > 0.0 ? amax : 1.0);

  // Ridge least-squares start: [X; sqrt(alpha) [I 0]] beta ~ [a; 0].
  State s;
  {
    MatrixXd stacked = MatrixXd::Zero(n + m, m + 1);
    stacked.topRows(n) = prob.design();
    stacked.bottomLeftCorner(m, m) =
        std::sqrt(opts.alpha) * MatrixXd::Identity(m, m);
    VectorXd rhs = VectorXd::Zero(n + m);
    rhs.head(n) = ability;
    s.beta = opts.alpha > 0.0 ? linalg::solve_min_norm(stacked, rhs)
                              : linalg::solve_min_norm(prob.design(), ability);
    const VectorXd r = ability - prob.design() * s.beta;
    s.scale = std::max(floor, std::sqrt(r.squaredNorm() / static_cast<double>(n)));
  }

  Fit out;
  Evaluation ev = prob.evaluate(s);
  out.objective_history.push_back(ev.value);

  auto projected_norm = [&](const Evaluation& e, bool scale_fixed) {
    return scale_fixed ? e.grad.head(p - 1).norm() : e.grad.norm();
  };

  int iter = 0;
  bool converged = false;
  bool scale_fixed = false;
  for (;;) {
    scale_fixed = s.scale <= floor && ev.grad(p - 1) > 0.0;
    const double gnorm = projected_norm(ev, scale_fixed);
    out.gradient_norm = gnorm;
    if (gnorm < opts.tolerance) {
      converged = true;
      break;
    }
    if (iter == opts.max_iterations) break;

    VectorXd dir = VectorXd::Zero(p);
    const MatrixXd h = prob.hessian(s);
    if (!scale_fixed) {
      dir = newton_direction(h, ev.grad);
      // Projected Newton: a step pushing sigma below the floor freezes it.
      scale_fixed = s.scale <= floor && dir(p - 1) < 0.0;
    }
    if (scale_fixed) {
      dir.setZero();
      dir.head(p - 1) = newton_direction(h.topLeftCorner(p - 1, p - 1), ev.grad.head(p - 1));
    }

    // Keep sigma >= floor along the step.
    double t_max = 1.0;
    if (dir(p - 1) < 0.0) {
      t_max = std::min(1.0, (floor - s.scale) / dir(p - 1));
      if (t_max < 0.0) t_max = 0.0;
    }
    const double slope = ev.grad.dot(dir);
    auto make_trial = [&](double t) {
      State st;
      st.beta = s.beta + t * dir.head(p - 1);
      st.scale = (t == t_max && t_max < 1.0) ? floor : s.scale + t * dir(p - 1);
      st.scale = std::max(st.scale, floor);
      return st;
    };
    double t = t_max;
    bool accepted = false;
    State trial;
    Evaluation trial_ev;
    for (int k = 0; k < kMaxBacktracks && t > 0.0; ++k) {
      trial = make_trial(t);
      trial_ev = prob.evaluate(trial);
      if (trial_ev.value <= ev.value + kArmijo * t * slope && trial_ev.value < ev.value) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted && t_max > 0.0) {
      // Near the optimum the predicted decrease drops below the rounding of
      // F; take the full step when F rises by no more than rounding and the
      // gradient shrinks.
      trial = make_trial(t_max);
      trial_ev = prob.evaluate(trial);
      const bool fixed = trial.scale <= floor && trial_ev.grad(p - 1) > 0.0;
      const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(ev.value);
      accepted = trial_ev.value <= ev.value + slack && projected_norm(trial_ev, fixed) < 0.5 * gnorm;
    }
    if (!accepted) break;  // stalled: no representable decrease along dir
    ++iter;
    s = std::move(trial);
    ev = std::move(trial_ev);
    out.objective_history.push_back(ev.value);
  }

  out.weights = s.beta.head(m);
  out.intercept = s.beta(m);
  out.scale = s.scale;
  out.iterations = iter;
  out.converged = converged;
  out.scale_at_floor = s.scale <= floor;
  return out;
}

}  // namespace examweight::huber
