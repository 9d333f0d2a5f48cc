#ifndef GREYBO_MATH_BALL_DESCENT_HPP
#define GREYBO_MATH_BALL_DESCENT_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace greybo {

struct BallDescentOptions {
  double tol = 1e-9;        // on the projected gradient norm
  int max_iterations = 500;
  double step_min = 1e-12;
  double step_max = 1e12;
};

struct BallDescentResult {
  Eigen::VectorXd w;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline Eigen::VectorXd project_unit_ball(const Eigen::VectorXd& w) {
  const double n = w.norm();
  return n > 1.0 ? Eigen::VectorXd(w / n) : w;
}

// Spectral projected gradient descent on the unit ball: Barzilai-Borwein
// steps safeguarded by a nonmonotone Armijo search on the projected arc.
// Globally convergent for the convex objectives produced by convex losses.
inline BallDescentResult minimize_on_unit_ball(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& value_and_grad,
    const Eigen::VectorXd& w0, const BallDescentOptions& options = BallDescentOptions()) {
  BallDescentResult result;
  Eigen::VectorXd w = project_unit_ball(w0);
  Eigen::VectorXd grad(w.size());
  double value = value_and_grad(w, grad);

  std::deque<double> recent{value};
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr int kStallWindow = 50;

  double bb_step = 1.0 / std::max(1.0, grad.norm());
  bool use_bb2 = false;
  double stall_best = value;
  int stall_count = 0;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;

    const double stationarity = (project_unit_ball(w - grad) - w).norm();
    if (stationarity <= options.tol) {
      result.converged = true;
      break;
    }
    // stop grinding once the value has stopped moving at double precision
    if (value < stall_best - 1e-14 * std::max(1.0, std::abs(stall_best))) {
      stall_best = value;
      stall_count = 0;
    } else if (++stall_count >= kStallWindow) {
      break;
    }

    const double f_ref = *std::max_element(recent.begin(), recent.end());
    double lambda = 1.0;
    Eigen::VectorXd w_new, grad_new(w.size());
    double value_new = value;
    for (int ls = 0; ls < 60; ++ls) {
      w_new = project_unit_ball(w - (lambda * bb_step) * grad);
      const Eigen::VectorXd delta = w_new - w;
      value_new = value_and_grad(w_new, grad_new);
      if (value_new <= f_ref + kArmijo * grad.dot(delta) || delta.norm() == 0.0) break;
      lambda *= 0.5;
    }

    const Eigen::VectorXd s = w_new - w;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    // alternate the two Barzilai-Borwein step lengths
    const double yy = y.squaredNorm();
    double candidate = options.step_max;
    if (sy > 1e-300) {
      candidate = use_bb2 && yy > 1e-300 ? sy / yy : s.squaredNorm() / sy;
    }
    use_bb2 = !use_bb2;
    bb_step = std::clamp(candidate, options.step_min, options.step_max);

    w = w_new;
    grad = grad_new;
    value = value_new;
    recent.push_back(value);
    if (recent.size() > kMemory) recent.pop_front();
  }

  result.w = w;
  result.value = value;
  return result;
}

}  // namespace greybo

#endif  // GREYBO_MATH_BALL_DESCENT_HPP
