#ifndef GREYBO_MATH_BOX_DESCENT_HPP
#define GREYBO_MATH_BOX_DESCENT_HPP

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "greybo/problem/loss.hpp"

namespace greybo {

struct BoxDescentOptions {
  double step_tol = 1e-7;   // on the step norm
  double grad_tol = 1e-8;   // on the projected gradient norm
  int max_iterations = 200;
  double fd_step = 1e-6;    // relative central-difference step
  double value_tol = 1e-12; // relative decrease treated as progress
};

// Optional gradient callback; when absent the solver falls back to central
// finite differences of the objective.
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct BoxDescentResult {
  Eigen::VectorXd u;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

// Central finite-difference gradient with componentwise relative steps.
inline Eigen::VectorXd numerical_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& u,
    double rel_step, int* evaluations = nullptr) {
  Eigen::VectorXd grad(u.size());
  Eigen::VectorXd probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(u[i]));
    probe[i] = u[i] + h;
    const double fp = f(probe);
    probe[i] = u[i] - h;
    const double fm = f(probe);
    probe[i] = u[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  if (evaluations) *evaluations += 2 * static_cast<int>(u.size());
  return grad;
}

// Projected quasi-Newton (BFGS) minimization over a box. Gradients are
// numerical, which keeps the solver applicable to value functions such as
// the acquisition that are only available through re-solves.
inline BoxDescentResult minimize_in_box(
    const std::function<double(const Eigen::VectorXd&)>& f, const BoxDomain& box,
    const Eigen::VectorXd& u0, const BoxDescentOptions& options = BoxDescentOptions(),
    const GradientFn& gradient = nullptr) {
  const Eigen::Index n = box.dim();
  BoxDescentResult result;

  const auto eval_gradient = [&](const Eigen::VectorXd& at) {
    if (gradient) return gradient(at);
    return numerical_gradient(f, at, options.fd_step, &result.evaluations);
  };

  Eigen::VectorXd u = box.clamp(u0);
  double value = f(u);
  result.evaluations = 1;
  Eigen::VectorXd grad = eval_gradient(u);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);

  const Eigen::VectorXd range = box.upper() - box.lower();
  int stall_count = 0;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;

    // Bounds that are active and pushed against do not move this iteration.
    Eigen::VectorXd masked = grad;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double eps = 1e-10 * std::max(1.0, range[i]);
      const bool at_lower = u[i] <= box.lower()[i] + eps && grad[i] > 0.0;
      const bool at_upper = u[i] >= box.upper()[i] - eps && grad[i] < 0.0;
      if (at_lower || at_upper) masked[i] = 0.0;
    }

    const double stationarity = (box.clamp(u - grad) - u).norm();
    if (stationarity <= options.grad_tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd direction = -(h_inv * masked);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (masked[i] == 0.0) direction[i] = 0.0;
    }
    if (direction.dot(masked) >= 0.0) {
      h_inv.setIdentity();
      direction = -masked;
    }
    if (direction.norm() == 0.0) {
      result.converged = true;
      break;
    }

    double t = 1.0;
    Eigen::VectorXd u_new = u;
    double value_new = value;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      u_new = box.clamp(u + t * direction);
      const Eigen::VectorXd step = u_new - u;
      if (step.norm() == 0.0) break;
      value_new = f(u_new);
      ++result.evaluations;
      if (value_new <= value + 1e-4 * grad.dot(step)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // fall back to a short projected gradient probe before giving up
      u_new = box.clamp(u - 1e-8 * grad.cwiseProduct(range.cwiseMax(1.0)));
      value_new = f(u_new);
      ++result.evaluations;
      if (value_new >= value) {
        result.converged = true;
        break;
      }
    }

    Eigen::VectorXd grad_new = eval_gradient(u_new);
    const Eigen::VectorXd s = u_new - u;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    const double step_norm = s.norm();
    const double improvement = value - value_new;
    u = u_new;
    value = value_new;
    grad = grad_new;
    if (step_norm <= options.step_tol * std::max(1.0, u.norm())) {
      result.converged = true;
      break;
    }
    if (improvement <= options.value_tol * std::max(1.0, std::abs(value))) {
      if (++stall_count >= 2) {
        result.converged = true;
        break;
      }
    } else {
      stall_count = 0;
    }
  }

  result.u = u;
  result.value = value;
  return result;
}

// Runs the solver from every start point, optionally on a pool of threads.
// Results are reported in start order, so the outcome does not depend on
// scheduling.
inline std::vector<BoxDescentResult> multistart_minimize(
    const std::function<double(const Eigen::VectorXd&)>& f, const BoxDomain& box,
    const std::vector<Eigen::VectorXd>& starts,
    const BoxDescentOptions& options = BoxDescentOptions(), int threads = 1) {
  std::vector<BoxDescentResult> results(starts.size());
  if (threads <= 1 || starts.size() <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) {
      results[i] = minimize_in_box(f, box, starts[i], options);
    }
    return results;
  }
  const int workers = std::min<int>(threads, static_cast<int>(starts.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < starts.size();
           i += static_cast<std::size_t>(workers)) {
        results[i] = minimize_in_box(f, box, starts[i], options);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace greybo

#endif  // GREYBO_MATH_BOX_DESCENT_HPP
