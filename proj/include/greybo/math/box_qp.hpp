#ifndef GREYBO_MATH_BOX_QP_HPP
#define GREYBO_MATH_BOX_QP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace greybo {

struct BoxQpResult {
  Eigen::VectorXd u;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Exact minimizer of 0.5 u^T H u + g^T u over lower <= u <= upper for
// symmetric positive-definite H, by a primal active-set method: solve the
// equality-constrained subproblem on the free variables, step to the nearest
// bound, and release bounds whose multipliers have the wrong sign.
inline BoxQpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper,
                                double tol = 1e-12, int max_iterations = 0) {
  const Eigen::Index n = g.size();
  if (h.rows() != n || h.cols() != n) throw std::invalid_argument("box QP: bad Hessian");
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("box QP: bad bounds");
  }
  if (max_iterations <= 0) max_iterations = 20 * static_cast<int>(n) + 20;

  enum class Bound : char { free_var, at_lower, at_upper };
  std::vector<Bound> state(static_cast<std::size_t>(n), Bound::free_var);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n).cwiseMax(lower).cwiseMin(upper);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (u[i] <= lower[i]) state[static_cast<std::size_t>(i)] = Bound::at_lower;
    if (u[i] >= upper[i]) state[static_cast<std::size_t>(i)] = Bound::at_upper;
  }

  BoxQpResult result;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    result.iterations = iter;

    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == Bound::free_var) free_idx.push_back(i);
    }

    // Target point of the current working set.
    Eigen::VectorXd target = u;
    if (!free_idx.empty()) {
      const Eigen::Index k = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd hff(k, k);
      Eigen::VectorXd rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) hff(a, b) = h(free_idx[a], free_idx[b]);
        double fixed_part = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (state[static_cast<std::size_t>(i)] != Bound::free_var) {
            fixed_part += h(free_idx[a], i) * u[i];
          }
        }
        rhs[a] = -(g[free_idx[a]] + fixed_part);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(hff);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("box QP: Hessian block not positive definite");
      }
      const Eigen::VectorXd uf = llt.solve(rhs);
      for (Eigen::Index a = 0; a < k; ++a) target[free_idx[a]] = uf[a];
    }

    // Longest feasible step toward the target.
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    Bound blocking_side = Bound::free_var;
    for (const Eigen::Index i : free_idx) {
      const double step = target[i] - u[i];
      if (step > tol && u[i] + step > upper[i]) {
        const double a = (upper[i] - u[i]) / step;
        if (a < alpha) { alpha = a; blocking = i; blocking_side = Bound::at_upper; }
      } else if (step < -tol && u[i] + step < lower[i]) {
        const double a = (lower[i] - u[i]) / step;
        if (a < alpha) { alpha = a; blocking = i; blocking_side = Bound::at_lower; }
      }
    }
    u += alpha * (target - u);
    u = u.cwiseMax(lower).cwiseMin(upper);
    if (blocking >= 0) {
      state[static_cast<std::size_t>(blocking)] = blocking_side;
      u[blocking] = blocking_side == Bound::at_upper ? upper[blocking] : lower[blocking];
      continue;
    }

    // At the working-set minimizer: check multipliers of the active bounds.
    const Eigen::VectorXd grad = h * u + g;
    const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
    Eigen::Index release = -1;
    double worst = tol * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Bound s = state[static_cast<std::size_t>(i)];
      if (s == Bound::at_lower && grad[i] < -worst) { worst = -grad[i]; release = i; }
      if (s == Bound::at_upper && grad[i] > worst) { worst = grad[i]; release = i; }
    }
    if (release < 0) {
      result.converged = true;
      break;
    }
    state[static_cast<std::size_t>(release)] = Bound::free_var;
  }

  result.u = u;
  result.value = 0.5 * u.dot(h * u) + g.dot(u);
  return result;
}

inline BoxQpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                                double constant, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper) {
  BoxQpResult r = solve_box_qp(h, g, lower, upper);
  r.value += constant;
  return r;
}

}  // namespace greybo

#endif  // GREYBO_MATH_BOX_QP_HPP
