// Independent reference implementations used only by the tests: batch
// Gaussian conditioning, finite differences, dense-grid minimization and a
// fine-step integrator. These deliberately avoid the code paths they check.
#ifndef GREYBO_TESTS_ORACLES_HPP
#define GREYBO_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "greybo/math/rng.hpp"
#include "greybo/model/lip_model.hpp"
#include "greybo/problem/problems.hpp"

namespace oracles {

struct BatchPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
};

// Posterior from scratch over all observations (regularized least squares).
inline BatchPosterior batch_posterior(const Eigen::VectorXd& mu0, double sigma0,
                                      const std::vector<Eigen::MatrixXd>& features,
                                      const std::vector<Eigen::VectorXd>& sigma_v,
                                      const std::vector<Eigen::VectorXd>& residuals) {
  const Eigen::Index d = mu0.size();
  Eigen::MatrixXd lambda =
      Eigen::MatrixXd::Identity(d, d) / (sigma0 * sigma0);
  Eigen::VectorXd info = lambda * mu0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Eigen::VectorXd inv_var = sigma_v[i].array().square().inverse();
    lambda += features[i].transpose() * inv_var.asDiagonal() * features[i];
    info += features[i].transpose() * (inv_var.asDiagonal() * residuals[i]);
  }
  BatchPosterior result;
  result.precision = lambda;
  result.mean = lambda.ldlt().solve(info);
  return result;
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double fp = f(probe);
    probe[i] = x[i] - step;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

// Random model whose features are affine in a 2-dimensional input, with a
// nonzero known offset. Deterministic for a fixed seed.
inline greybo::LipModel random_lip_model(Eigen::Index d, Eigen::Index m,
                                         std::uint64_t seed) {
  greybo::Rng rng(seed);
  Eigen::MatrixXd base(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) base(i, j) = rng.normal();
  }
  Eigen::MatrixXd slope0(m, d), slope1(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      slope0(i, j) = rng.normal();
      slope1(i, j) = rng.normal();
    }
  }
  Eigen::VectorXd offset_base(m);
  for (Eigen::Index i = 0; i < m; ++i) offset_base[i] = rng.normal();
  return greybo::LipModel(
      d, m,
      [base, slope0, slope1](const Eigen::VectorXd& u) {
        return Eigen::MatrixXd(base + u[0] * slope0 + u[1] * slope1);
      },
      [offset_base](const Eigen::VectorXd& u) {
        return Eigen::VectorXd(offset_base * (u[0] - u[1]));
      });
}

// Dense-grid minimizer for scalar functions on an interval.
inline std::pair<double, double> grid_minimize(const std::function<double(double)>& f,
                                               double lo, double hi, int points) {
  double best_x = lo, best_v = f(lo);
  for (int i = 1; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return {best_x, best_v};
}

// Reference trajectory with many RK4 substeps per control interval,
// independent of the discretized affine map used by the library.
inline Eigen::VectorXd fine_rk4_trajectory(const greybo::LinearOde2& ode, double horizon,
                                           int steps, const Eigen::VectorXd& u,
                                           int substeps,
                                           const Eigen::Vector2d& x0 = Eigen::Vector2d::Zero()) {
  const double h = horizon / steps / substeps;
  Eigen::VectorXd out(steps);
  Eigen::Vector2d x = x0;
  for (int k = 0; k < steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const auto fdot = [&](const Eigen::Vector2d& state) -> Eigen::Vector2d {
        return ode.F * state + ode.G * u[k];
      };
      const Eigen::Vector2d k1 = fdot(x);
      const Eigen::Vector2d k2 = fdot(x + 0.5 * h * k1);
      const Eigen::Vector2d k3 = fdot(x + 0.5 * h * k2);
      const Eigen::Vector2d k4 = fdot(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out[k] = x[0];
  }
  return out;
}

}  // namespace oracles

#endif  // GREYBO_TESTS_ORACLES_HPP
