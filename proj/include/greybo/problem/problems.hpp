#ifndef GREYBO_PROBLEM_PROBLEMS_HPP
#define GREYBO_PROBLEM_PROBLEMS_HPP

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "greybo/math/box_qp.hpp"
#include "greybo/math/rng.hpp"
#include "greybo/model/lip_model.hpp"
#include "greybo/problem/loss.hpp"

namespace greybo {

// A benchmark instance: parametric model, loss, domain and exact optimum,
// plus the structure-agnostic surrogate and whatever extra structure
// (affine dynamics, quadratic loss) the baselines and oracles can exploit.
struct Problem {
  std::string name;
  LipModel model;
  LossFunction loss;
  BoxDomain domain;
  GroundTruth truth;
  AgnosticSurrogate surrogate;
  std::optional<AffineModel> nominal;  // known affine part of the dynamics
  std::optional<AffineModel> plant;    // true dynamics, when affine
  std::optional<QuadraticLossData> quad_loss;
  // At a fixed parameter vector the model is affine in u for both benchmarks;
  // strategies use this only through test oracles, never for proposing.
  std::function<AffineModel(const Eigen::VectorXd&)> affine_of_theta;
  // Finite action set; when present the acquisition is minimized by
  // enumeration (exact global minimizer, as in the bandit setting).
  std::optional<std::vector<Eigen::VectorXd>> discrete_actions;

  double composite_true(const Eigen::VectorXd& u) const { return truth.phi_star(u); }
};

// ---------------------------------------------------------------------------
// Runge-Kutta discretization of a 2-state linear ODE x' = F x + G u with
// piecewise-constant controls on a uniform grid.
// ---------------------------------------------------------------------------

struct LinearOde2 {
  Eigen::Matrix2d F;
  Eigen::Vector2d G;
};

// Oscillator y'' + y' + y = gain * u as a first-order system in (y, y').
inline LinearOde2 oscillator_dynamics(double input_gain) {
  LinearOde2 ode;
  ode.F << 0.0, 1.0, -1.0, -1.0;
  ode.G << 0.0, input_gain;
  return ode;
}

// One classical RK4 step of length h for constant input maps to
// x+ = Ad x + Bd u with the truncated exponential series below.
inline std::pair<Eigen::Matrix2d, Eigen::Vector2d> rk4_step_matrices(
    const Eigen::Matrix2d& f, const Eigen::Vector2d& g, double h) {
  const Eigen::Matrix2d hf = h * f;
  const Eigen::Matrix2d hf2 = hf * hf;
  const Eigen::Matrix2d hf3 = hf2 * hf;
  const Eigen::Matrix2d ad = Eigen::Matrix2d::Identity() + hf + 0.5 * hf2 +
                             hf3 / 6.0 + (hf3 * hf) / 24.0;
  const Eigen::Vector2d bd =
      h * ((Eigen::Matrix2d::Identity() + 0.5 * hf + hf2 / 6.0 + hf3 / 24.0) * g);
  return {ad, bd};
}

// Position samples at the M grid endpoints; exactly linear-affine in u.
inline Eigen::VectorXd discretize_rk4(const LinearOde2& ode, double horizon, int steps,
                                      const Eigen::VectorXd& u,
                                      const Eigen::Vector2d& x0 = Eigen::Vector2d::Zero()) {
  if (steps < 1) throw std::invalid_argument("need at least one control interval");
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
  if (u.size() != steps) throw std::invalid_argument("control vector has wrong length");
  if (!u.allFinite()) throw std::invalid_argument("non-finite controls");

  const double h = horizon / steps;
  const auto [ad, bd] = rk4_step_matrices(ode.F, ode.G, h);
  Eigen::VectorXd trajectory(steps);
  Eigen::Vector2d x = x0;
  for (int k = 0; k < steps; ++k) {
    x = ad * x + bd * u[k];
    trajectory[k] = x[0];
  }
  return trajectory;
}

// Affine map u -> position trajectory of the discretized system.
inline AffineModel discretized_affine_map(const LinearOde2& ode, double horizon,
                                          int steps,
                                          const Eigen::Vector2d& x0 = Eigen::Vector2d::Zero()) {
  const double h = horizon / steps;
  const auto [ad, bd] = rk4_step_matrices(ode.F, ode.G, h);
  AffineModel map;
  map.B = Eigen::MatrixXd::Zero(steps, steps);
  map.b = Eigen::VectorXd::Zero(steps);
  Eigen::Vector2d x = x0;
  for (int k = 0; k < steps; ++k) {
    x = ad * x;
    map.b[k] = x[0];
  }
  for (int j = 0; j < steps; ++j) {
    Eigen::Vector2d xi = bd;
    map.B(j, j) = xi[0];
    for (int k = j + 1; k < steps; ++k) {
      xi = ad * xi;
      map.B(k, j) = xi[0];
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Structure-agnostic surrogate feature maps
// ---------------------------------------------------------------------------

// Features of the quadratic correction q(u) = 0.5 (u,1)^T H (u,1) with H
// symmetric: one monomial per upper-triangle entry, diagonal entries carry
// the 0.5, off-diagonal entries are counted once (factor 2 absorbed).
inline Eigen::VectorXd quadratic_correction_features(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size() + 1;
  Eigen::VectorXd w(n);
  w.head(u.size()) = u;
  w[n - 1] = 1.0;
  Eigen::VectorXd psi(n * (n + 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      psi[idx++] = (i == j) ? 0.5 * w[i] * w[i] : w[i] * w[j];
    }
  }
  return psi;
}

// Inverse of the parametrization above: symmetric H from the coefficients.
inline Eigen::MatrixXd quadratic_correction_matrix(const Eigen::VectorXd& theta_phi,
                                                   Eigen::Index n_u) {
  const Eigen::Index n = n_u + 1;
  if (theta_phi.size() != n * (n + 1) / 2) {
    throw std::invalid_argument("wrong surrogate parameter dimension");
  }
  Eigen::MatrixXd h(n, n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      h(i, j) = theta_phi[idx];
      h(j, i) = theta_phi[idx];
      ++idx;
    }
  }
  return h;
}

// Coefficients of a quadratic objective written as the correction features,
// i.e. theta_phi with psi(u)^T theta_phi == 0.5 u^T H u + g^T u + c.
inline Eigen::VectorXd quadratic_to_surrogate_params(const QuadraticObjective& q) {
  const Eigen::Index n_u = q.g.size();
  Eigen::MatrixXd h(n_u + 1, n_u + 1);
  h.topLeftCorner(n_u, n_u) = 0.5 * (q.H + q.H.transpose());
  h.topRightCorner(n_u, 1) = q.g;
  h.bottomLeftCorner(1, n_u) = q.g.transpose();
  h(n_u, n_u) = 2.0 * q.c;
  Eigen::VectorXd theta((n_u + 1) * (n_u + 2) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i <= n_u; ++i) {
    for (Eigen::Index j = i; j <= n_u; ++j) theta[idx++] = h(i, j);
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Example problem: scalar input, two outputs, four parameters
// ---------------------------------------------------------------------------

inline Problem example1_problem() {
  Problem p;
  p.name = "example1";

  const Eigen::Index d = 4, m = 2;
  p.model = LipModel(
      d, m,
      [](const Eigen::VectorXd& u) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 4);
        a(0, 0) = u[0];
        a(0, 1) = 1.0;
        a(1, 2) = u[0];
        a(1, 3) = 1.0;
        return a;
      },
      nullptr);
  // ||A(u)||_F^2 = 2 u^2 + 2, maximal at the box corner |u| = 1.
  p.model.set_frobenius_bound(2.0);

  QuadraticLossData quad;
  quad.q_z = Eigen::Vector2d(1.0, 0.1).asDiagonal();
  quad.r_u = Eigen::MatrixXd::Zero(1, 1);
  quad.z_ref = Eigen::Vector2d::Zero();
  p.quad_loss = quad;

  p.domain = BoxDomain::cube(1, -1.0, 1.0);

  Eigen::VectorXd theta_star(4);
  theta_star << -1.1, 0.4, -0.45, 0.55;

  AffineModel plant;
  plant.B = Eigen::MatrixXd(2, 1);
  plant.B << theta_star[0], theta_star[2];
  plant.b = Eigen::Vector2d(theta_star[1], theta_star[3]);
  p.plant = plant;

  // L_z from the reachable outputs: |z1| <= 1.5, |z2| <= 1.0.
  const double z1_max = std::abs(theta_star[0]) + std::abs(theta_star[1]);
  const double z2_max = std::abs(theta_star[2]) + std::abs(theta_star[3]);
  const double lz = std::hypot(2.0 * z1_max, 0.2 * z2_max);
  p.loss = make_loss(quad, lz);

  p.truth.theta_star = theta_star;
  p.truth.f_star = [plant](const Eigen::VectorXd& u) { return plant.predict(u); };
  QuadraticLossData quad_copy = quad;
  p.truth.phi_star = [plant, quad_copy](const Eigen::VectorXd& u) {
    return quad_copy.eval(u, plant.predict(u));
  };
  const QuadraticObjective composite = compose_quadratic(plant, quad);
  const BoxQpResult opt =
      solve_box_qp(composite.H, composite.g, composite.c, p.domain.lower(),
                   p.domain.upper());
  p.truth.u_star = opt.u;
  p.truth.phi_star_min = opt.value;

  p.surrogate.features = [](const Eigen::VectorXd& u) {
    return Eigen::Vector3d(u[0] * u[0], u[0], 1.0);
  };
  p.surrogate.param_dim = 3;
  p.surrogate.a_bar = std::sqrt(3.0);
  // The true objective is the quadratic 0.5 H u^2 + g u + c, so the exact
  // surrogate parameters for features (u^2, u, 1) are directly available.
  Eigen::VectorXd theta_phi(3);
  theta_phi << 0.5 * composite.H(0, 0), composite.g[0], composite.c;
  p.surrogate.theta_phi_star = theta_phi;

  p.affine_of_theta = [](const Eigen::VectorXd& theta) {
    AffineModel a;
    a.B = Eigen::MatrixXd(2, 1);
    a.B << theta[0], theta[2];
    a.b = Eigen::Vector2d(theta[1], theta[3]);
    return a;
  };
  return p;
}

// ---------------------------------------------------------------------------
// Oscillator iterative learning control problem
// ---------------------------------------------------------------------------

namespace detail {

// Index of the lower-triangle entry (row, col), col <= row, packed row-major.
inline Eigen::Index tri_index(Eigen::Index row, Eigen::Index col) {
  return row * (row + 1) / 2 + col;
}

}  // namespace detail

struct IlcOptions {
  double horizon = 4.0;
  int steps = 15;
  double plant_gain = 1.0;
  double nominal_gain = 0.5;
  double control_bound = 10.0;
};

// Open-loop oscillator control with model-plant mismatch. The parametric
// model corrects the nominal affine dynamics with a fully parametrized
// lower-triangular matrix D(theta_1) and offset d(theta_2):
//   f(u, theta) = B u + b + D(theta_1) u + d(theta_2).
inline Problem oscillator_ilc_problem(const IlcOptions& options = IlcOptions()) {
  Problem p;
  p.name = "oscillator_ilc";
  const int m = options.steps;
  const Eigen::Index d1 = static_cast<Eigen::Index>(m) * (m + 1) / 2;
  const Eigen::Index d = d1 + m;

  const AffineModel plant = discretized_affine_map(
      oscillator_dynamics(options.plant_gain), options.horizon, m);
  const AffineModel nominal = discretized_affine_map(
      oscillator_dynamics(options.nominal_gain), options.horizon, m);
  p.plant = plant;
  p.nominal = nominal;

  p.model = LipModel(
      d, m,
      [m, d, d1](const Eigen::VectorXd& u) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, d);
        for (Eigen::Index k = 0; k < m; ++k) {
          for (Eigen::Index j = 0; j <= k; ++j) a(k, detail::tri_index(k, j)) = u[j];
          a(k, d1 + k) = 1.0;
        }
        return a;
      },
      [nominal](const Eigen::VectorXd& u) { return nominal.predict(u); });

  p.domain = BoxDomain::cube(m, -options.control_bound, options.control_bound);

  // ||A(u)||_F is monotone in each |u_j|, so the maximum over the box sits at
  // the corner of componentwise-maximal magnitude.
  Eigen::VectorXd corner(m);
  for (int j = 0; j < m; ++j) {
    corner[j] = std::max(std::abs(p.domain.lower()[j]), std::abs(p.domain.upper()[j]));
  }
  p.model.set_frobenius_bound(p.model.features(corner).norm());

  QuadraticLossData quad;
  quad.q_z = Eigen::MatrixXd::Identity(m, m);
  quad.q_z(m - 1, m - 1) += 100.0;
  quad.r_u = 10.0 * Eigen::MatrixXd::Identity(m, m);
  quad.z_ref = Eigen::VectorXd::Constant(m, 0.5);
  p.quad_loss = quad;

  // Interval bound on ||dl/dz|| over the reachable outputs.
  Eigen::VectorXd z_width(m);
  for (int k = 0; k < m; ++k) {
    double reach = std::abs(plant.b[k] - 0.5);
    for (int j = 0; j < m; ++j) {
      reach += std::abs(plant.B(k, j)) * options.control_bound;
    }
    z_width[k] = reach;
  }
  Eigen::VectorXd grad_bound = 2.0 * z_width;
  grad_bound[m - 1] += 200.0 * z_width[m - 1];
  p.loss = make_loss(quad, grad_bound.norm());

  Eigen::VectorXd theta_star(d);
  const Eigen::MatrixXd d_star = plant.B - nominal.B;
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j <= k; ++j) {
      theta_star[detail::tri_index(k, j)] = d_star(k, j);
    }
  }
  theta_star.tail(m) = plant.b - nominal.b;
  p.truth.theta_star = theta_star;
  QuadraticLossData quad_copy = quad;
  p.truth.f_star = [plant](const Eigen::VectorXd& u) { return plant.predict(u); };
  p.truth.phi_star = [plant, quad_copy](const Eigen::VectorXd& u) {
    return quad_copy.eval(u, plant.predict(u));
  };
  const QuadraticObjective composite = compose_quadratic(plant, quad);
  const BoxQpResult opt = solve_box_qp(composite.H, composite.g, composite.c,
                                       p.domain.lower(), p.domain.upper());
  if (!p.domain.contains(opt.u, 1e-9) ||
      (opt.u.cwiseAbs().array() >= options.control_bound - 1e-9).any()) {
    throw std::runtime_error("control box does not contain the unconstrained optimum");
  }
  p.truth.u_star = opt.u;
  p.truth.phi_star_min = opt.value;

  p.surrogate.features = quadratic_correction_features;
  p.surrogate.param_dim = static_cast<Eigen::Index>(m + 1) * (m + 2) / 2;
  AffineModel nominal_copy = nominal;
  p.surrogate.nominal_part = [nominal_copy, quad_copy](const Eigen::VectorXd& u) {
    return quad_copy.eval(u, nominal_copy.predict(u));
  };
  Eigen::VectorXd corner_w(m);
  corner_w = corner;
  p.surrogate.a_bar = quadratic_correction_features(corner_w).norm();
  const QuadraticObjective nominal_quad = compose_quadratic(nominal, quad);
  QuadraticObjective correction;
  correction.H = composite.H - nominal_quad.H;
  correction.g = composite.g - nominal_quad.g;
  correction.c = composite.c - nominal_quad.c;
  p.surrogate.theta_phi_star = quadratic_to_surrogate_params(correction);

  p.affine_of_theta = [nominal_copy, m, d1](const Eigen::VectorXd& theta) {
    AffineModel a = nominal_copy;
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index j = 0; j <= k; ++j) {
        a.B(k, j) += theta[detail::tri_index(k, j)];
      }
    }
    a.b += theta.tail(m);
    return a;
  };
  return p;
}

// ---------------------------------------------------------------------------
// Random linear bandit instances (scalar output, linear loss, finite actions)
// ---------------------------------------------------------------------------

struct LinearBanditOptions {
  Eigen::Index dim = 2;
  int num_actions = 32;
  double theta_scale = 1.0;
};

inline Problem random_linear_bandit(const LinearBanditOptions& options,
                                    std::uint64_t seed) {
  Problem p;
  p.name = "linear_bandit";
  Rng rng(seed);

  const Eigen::Index d = options.dim;
  p.model = LipModel(
      d, 1,
      [](const Eigen::VectorXd& u) {
        Eigen::MatrixXd a(1, u.size());
        a.row(0) = u.transpose();
        return a;
      },
      nullptr);
  p.domain = BoxDomain::cube(d, -1.0, 1.0);

  std::vector<Eigen::VectorXd> actions;
  actions.reserve(static_cast<std::size_t>(options.num_actions));
  double a_bar = 0.0;
  for (int k = 0; k < options.num_actions; ++k) {
    Eigen::VectorXd u = p.domain.sample(rng);
    a_bar = std::max(a_bar, u.norm());
    actions.push_back(std::move(u));
  }
  p.discrete_actions = actions;
  p.model.set_frobenius_bound(a_bar);

  Eigen::VectorXd theta_star = rng.normal_vector(d);
  theta_star *= options.theta_scale / std::max(theta_star.norm(), 1e-12);
  p.truth.theta_star = theta_star;

  LossFunction loss;
  loss.eval = [](const Eigen::VectorXd&, const Eigen::VectorXd& z) { return z[0]; };
  loss.grad_z = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1).eval();
  };
  loss.lipschitz_Lz = 1.0;
  loss.convex_in_z = true;
  p.loss = loss;

  p.truth.f_star = [theta_star](const Eigen::VectorXd& u) {
    return Eigen::VectorXd::Constant(1, u.dot(theta_star)).eval();
  };
  p.truth.phi_star = [theta_star](const Eigen::VectorXd& u) { return u.dot(theta_star); };
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(actions.size()); ++k) {
    if (actions[static_cast<std::size_t>(k)].dot(theta_star) <
        actions[static_cast<std::size_t>(best)].dot(theta_star)) {
      best = k;
    }
  }
  p.truth.u_star = actions[static_cast<std::size_t>(best)];
  p.truth.phi_star_min = p.truth.u_star.dot(theta_star);

  p.surrogate.features = [](const Eigen::VectorXd& u) { return u; };
  p.surrogate.param_dim = d;
  p.surrogate.a_bar = a_bar;
  p.surrogate.theta_phi_star = theta_star;
  return p;
}

// Largest feature Frobenius norm over sampled inputs; the box corners are
// always included since the benchmark feature maps peak there.
inline double max_feature_frobenius(const LipModel& model, const BoxDomain& domain,
                                    int samples, std::uint64_t seed) {
  Rng rng(seed);
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    best = std::max(best, model.features(domain.sample(rng)).norm());
  }
  best = std::max(best, model.features(domain.lower()).norm());
  best = std::max(best, model.features(domain.upper()).norm());
  return best;
}

}  // namespace greybo

#endif  // GREYBO_PROBLEM_PROBLEMS_HPP
