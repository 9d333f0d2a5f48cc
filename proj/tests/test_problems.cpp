#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "greybo/problem/problems.hpp"
#include "oracles.hpp"

using namespace greybo;

namespace {
Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }
}  // namespace

TEST_CASE("example problem ground truth") {
  const Problem p = example1_problem();

  SECTION("reported observations at the boundary inputs") {
    const Eigen::VectorXd y_left = p.truth.f_star(scalar(-1.0));
    CHECK(y_left[0] == Catch::Approx(1.5).margin(1e-12));
    CHECK(y_left[1] == Catch::Approx(1.0).margin(1e-12));
    CHECK(p.truth.phi_star(scalar(-1.0)) == Catch::Approx(2.35).margin(1e-12));

    const Eigen::VectorXd y_right = p.truth.f_star(scalar(1.0));
    CHECK(y_right[0] == Catch::Approx(-0.7).margin(1e-12));
    CHECK(y_right[1] == Catch::Approx(0.1).margin(1e-12));
    CHECK(p.truth.phi_star(scalar(1.0)) == Catch::Approx(0.491).margin(1e-12));
  }

  SECTION("optimum against a dense grid") {
    const auto [grid_u, grid_v] = oracles::grid_minimize(
        [&](double x) { return p.truth.phi_star(scalar(x)); }, -1.0, 1.0, 100001);
    CHECK(std::abs(p.truth.u_star[0] - grid_u) < 2e-5);
    CHECK(p.truth.phi_star_min <= grid_v + 1e-12);
    CHECK(std::abs(p.truth.u_star[0] - 0.3778) < 1e-3);
    CHECK(p.truth.phi_star(p.truth.u_star) ==
          Catch::Approx(p.truth.phi_star_min).margin(1e-12));
  }

  SECTION("model matches the truth at theta_star") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd u = scalar(rng.uniform(-1.0, 1.0));
      CHECK((p.model.predict(u, p.truth.theta_star) - p.truth.f_star(u)).norm() <
            1e-14);
    }
  }

  SECTION("feature bound dominates the grid") {
    CHECK(p.model.frobenius_bound() >=
          max_feature_frobenius(p.model, p.domain, 1024, 5) - 1e-12);
  }

  SECTION("loss gradients match finite differences") {
    Rng rng(7);
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd u = scalar(rng.uniform(-1.0, 1.0));
      const Eigen::VectorXd z = rng.normal_vector(2);
      const Eigen::VectorXd fd = oracles::fd_gradient(
          [&](const Eigen::VectorXd& zz) { return p.loss(u, zz); }, z);
      const Eigen::VectorXd an = p.loss.grad_z(u, z);
      CHECK((fd - an).norm() <= 1e-5 * std::max(1.0, an.norm()));
    }
  }

  SECTION("loss is convex in z and the Lipschitz bound holds on a grid") {
    Rng rng(9);
    double max_grad = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd u = scalar(rng.uniform(-1.0, 1.0));
      const Eigen::VectorXd z1 = p.truth.f_star(scalar(rng.uniform(-1.0, 1.0)));
      const Eigen::VectorXd z2 = p.truth.f_star(scalar(rng.uniform(-1.0, 1.0)));
      CHECK(p.loss(u, 0.5 * (z1 + z2)) <= 0.5 * (p.loss(u, z1) + p.loss(u, z2)) + 1e-12);
      max_grad = std::max(max_grad, p.loss.grad_z(u, z1).norm());
    }
    CHECK(p.loss.lipschitz_Lz >= max_grad - 1e-9);
  }

  SECTION("surrogate features and exact parameters") {
    CHECK((p.surrogate.features(scalar(0.0)) - Eigen::Vector3d(0, 0, 1)).norm() == 0.0);
    CHECK((p.surrogate.features(scalar(-1.0)) - Eigen::Vector3d(1, -1, 1)).norm() == 0.0);
    REQUIRE(p.surrogate.theta_phi_star.has_value());
    Rng rng(13);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd u = scalar(rng.uniform(-1.0, 1.0));
      const double fitted = p.surrogate.nominal(u) +
                            p.surrogate.features(u).dot(*p.surrogate.theta_phi_star);
      CHECK(fitted == Catch::Approx(p.truth.phi_star(u)).margin(1e-12));
    }
  }
}

TEST_CASE("runge-kutta discretization") {
  const LinearOde2 plant = oscillator_dynamics(1.0);

  SECTION("zero control from zero state stays at the origin") {
    const Eigen::VectorXd traj = discretize_rk4(plant, 4.0, 15, Eigen::VectorXd::Zero(15));
    CHECK(traj.norm() == 0.0);
  }

  SECTION("superposition holds to machine precision") {
    Rng rng(21);
    const Eigen::VectorXd u1 = rng.normal_vector(15);
    const Eigen::VectorXd u2 = rng.normal_vector(15);
    const Eigen::VectorXd t0 = discretize_rk4(plant, 4.0, 15, Eigen::VectorXd::Zero(15));
    const Eigen::VectorXd t1 = discretize_rk4(plant, 4.0, 15, u1);
    const Eigen::VectorXd t2 = discretize_rk4(plant, 4.0, 15, u2);
    const Eigen::VectorXd t12 = discretize_rk4(plant, 4.0, 15, u1 + u2);
    CHECK(((t12 - t0) - ((t1 - t0) + (t2 - t0))).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("agreement with a fine-step reference is fourth order") {
    double prev_error = -1.0;
    for (const int steps : {8, 16, 32}) {
      const Eigen::VectorXd u = Eigen::VectorXd::Constant(steps, 1.0);
      const Eigen::VectorXd coarse = discretize_rk4(plant, 2.0, steps, u);
      const Eigen::VectorXd fine = oracles::fine_rk4_trajectory(plant, 2.0, steps, u, 200);
      const double error = (coarse - fine).cwiseAbs().maxCoeff();
      if (prev_error > 0.0) {
        const double ratio = prev_error / error;
        CHECK(ratio > 10.0);  // fourth order would give 16
        CHECK(ratio < 24.0);
      }
      prev_error = error;
    }
  }

  SECTION("affine map agrees with the simulator") {
    Rng rng(5);
    const AffineModel map = discretized_affine_map(plant, 4.0, 15);
    const Eigen::VectorXd u = rng.normal_vector(15);
    CHECK((map.predict(u) - discretize_rk4(plant, 4.0, 15, u)).cwiseAbs().maxCoeff() <
          1e-13);
  }

  SECTION("bad arguments are rejected") {
    CHECK_THROWS_AS(discretize_rk4(plant, 4.0, 0, Eigen::VectorXd::Zero(0)),
                    std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(15);
    bad[3] = NAN;
    CHECK_THROWS_AS(discretize_rk4(plant, 4.0, 15, bad), std::invalid_argument);
  }
}

TEST_CASE("oscillator control problem") {
  const Problem p = oscillator_ilc_problem();

  SECTION("parameter dimensions") {
    CHECK(p.model.param_dim() == 135);
    CHECK(p.model.output_dim() == 15);
    CHECK(p.surrogate.param_dim == 136);
    CHECK(p.surrogate.features(Eigen::VectorXd::Zero(15)).size() == 136);
  }

  SECTION("zero parameters reproduce the nominal model") {
    Rng rng(2);
    const Eigen::VectorXd u = rng.normal_vector(15);
    const Eigen::VectorXd f0 = p.model.predict(u, Eigen::VectorXd::Zero(135));
    CHECK((f0 - p.nominal->predict(u)).cwiseAbs().maxCoeff() < 1e-13);
  }

  SECTION("zero control cost from the zero initial state") {
    // independent evaluation: simulate the plant and apply the loss weights
    const Eigen::VectorXd traj = oracles::fine_rk4_trajectory(
        oscillator_dynamics(1.0), 4.0, 15, Eigen::VectorXd::Zero(15), 50);
    CHECK(traj.norm() == 0.0);
    const double phi0 = p.truth.phi_star(Eigen::VectorXd::Zero(15));
    CHECK(phi0 == Catch::Approx(15 * 0.25 + 100 * 0.25).margin(1e-12));
    CHECK(phi0 == Catch::Approx(28.75).margin(1e-12));
  }

  SECTION("true parameters recover the plant") {
    Rng rng(6);
    for (int i = 0; i < 5; ++i) {
      const Eigen::VectorXd u = p.domain.sample(rng);
      CHECK((p.model.predict(u, p.truth.theta_star) - p.truth.f_star(u))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
  }

  SECTION("fitting the parameters from data recovers the plant") {
    // least-squares fit over random input-output pairs
    Rng rng(14);
    const Eigen::Index d = p.model.param_dim();
    // row k of the model couples k+2 unknowns, so 20 samples overdetermine
    // every row block
    Eigen::MatrixXd design(15 * 20, d);
    Eigen::VectorXd target(15 * 20);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd u = p.domain.sample(rng);
      design.middleRows(15 * i, 15) = p.model.features(u);
      target.segment(15 * i, 15) = p.truth.f_star(u) - p.model.offset(u);
    }
    const Eigen::VectorXd theta_fit =
        design.colPivHouseholderQr().solve(target);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd u = p.domain.sample(rng);
      worst = std::max(worst,
                       (p.model.predict(u, theta_fit) - p.truth.f_star(u)).norm());
    }
    CHECK(worst < 1e-8);
  }

  SECTION("causality: outputs ignore later controls") {
    Rng rng(8);
    const Eigen::VectorXd u = p.domain.sample(rng);
    for (const int k : {3, 9, 14}) {
      Eigen::VectorXd tail = u;
      for (int j = k + 1; j < 15; ++j) tail[j] = rng.uniform(-10.0, 10.0);
      const Eigen::VectorXd z_ref = p.truth.f_star(u);
      const Eigen::VectorXd z_tail = p.truth.f_star(tail);
      CHECK((z_ref.head(k + 1) - z_tail.head(k + 1)).cwiseAbs().maxCoeff() < 1e-12);
      const Eigen::VectorXd m_ref = p.model.predict(u, p.truth.theta_star);
      const Eigen::VectorXd m_tail = p.model.predict(tail, p.truth.theta_star);
      CHECK((m_ref.head(k + 1) - m_tail.head(k + 1)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SECTION("composite objective is exactly quadratic in u") {
    Rng rng(11);
    const Eigen::VectorXd theta = 0.1 * rng.normal_vector(135);
    const auto phi = [&](const Eigen::VectorXd& u) {
      return p.loss(u, p.model.predict(u, theta));
    };
    // exactness of a second-order Taylor model built from finite differences
    const Eigen::VectorXd u0 = p.domain.sample(rng);
    const Eigen::VectorXd g0 = oracles::fd_gradient(phi, u0, 1e-5);
    const Eigen::VectorXd step = rng.normal_vector(15);
    const double f0 = phi(u0);
    const double f1 = phi(u0 + step);
    const double f_mid = phi(u0 + 0.5 * step);
    // for a quadratic, f(mid) = (f0 + f1)/2 - curvature/8 with the same
    // curvature that makes f1 = f0 + g.step + curvature/2
    const double curvature = 2.0 * (f1 - f0 - g0.dot(step));
    CHECK(f_mid == Catch::Approx(0.5 * (f0 + f1) - curvature / 8.0)
                       .epsilon(1e-6)
                       .margin(1e-6));
  }

  SECTION("optimum is interior and beats random candidates") {
    Rng rng(19);
    CHECK(p.domain.contains(p.truth.u_star));
    CHECK(p.truth.u_star.cwiseAbs().maxCoeff() < 10.0);
    for (int i = 0; i < 50; ++i) {
      CHECK(p.truth.phi_star(p.domain.sample(rng)) >= p.truth.phi_star_min - 1e-12);
    }
  }

  SECTION("surrogate parameters reproduce the true objective") {
    REQUIRE(p.surrogate.theta_phi_star.has_value());
    Rng rng(23);
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd u = p.domain.sample(rng);
      const double fitted = p.surrogate.nominal(u) +
                            p.surrogate.features(u).dot(*p.surrogate.theta_phi_star);
      CHECK(fitted == Catch::Approx(p.truth.phi_star(u)).epsilon(1e-10));
    }
  }

  SECTION("feature bound dominates sampled inputs") {
    CHECK(p.model.frobenius_bound() >=
          max_feature_frobenius(p.model, p.domain, 256, 3) - 1e-9);
  }

  SECTION("loss gradient bound dominates the reachable outputs") {
    Rng rng(27);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd u = p.domain.sample(rng);
      const Eigen::VectorXd z = p.truth.f_star(u);
      CHECK(p.loss.grad_z(u, z).norm() <= p.loss.lipschitz_Lz + 1e-9);
    }
  }
}

TEST_CASE("quadratic correction parametrization round trip") {
  Rng rng(77);
  const Eigen::Index n = 4;
  QuadraticObjective q;
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = rng.normal();
  }
  q.H = r + r.transpose();
  q.g = rng.normal_vector(n);
  q.c = rng.normal();
  const Eigen::VectorXd theta = quadratic_to_surrogate_params(q);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd u = rng.normal_vector(n);
    CHECK(quadratic_correction_features(u).dot(theta) ==
          Catch::Approx(q.value(u)).epsilon(1e-12).margin(1e-12));
  }
}

TEST_CASE("random bandit instances are self-consistent") {
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    LinearBanditOptions options;
    options.dim = 3;
    options.num_actions = 16;
    const Problem p = random_linear_bandit(options, seed);
    REQUIRE(p.discrete_actions.has_value());
    for (const auto& action : *p.discrete_actions) {
      CHECK(p.truth.phi_star(action) >= p.truth.phi_star_min - 1e-15);
      CHECK(p.model.frobenius_bound() >= action.norm() - 1e-15);
    }
    CHECK(p.truth.phi_star(p.truth.u_star) == p.truth.phi_star_min);
  }
}
