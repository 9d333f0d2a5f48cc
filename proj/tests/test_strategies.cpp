#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "greybo/strategy/strategies.hpp"
#include "oracles.hpp"

using namespace greybo;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

SolverSettings quick_settings() {
  SolverSettings s;
  s.starts = 6;
  return s;
}

}  // namespace

TEST_CASE("structured LCB on the example problem") {
  const Problem p = example1_problem();

  SECTION("three iterations reach the optimum in the noiseless limit") {
    LcbStructuredStrategy strategy(p, GammaSchedule::log_heuristic(), 1e-6,
                                   quick_settings(), 1);
    // first proposal: flat acquisition, tie broken toward the boundary
    const Proposal p1 = strategy.propose();
    CHECK(p1.u[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(p1.objective_value == Catch::Approx(0.0).margin(1e-12));
    strategy.observe(p1.u, p.truth.f_star(p1.u));

    // second proposal: the acquisition is flat on a region touching +1 and
    // the most informative point there is the opposite boundary
    const Proposal p2 = strategy.propose();
    CHECK(p2.u[0] == Catch::Approx(1.0).margin(1e-9));
    strategy.observe(p2.u, p.truth.f_star(p2.u));

    // the posterior now identifies the model and the next step is optimal
    const Eigen::VectorXd mean = strategy.parameter_posterior()->mean();
    CHECK((mean - p.truth.theta_star).cwiseAbs().maxCoeff() < 1e-4);
    const Proposal p3 = strategy.propose();
    CHECK(std::abs(p3.u[0] - p.truth.u_star[0]) < 1e-3);
  }

  SECTION("constant zero gamma is certainty equivalence") {
    LcbStructuredStrategy strategy(p, GammaSchedule::constant(0.0), 1e-6,
                                   quick_settings(), 2);
    const Eigen::VectorXd u0 = scalar(0.5);
    strategy.observe(u0, p.truth.f_star(u0));
    const Proposal prop = strategy.propose();
    // oracle: dense grid on the posterior-mean composite
    const GaussianPosterior& post = *strategy.parameter_posterior();
    const auto mean_model = [&](double x) {
      return p.loss(scalar(x), p.model.predict(scalar(x), post.mean()));
    };
    const auto [gu, gv] = oracles::grid_minimize(mean_model, -1.0, 1.0, 20001);
    CHECK(prop.objective_value <= gv + 1e-9);
    CHECK(std::abs(prop.u[0] - gu) < 1e-3);
  }

  SECTION("collapsed posterior proposes the true optimum") {
    LcbStructuredStrategy strategy(p, GammaSchedule::log_heuristic(), 1e-6,
                                   quick_settings(), 3);
    for (const double x : {-1.0, 1.0}) {
      strategy.observe(scalar(x), p.truth.f_star(scalar(x)));
    }
    const Proposal prop = strategy.propose();
    CHECK(std::abs(prop.u[0] - p.truth.u_star[0]) < 1e-5);
  }

  SECTION("observation updates match the scalarized route") {
    LcbStructuredStrategy full(p, GammaSchedule::log_heuristic(), 1e-3,
                               quick_settings(), 4);
    const NoiseModel noise = NoiseModel::isotropic(2, 1e-3);
    GaussianPosterior manual = GaussianPosterior::prior(4, 1.0);
    Rng rng(9);
    for (int i = 0; i < 3; ++i) {
      const Eigen::VectorXd u = scalar(rng.uniform(-1.0, 1.0));
      const Eigen::VectorXd y = p.truth.f_star(u);
      full.observe(u, y);
      manual = update_posterior_scalarized(manual, p.model, noise, u, y);
    }
    const GaussianPosterior& internal = *full.parameter_posterior();
    CHECK((internal.mean() - manual.mean()).norm() <=
          1e-10 * std::max(1.0, manual.mean().norm()));
    CHECK((internal.precision() - manual.precision()).norm() <=
          1e-10 * manual.precision().norm());
  }
}

TEST_CASE("agnostic LCB strategy") {
  const Problem p = example1_problem();

  SECTION("prior acquisition is symmetric with boundary minimizers") {
    LcbAgnosticStrategy strategy(p, GammaSchedule::log_heuristic(), 1.0,
                                 quick_settings(), 5);
    const Proposal prop = strategy.propose();
    CHECK(std::abs(prop.u[0]) == Catch::Approx(1.0).margin(1e-12));
    CHECK(prop.u[0] == Catch::Approx(-1.0).margin(1e-12));  // tie toward -1
    // with zero prior mean the value is -gamma * ||psi(u)||
    CHECK(prop.objective_value ==
          Catch::Approx(-1.0 * std::sqrt(3.0)).epsilon(1e-9));
  }

  SECTION("collapsed surrogate with zero gamma finds the optimum") {
    LcbAgnosticStrategy strategy(p, GammaSchedule::constant(0.0), 1e-6,
                                 quick_settings(), 6);
    for (const double x : {-1.0, 0.0, 1.0}) {
      const Eigen::VectorXd u = scalar(x);
      strategy.observe(u, Eigen::VectorXd::Constant(1, p.truth.phi_star(u)));
    }
    const Proposal prop = strategy.propose();
    CHECK(std::abs(prop.u[0] - p.truth.u_star[0]) < 1e-4);
  }

  SECTION("exact observations reproduce the interpolant") {
    LcbAgnosticStrategy strategy(p, GammaSchedule::log_heuristic(), 1e-6,
                                 quick_settings(), 7);
    std::vector<double> xs = {-0.8, -0.1, 0.6};
    for (const double x : xs) {
      const Eigen::VectorXd u = scalar(x);
      strategy.observe(u, Eigen::VectorXd::Constant(1, p.truth.phi_star(u)));
    }
    // batch least-squares oracle on the same features
    Eigen::MatrixXd design(3, 3);
    Eigen::VectorXd target(3);
    for (int i = 0; i < 3; ++i) {
      design.row(i) = p.surrogate.features(scalar(xs[static_cast<std::size_t>(i)]))
                          .transpose();
      target[i] = p.truth.phi_star(scalar(xs[static_cast<std::size_t>(i)]));
    }
    const Eigen::VectorXd ls = design.colPivHouseholderQr().solve(target);
    const Eigen::VectorXd mean = strategy.parameter_posterior()->mean();
    CHECK((mean - ls).cwiseAbs().maxCoeff() < 1e-6);
    for (const double x : {-0.5, 0.3, 0.9}) {
      const double predicted = p.surrogate.features(scalar(x)).dot(mean);
      CHECK(predicted == Catch::Approx(p.truth.phi_star(scalar(x))).margin(1e-6));
    }
  }

  SECTION("rejects vector observations") {
    LcbAgnosticStrategy strategy(p, GammaSchedule::log_heuristic(), 1.0,
                                 quick_settings(), 8);
    CHECK_THROWS_AS(strategy.observe(scalar(0.0), Eigen::VectorXd::Zero(2)),
                    std::invalid_argument);
  }
}

TEST_CASE("Thompson sampling strategies") {
  const Problem p = example1_problem();

  SECTION("fixed seed gives a reproducible iterate") {
    TsStructuredStrategy a(p, 1e-3, quick_settings(), 11);
    TsStructuredStrategy b(p, 1e-3, quick_settings(), 11);
    const Proposal pa = a.propose();
    const Proposal pb = b.propose();
    CHECK((pa.u - pb.u).norm() == 0.0);
    CHECK(pa.objective_value == pb.objective_value);
    // different seeds draw different parameters
    const GaussianPosterior prior = GaussianPosterior::prior(4, 1.0);
    CHECK((sample_parameters(prior, mix_seed(11, 0)) -
           sample_parameters(prior, mix_seed(12, 0)))
              .norm() > 0.0);
  }

  SECTION("degenerate posterior plays the optimum") {
    TsStructuredStrategy strategy(p, 1e-6, quick_settings(), 13);
    for (const double x : {-1.0, 1.0}) {
      strategy.observe(scalar(x), p.truth.f_star(scalar(x)));
    }
    const Proposal prop = strategy.propose();
    CHECK(std::abs(prop.u[0] - p.truth.u_star[0]) < 1e-4);
  }

  SECTION("sampled composite matches the exact quadratic minimizer") {
    const std::uint64_t seed = 14;
    TsStructuredStrategy strategy(p, 1e-3, quick_settings(), seed);
    const Proposal prop = strategy.propose();
    // replicate the sample stream and solve the sampled problem exactly
    const GaussianPosterior prior = GaussianPosterior::prior(4, 1.0);
    const Eigen::VectorXd theta = sample_parameters(prior, mix_seed(seed, 0));
    const AffineModel sampled = p.affine_of_theta(theta);
    const QuadraticObjective q = compose_quadratic(sampled, *p.quad_loss);
    const BoxQpResult exact =
        solve_box_qp(q.H, q.g, q.c, p.domain.lower(), p.domain.upper());
    CHECK(prop.objective_value == Catch::Approx(exact.value).margin(1e-8));
    CHECK(std::abs(prop.u[0] - exact.u[0]) < 1e-4);
  }

  SECTION("agnostic variant is reproducible and solves its sampled model") {
    const std::uint64_t seed = 15;
    TsAgnosticStrategy strategy(p, 1.0, quick_settings(), seed);
    const Proposal prop = strategy.propose();
    TsAgnosticStrategy again(p, 1.0, quick_settings(), seed);
    CHECK((again.propose().u - prop.u).norm() == 0.0);

    const GaussianPosterior prior = GaussianPosterior::prior(3, 1.0);
    const Eigen::VectorXd theta = sample_parameters(prior, mix_seed(seed, 0));
    const auto sampled_objective = [&](double x) {
      return p.surrogate.features(scalar(x)).dot(theta);
    };
    const auto [gu, gv] = oracles::grid_minimize(sampled_objective, -1.0, 1.0, 20001);
    CHECK(prop.objective_value <= gv + 1e-9);
  }

  SECTION("agnostic variant collapses onto the true objective") {
    TsAgnosticStrategy strategy(p, 1e-6, quick_settings(), 16);
    for (const double x : {-0.9, 0.1, 0.8}) {
      const Eigen::VectorXd u = scalar(x);
      strategy.observe(u, Eigen::VectorXd::Constant(1, p.truth.phi_star(u)));
    }
    const Proposal prop = strategy.propose();
    CHECK(std::abs(prop.u[0] - p.truth.u_star[0]) < 1e-4);
  }
}

TEST_CASE("zero-order learning control") {
  SECTION("no mismatch means immediate optimality") {
    IlcOptions options;
    options.plant_gain = 0.5;  // plant equals the nominal model
    const Problem p = oscillator_ilc_problem(options);
    ZooIlcStrategy strategy(p, 0.8);
    const Proposal prop = strategy.propose();
    CHECK((prop.u - p.truth.u_star).cwiseAbs().maxCoeff() < 1e-9);
  }

  SECTION("first correction is the damped first error") {
    const Problem p = oscillator_ilc_problem();
    ZooIlcStrategy strategy(p, 0.8);
    const Proposal prop = strategy.propose();
    const Eigen::VectorXd y = p.truth.f_star(prop.u);
    const Eigen::VectorXd error = y - p.nominal->predict(prop.u);
    strategy.observe(prop.u, y);
    CHECK((strategy.correction() - 0.8 * error).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("full damping keeps the latest error") {
    const Problem p = oscillator_ilc_problem();
    ZooIlcStrategy strategy(p, 1.0);
    for (int i = 0; i < 3; ++i) {
      const Proposal prop = strategy.propose();
      const Eigen::VectorXd y = p.truth.f_star(prop.u);
      strategy.observe(prop.u, y);
      const Eigen::VectorXd error = y - p.nominal->predict(prop.u);
      CHECK((strategy.correction() - error).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SECTION("converges to the damped-average fixed point, not the optimum") {
    const Problem p = oscillator_ilc_problem();
    ZooIlcStrategy strategy(p, 0.8);
    Eigen::VectorXd last_u;
    for (int i = 0; i < 60; ++i) {
      const Proposal prop = strategy.propose();
      last_u = prop.u;
      strategy.observe(prop.u, p.truth.f_star(prop.u));
    }
    // at the fixed point the correction equals the observed error
    const Eigen::VectorXd error =
        p.truth.f_star(last_u) - p.nominal->predict(last_u);
    CHECK((strategy.correction() - error).cwiseAbs().maxCoeff() < 1e-8);

    // independent fixed-point oracle: undamped iteration of the exact maps
    Eigen::VectorXd c = Eigen::VectorXd::Zero(15);
    for (int i = 0; i < 200; ++i) {
      AffineModel corrected = *p.nominal;
      corrected.b += c;
      const QuadraticObjective q = compose_quadratic(corrected, *p.quad_loss);
      const BoxQpResult r =
          solve_box_qp(q.H, q.g, p.domain.lower(), p.domain.upper());
      const Eigen::VectorXd c_next =
          p.truth.f_star(r.u) - p.nominal->predict(r.u);
      if ((c_next - c).cwiseAbs().maxCoeff() < 1e-13) {
        c = c_next;
        break;
      }
      c = c_next;
    }
    CHECK((strategy.correction() - c).cwiseAbs().maxCoeff() < 1e-6);
    // the plateau is strictly suboptimal
    CHECK(p.truth.phi_star(last_u) - p.truth.phi_star_min > 1e-3);
  }

  SECTION("needs nominal dynamics") {
    CHECK_THROWS_AS(ZooIlcStrategy(example1_problem(), 0.8), std::invalid_argument);
    CHECK_THROWS_AS(ZooIlcStrategy(oscillator_ilc_problem(), 0.0),
                    std::invalid_argument);
  }
}
