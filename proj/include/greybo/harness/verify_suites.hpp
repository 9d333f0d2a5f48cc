#ifndef GREYBO_HARNESS_VERIFY_SUITES_HPP
#define GREYBO_HARNESS_VERIFY_SUITES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "greybo/harness/regret.hpp"
#include "greybo/math/linalg.hpp"
#include "greybo/model/posterior.hpp"
#include "greybo/strategy/strategies.hpp"

namespace greybo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string details;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

namespace detail {

inline std::string describe(double worst, double tolerance) {
  std::ostringstream out;
  out.precision(3);
  out << "worst " << worst << " (tolerance " << tolerance << ")";
  return out.str();
}

}  // namespace detail

struct LemmaSuiteOptions {
  int update_count = 1000;      // random single-update instances
  int trajectory_count = 20;    // 20-step trajectories for the telescoped ratio
  std::uint64_t seed = 0;
};

// Executable checks of the determinant identity, its telescoped corollary,
// the log-determinant bound and the ellipsoid width bound on random
// instances with d <= 6, m <= 4.
inline SuiteReport verify_lemma_suite(const LemmaSuiteOptions& options = {}) {
  SuiteReport report;
  report.suite = "lemmas";
  Rng rng(options.seed, 0x6c656d);

  // determinant identity on single multivariate updates
  {
    double worst = 0.0;
    for (int trial = 0; trial < options.update_count; ++trial) {
      const Eigen::Index d = 1 + rng.uniform_int(0, 5);
      const Eigen::Index m = 1 + rng.uniform_int(0, 3);
      Eigen::MatrixXd a(m, d);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
      }
      Eigen::VectorXd sigma_v(m);
      for (Eigen::Index i = 0; i < m; ++i) sigma_v[i] = 0.5 + 1.5 * rng.uniform();

      GaussianPosterior post = GaussianPosterior::prior(d, 0.5 + rng.uniform());
      // a couple of warmup observations so the precision is generic
      for (int k = 0; k < 2; ++k) {
        Eigen::MatrixXd aw(1, d);
        for (Eigen::Index j = 0; j < d; ++j) aw(0, j) = rng.normal();
        post = update_posterior_with(post, aw, NoiseModel::isotropic(1, 1.0),
                                     Eigen::VectorXd::Zero(1));
      }

      const double det_before = post.precision().determinant();
      double product = 1.0;
      GaussianPosterior step = post;
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::RowVectorXd row = a.row(i);
        const Eigen::MatrixXd cov = step.covariance();
        product *=
            1.0 + (row * cov * row.transpose())(0, 0) / (sigma_v[i] * sigma_v[i]);
        step = update_posterior_with(step, row, NoiseModel(sigma_v.segment(i, 1)),
                                     Eigen::VectorXd::Zero(1));
      }
      const double det_after = step.precision().determinant();
      worst = std::max(worst, std::abs(det_after - det_before * product) /
                                  std::abs(det_after));
    }
    report.checks.push_back({"determinant_identity", worst <= 1e-10,
                             detail::describe(worst, 1e-10)});
  }

  // telescoped determinant ratio, log-det bound and width bound along
  // 20-step trajectories
  {
    double worst_ratio = 0.0;
    double worst_logdet_slack = -std::numeric_limits<double>::infinity();
    double worst_width_slack = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < options.trajectory_count; ++trial) {
      const Eigen::Index d = 2 + rng.uniform_int(0, 4);
      const Eigen::Index m = 1 + rng.uniform_int(0, 3);
      const double sigma0 = 0.5 + rng.uniform();
      Eigen::VectorXd sigma_v(m);
      for (Eigen::Index i = 0; i < m; ++i) sigma_v[i] = 0.5 + rng.uniform();
      const NoiseModel noise{sigma_v};

      GaussianPosterior post = GaussianPosterior::prior(d, sigma0);
      const double det0 = post.precision().determinant();
      const double log_det0 = post.log_det_precision();
      double product = 1.0;
      double a_bar = 0.0;
      const int steps = 20;
      for (int n = 0; n < steps; ++n) {
        Eigen::MatrixXd a(m, d);
        for (Eigen::Index i = 0; i < m; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
        }
        a_bar = std::max(a_bar, a.norm());
        GaussianPosterior step = post;
        for (Eigen::Index i = 0; i < m; ++i) {
          const Eigen::RowVectorXd row = a.row(i);
          const Eigen::MatrixXd cov = step.covariance();
          product *=
              1.0 + (row * cov * row.transpose())(0, 0) / (sigma_v[i] * sigma_v[i]);
          step = update_posterior_with(step, row, NoiseModel(sigma_v.segment(i, 1)),
                                       Eigen::VectorXd::Zero(1));
        }
        post = step;

        // width bound at a random boundary parameter and feature matrix
        const double gamma = 0.5 + 2.0 * rng.uniform();
        Eigen::VectorXd w = rng.normal_vector(d);
        w /= w.norm();
        const Eigen::VectorXd theta = post.mean() + gamma * (post.covariance_factor() * w);
        const double lhs = (a * (theta - post.mean())).norm();
        const double rhs =
            gamma * std::sqrt(sym_spectral_norm(a * post.covariance() * a.transpose()));
        worst_width_slack = std::max(worst_width_slack, (lhs - rhs) / std::max(1.0, rhs));
      }
      const double ratio = post.precision().determinant() / det0;
      worst_ratio = std::max(worst_ratio, std::abs(ratio - product) / ratio);

      const double lhs = post.log_det_precision() - log_det0;
      const double rhs =
          d * std::log1p(sigma0 * sigma0 * noise.nu_v() * a_bar * a_bar * steps / d);
      worst_logdet_slack = std::max(worst_logdet_slack, lhs - rhs);
    }
    report.checks.push_back({"determinant_ratio", worst_ratio <= 1e-8,
                             detail::describe(worst_ratio, 1e-8)});
    report.checks.push_back({"log_det_bound", worst_logdet_slack <= 1e-9,
                             detail::describe(worst_logdet_slack, 1e-9)});
    report.checks.push_back({"width_bound", worst_width_slack <= 1e-9,
                             detail::describe(worst_width_slack, 1e-9)});
  }
  return report;
}

struct CoverageSuiteOptions {
  double delta = 0.1;
  int runs = 500;
  int iterations = 50;
  Eigen::Index dim = 2;
  std::uint64_t seed = 0;
};

// Monte-Carlo check of the simultaneous confidence statement: the failure
// fraction over independent runs must stay within delta plus three standard
// deviations of the binomial noise.
inline SuiteReport verify_coverage_suite(const CoverageSuiteOptions& options = {}) {
  SuiteReport report;
  report.suite = "coverage";

  LinearBanditOptions boptions;
  boptions.dim = options.dim;
  boptions.num_actions = 32;
  const Problem bandit = random_linear_bandit(boptions, mix_seed(options.seed, 0xb17));
  const double theta_bar = 2.0 * bandit.truth.theta_star.norm();
  const GammaSchedule schedule =
      GammaSchedule::data_dependent(options.delta, theta_bar, 1.0, options.dim);

  CoverageOptions coptions;
  coptions.runs = options.runs;
  coptions.iterations = options.iterations;
  coptions.noise_sigma = 1.0;
  coptions.seed = options.seed;
  const CoverageReport coverage =
      verify_simultaneous_containment(bandit, schedule, coptions);

  const double slack =
      3.0 * std::sqrt(options.delta * (1.0 - options.delta) /
                      std::max(1, options.runs));
  std::ostringstream details;
  details << coverage.failures << "/" << coverage.runs << " failures, fraction "
          << coverage.failure_fraction << " vs delta " << options.delta << " + 3-sigma "
          << slack;
  report.checks.push_back({"simultaneous_containment",
                           coverage.failure_fraction <= options.delta + slack,
                           details.str()});
  return report;
}

struct RegretBoundSuiteOptions {
  int instances = 50;
  int iterations = 200;
  std::uint64_t seed = 0;
};

// Pathwise check of the cumulative regret bound on random linear-bandit
// instances (linear loss, finite action sets, exact acquisition minimizer).
inline SuiteReport verify_regret_bound_suite(const RegretBoundSuiteOptions& options = {}) {
  SuiteReport report;
  report.suite = "regret_bound";

  int violated_instances = 0;
  int prefixes = 0;
  int premise_failures = 0;
  for (int k = 0; k < options.instances; ++k) {
    LinearBanditOptions boptions;
    boptions.dim = 2 + (k % 3);  // d in {2, 3, 4}
    boptions.num_actions = 32;
    const Problem bandit =
        random_linear_bandit(boptions, mix_seed(options.seed, 1000 + k));
    const double theta_bar = 2.0 * bandit.truth.theta_star.norm();
    const GammaSchedule schedule =
        GammaSchedule::data_dependent(0.1, theta_bar, 1.0, boptions.dim);

    LcbStructuredStrategy strategy(bandit, schedule, 1.0, SolverSettings(),
                                   mix_seed(options.seed, 2000 + k));
    RunOptions roptions;
    roptions.iterations = options.iterations;
    roptions.noise_sigma = 1.0;
    roptions.seed = mix_seed(options.seed, 3000 + k);
    roptions.record_bound_terms = true;
    const RegretTrace trace = run_experiment(bandit, strategy, roptions);

    const BoundContext ctx = BoundContext::for_problem(bandit, theta_bar, 1.0);
    const RegretBoundReport bound = verify_regret_bound(trace, ctx);
    if (!bound.passed()) ++violated_instances;
    if (!bound.premise_gamma_monotone || !bound.premise_gamma_start) ++premise_failures;
    prefixes += bound.prefixes_checked;
  }

  std::ostringstream details;
  details << options.instances << " instances, " << prefixes
          << " contained prefixes checked, " << violated_instances
          << " instances with violations";
  report.checks.push_back(
      {"regret_bound_prefixes", violated_instances == 0, details.str()});
  report.checks.push_back({"gamma_premises", premise_failures == 0,
                           std::to_string(premise_failures) + " premise failures"});
  return report;
}

}  // namespace greybo

#endif  // GREYBO_HARNESS_VERIFY_SUITES_HPP
