#ifndef GREYBO_HARNESS_REGRET_HPP
#define GREYBO_HARNESS_REGRET_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "greybo/model/confidence.hpp"
#include "greybo/problem/problems.hpp"
#include "greybo/strategy/strategies.hpp"

namespace greybo {

struct TraceRow {
  int n = 0;
  Eigen::VectorXd u;
  Eigen::VectorXd y;          // the observation handed to the strategy
  double phi = 0.0;           // phi_*(u_n), evaluated on the true outputs
  double regret = 0.0;        // r_n
  double cum_regret = 0.0;    // R_n
  double gamma = std::numeric_limits<double>::quiet_NaN();  // gamma_{n-1}
  double q_value = std::numeric_limits<double>::quiet_NaN();
  bool contained = true;
  // bound-verification extras, kept in memory only
  double dist_f_zsol = std::numeric_limits<double>::quiet_NaN();
  double info_gain = std::numeric_limits<double>::quiet_NaN();
};

struct RegretTrace {
  std::string problem;
  std::string strategy;
  std::uint64_t seed = 0;
  Eigen::Index input_dim = 0;
  Eigen::Index observation_dim = 0;
  double phi_star_min = 0.0;
  std::vector<TraceRow> rows;
  double gamma_final = std::numeric_limits<double>::quiet_NaN();
  bool has_containment_check = false;
  // iterations whose solver returned a best-effort, non-converged iterate
  std::vector<int> solver_failures;

  double final_cum_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

struct RunOptions {
  int iterations = 1;
  double noise_sigma = 0.0;  // standard deviation of the output observation noise
  std::uint64_t seed = 0;
  bool record_bound_terms = false;
};

// Alternates propose / evaluate / observe for N steps. Regret is accounted
// on the true outputs; the strategy sees the (possibly noisy) observation,
// or the scalar cost of that observation for agnostic methods.
inline RegretTrace run_experiment(const Problem& problem, Strategy& strategy,
                                  const RunOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("need at least one iteration");
  RegretTrace trace;
  trace.problem = problem.name;
  trace.strategy = strategy.kind();
  trace.seed = options.seed;
  trace.input_dim = problem.domain.dim();
  trace.observation_dim = strategy.observes_cost() ? 1 : problem.model.output_dim();
  trace.phi_star_min = problem.truth.phi_star_min;
  trace.rows.reserve(static_cast<std::size_t>(options.iterations));

  Rng noise_rng(options.seed, 0x6e6f6973);
  double cumulative = 0.0;

  for (int n = 1; n <= options.iterations; ++n) {
    const Proposal prop = strategy.propose();
    if (!prop.solver_converged) trace.solver_failures.push_back(n);
    const Eigen::VectorXd u = prop.u;
    const Eigen::VectorXd y_true = problem.truth.f_star(u);
    Eigen::VectorXd y_obs = y_true;
    if (options.noise_sigma > 0.0) {
      y_obs += options.noise_sigma * noise_rng.normal_vector(y_true.size());
    }

    TraceRow row;
    row.n = n;
    row.u = u;
    row.phi = problem.truth.phi_star(u);
    row.regret = row.phi - problem.truth.phi_star_min;
    cumulative += row.regret;
    row.cum_regret = cumulative;
    row.gamma = prop.gamma;
    row.q_value = prop.objective_value;

    const GaussianPosterior* post = strategy.parameter_posterior();
    const std::optional<Eigen::VectorXd> truth = strategy.true_parameters();
    if (post != nullptr && truth.has_value() && truth->size() == post->dim() &&
        std::isfinite(prop.gamma)) {
      trace.has_containment_check = true;
      row.contained = post->precision_norm(*truth) <= prop.gamma * (1.0 + 1e-9);
    }

    if (options.record_bound_terms && post != nullptr) {
      if (prop.z_predicted.size() == y_true.size()) {
        row.dist_f_zsol = (y_true - prop.z_predicted).norm();
      }
      const Eigen::MatrixXd a = problem.model.features(u);
      const Eigen::MatrixXd cov = post->covariance();
      double gain = 0.0;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        gain += std::log1p((a.row(i) * cov * a.row(i).transpose())(0, 0));
      }
      row.info_gain = gain;
    }

    if (strategy.observes_cost()) {
      const double cost = problem.loss(u, y_obs);
      row.y = Eigen::VectorXd::Constant(1, cost);
      strategy.observe(u, row.y);
    } else {
      row.y = y_obs;
      strategy.observe(u, y_obs);
    }
    trace.rows.push_back(std::move(row));
  }
  if (const std::optional<double> g = strategy.current_gamma()) trace.gamma_final = *g;
  return trace;
}

// ---------------------------------------------------------------------------
// Simultaneous containment coverage (Monte Carlo)
// ---------------------------------------------------------------------------

struct CoverageReport {
  int runs = 0;
  int failures = 0;
  double failure_fraction = 0.0;
  double mean_final_gamma = 0.0;
};

struct CoverageOptions {
  int runs = 500;
  int iterations = 50;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
  // draws the action sequence; defaults to uniform sampling of the domain
  std::function<Eigen::VectorXd(Rng&)> action_sampler;
};

// Runs independent trajectories of random actions and checks that the true
// parameters stay inside the scaled confidence ellipsoid at every step.
inline CoverageReport verify_simultaneous_containment(const Problem& problem,
                                                      const GammaSchedule& schedule,
                                                      const CoverageOptions& options) {
  CoverageReport report;
  report.runs = options.runs;
  const Eigen::Index m = problem.model.output_dim();
  double gamma_acc = 0.0;

  for (int run = 0; run < options.runs; ++run) {
    Rng rng(options.seed, static_cast<std::uint64_t>(run));
    GaussianPosterior post =
        GaussianPosterior::prior(problem.model.param_dim(), schedule.sigma0);
    const NoiseModel noise = NoiseModel::isotropic(m, 1.0);
    bool failed = false;
    double gamma = 0.0;
    for (int n = 0; n <= options.iterations; ++n) {
      gamma = gamma_value(schedule, n, post);
      if (post.precision_norm(problem.truth.theta_star) > gamma) {
        failed = true;
        break;
      }
      if (n == options.iterations) break;
      const Eigen::VectorXd u = options.action_sampler
                                    ? options.action_sampler(rng)
                                    : problem.domain.sample(rng);
      Eigen::VectorXd y = problem.truth.f_star(u);
      if (options.noise_sigma > 0.0) {
        y += options.noise_sigma * rng.normal_vector(m);
      }
      post = update_posterior(post, problem.model, noise, u, y);
    }
    gamma_acc += gamma;
    if (failed) ++report.failures;
  }
  report.failure_fraction =
      static_cast<double>(report.failures) / std::max(1, report.runs);
  report.mean_final_gamma = gamma_acc / std::max(1, report.runs);
  return report;
}

// ---------------------------------------------------------------------------
// Pathwise regret bound verification
// ---------------------------------------------------------------------------

// Constants of the cumulative regret bound.
struct BoundContext {
  double theta_bar = 0.0;
  double sigma0 = 1.0;
  double a_bar = 0.0;
  double nu_v = 0.0;
  Eigen::Index param_dim = 0;
  Eigen::Index output_dim = 0;
  double lipschitz_Lz = 0.0;
  double r_bar = 1.0;  // max(1, max_u phi_*(u) - phi_*(u_*))

  double c1() const { return std::sqrt(8.0) * lipschitz_Lz * r_bar; }

  static BoundContext for_problem(const Problem& problem, double theta_bar,
                                  double sigma0) {
    BoundContext ctx;
    ctx.theta_bar = theta_bar;
    ctx.sigma0 = sigma0;
    ctx.a_bar = problem.model.frobenius_bound();
    ctx.param_dim = problem.model.param_dim();
    ctx.output_dim = problem.model.output_dim();
    ctx.nu_v = static_cast<double>(problem.model.output_dim());  // Sigma_v = I
    ctx.lipschitz_Lz = problem.loss.lipschitz_Lz;

    double worst = 0.0;
    if (problem.discrete_actions) {
      for (const auto& a : *problem.discrete_actions) {
        worst = std::max(worst, problem.truth.phi_star(a));
      }
    } else if (problem.domain.dim() == 1) {
      for (const double x : problem.domain.grid_1d(4097)) {
        worst = std::max(worst,
                         problem.truth.phi_star(Eigen::VectorXd::Constant(1, x)));
      }
    } else if (problem.plant && problem.quad_loss) {
      // interval bound of the convex quadratic over the box
      const QuadraticObjective q = compose_quadratic(*problem.plant, *problem.quad_loss);
      double bound = q.c;
      const Eigen::VectorXd half = 0.5 * (problem.domain.upper() - problem.domain.lower());
      const Eigen::VectorXd mid = problem.domain.center();
      bound += q.g.dot(mid) + q.g.cwiseAbs().dot(half);
      bound += 0.5 * (mid.dot(q.H * mid) +
                      2.0 * half.dot((q.H * mid).cwiseAbs()) +
                      half.dot(q.H.cwiseAbs() * half));
      worst = bound;
    } else {
      throw std::invalid_argument("cannot bound the worst-case regret for this problem");
    }
    ctx.r_bar = std::max(1.0, worst - problem.truth.phi_star_min);
    return ctx;
  }
};

struct RegretBoundReport {
  int prefixes_checked = 0;
  std::vector<int> violated_prefixes;        // cumulative bound R_N
  std::vector<int> violated_chain;           // Cauchy-Schwarz chain
  std::vector<int> violated_squared_bound;   // cumulative squared regret
  bool premise_gamma_monotone = true;
  bool premise_gamma_start = true;  // gamma_0 >= 1

  bool passed() const {
    return violated_prefixes.empty() && violated_chain.empty() &&
           violated_squared_bound.empty();
  }
};

// Checks, for every prefix N over which containment held, the cumulative
// regret bound R_N <= c1 * max(1, gamma_N) * sqrt(N d ln(1 + m N Abar^2
// sigma0^2 / d)) together with the Cauchy-Schwarz chain and the cumulative
// squared regret bound it rests on.
inline RegretBoundReport verify_regret_bound(const RegretTrace& trace,
                                             const BoundContext& ctx) {
  RegretBoundReport report;
  const int total = static_cast<int>(trace.rows.size());
  const double d = static_cast<double>(ctx.param_dim);
  const double m = static_cast<double>(ctx.output_dim);
  constexpr double kSlack = 1e-9;

  for (int i = 1; i < total; ++i) {
    if (trace.rows[static_cast<std::size_t>(i)].gamma <
        trace.rows[static_cast<std::size_t>(i - 1)].gamma - 1e-12) {
      report.premise_gamma_monotone = false;
    }
  }
  if (!trace.rows.empty() && !(trace.rows.front().gamma >= 1.0 - 1e-12)) {
    report.premise_gamma_start = false;
  }

  double sum_sq_regret = 0.0;
  double sum_sq_dist = 0.0;
  double sum_info_gain = 0.0;
  bool contained_so_far = true;

  for (int n = 1; n <= total; ++n) {
    const TraceRow& row = trace.rows[static_cast<std::size_t>(n - 1)];
    contained_so_far = contained_so_far && row.contained;
    sum_sq_regret += row.regret * row.regret;
    if (std::isfinite(row.dist_f_zsol)) sum_sq_dist += row.dist_f_zsol * row.dist_f_zsol;
    if (std::isfinite(row.info_gain)) sum_info_gain += row.info_gain;
    if (!contained_so_far) continue;

    ++report.prefixes_checked;
    const double gamma_n = n < total
                               ? trace.rows[static_cast<std::size_t>(n)].gamma
                               : trace.gamma_final;
    const double gamma_used = row.gamma;  // gamma_{N-1}
    const double cum = row.cum_regret;

    if (std::isfinite(gamma_n)) {
      const double gamma_tilde = std::max(1.0, gamma_n);
      const double rhs =
          ctx.c1() * gamma_tilde *
          std::sqrt(n * d *
                    std::log1p(m * n * ctx.a_bar * ctx.a_bar * ctx.sigma0 *
                               ctx.sigma0 / d));
      if (cum > rhs * (1.0 + kSlack) + kSlack) report.violated_prefixes.push_back(n);
    }

    // R_N <= sqrt(N sum r^2) <= L_z sqrt(N sum ||f_* - z_sol||^2)
    const double cs_mid = std::sqrt(n * sum_sq_regret);
    if (cum > cs_mid * (1.0 + kSlack) + kSlack) report.violated_chain.push_back(n);
    if (std::isfinite(row.dist_f_zsol)) {
      const double cs_rhs = ctx.lipschitz_Lz * std::sqrt(n * sum_sq_dist);
      if (cs_mid > cs_rhs * (1.0 + kSlack) + kSlack) {
        report.violated_chain.push_back(n);
      }
    }

    // cumulative squared regret against the information gain
    if (std::isfinite(row.info_gain) && std::isfinite(gamma_used)) {
      const double rhs_sq = 8.0 * gamma_used * gamma_used * ctx.lipschitz_Lz *
                            ctx.lipschitz_Lz * ctx.r_bar * ctx.r_bar * sum_info_gain;
      if (sum_sq_regret > rhs_sq * (1.0 + kSlack) + kSlack) {
        report.violated_squared_bound.push_back(n);
      }
    }
  }
  return report;
}

}  // namespace greybo

#endif  // GREYBO_HARNESS_REGRET_HPP
