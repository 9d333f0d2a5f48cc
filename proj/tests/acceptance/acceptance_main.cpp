// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line with the measured quantities.
#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "greybo/acquisition/acquisition.hpp"
#include "greybo/cli/config.hpp"
#include "greybo/cli/runner.hpp"
#include "greybo/harness/regret.hpp"
#include "greybo/harness/trace_io.hpp"
#include "greybo/harness/verify_suites.hpp"
#include "greybo/problem/problems.hpp"
#include "greybo/strategy/strategies.hpp"

#ifndef GREYBO_CONFIG_DIR
#define GREYBO_CONFIG_DIR "configs"
#endif

using namespace greybo;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int criterion, const std::string& name, bool passed,
            const std::string& details) {
  std::printf("[criterion %d] %s: %s (%s)\n", criterion, name.c_str(),
              passed ? "PASS" : "FAIL", details.c_str());
  std::fflush(stdout);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_bundled(const std::string& name) {
  return load_experiment_config(std::string(GREYBO_CONFIG_DIR) + "/" + name);
}

}  // namespace

TEST_CASE("criterion 1: example reproduction") {
  const Stopwatch timer;
  const Problem p = example1_problem();
  SolverSettings settings;
  settings.starts = 8;
  LcbStructuredStrategy strategy(p, GammaSchedule::log_heuristic(), 1e-6, settings, 1);

  for (const double x : {-1.0, 1.0}) {
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, x);
    strategy.observe(u, p.truth.f_star(u));
  }
  const double posterior_err =
      (strategy.parameter_posterior()->mean() - p.truth.theta_star)
          .cwiseAbs()
          .maxCoeff();
  const Proposal third = strategy.propose();
  const double u_err = std::abs(third.u[0] - p.truth.u_star[0]);
  const double elapsed = timer.seconds();

  const bool passed = posterior_err < 1e-4 && u_err < 1e-3 && elapsed < 1.0;
  char details[160];
  std::snprintf(details, sizeof(details),
                "posterior err %.2e, |u3 - u*| %.2e, %.2f s", posterior_err, u_err,
                elapsed);
  report(1, "example reproduction", passed, details);
  CHECK(posterior_err < 1e-4);
  CHECK(u_err < 1e-3);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: benchmark method ordering") {
  const Stopwatch timer;
  ExperimentConfig cfg = load_bundled("ilc.cfg");
  cfg.out_dir = "acceptance_ilc_out";
  const ExperimentArtifacts artifacts = execute_experiment(cfg);
  REQUIRE(artifacts.all_ok);

  const double threshold = 1e-4 * artifacts.problem.truth.phi_star_min;

  // (a) the zero-order baseline plateaus at a strictly positive level
  double zoo_first = 0.0, zoo_final = 0.0;
  bool zoo_plateau = true;
  // (b) worst final regret of each Bayesian optimization method
  std::map<std::string, double> worst_final;
  std::map<std::string, std::vector<double>> cum_by_label;
  for (const RunRecord& record : artifacts.runs) {
    const RegretTrace& trace = record.trace;
    if (record.config.kind == "zoo_ilc") {
      zoo_first = trace.rows.front().regret;
      zoo_final = trace.rows.back().regret;
      for (std::size_t i = 19; i < trace.rows.size(); ++i) {
        if (std::abs(trace.rows[i].regret - zoo_final) > 0.05 * zoo_final) {
          zoo_plateau = false;
        }
      }
    } else {
      double& worst = worst_final[record.config.kind];
      worst = std::max(worst, trace.rows.back().regret);
    }
    cum_by_label[record.config.kind].push_back(trace.final_cum_regret());
  }
  const bool zoo_ok = zoo_plateau && zoo_final > 1e-3 * zoo_first && zoo_final > 0.0;

  bool bo_ok = worst_final.size() == 4;
  for (const auto& [kind, worst] : worst_final) bo_ok = bo_ok && worst < threshold;

  const auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double structured_worst =
      std::max(median_of(cum_by_label["lcb_structured"]),
               median_of(cum_by_label["ts_structured"]));
  const double agnostic_best = std::min(median_of(cum_by_label["lcb_agnostic"]),
                                        median_of(cum_by_label["ts_agnostic"]));
  const bool ordering_ok = structured_worst < agnostic_best;

  // full-precision read-back of a 150-row trace
  bool readback_ok = true;
  for (const RunRecord& record : artifacts.runs) {
    if (record.config.kind != "lcb_structured") continue;
    const RegretTrace back = import_trace(
        (std::filesystem::path(cfg.out_dir) / record.trace_file).string());
    readback_ok = back.rows.size() == record.trace.rows.size();
    for (std::size_t i = 0; readback_ok && i < back.rows.size(); ++i) {
      readback_ok = back.rows[i].cum_regret == record.trace.rows[i].cum_regret &&
                    (back.rows[i].u - record.trace.rows[i].u).norm() == 0.0 &&
                    (back.rows[i].y - record.trace.rows[i].y).norm() == 0.0 &&
                    back.rows[i].gamma == record.trace.rows[i].gamma;
    }
  }

  const double elapsed = timer.seconds();
  const bool passed = zoo_ok && bo_ok && ordering_ok && readback_ok && elapsed < 600.0;
  char details[240];
  std::snprintf(details, sizeof(details),
                "zoo plateau %.3g (first %.3g), worst BO final %.2e vs %.2e, "
                "structured cum %.4g < agnostic cum %.4g, %.0f s",
                zoo_final, zoo_first,
                std::max({worst_final["lcb_structured"], worst_final["lcb_agnostic"],
                          worst_final["ts_structured"], worst_final["ts_agnostic"]}),
                threshold, structured_worst, agnostic_best, elapsed);
  report(2, "benchmark method ordering", passed, details);
  CHECK(zoo_ok);
  CHECK(bo_ok);
  CHECK(ordering_ok);
  CHECK(readback_ok);
  CHECK(elapsed < 600.0);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("criterion 3: determinant and width identities") {
  const Stopwatch timer;
  LemmaSuiteOptions options;
  options.update_count = 1000;
  options.trajectory_count = 20;
  options.seed = 7;
  const SuiteReport suite = verify_lemma_suite(options);
  const double elapsed = timer.seconds();

  std::string summary;
  for (const auto& check : suite.checks) {
    summary += check.name + (check.passed ? " ok; " : " FAILED; ");
  }
  char details[240];
  std::snprintf(details, sizeof(details), "%s%.2f s", summary.c_str(), elapsed);
  const bool passed = suite.passed() && elapsed < 30.0;
  report(3, "determinant and width identities", passed, details);
  for (const auto& check : suite.checks) {
    INFO(check.name << ": " << check.details);
    CHECK(check.passed);
  }
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 4: simultaneous confidence coverage") {
  const Stopwatch timer;
  CoverageSuiteOptions options;
  options.delta = 0.1;
  options.runs = 500;
  options.iterations = 50;
  options.dim = 2;
  options.seed = 11;
  const SuiteReport suite = verify_coverage_suite(options);
  const double elapsed = timer.seconds();

  const bool passed = suite.passed() && elapsed < 120.0;
  char details[240];
  std::snprintf(details, sizeof(details), "%s, %.2f s",
                suite.checks.front().details.c_str(), elapsed);
  report(4, "simultaneous confidence coverage", passed, details);
  CHECK(suite.passed());
  CHECK(elapsed < 120.0);
}

TEST_CASE("criterion 5: pathwise regret bound") {
  const Stopwatch timer;
  RegretBoundSuiteOptions options;
  options.instances = 50;
  options.iterations = 200;
  options.seed = 13;
  const SuiteReport suite = verify_regret_bound_suite(options);
  const double elapsed = timer.seconds();

  char details[240];
  std::snprintf(details, sizeof(details), "%s, %.2f s",
                suite.checks.front().details.c_str(), elapsed);
  report(5, "pathwise regret bound", suite.passed(), details);
  for (const auto& check : suite.checks) {
    INFO(check.name << ": " << check.details);
    CHECK(check.passed);
  }
}

TEST_CASE("criterion 6: solver cross-checks") {
  const Stopwatch timer;
  Rng rng(17);

  // closed form against the numerical inner solver on 1000 random instances
  LossFunction linear_loss;
  linear_loss.eval = [](const Eigen::VectorXd&, const Eigen::VectorXd& z) {
    return z[0];
  };
  linear_loss.grad_z = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1).eval();
  };
  linear_loss.convex_in_z = true;
  linear_loss.lipschitz_Lz = 1.0;

  double worst_closed_form = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index d = 2 + rng.uniform_int(0, 2);
    LipModel model(d, 1, [](const Eigen::VectorXd& u) {
      Eigen::MatrixXd a(1, u.size());
      a.row(0) = u.transpose();
      return a;
    });
    GaussianPosterior post = GaussianPosterior::prior(d, 0.5 + rng.uniform());
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd u = rng.normal_vector(d);
      post = update_posterior(post, model, NoiseModel::isotropic(1, 1.0), u,
                              Eigen::VectorXd::Constant(1, rng.normal()));
    }
    const double gamma = 2.0 * rng.uniform();
    const AcquisitionProblem prob(linear_loss, model, post, gamma,
                                  BoxDomain::cube(d, -1.0, 1.0));
    const Eigen::VectorXd u = prob.domain().sample(rng);
    const Eigen::MatrixXd a = prob.model().features(u);
    const double mu = (a * post.mean())(0);
    const double sigma = (a * post.covariance() * a.transpose())(0, 0);
    const double closed = inner_minimize_linear_closed_form(0.0, mu, sigma, gamma);
    const double numeric = inner_minimize(prob, u).value;
    worst_closed_form =
        std::max(worst_closed_form,
                 std::abs(numeric - closed) / std::max(1.0, std::abs(closed)));
  }

  // gradient conditions at inner solutions against finite differences
  const Problem p = example1_problem();
  GaussianPosterior post = GaussianPosterior::prior(4, 1.0);
  const Eigen::VectorXd u1 = Eigen::VectorXd::Constant(1, 0.4);
  post = update_posterior(post, p.model, NoiseModel::isotropic(2, 1.0), u1,
                          p.truth.f_star(u1) + rng.normal_vector(2));
  double worst_gradient = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double gamma = 0.3 + 2.0 * rng.uniform();
    const AcquisitionProblem prob(p.loss, p.model, post, gamma, p.domain);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, rng.uniform(-1.0, 1.0));
    const InnerResult r = inner_minimize(prob, u);
    const Eigen::MatrixXd map = gamma * (p.model.features(u) * prob.cov_factor());
    const Eigen::VectorXd center = prob.mean_output(u);
    const Eigen::VectorXd analytic = map.transpose() * p.loss.grad_z(u, r.z);
    Eigen::VectorXd fd(r.w.size());
    Eigen::VectorXd probe = r.w;
    for (Eigen::Index i = 0; i < r.w.size(); ++i) {
      const double h = 1e-7;
      probe[i] = r.w[i] + h;
      const double fp = p.loss(u, center + map * probe);
      probe[i] = r.w[i] - h;
      const double fm = p.loss(u, center + map * probe);
      probe[i] = r.w[i];
      fd[i] = (fp - fm) / (2.0 * h);
    }
    const double fd_err = (fd - analytic).norm() / std::max(1.0, analytic.norm());
    const double stationarity =
        (project_unit_ball(r.w - fd) - r.w).norm() / std::max(1.0, fd.norm());
    worst_gradient = std::max(worst_gradient, std::max(fd_err, stationarity));
  }

  const double elapsed = timer.seconds();
  const bool passed = worst_closed_form <= 1e-8 && worst_gradient <= 1e-5;
  char details[200];
  std::snprintf(details, sizeof(details),
                "closed form err %.2e (tol 1e-8), gradient checks %.2e (tol 1e-5), "
                "%.2f s",
                worst_closed_form, worst_gradient, elapsed);
  report(6, "solver cross-checks", passed, details);
  CHECK(worst_closed_form <= 1e-8);
  CHECK(worst_gradient <= 1e-5);
}

TEST_CASE("criterion 7: deterministic runs") {
  const Stopwatch timer;
  bool identical = true;
  std::string detail_note;

  // the bundled example configuration, run twice
  {
    ExperimentConfig cfg = load_bundled("example1.cfg");
    cfg.out_dir = "acceptance_det_a";
    ExperimentConfig cfg2 = cfg;
    cfg2.out_dir = "acceptance_det_b";
    const ExperimentArtifacts a = execute_experiment(cfg);
    const ExperimentArtifacts b = execute_experiment(cfg2);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
      const std::string fa =
          read_file(std::filesystem::path(cfg.out_dir) / a.runs[i].trace_file);
      const std::string fb =
          read_file(std::filesystem::path(cfg2.out_dir) / b.runs[i].trace_file);
      identical = identical && !fa.empty() && fa == fb;
    }
    std::filesystem::remove_all(cfg.out_dir);
    std::filesystem::remove_all(cfg2.out_dir);
  }

  // a threaded multi-repetition configuration on the control problem
  {
    ExperimentConfig cfg;
    cfg.problem = "oscillator_ilc";
    cfg.iterations = 8;
    cfg.seed = 3;
    cfg.jobs = 2;
    cfg.out_dir = "acceptance_det_c";
    StrategyConfig lcb;
    lcb.kind = "lcb_structured";
    lcb.sigma_v = 1e-4;
    lcb.starts = 4;
    lcb.threads = 2;
    cfg.strategies.push_back(lcb);
    StrategyConfig ts;
    ts.kind = "ts_structured";
    ts.sigma_v = 1e-4;
    ts.starts = 2;
    ts.reps = 3;
    cfg.strategies.push_back(ts);

    ExperimentConfig cfg2 = cfg;
    cfg2.out_dir = "acceptance_det_d";
    const ExperimentArtifacts a = execute_experiment(cfg);
    const ExperimentArtifacts b = execute_experiment(cfg2);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
      const std::string fa =
          read_file(std::filesystem::path(cfg.out_dir) / a.runs[i].trace_file);
      const std::string fb =
          read_file(std::filesystem::path(cfg2.out_dir) / b.runs[i].trace_file);
      identical = identical && !fa.empty() && fa == fb;
    }
    std::filesystem::remove_all(cfg.out_dir);
    std::filesystem::remove_all(cfg2.out_dir);
  }

  const double elapsed = timer.seconds();
  char details[120];
  std::snprintf(details, sizeof(details), "byte-identical traces, %.1f s", elapsed);
  report(7, "deterministic runs", identical, details);
  CHECK(identical);
}
