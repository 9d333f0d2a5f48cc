#ifndef GREYBO_ACQUISITION_ACQUISITION_HPP
#define GREYBO_ACQUISITION_ACQUISITION_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "greybo/math/ball_descent.hpp"
#include "greybo/math/box_descent.hpp"
#include "greybo/math/rng.hpp"
#include "greybo/model/confidence.hpp"
#include "greybo/model/posterior.hpp"
#include "greybo/problem/loss.hpp"

namespace greybo {

struct SolverSettings {
  int starts = 16;            // multi-start count for the outer minimization
  int grid_points_1d = 512;   // grid-scan seeding for one-dimensional domains
  double inner_tol = 1e-9;    // projected gradient norm, inner ball problem
  int inner_max_iterations = 500;
  double outer_step_tol = 1e-7;
  int outer_max_iterations = 200;
  double fd_step = 1e-6;
  double tie_tol = 1e-9;
  int threads = 1;

  BoxDescentOptions outer_options() const {
    BoxDescentOptions o;
    o.step_tol = outer_step_tol;
    o.max_iterations = outer_max_iterations;
    o.fd_step = fd_step;
    return o;
  }
  BallDescentOptions inner_options() const {
    BallDescentOptions o;
    o.tol = inner_tol;
    o.max_iterations = inner_max_iterations;
    return o;
  }
};

// One acquisition instance Q(. ; gamma, I): the loss minimized over the
// model confidence set induced by the posterior. The inner problem is posed
// in parameter space via theta = mean + gamma * C w with ||w|| <= 1 and
// C C^T = covariance, which stays well posed when the output covariance
// A Sigma A^T is singular.
class AcquisitionProblem {
 public:
  AcquisitionProblem(LossFunction loss, LipModel model, GaussianPosterior posterior,
                     double gamma, BoxDomain domain)
      : loss_(std::move(loss)),
        model_(std::move(model)),
        posterior_(std::move(posterior)),
        gamma_(gamma),
        domain_(std::move(domain)),
        cov_factor_(posterior_.covariance_factor()) {
    if (gamma_ < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  }

  const LossFunction& loss() const { return loss_; }
  const LipModel& model() const { return model_; }
  const GaussianPosterior& posterior() const { return posterior_; }
  double gamma() const { return gamma_; }
  const BoxDomain& domain() const { return domain_; }
  const Eigen::MatrixXd& cov_factor() const { return cov_factor_; }

  Eigen::VectorXd mean_output(const Eigen::VectorXd& u) const {
    return model_.offset(u) + model_.features(u) * posterior_.mean();
  }

  double output_covariance_trace(const Eigen::VectorXd& u) const {
    return (model_.features(u) * cov_factor_).squaredNorm();
  }

 private:
  LossFunction loss_;
  LipModel model_;
  GaussianPosterior posterior_;
  double gamma_;
  BoxDomain domain_;
  Eigen::MatrixXd cov_factor_;
};

struct InnerResult {
  Eigen::VectorXd z;
  Eigen::VectorXd theta_tilde;
  Eigen::VectorXd w;  // ball coordinates of theta_tilde
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

// Minimize l(u, z) over the output confidence set at fixed u.
inline InnerResult inner_minimize(const AcquisitionProblem& problem,
                                  const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& warm_start = Eigen::VectorXd(),
                                  const BallDescentOptions& options = BallDescentOptions()) {
  const Eigen::Index d = problem.posterior().dim();
  const Eigen::MatrixXd a = problem.model().features(u);
  const Eigen::VectorXd center = problem.model().offset(u) + a * problem.posterior().mean();

  InnerResult result;
  if (problem.gamma() == 0.0) {
    result.z = center;
    result.theta_tilde = problem.posterior().mean();
    result.w = Eigen::VectorXd::Zero(d);
    result.value = problem.loss()(u, center);
    return result;
  }

  const Eigen::MatrixXd map = problem.gamma() * (a * problem.cov_factor());
  const auto objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
    const Eigen::VectorXd z = center + map * w;
    grad.noalias() = map.transpose() * problem.loss().grad_z(u, z);
    return problem.loss()(u, z);
  };

  Eigen::VectorXd w0 = warm_start.size() == d ? project_unit_ball(warm_start)
                                              : Eigen::VectorXd::Zero(d);
  BallDescentResult inner = minimize_on_unit_ball(objective, w0, options);

  // The mean output is always feasible (w = 0); a warm start on a nonconvex
  // loss must not report anything worse.
  if (w0.norm() > 0.0 && inner.value > problem.loss()(u, center)) {
    const BallDescentResult retry =
        minimize_on_unit_ball(objective, Eigen::VectorXd::Zero(d), options);
    if (retry.value < inner.value) inner = retry;
  }

  result.w = inner.w;
  result.theta_tilde =
      problem.posterior().mean() + problem.gamma() * (problem.cov_factor() * inner.w);
  result.z = center + map * inner.w;
  result.value = inner.value;
  result.converged = inner.converged;
  result.iterations = inner.iterations;
  return result;
}

// Closed-form acquisition for a loss that is linear in a scalar output,
// l(u, z) = l_u(u) + z: the minimum over the interval of half-width
// gamma * sqrt(sigma) around the mean.
inline double inner_minimize_linear_closed_form(double l_u, double mu, double sigma,
                                                double gamma) {
  if (sigma < 0.0) throw std::invalid_argument("output variance must be nonnegative");
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  return l_u + mu - gamma * std::sqrt(sigma);
}

inline double acquisition_value(const AcquisitionProblem& problem,
                                const Eigen::VectorXd& u) {
  if (!problem.domain().contains(u, 1e-9)) {
    throw std::domain_error("input outside the box domain");
  }
  return inner_minimize(problem, u).value;
}

struct SolveReport {
  Eigen::VectorXd u_opt;
  Eigen::VectorXd z_opt;
  Eigen::VectorXd theta_tilde_opt;
  double q_value = 0.0;
  int n_starts = 0;
  bool converged = false;
};

namespace detail {

struct Candidate {
  Eigen::VectorXd u;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

inline bool lexicographic_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Minimal value first; near-ties prefer the largest output-covariance trace
// (the candidate whose evaluation is most informative), then the
// lexicographically smallest input.
inline Candidate select_candidate(const AcquisitionProblem& problem,
                                  const std::vector<Candidate>& candidates,
                                  double tie_tol) {
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best_value = std::min(best_value, c.value);
  const double tol = tie_tol * std::max(1.0, std::abs(best_value));

  const Candidate* chosen = nullptr;
  double chosen_trace = 0.0;
  for (const auto& c : candidates) {
    if (!(c.value <= best_value + tol)) continue;
    const double trace = problem.output_covariance_trace(c.u);
    if (chosen == nullptr) {
      chosen = &c;
      chosen_trace = trace;
      continue;
    }
    const double trace_tol =
        tie_tol * std::max(1.0, std::max(std::abs(trace), std::abs(chosen_trace)));
    if (trace > chosen_trace + trace_tol) {
      chosen = &c;
      chosen_trace = trace;
    } else if (trace >= chosen_trace - trace_tol && lexicographic_less(c.u, chosen->u)) {
      chosen = &c;
      chosen_trace = std::max(chosen_trace, trace);
    }
  }
  return *chosen;
}

}  // namespace detail

// Outer minimization of the acquisition over the box: multi-start projected
// quasi-Newton on the value function u -> Q(u), with numerical gradients
// obtained by re-solving the inner problem at tight tolerance. For
// one-dimensional domains a dense grid scan seeds (and ties into) the
// candidate set; an explicit finite action set is minimized by enumeration.
inline SolveReport minimize_acquisition(
    const AcquisitionProblem& problem, const SolverSettings& settings,
    std::uint64_t seed,
    const std::vector<Eigen::VectorXd>* discrete_actions = nullptr,
    const std::vector<Eigen::VectorXd>& extra_starts = {}) {
  std::vector<detail::Candidate> candidates;

  const BallDescentOptions inner_options = settings.inner_options();

  if (discrete_actions != nullptr) {
    Eigen::VectorXd warm;
    for (const auto& u : *discrete_actions) {
      detail::Candidate c;
      c.u = u;
      const InnerResult inner = inner_minimize(problem, u, warm, inner_options);
      warm = inner.w;
      c.value = inner.value;
      c.converged = inner.converged;
      candidates.push_back(std::move(c));
    }
    const detail::Candidate chosen =
        detail::select_candidate(problem, candidates, settings.tie_tol);
    const InnerResult inner = inner_minimize(problem, chosen.u, {}, inner_options);
    SolveReport report;
    report.u_opt = chosen.u;
    report.z_opt = inner.z;
    report.theta_tilde_opt = inner.theta_tilde;
    report.q_value = inner.value;
    report.n_starts = static_cast<int>(candidates.size());
    report.converged = chosen.converged;
    return report;
  }

  Rng rng(seed);
  std::vector<Eigen::VectorXd> starts = latin_hypercube(
      problem.domain().lower(), problem.domain().upper(), settings.starts, rng);
  for (const auto& u : extra_starts) starts.push_back(problem.domain().clamp(u));

  if (problem.domain().dim() == 1 && settings.grid_points_1d > 1) {
    Eigen::VectorXd warm;
    detail::Candidate best_grid;
    for (const double x : problem.domain().grid_1d(settings.grid_points_1d)) {
      const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, x);
      const InnerResult inner = inner_minimize(problem, u, warm, inner_options);
      warm = inner.w;
      detail::Candidate c;
      c.u = u;
      c.value = inner.value;
      c.converged = inner.converged;
      candidates.push_back(c);
      if (c.value < best_grid.value) best_grid = c;
    }
    starts.push_back(best_grid.u);
  }

  // Each start runs an independent projected BFGS trajectory with its own
  // inner warm start; results are merged by start index. The gradient of the
  // value function is taken through the inner solution: re-solve at u, then
  // finite differences of the composite with the solution parameters frozen
  // (first-order exact for the envelope).
  std::vector<detail::Candidate> local(starts.size());
  const auto run_start = [&](std::size_t i) {
    Eigen::VectorXd warm;
    const auto q_of_u = [&](const Eigen::VectorXd& u) {
      const InnerResult inner = inner_minimize(problem, u, warm, inner_options);
      warm = inner.w;
      return inner.value;
    };
    const auto q_gradient = [&](const Eigen::VectorXd& u) {
      const InnerResult inner = inner_minimize(problem, u, warm, inner_options);
      warm = inner.w;
      const Eigen::VectorXd theta = inner.theta_tilde;
      const auto frozen = [&](const Eigen::VectorXd& uu) {
        return problem.loss()(uu, problem.model().offset(uu) +
                                      problem.model().features(uu) * theta);
      };
      return numerical_gradient(frozen, u, settings.fd_step);
    };
    const BoxDescentResult r =
        minimize_in_box(q_of_u, problem.domain(), starts[i], settings.outer_options(),
                        q_gradient);
    local[i].u = r.u;
    local[i].value = r.value;
    local[i].converged = r.converged;
  };
  if (settings.threads > 1 && starts.size() > 1) {
    const int workers = std::min<int>(settings.threads, static_cast<int>(starts.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = static_cast<std::size_t>(w); i < starts.size();
             i += static_cast<std::size_t>(workers)) {
          run_start(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i) run_start(i);
  }
  candidates.insert(candidates.end(), local.begin(), local.end());

  const detail::Candidate chosen =
      detail::select_candidate(problem, candidates, settings.tie_tol);
  const InnerResult inner = inner_minimize(problem, chosen.u, {}, inner_options);
  SolveReport report;
  report.u_opt = chosen.u;
  report.z_opt = inner.z;
  report.theta_tilde_opt = inner.theta_tilde;
  report.q_value = inner.value;
  report.n_starts = static_cast<int>(starts.size());
  bool any_converged = false;
  for (const auto& c : local) any_converged = any_converged || c.converged;
  report.converged = local.empty() ? chosen.converged : any_converged;
  return report;
}

}  // namespace greybo

#endif  // GREYBO_ACQUISITION_ACQUISITION_HPP
