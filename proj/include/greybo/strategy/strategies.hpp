#ifndef GREYBO_STRATEGY_STRATEGIES_HPP
#define GREYBO_STRATEGY_STRATEGIES_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "greybo/acquisition/acquisition.hpp"
#include "greybo/math/box_qp.hpp"
#include "greybo/model/confidence.hpp"
#include "greybo/model/posterior.hpp"
#include "greybo/problem/problems.hpp"

namespace greybo {

// Append-only observation record (u_n, y_n), the sequence I_n.
class History {
 public:
  void append(Eigen::VectorXd u, Eigen::VectorXd y) {
    records_.emplace_back(std::move(u), std::move(y));
  }
  int size() const { return static_cast<int>(records_.size()); }
  bool empty() const { return records_.empty(); }
  const std::pair<Eigen::VectorXd, Eigen::VectorXd>& operator[](int i) const {
    return records_[static_cast<std::size_t>(i)];
  }
  const std::pair<Eigen::VectorXd, Eigen::VectorXd>& back() const {
    return records_.back();
  }

 private:
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> records_;
};

struct Proposal {
  Eigen::VectorXd u;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd z_predicted;  // the strategy's output prediction at u
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool solver_converged = true;
};

// One iterative method: propose the next input from the internal state, then
// absorb the observation. propose() is const and deterministic given the
// state and the seed stream; observe() returns control of a new state.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string kind() const = 0;
  virtual Proposal propose() const = 0;
  virtual void observe(const Eigen::VectorXd& u, const Eigen::VectorXd& y) = 0;
  // Agnostic methods consume the scalar cost instead of the output vector.
  virtual bool observes_cost() const { return false; }
  virtual const GaussianPosterior* parameter_posterior() const { return nullptr; }
  // True parameters in the strategy's own parametrization, when the problem
  // provides them (theta for structured methods, theta_phi for agnostic).
  virtual std::optional<Eigen::VectorXd> true_parameters() const { return std::nullopt; }
  // Confidence scaling the strategy would use right now, for LCB methods.
  virtual std::optional<double> current_gamma() const { return std::nullopt; }
  virtual const History& history() const { return history_; }

 protected:
  History history_;
};

namespace detail {

struct ObjectiveCandidate {
  Eigen::VectorXd u;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Shared outer minimization for plain (non-acquisition) objectives:
// multi-start projected quasi-Newton with grid seeding in one dimension and
// exact enumeration over discrete action sets. Near-ties are resolved toward
// the largest exploration score, then the lexicographically smallest input.
inline ObjectiveCandidate minimize_objective(
    const std::function<double(const Eigen::VectorXd&)>& f, const BoxDomain& domain,
    const SolverSettings& settings, std::uint64_t seed,
    const std::vector<Eigen::VectorXd>* discrete_actions,
    const std::vector<Eigen::VectorXd>& extra_starts,
    const std::function<double(const Eigen::VectorXd&)>& exploration_score) {
  std::vector<ObjectiveCandidate> candidates;

  if (discrete_actions != nullptr) {
    for (const auto& u : *discrete_actions) {
      candidates.push_back({u, f(u), true});
    }
  } else {
    Rng rng(seed);
    std::vector<Eigen::VectorXd> starts =
        latin_hypercube(domain.lower(), domain.upper(), settings.starts, rng);
    for (const auto& u : extra_starts) starts.push_back(domain.clamp(u));
    if (domain.dim() == 1 && settings.grid_points_1d > 1) {
      ObjectiveCandidate best_grid;
      for (const double x : domain.grid_1d(settings.grid_points_1d)) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, x);
        const double v = f(u);
        candidates.push_back({u, v, true});
        if (v < best_grid.value) best_grid = {u, v, true};
      }
      starts.push_back(best_grid.u);
    }

    std::vector<ObjectiveCandidate> local(starts.size());
    const auto run_start = [&](std::size_t i) {
      const BoxDescentResult r =
          minimize_in_box(f, domain, starts[i], settings.outer_options());
      local[i] = {r.u, r.value, r.converged};
    };
    if (settings.threads > 1 && starts.size() > 1) {
      const int workers =
          std::min<int>(settings.threads, static_cast<int>(starts.size()));
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
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, c.value);
  const double tol = settings.tie_tol * std::max(1.0, std::abs(best));
  const ObjectiveCandidate* chosen = nullptr;
  double chosen_score = 0.0;
  for (const auto& c : candidates) {
    if (!(c.value <= best + tol)) continue;
    const double score = exploration_score ? exploration_score(c.u) : 0.0;
    if (chosen == nullptr) {
      chosen = &c;
      chosen_score = score;
      continue;
    }
    const double score_tol = settings.tie_tol *
                             std::max(1.0, std::max(std::abs(score),
                                                    std::abs(chosen_score)));
    if (score > chosen_score + score_tol) {
      chosen = &c;
      chosen_score = score;
    } else if (score >= chosen_score - score_tol &&
               lexicographic_less(c.u, chosen->u)) {
      chosen = &c;
      chosen_score = std::max(chosen_score, score);
    }
  }
  return *chosen;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Structure-exploiting lower confidence bound
// ---------------------------------------------------------------------------

class LcbStructuredStrategy : public Strategy {
 public:
  LcbStructuredStrategy(Problem problem, GammaSchedule schedule, double sigma_v,
                        SolverSettings settings, std::uint64_t seed,
                        double prior_sigma0 = 1.0)
      : problem_(std::move(problem)),
        schedule_(schedule),
        noise_(NoiseModel::isotropic(problem_.model.output_dim(), sigma_v)),
        settings_(settings),
        seed_(seed),
        posterior_(GaussianPosterior::prior(problem_.model.param_dim(), prior_sigma0)) {}

  std::string kind() const override { return "lcb_structured"; }

  // Verification mode: inflate gamma so the true parameters are always
  // contained, which makes the optimism arguments deterministic.
  void force_containment(bool on) { force_containment_ = on; }

  Proposal propose() const override {
    const double gamma = effective_gamma();
    const AcquisitionProblem acq(problem_.loss, problem_.model, posterior_, gamma,
                                 problem_.domain);
    std::vector<Eigen::VectorXd> extra;
    if (!history_.empty()) extra.push_back(history_.back().first);
    const std::vector<Eigen::VectorXd>* discrete =
        problem_.discrete_actions ? &*problem_.discrete_actions : nullptr;
    const SolveReport report = minimize_acquisition(
        acq, settings_, mix_seed(seed_, static_cast<std::uint64_t>(history_.size())),
        discrete, extra);
    Proposal p;
    p.u = report.u_opt;
    p.objective_value = report.q_value;
    p.z_predicted = report.z_opt;
    p.gamma = gamma;
    p.solver_converged = report.converged;
    return p;
  }

  void observe(const Eigen::VectorXd& u, const Eigen::VectorXd& y) override {
    posterior_ = update_posterior(posterior_, problem_.model, noise_, u, y);
    history_.append(u, y);
  }

  const GaussianPosterior* parameter_posterior() const override { return &posterior_; }
  std::optional<Eigen::VectorXd> true_parameters() const override {
    return problem_.truth.theta_star;
  }
  std::optional<double> current_gamma() const override { return effective_gamma(); }
  const Problem& problem() const { return problem_; }

 private:
  double effective_gamma() const {
    double gamma = gamma_value(schedule_, history_.size(), posterior_);
    if (force_containment_) {
      gamma = std::max(gamma,
                       posterior_.precision_norm(problem_.truth.theta_star) *
                           (1.0 + 1e-9));
    }
    return gamma;
  }

  Problem problem_;
  GammaSchedule schedule_;
  NoiseModel noise_;
  SolverSettings settings_;
  std::uint64_t seed_;
  GaussianPosterior posterior_;
  bool force_containment_ = false;
};

// ---------------------------------------------------------------------------
// Structure-agnostic lower confidence bound (linear-bandit acquisition on the
// scalar surrogate objective)
// ---------------------------------------------------------------------------

class LcbAgnosticStrategy : public Strategy {
 public:
  LcbAgnosticStrategy(Problem problem, GammaSchedule schedule, double sigma_v,
                      SolverSettings settings, std::uint64_t seed,
                      double prior_sigma0 = 1.0)
      : problem_(std::move(problem)),
        schedule_(schedule),
        sigma_v_(sigma_v),
        settings_(settings),
        seed_(seed),
        posterior_(GaussianPosterior::prior(problem_.surrogate.param_dim, prior_sigma0)) {
    if (!problem_.surrogate.features) {
      throw std::invalid_argument("problem provides no surrogate feature map");
    }
  }

  std::string kind() const override { return "lcb_agnostic"; }
  bool observes_cost() const override { return true; }

  Proposal propose() const override {
    const double gamma = gamma_value(schedule_, history_.size(), posterior_);
    const Eigen::MatrixXd cov = posterior_.covariance();
    const Eigen::VectorXd mean = posterior_.mean();
    const auto& surrogate = problem_.surrogate;
    const auto acquisition = [&](const Eigen::VectorXd& u) {
      const Eigen::VectorXd psi = surrogate.features(u);
      const double mu = psi.dot(mean);
      const double var = std::max(0.0, psi.dot(cov * psi));
      return surrogate.nominal(u) + mu - gamma * std::sqrt(var);
    };
    const auto variance = [&](const Eigen::VectorXd& u) {
      const Eigen::VectorXd psi = surrogate.features(u);
      return psi.dot(cov * psi);
    };
    std::vector<Eigen::VectorXd> extra;
    if (!history_.empty()) extra.push_back(history_.back().first);
    const std::vector<Eigen::VectorXd>* discrete =
        problem_.discrete_actions ? &*problem_.discrete_actions : nullptr;
    const detail::ObjectiveCandidate c = detail::minimize_objective(
        acquisition, problem_.domain, settings_,
        mix_seed(seed_, static_cast<std::uint64_t>(history_.size())), discrete, extra,
        variance);
    Proposal p;
    p.u = c.u;
    p.objective_value = c.value;
    p.gamma = gamma;
    p.solver_converged = c.converged;
    return p;
  }

  void observe(const Eigen::VectorXd& u, const Eigen::VectorXd& cost) override {
    if (cost.size() != 1) {
      throw std::invalid_argument("agnostic strategies observe a scalar cost");
    }
    const Eigen::MatrixXd a = problem_.surrogate.features(u).transpose();
    const Eigen::VectorXd residual =
        Eigen::VectorXd::Constant(1, cost[0] - problem_.surrogate.nominal(u));
    posterior_ = update_posterior_with(posterior_, a,
                                       NoiseModel::isotropic(1, sigma_v_), residual);
    history_.append(u, cost);
  }

  const GaussianPosterior* parameter_posterior() const override { return &posterior_; }
  std::optional<Eigen::VectorXd> true_parameters() const override {
    if (problem_.surrogate.theta_phi_star) return *problem_.surrogate.theta_phi_star;
    return std::nullopt;
  }
  std::optional<double> current_gamma() const override {
    return gamma_value(schedule_, history_.size(), posterior_);
  }

 private:
  Problem problem_;
  GammaSchedule schedule_;
  double sigma_v_;
  SolverSettings settings_;
  std::uint64_t seed_;
  GaussianPosterior posterior_;
};

// ---------------------------------------------------------------------------
// Thompson sampling, structured and structure-agnostic
// ---------------------------------------------------------------------------

class TsStructuredStrategy : public Strategy {
 public:
  TsStructuredStrategy(Problem problem, double sigma_v, SolverSettings settings,
                       std::uint64_t seed, double prior_sigma0 = 1.0)
      : problem_(std::move(problem)),
        noise_(NoiseModel::isotropic(problem_.model.output_dim(), sigma_v)),
        settings_(settings),
        seed_(seed),
        posterior_(GaussianPosterior::prior(problem_.model.param_dim(), prior_sigma0)) {}

  std::string kind() const override { return "ts_structured"; }

  Proposal propose() const override {
    const std::uint64_t stream =
        mix_seed(seed_, static_cast<std::uint64_t>(history_.size()));
    const Eigen::VectorXd theta = sample_parameters(posterior_, stream);
    const auto objective = [&](const Eigen::VectorXd& u) {
      return problem_.loss(u, problem_.model.predict(u, theta));
    };
    std::vector<Eigen::VectorXd> extra;
    if (!history_.empty()) extra.push_back(history_.back().first);
    const std::vector<Eigen::VectorXd>* discrete =
        problem_.discrete_actions ? &*problem_.discrete_actions : nullptr;
    const detail::ObjectiveCandidate c = detail::minimize_objective(
        objective, problem_.domain, settings_, mix_seed(stream, 1), discrete, extra,
        nullptr);
    Proposal p;
    p.u = c.u;
    p.objective_value = c.value;
    p.z_predicted = problem_.model.predict(c.u, theta);
    p.solver_converged = c.converged;
    return p;
  }

  void observe(const Eigen::VectorXd& u, const Eigen::VectorXd& y) override {
    posterior_ = update_posterior(posterior_, problem_.model, noise_, u, y);
    history_.append(u, y);
  }

  const GaussianPosterior* parameter_posterior() const override { return &posterior_; }
  std::optional<Eigen::VectorXd> true_parameters() const override {
    return problem_.truth.theta_star;
  }

 private:
  Problem problem_;
  NoiseModel noise_;
  SolverSettings settings_;
  std::uint64_t seed_;
  GaussianPosterior posterior_;
};

class TsAgnosticStrategy : public Strategy {
 public:
  TsAgnosticStrategy(Problem problem, double sigma_v, SolverSettings settings,
                     std::uint64_t seed, double prior_sigma0 = 1.0)
      : problem_(std::move(problem)),
        sigma_v_(sigma_v),
        settings_(settings),
        seed_(seed),
        posterior_(GaussianPosterior::prior(problem_.surrogate.param_dim, prior_sigma0)) {
    if (!problem_.surrogate.features) {
      throw std::invalid_argument("problem provides no surrogate feature map");
    }
  }

  std::string kind() const override { return "ts_agnostic"; }
  bool observes_cost() const override { return true; }

  Proposal propose() const override {
    const std::uint64_t stream =
        mix_seed(seed_, static_cast<std::uint64_t>(history_.size()));
    const Eigen::VectorXd theta = sample_parameters(posterior_, stream);
    const auto& surrogate = problem_.surrogate;
    const auto objective = [&](const Eigen::VectorXd& u) {
      return surrogate.nominal(u) + surrogate.features(u).dot(theta);
    };
    std::vector<Eigen::VectorXd> extra;
    if (!history_.empty()) extra.push_back(history_.back().first);
    const std::vector<Eigen::VectorXd>* discrete =
        problem_.discrete_actions ? &*problem_.discrete_actions : nullptr;
    const detail::ObjectiveCandidate c = detail::minimize_objective(
        objective, problem_.domain, settings_, mix_seed(stream, 1), discrete, extra,
        nullptr);
    Proposal p;
    p.u = c.u;
    p.objective_value = c.value;
    p.solver_converged = c.converged;
    return p;
  }

  void observe(const Eigen::VectorXd& u, const Eigen::VectorXd& cost) override {
    if (cost.size() != 1) {
      throw std::invalid_argument("agnostic strategies observe a scalar cost");
    }
    const Eigen::MatrixXd a = problem_.surrogate.features(u).transpose();
    const Eigen::VectorXd residual =
        Eigen::VectorXd::Constant(1, cost[0] - problem_.surrogate.nominal(u));
    posterior_ = update_posterior_with(posterior_, a,
                                       NoiseModel::isotropic(1, sigma_v_), residual);
    history_.append(u, cost);
  }

  const GaussianPosterior* parameter_posterior() const override { return &posterior_; }
  std::optional<Eigen::VectorXd> true_parameters() const override {
    if (problem_.surrogate.theta_phi_star) return *problem_.surrogate.theta_phi_star;
    return std::nullopt;
  }

 private:
  Problem problem_;
  double sigma_v_;
  SolverSettings settings_;
  std::uint64_t seed_;
  GaussianPosterior posterior_;
};

// ---------------------------------------------------------------------------
// Zero-order iterative learning control
// ---------------------------------------------------------------------------

// Deterministic baseline: minimize the nominal model plus a damped additive
// correction c learned from the observed model-plant mismatch,
// c_n = (1 - alpha) c_{n-1} + alpha (y_n - B u_n - b).
class ZooIlcStrategy : public Strategy {
 public:
  ZooIlcStrategy(Problem problem, double alpha)
      : problem_(std::move(problem)), alpha_(alpha) {
    if (!problem_.nominal || !problem_.quad_loss) {
      throw std::invalid_argument(
          "zero-order learning control needs affine nominal dynamics and a "
          "quadratic loss");
    }
    if (!(alpha_ > 0.0 && alpha_ <= 1.0)) {
      throw std::invalid_argument("damping factor must lie in (0, 1]");
    }
    correction_ = Eigen::VectorXd::Zero(problem_.nominal->output_dim());
  }

  std::string kind() const override { return "zoo_ilc"; }

  Proposal propose() const override {
    AffineModel corrected = *problem_.nominal;
    corrected.b += correction_;
    const QuadraticObjective q = compose_quadratic(corrected, *problem_.quad_loss);
    const BoxQpResult r = solve_box_qp(q.H, q.g, q.c, problem_.domain.lower(),
                                       problem_.domain.upper());
    Proposal p;
    p.u = r.u;
    p.objective_value = r.value;
    p.z_predicted = corrected.predict(r.u);
    p.solver_converged = r.converged;
    return p;
  }

  void observe(const Eigen::VectorXd& u, const Eigen::VectorXd& y) override {
    const Eigen::VectorXd error = y - problem_.nominal->predict(u);
    correction_ = (1.0 - alpha_) * correction_ + alpha_ * error;
    history_.append(u, y);
  }

  const Eigen::VectorXd& correction() const { return correction_; }
  double alpha() const { return alpha_; }

 private:
  Problem problem_;
  double alpha_;
  Eigen::VectorXd correction_;
};

}  // namespace greybo

#endif  // GREYBO_STRATEGY_STRATEGIES_HPP
