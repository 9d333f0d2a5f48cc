#ifndef GREYBO_CLI_STRATEGY_FACTORY_HPP
#define GREYBO_CLI_STRATEGY_FACTORY_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "greybo/cli/config.hpp"
#include "greybo/strategy/strategies.hpp"

namespace greybo {

inline bool is_thompson_kind(const std::string& kind) {
  return kind == "ts_structured" || kind == "ts_agnostic";
}
inline bool is_agnostic_kind(const std::string& kind) {
  return kind == "lcb_agnostic" || kind == "ts_agnostic";
}

inline int resolved_starts(const StrategyConfig& sc, const Problem& problem) {
  if (sc.starts > 0) return sc.starts;
  return problem.domain.dim() >= 8 ? 64 : 16;
}

inline int resolved_reps(const StrategyConfig& sc) {
  if (sc.reps > 0) return sc.reps;
  return is_thompson_kind(sc.kind) ? 20 : 1;
}

inline SolverSettings resolved_settings(const StrategyConfig& sc, const Problem& problem) {
  SolverSettings settings;
  settings.starts = resolved_starts(sc, problem);
  settings.grid_points_1d = sc.grid;
  settings.threads = sc.threads;
  settings.inner_tol = sc.inner_tol;
  settings.outer_step_tol = sc.step_tol;
  return settings;
}

// theta_bar defaults to twice the norm of the true parameters in the
// strategy's own parametrization, the benchmark-oracle choice.
inline double resolved_theta_bar(const StrategyConfig& sc, const Problem& problem) {
  if (sc.theta_bar >= 0.0) return sc.theta_bar;
  if (is_agnostic_kind(sc.kind)) {
    if (!problem.surrogate.theta_phi_star) {
      throw std::runtime_error(
          "theta_bar = auto needs known surrogate parameters; set it explicitly");
    }
    return 2.0 * problem.surrogate.theta_phi_star->norm();
  }
  return 2.0 * problem.truth.theta_star.norm();
}

inline GammaSchedule build_schedule(const StrategyConfig& sc, const Problem& problem) {
  if (sc.gamma == "log_heuristic") return GammaSchedule::log_heuristic();
  if (sc.gamma == "constant") return GammaSchedule::constant(sc.gamma_constant);
  const bool agnostic = is_agnostic_kind(sc.kind);
  const Eigen::Index d =
      agnostic ? problem.surrogate.param_dim : problem.model.param_dim();
  const Eigen::Index m = agnostic ? 1 : problem.model.output_dim();
  const double a_bar = agnostic ? problem.surrogate.a_bar : problem.model.frobenius_bound();
  const double theta_bar = resolved_theta_bar(sc, problem);
  if (sc.gamma == "data_dependent") {
    return GammaSchedule::data_dependent(sc.delta, theta_bar, sc.sigma0, d);
  }
  if (sc.gamma == "data_independent") {
    return GammaSchedule::data_independent(sc.delta, theta_bar, sc.sigma0, d, m, a_bar);
  }
  throw std::runtime_error("unknown gamma schedule: " + sc.gamma);
}

inline std::unique_ptr<Strategy> make_strategy(const Problem& problem,
                                               const StrategyConfig& sc,
                                               std::uint64_t seed) {
  const SolverSettings settings = resolved_settings(sc, problem);
  if (sc.kind == "lcb_structured") {
    return std::make_unique<LcbStructuredStrategy>(
        problem, build_schedule(sc, problem), sc.sigma_v, settings, seed, sc.sigma0);
  }
  if (sc.kind == "lcb_agnostic") {
    return std::make_unique<LcbAgnosticStrategy>(
        problem, build_schedule(sc, problem), sc.sigma_v, settings, seed, sc.sigma0);
  }
  if (sc.kind == "ts_structured") {
    return std::make_unique<TsStructuredStrategy>(problem, sc.sigma_v, settings, seed,
                                                  sc.sigma0);
  }
  if (sc.kind == "ts_agnostic") {
    return std::make_unique<TsAgnosticStrategy>(problem, sc.sigma_v, settings, seed,
                                                sc.sigma0);
  }
  if (sc.kind == "zoo_ilc") {
    return std::make_unique<ZooIlcStrategy>(problem, sc.alpha);
  }
  throw std::runtime_error("unknown strategy kind: " + sc.kind);
}

}  // namespace greybo

#endif  // GREYBO_CLI_STRATEGY_FACTORY_HPP
