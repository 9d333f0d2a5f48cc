#ifndef GREYBO_CLI_RUNNER_HPP
#define GREYBO_CLI_RUNNER_HPP

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "greybo/cli/config.hpp"
#include "greybo/cli/strategy_factory.hpp"
#include "greybo/cli/svg.hpp"
#include "greybo/harness/regret.hpp"
#include "greybo/harness/trace_io.hpp"
#include "greybo/problem/problem_file.hpp"

namespace greybo {

struct RunRecord {
  int strategy_index = 0;
  StrategyConfig config;
  std::uint64_t seed = 0;
  RegretTrace trace;
  std::string trace_file;
  std::string error;  // nonempty when the run failed
};

struct ExperimentArtifacts {
  Problem problem;
  std::vector<RunRecord> runs;
  nlohmann::json summary;
  bool all_ok = true;
};

namespace detail {

inline std::string strategy_label(const ExperimentConfig& cfg, int index) {
  int same_kind = 0;
  for (const auto& s : cfg.strategies) {
    if (s.kind == cfg.strategies[static_cast<std::size_t>(index)].kind) ++same_kind;
  }
  const std::string kind = cfg.strategies[static_cast<std::size_t>(index)].kind;
  return same_kind > 1 ? kind + "_" + std::to_string(index) : kind;
}

inline nlohmann::json stats_json(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  nlohmann::json j;
  if (values.empty()) return j;
  const std::size_t n = values.size();
  const double median = n % 2 == 1 ? values[n / 2]
                                   : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  j["median"] = median;
  j["min"] = values.front();
  j["max"] = values.back();
  return j;
}

// Per-iteration minimum, median and maximum over a group of traces.
struct Envelope {
  std::vector<double> n, lo, med, hi;
};

inline Envelope envelope(const std::vector<const RegretTrace*>& traces,
                         bool cumulative) {
  Envelope env;
  if (traces.empty()) return env;
  std::size_t len = traces.front()->rows.size();
  for (const RegretTrace* t : traces) len = std::min(len, t->rows.size());
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> values;
    values.reserve(traces.size());
    for (const RegretTrace* t : traces) {
      values.push_back(cumulative ? t->rows[i].cum_regret : t->rows[i].regret);
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    env.n.push_back(static_cast<double>(i + 1));
    env.lo.push_back(values.front());
    env.med.push_back(n % 2 == 1 ? values[n / 2]
                                 : 0.5 * (values[n / 2 - 1] + values[n / 2]));
    env.hi.push_back(values.back());
  }
  return env;
}

}  // namespace detail

// Regret curves for a set of traces grouped by strategy label. Repetition
// groups are drawn as a median line with a min/max envelope.
inline PlotSpec regret_plot(const std::map<std::string, std::vector<const RegretTrace*>>& groups,
                            bool cumulative) {
  PlotSpec spec;
  spec.title = cumulative ? "Cumulative regret" : "Instantaneous regret";
  spec.x_label = "iteration";
  spec.y_label = cumulative ? "cumulative regret" : "regret";
  spec.log_y = true;
  int color_index = 0;
  for (const auto& [label, traces] : groups) {
    const std::string color =
        detail::kPalette[color_index % detail::kPaletteSize];
    ++color_index;
    const detail::Envelope env = detail::envelope(traces, cumulative);
    if (env.n.empty()) continue;
    if (traces.size() > 1) {
      PlotSeries lo{"", env.n, env.lo, color, 0.9, true};
      PlotSeries hi{"", env.n, env.hi, color, 0.9, true};
      spec.series.push_back(lo);
      spec.series.push_back(hi);
    }
    PlotSeries med{label, env.n, env.med, color, 1.8, false};
    spec.series.push_back(med);
  }
  return spec;
}

// Final input and output trajectories of one run against the optimum.
inline std::vector<PlotSpec> trajectory_plots(const RegretTrace& trace,
                                              const Problem& problem) {
  std::vector<PlotSpec> specs;
  if (trace.rows.empty()) return specs;
  const Eigen::VectorXd& u_final = trace.rows.back().u;
  if (problem.domain.dim() == 1) {
    PlotSpec spec;
    spec.title = "Iterates (" + trace.strategy + ")";
    spec.x_label = "iteration";
    spec.y_label = "u";
    PlotSeries iterates{"iterates", {}, {}, "#9a9a9a", 1.2, false};
    for (const TraceRow& row : trace.rows) {
      iterates.x.push_back(row.n);
      iterates.y.push_back(row.u[0]);
    }
    PlotSeries best{"optimal", {1.0, static_cast<double>(trace.rows.size())},
                    {problem.truth.u_star[0], problem.truth.u_star[0]},
                    "#1f77b4", 1.8, true};
    spec.series.push_back(iterates);
    spec.series.push_back(best);
    specs.push_back(std::move(spec));
    return specs;
  }

  PlotSpec u_spec;
  u_spec.title = "Final input trajectory (" + trace.strategy + ")";
  u_spec.x_label = "control interval";
  u_spec.y_label = "u";
  PlotSpec z_spec;
  z_spec.title = "Final output trajectory (" + trace.strategy + ")";
  z_spec.x_label = "output index";
  z_spec.y_label = "z";

  // a few intermediate iterates in grey, then the final and optimal ones
  const std::size_t count = trace.rows.size();
  for (const std::size_t i :
       {count / 8, count / 4, count / 2}) {
    if (i == 0 || i + 1 >= count) continue;
    PlotSeries grey{"", {}, {}, "#c9c9c9", 0.9, false};
    for (Eigen::Index k = 0; k < trace.rows[i].u.size(); ++k) {
      grey.x.push_back(static_cast<double>(k + 1));
      grey.y.push_back(trace.rows[i].u[k]);
    }
    u_spec.series.push_back(grey);
  }
  PlotSeries u_final_series{"final", {}, {}, "#ff7f0e", 2.0, false};
  PlotSeries u_best{"optimal", {}, {}, "#1f77b4", 1.8, true};
  for (Eigen::Index k = 0; k < u_final.size(); ++k) {
    u_final_series.x.push_back(static_cast<double>(k + 1));
    u_final_series.y.push_back(u_final[k]);
    u_best.x.push_back(static_cast<double>(k + 1));
    u_best.y.push_back(problem.truth.u_star[k]);
  }
  u_spec.series.push_back(u_final_series);
  u_spec.series.push_back(u_best);

  const Eigen::VectorXd z_final = problem.truth.f_star(u_final);
  const Eigen::VectorXd z_best = problem.truth.f_star(problem.truth.u_star);
  PlotSeries z_final_series{"final", {}, {}, "#ff7f0e", 2.0, false};
  PlotSeries z_best_series{"optimal", {}, {}, "#1f77b4", 1.8, true};
  for (Eigen::Index k = 0; k < z_final.size(); ++k) {
    z_final_series.x.push_back(static_cast<double>(k + 1));
    z_final_series.y.push_back(z_final[k]);
    z_best_series.x.push_back(static_cast<double>(k + 1));
    z_best_series.y.push_back(z_best[k]);
  }
  z_spec.series.push_back(z_final_series);
  z_spec.series.push_back(z_best_series);

  specs.push_back(std::move(u_spec));
  specs.push_back(std::move(z_spec));
  return specs;
}

// Runs every (strategy, repetition) pair of the configuration on a worker
// pool, writes the trace files, the summary and the plots into out_dir.
inline ExperimentArtifacts execute_experiment(const ExperimentConfig& cfg,
                                              std::ostream* log = nullptr) {
  ExperimentArtifacts artifacts;
  artifacts.problem = resolve_problem(cfg.problem);
  const Problem& problem = artifacts.problem;

  struct Pending {
    int strategy_index;
    int rep;
  };
  std::vector<Pending> pending;
  for (int s = 0; s < static_cast<int>(cfg.strategies.size()); ++s) {
    const int reps = resolved_reps(cfg.strategies[static_cast<std::size_t>(s)]);
    for (int r = 0; r < reps; ++r) pending.push_back({s, r});
  }
  artifacts.runs.resize(pending.size());

  std::filesystem::create_directories(cfg.out_dir);

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= pending.size()) return;
      const Pending& job = pending[i];
      const StrategyConfig& sc =
          cfg.strategies[static_cast<std::size_t>(job.strategy_index)];
      RunRecord& record = artifacts.runs[i];
      record.strategy_index = job.strategy_index;
      record.config = sc;
      record.seed = cfg.seed + static_cast<std::uint64_t>(job.rep);
      try {
        const std::uint64_t strategy_seed = mix_seed(
            record.seed, static_cast<std::uint64_t>(job.strategy_index) + 0x51);
        auto strategy = make_strategy(problem, sc, strategy_seed);
        RunOptions options;
        options.iterations = cfg.iterations;
        options.noise_sigma = cfg.noise_sigma;
        options.seed = record.seed;
        record.trace = run_experiment(problem, *strategy, options);
        record.trace.strategy = detail::strategy_label(cfg, job.strategy_index);
      } catch (const std::exception& ex) {
        record.error = ex.what();
      }
    }
  };
  if (cfg.jobs > 1 && pending.size() > 1) {
    std::vector<std::thread> pool;
    const int workers = std::min<int>(cfg.jobs, static_cast<int>(pending.size()));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  } else {
    worker();
  }

  // write traces and assemble the summary in deterministic order
  nlohmann::json summary;
  summary["problem"]["name"] = problem.name;
  summary["problem"]["u_star"] =
      std::vector<double>(problem.truth.u_star.data(),
                          problem.truth.u_star.data() + problem.truth.u_star.size());
  const Eigen::VectorXd z_star = problem.truth.f_star(problem.truth.u_star);
  summary["problem"]["z_star"] =
      std::vector<double>(z_star.data(), z_star.data() + z_star.size());
  summary["problem"]["phi_star_min"] = problem.truth.phi_star_min;
  summary["iterations"] = cfg.iterations;
  summary["seed"] = cfg.seed;
  summary["noise_sigma"] = cfg.noise_sigma;
  summary["strategies"] = nlohmann::json::array();

  for (int s = 0; s < static_cast<int>(cfg.strategies.size()); ++s) {
    const std::string label = detail::strategy_label(cfg, s);
    nlohmann::json entry;
    entry["kind"] = cfg.strategies[static_cast<std::size_t>(s)].kind;
    entry["label"] = label;
    entry["runs"] = nlohmann::json::array();
    std::vector<double> final_cum, final_inst;
    for (RunRecord& record : artifacts.runs) {
      if (record.strategy_index != s) continue;
      nlohmann::json run_json;
      run_json["seed"] = record.seed;
      if (!record.error.empty()) {
        run_json["error"] = record.error;
        artifacts.all_ok = false;
        if (log) {
          *log << "run failed (" << label << ", seed " << record.seed
               << "): " << record.error << '\n';
        }
      } else {
        record.trace_file = label + "_seed" + std::to_string(record.seed) + ".csv";
        export_trace(record.trace,
                     (std::filesystem::path(cfg.out_dir) / record.trace_file).string());
        if (!record.trace.solver_failures.empty() && log) {
          *log << label << " seed " << record.seed << ": solver returned "
               << "best-effort iterates at " << record.trace.solver_failures.size()
               << " of " << record.trace.rows.size() << " iterations\n";
        }
        run_json["file"] = record.trace_file;
        run_json["solver_failures"] = record.trace.solver_failures.size();
        run_json["final_regret"] = record.trace.rows.back().regret;
        run_json["final_cum_regret"] = record.trace.final_cum_regret();
        final_cum.push_back(record.trace.final_cum_regret());
        final_inst.push_back(record.trace.rows.back().regret);
      }
      entry["runs"].push_back(std::move(run_json));
    }
    entry["final_cum_regret"] = detail::stats_json(final_cum);
    entry["final_regret"] = detail::stats_json(final_inst);
    summary["strategies"].push_back(std::move(entry));
  }
  artifacts.summary = summary;
  {
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "summary.json");
    out << summary.dump(2) << '\n';
  }

  // plots
  std::map<std::string, std::vector<const RegretTrace*>> groups;
  for (const RunRecord& record : artifacts.runs) {
    if (record.error.empty()) {
      groups[record.trace.strategy].push_back(&record.trace);
    }
  }
  if (!groups.empty()) {
    write_svg(regret_plot(groups, false),
              (std::filesystem::path(cfg.out_dir) / "instantaneous_regret.svg").string());
    write_svg(regret_plot(groups, true),
              (std::filesystem::path(cfg.out_dir) / "cumulative_regret.svg").string());
    for (const auto& [label, traces] : groups) {
      const std::vector<PlotSpec> specs = trajectory_plots(*traces.front(), problem);
      for (std::size_t i = 0; i < specs.size(); ++i) {
        const std::string suffix = specs.size() > 1 ? (i == 0 ? "_u" : "_z") : "";
        write_svg(specs[i], (std::filesystem::path(cfg.out_dir) /
                             ("trajectory_" + label + suffix + ".svg"))
                                .string());
      }
    }
  }
  return artifacts;
}

}  // namespace greybo

#endif  // GREYBO_CLI_RUNNER_HPP
