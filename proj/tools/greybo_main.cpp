// Experiment front-end: batch runs from a config file, executable
// verification suites, and static plots from trace files.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "greybo/cli/config.hpp"
#include "greybo/cli/runner.hpp"
#include "greybo/harness/trace_io.hpp"
#include "greybo/harness/verify_suites.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// '*' and '?' wildcards on the basename, anchored match.
bool glob_match(const std::string& pattern, const std::string& text) {
  std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  const std::filesystem::path p(pattern);
  const std::filesystem::path dir =
      p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
  const std::string base = p.filename().string();
  std::vector<std::filesystem::path> matches;
  if (!std::filesystem::is_directory(dir)) return matches;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (glob_match(base, entry.path().filename().string())) {
      matches.push_back(entry.path());
    }
  }
  std::sort(matches.begin(), matches.end());
  return matches;
}

nlohmann::json report_json(const greybo::SuiteReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["passed"] = report.passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"details", c.details}});
  }
  return j;
}

int cmd_run(const std::string& config_path, int seed_override, int reps_override,
            int jobs_override, const std::string& out_override) {
  greybo::ExperimentConfig cfg;
  try {
    cfg = greybo::load_experiment_config(config_path);
  } catch (const std::exception& ex) {
    std::cerr << "config error (" << config_path << "): " << ex.what() << '\n';
    return kExitUsage;
  }
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (jobs_override > 0) cfg.jobs = jobs_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (reps_override > 0) {
    for (auto& s : cfg.strategies) {
      if (greybo::is_thompson_kind(s.kind)) s.reps = reps_override;
    }
  }

  try {
    const greybo::ExperimentArtifacts artifacts =
        greybo::execute_experiment(cfg, &std::cerr);
    std::cout << artifacts.summary.dump(2) << '\n';
    if (!artifacts.all_ok) {
      std::cerr << "some runs failed; see summary\n";
      return kExitFailure;
    }
    return kExitOk;
  } catch (const std::exception& ex) {
    std::cerr << "run failed: " << ex.what() << '\n';
    return kExitFailure;
  }
}

int cmd_verify(const std::string& suite, std::uint64_t seed, double delta, int runs,
               int iterations, int instances, const std::string& out_path) {
  greybo::SuiteReport report;
  try {
    if (suite == "lemmas") {
      greybo::LemmaSuiteOptions options;
      options.seed = seed;
      report = greybo::verify_lemma_suite(options);
    } else if (suite == "coverage") {
      greybo::CoverageSuiteOptions options;
      options.seed = seed;
      options.delta = delta;
      if (runs > 0) options.runs = runs;
      if (iterations > 0) options.iterations = iterations;
      report = greybo::verify_coverage_suite(options);
    } else if (suite == "regret_bound") {
      greybo::RegretBoundSuiteOptions options;
      options.seed = seed;
      if (instances > 0) options.instances = instances;
      if (iterations > 0) options.iterations = iterations;
      report = greybo::verify_regret_bound_suite(options);
    } else {
      std::cerr << "unknown suite: " << suite
                << " (expected lemmas, coverage or regret_bound)\n";
      return kExitUsage;
    }
  } catch (const std::exception& ex) {
    std::cerr << "verification failed to run: " << ex.what() << '\n';
    return kExitFailure;
  }

  const nlohmann::json j = report_json(report);
  std::cout << j.dump(2) << '\n';
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << j.dump(2) << '\n';
  }
  return report.passed() ? kExitOk : kExitFailure;
}

int cmd_plot(const std::string& glob, const std::string& kind,
             const std::string& out_dir, const std::string& problem_name) {
  const std::vector<std::filesystem::path> files = expand_glob(glob);
  if (files.empty()) {
    std::cerr << "no traces match " << glob << '\n';
    return kExitUsage;
  }
  std::map<std::string, std::vector<greybo::RegretTrace>> grouped;
  for (const auto& file : files) {
    try {
      greybo::RegretTrace trace = greybo::import_trace(file.string());
      std::string label = file.stem().string();
      const std::size_t pos = label.rfind("_seed");
      if (pos != std::string::npos) label = label.substr(0, pos);
      trace.strategy = label;
      grouped[label].push_back(std::move(trace));
    } catch (const std::exception& ex) {
      std::cerr << "cannot read " << file << ": " << ex.what() << '\n';
      return kExitFailure;
    }
  }

  std::filesystem::create_directories(out_dir);
  try {
    if (kind == "instantaneous" || kind == "cumulative") {
      std::map<std::string, std::vector<const greybo::RegretTrace*>> views;
      for (const auto& [label, traces] : grouped) {
        for (const auto& t : traces) views[label].push_back(&t);
      }
      const auto spec = greybo::regret_plot(views, kind == "cumulative");
      const auto path = std::filesystem::path(out_dir) / (kind + "_regret.svg");
      greybo::write_svg(spec, path.string());
      std::cout << path.string() << '\n';
    } else if (kind == "trajectory") {
      if (problem_name.empty()) {
        std::cerr << "--kind trajectory needs --problem to recover the optimum\n";
        return kExitUsage;
      }
      const greybo::Problem problem = greybo::resolve_problem(problem_name);
      for (const auto& [label, traces] : grouped) {
        const auto specs = greybo::trajectory_plots(traces.front(), problem);
        for (std::size_t i = 0; i < specs.size(); ++i) {
          const std::string suffix = specs.size() > 1 ? (i == 0 ? "_u" : "_z") : "";
          const auto path = std::filesystem::path(out_dir) /
                            ("trajectory_" + label + suffix + ".svg");
          greybo::write_svg(specs[i], path.string());
          std::cout << path.string() << '\n';
        }
      }
    } else {
      std::cerr << "unknown plot kind: " << kind << '\n';
      return kExitUsage;
    }
  } catch (const std::exception& ex) {
    std::cerr << "plotting failed: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization with known outer structure"};
  app.require_subcommand(1);

  std::string config_path;
  int seed_override = -1, reps_override = -1, jobs_override = -1;
  std::string out_override;
  CLI::App* run = app.add_subcommand("run", "run the experiments of a config file");
  run->add_option("config", config_path, "experiment configuration file")->required();
  run->add_option("--seed", seed_override, "override the base seed");
  run->add_option("--reps", reps_override, "override Thompson repetition count");
  run->add_option("--jobs", jobs_override, "worker pool size");
  run->add_option("--out", out_override, "override the output directory");

  std::string suite;
  std::uint64_t verify_seed = 0;
  double delta = 0.1;
  int runs = -1, iterations = -1, instances = -1;
  std::string report_path;
  CLI::App* verify = app.add_subcommand("verify", "run an executable verification suite");
  verify->add_option("suite", suite, "lemmas | coverage | regret_bound")->required();
  verify->add_option("--seed", verify_seed, "random seed");
  verify->add_option("--delta", delta, "confidence parameter for coverage");
  verify->add_option("--runs", runs, "Monte-Carlo run count for coverage");
  verify->add_option("--iterations", iterations, "trajectory length");
  verify->add_option("--instances", instances, "instance count for regret_bound");
  verify->add_option("--out", report_path, "also write the JSON report here");

  std::string glob, kind = "instantaneous", plot_out = ".", problem_name;
  CLI::App* plot = app.add_subcommand("plot", "render SVG plots from trace CSVs");
  plot->add_option("glob", glob, "trace file glob, e.g. 'out/*.csv'")->required();
  plot->add_option("--kind", kind, "instantaneous | cumulative | trajectory");
  plot->add_option("--out", plot_out, "output directory");
  plot->add_option("--problem", problem_name, "problem name for trajectory plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  if (run->parsed()) {
    return cmd_run(config_path, seed_override, reps_override, jobs_override,
                   out_override);
  }
  if (verify->parsed()) {
    return cmd_verify(suite, verify_seed, delta, runs, iterations, instances,
                      report_path);
  }
  if (plot->parsed()) return cmd_plot(glob, kind, plot_out, problem_name);
  return kExitUsage;
}
