#ifndef GREYBO_CLI_CONFIG_HPP
#define GREYBO_CLI_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "greybo/cli/kv_parser.hpp"

namespace greybo {

// Per-strategy block of an experiment configuration.
struct StrategyConfig {
  std::string kind;                    // lcb_structured, lcb_agnostic,
                                       // ts_structured, ts_agnostic, zoo_ilc
  std::string gamma = "log_heuristic";  // log_heuristic | data_dependent |
                                        // data_independent | constant
  double gamma_constant = 1.0;         // value for the constant schedule
  double delta = 0.1;
  double theta_bar = -1.0;              // < 0 means "auto" (2 ||theta_*||)
  double sigma_v = 1.0;                 // assumed observation noise for updates
  double sigma0 = 1.0;                  // prior standard deviation
  double alpha = 0.8;                   // damping, zero-order learning control
  int starts = -1;                      // < 0 picks the dimension-based default
  int reps = -1;                        // < 0 picks the per-kind default
  int threads = 1;                      // solver threads for multi-starts
  int grid = 512;                       // 1-D grid-scan density
  double inner_tol = 1e-9;              // inner projected-gradient tolerance
  double step_tol = 1e-7;               // outer step-norm tolerance

  bool operator==(const StrategyConfig&) const = default;
};

struct ExperimentConfig {
  std::string problem;  // example1 | oscillator_ilc | file:<path>
  int iterations = 1;
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;
  std::string out_dir = "out";
  int jobs = 1;
  std::vector<StrategyConfig> strategies;

  bool operator==(const ExperimentConfig&) const = default;
};

inline bool is_known_strategy_kind(const std::string& kind) {
  return kind == "lcb_structured" || kind == "lcb_agnostic" ||
         kind == "ts_structured" || kind == "ts_agnostic" || kind == "zoo_ilc";
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  bool saw_problem = false, saw_iterations = false;
  StrategyConfig* current = nullptr;
  int last_line = 0;

  for (const detail::KvEntry& e : detail::parse_kv_lines(text)) {
    last_line = e.line;
    if (e.key.empty()) {  // section header
      std::istringstream ss(e.section);
      std::string word, kind;
      ss >> word >> kind;
      if (word != "strategy" || kind.empty()) {
        throw ConfigError(e.line, "expected `[strategy <kind>]`");
      }
      std::string rest;
      if (ss >> rest) throw ConfigError(e.line, "unexpected text in section header");
      if (!is_known_strategy_kind(kind)) {
        throw ConfigError(e.line, "unknown strategy kind: " + kind);
      }
      cfg.strategies.emplace_back();
      cfg.strategies.back().kind = kind;
      current = &cfg.strategies.back();
      continue;
    }

    if (current == nullptr) {
      if (e.key == "problem") {
        cfg.problem = e.value;
        saw_problem = true;
      } else if (e.key == "iterations") {
        cfg.iterations = static_cast<int>(detail::parse_int(e));
        saw_iterations = true;
      } else if (e.key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int(e));
      } else if (e.key == "noise_sigma") {
        cfg.noise_sigma = detail::parse_double(e);
      } else if (e.key == "out_dir") {
        cfg.out_dir = e.value;
      } else if (e.key == "jobs") {
        cfg.jobs = static_cast<int>(detail::parse_int(e));
      } else {
        throw ConfigError(e.line, "unknown key: " + e.key);
      }
      continue;
    }

    if (e.key == "gamma") {
      std::istringstream ss(e.value);
      std::string kind, rest;
      ss >> kind;
      if (kind == "constant") {
        double v;
        if (!(ss >> v) || (ss >> rest)) {
          throw ConfigError(e.line, "`gamma = constant` needs exactly one value");
        }
        if (v < 0.0) throw ConfigError(e.line, "constant gamma must be nonnegative");
        current->gamma = "constant";
        current->gamma_constant = v;
      } else if (kind == "log_heuristic" || kind == "data_dependent" ||
                 kind == "data_independent") {
        if (ss >> rest) throw ConfigError(e.line, "unexpected text after gamma kind");
        current->gamma = kind;
      } else {
        throw ConfigError(e.line, "unknown gamma schedule: " + e.value);
      }
    } else if (e.key == "delta") {
      current->delta = detail::parse_double(e);
    } else if (e.key == "theta_bar") {
      current->theta_bar = e.value == "auto" ? -1.0 : detail::parse_double(e);
    } else if (e.key == "sigma_v") {
      current->sigma_v = detail::parse_double(e);
      if (current->sigma_v <= 0.0) throw ConfigError(e.line, "sigma_v must be positive");
    } else if (e.key == "sigma0") {
      current->sigma0 = detail::parse_double(e);
      if (current->sigma0 <= 0.0) throw ConfigError(e.line, "sigma0 must be positive");
    } else if (e.key == "alpha") {
      current->alpha = detail::parse_double(e);
    } else if (e.key == "starts") {
      current->starts = static_cast<int>(detail::parse_int(e));
    } else if (e.key == "reps") {
      current->reps = static_cast<int>(detail::parse_int(e));
    } else if (e.key == "threads") {
      current->threads = static_cast<int>(detail::parse_int(e));
    } else if (e.key == "grid") {
      current->grid = static_cast<int>(detail::parse_int(e));
    } else if (e.key == "inner_tol") {
      current->inner_tol = detail::parse_double(e);
      if (current->inner_tol <= 0.0) throw ConfigError(e.line, "inner_tol must be positive");
    } else if (e.key == "step_tol") {
      current->step_tol = detail::parse_double(e);
      if (current->step_tol <= 0.0) throw ConfigError(e.line, "step_tol must be positive");
    } else {
      throw ConfigError(e.line, "unknown strategy key: " + e.key);
    }
  }

  if (!saw_problem) throw ConfigError(last_line, "missing required key `problem`");
  if (!saw_iterations) throw ConfigError(last_line, "missing required key `iterations`");
  if (cfg.iterations < 1) throw ConfigError(last_line, "iterations must be at least 1");
  if (cfg.jobs < 1) throw ConfigError(last_line, "jobs must be at least 1");
  if (cfg.strategies.empty()) {
    throw ConfigError(last_line, "configuration declares no strategies");
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

inline std::string to_string(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "problem = " << cfg.problem << '\n';
  out << "iterations = " << cfg.iterations << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "noise_sigma = " << cfg.noise_sigma << '\n';
  out << "out_dir = " << cfg.out_dir << '\n';
  out << "jobs = " << cfg.jobs << '\n';
  for (const StrategyConfig& s : cfg.strategies) {
    out << "\n[strategy " << s.kind << "]\n";
    out << "gamma = " << s.gamma;
    if (s.gamma == "constant") out << ' ' << s.gamma_constant;
    out << '\n';
    out << "delta = " << s.delta << '\n';
    out << "theta_bar = ";
    if (s.theta_bar < 0.0) {
      out << "auto\n";
    } else {
      out << s.theta_bar << '\n';
    }
    out << "sigma_v = " << s.sigma_v << '\n';
    out << "sigma0 = " << s.sigma0 << '\n';
    out << "alpha = " << s.alpha << '\n';
    out << "starts = " << s.starts << '\n';
    out << "reps = " << s.reps << '\n';
    out << "threads = " << s.threads << '\n';
    out << "grid = " << s.grid << '\n';
    out << "inner_tol = " << s.inner_tol << '\n';
    out << "step_tol = " << s.step_tol << '\n';
  }
  return out.str();
}

}  // namespace greybo

#endif  // GREYBO_CLI_CONFIG_HPP
