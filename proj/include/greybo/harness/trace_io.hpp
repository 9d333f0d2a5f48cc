#ifndef GREYBO_HARNESS_TRACE_IO_HPP
#define GREYBO_HARNESS_TRACE_IO_HPP

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "greybo/harness/regret.hpp"

namespace greybo {

namespace detail {

// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

// One CSV file per (strategy, seed): iteration index, the input and
// observation vectors flattened column-per-component, then the regret
// accounting columns. Values are written at full precision.
inline void export_trace(const RegretTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);

  out << "n";
  for (Eigen::Index i = 1; i <= trace.input_dim; ++i) out << ",u" << i;
  for (Eigen::Index i = 1; i <= trace.observation_dim; ++i) out << ",y" << i;
  out << ",phi,regret,cum_regret,gamma,q_value,contained\n";

  for (const TraceRow& row : trace.rows) {
    out << row.n;
    for (Eigen::Index i = 0; i < trace.input_dim; ++i) {
      out << ',' << detail::format_double(row.u[i]);
    }
    for (Eigen::Index i = 0; i < trace.observation_dim; ++i) {
      out << ',' << detail::format_double(row.y[i]);
    }
    out << ',' << detail::format_double(row.phi) << ','
        << detail::format_double(row.regret) << ','
        << detail::format_double(row.cum_regret) << ','
        << detail::format_double(row.gamma) << ','
        << detail::format_double(row.q_value) << ',' << (row.contained ? 1 : 0)
        << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing trace file: " + path);
}

inline RegretTrace import_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = detail::split_csv_line(line);
  Eigen::Index nu = 0, ny = 0;
  for (const std::string& h : header) {
    if (h.size() >= 2 && h[0] == 'u') ++nu;
    if (h.size() >= 2 && h[0] == 'y') ++ny;
  }
  const std::size_t expected = 1 + static_cast<std::size_t>(nu + ny) + 6;
  if (header.size() != expected || header.front() != "n" ||
      header.back() != "contained") {
    throw std::runtime_error("unrecognized trace header in " + path);
  }

  RegretTrace trace;
  trace.input_dim = nu;
  trace.observation_dim = ny;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != expected) {
      throw std::runtime_error("malformed trace row in " + path);
    }
    TraceRow row;
    std::size_t k = 0;
    row.n = std::atoi(fields[k++].c_str());
    row.u.resize(nu);
    for (Eigen::Index i = 0; i < nu; ++i) row.u[i] = std::strtod(fields[k++].c_str(), nullptr);
    row.y.resize(ny);
    for (Eigen::Index i = 0; i < ny; ++i) row.y[i] = std::strtod(fields[k++].c_str(), nullptr);
    row.phi = std::strtod(fields[k++].c_str(), nullptr);
    row.regret = std::strtod(fields[k++].c_str(), nullptr);
    row.cum_regret = std::strtod(fields[k++].c_str(), nullptr);
    row.gamma = std::strtod(fields[k++].c_str(), nullptr);
    row.q_value = std::strtod(fields[k++].c_str(), nullptr);
    row.contained = fields[k++] == "1";
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

}  // namespace greybo

#endif  // GREYBO_HARNESS_TRACE_IO_HPP
