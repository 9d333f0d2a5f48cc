#ifndef GREYBO_CLI_KV_PARSER_HPP
#define GREYBO_CLI_KV_PARSER_HPP

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace greybo {

// Error with the offending line number, for config diagnostics.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct KvEntry {
  int line = 0;
  std::string section;  // text inside [...], empty before the first section
  std::string key;      // empty for section headers
  std::string value;
};

// Line-oriented `key = value` format with `[section ...]` headers and `#`
// comments. Returns one entry per section header and per assignment.
inline std::vector<KvEntry> parse_kv_lines(const std::string& text) {
  std::vector<KvEntry> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(line_no, "empty section header");
      entries.push_back({line_no, section, "", ""});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line_no, "expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    entries.push_back({line_no, section, key, value});
  }
  return entries;
}

inline double parse_double(const KvEntry& e) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(e.line, "invalid number for `" + e.key + "`: " + e.value);
  }
}

inline long long parse_int(const KvEntry& e) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(e.line, "invalid integer for `" + e.key + "`: " + e.value);
  }
}

inline std::vector<double> parse_numbers(const KvEntry& e) {
  std::vector<double> values;
  std::istringstream ss(e.value);
  std::string token;
  while (ss >> token) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(token, &pos));
      if (pos != token.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(e.line, "invalid number `" + token + "` in `" + e.key + "`");
    }
  }
  if (values.empty()) throw ConfigError(e.line, "`" + e.key + "` needs at least one number");
  return values;
}

}  // namespace detail
}  // namespace greybo

#endif  // GREYBO_CLI_KV_PARSER_HPP
