#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "granular/errors.hpp"
#include "granular/table_format.hpp"

namespace granular {

// Flat key=value run configuration. '#' starts a comment, blank lines are
// skipped, and the 'strategy' key may repeat (order preserved). Anything a
// config file sets can be overridden from the command line.
struct RunConfig {
  std::map<std::string, std::string> values;
  std::vector<std::string> strategies;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  void set(const std::string& key, const std::string& value) { values[key] = value; }
};

inline RunConfig read_config(std::istream& is) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trimmed(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
    std::string key = detail::trimmed(line.substr(0, eq));
    std::string value = detail::trimmed(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " misses a key");
    if (key == "strategy")
      cfg.strategies.push_back(value);
    else
      cfg.values[key] = value;
  }
  return cfg;
}

}  // namespace granular
