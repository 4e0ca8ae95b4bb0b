#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "granular/errors.hpp"
#include "granular/granularity.hpp"
#include "granular/history.hpp"
#include "granular/strategy.hpp"

namespace granular {

// Finite strategy table: every history up to a depth with its post-save
// capital, the wager placed there, and the amount saved on arrival. Beyond
// the table depth the strategy neither bets nor saves.
struct StrategyTable {
  std::size_t depth = 0;
  std::string granularity;  // advisory; verified on demand, not on load
  std::string label = "M";
  Rational initial = 0;

  struct Row {
    Rational capital;
    Rational wager;
    Rational save;
  };
  // Keyed by history string ("-" excluded; the empty history is ""),
  // insertion in length-lexicographic order when written by us.
  std::map<std::string, Row> rows;
};

inline std::string table_key(const History& h) { return h.to_string(); }

inline StrategyTable tabulate(const StrategySpec& spec, std::size_t depth,
                              const std::string& granularity = "") {
  StrategyTable t;
  t.depth = depth;
  t.granularity = granularity;
  t.label = spec.label;
  t.initial = spec.initial;
  t.rows[""] = StrategyTable::Row{spec.initial,
                                  depth == 0 ? Rational(0) : spec.wager(History()), Rational(0)};
  for (std::size_t len = 1; len <= depth; ++len) {
    std::uint64_t count = std::uint64_t{1} << len;
    for (std::uint64_t i = 0; i < count; ++i) {
      History h = History::from_index(len, i);
      const auto& prow = t.rows.at(table_key(h.parent()));
      StrategyTable::Row row;
      row.save = spec.save(h);
      row.capital = prow.capital + (h.last() ? prow.wager : -prow.wager) - row.save;
      row.wager = len == depth ? Rational(0) : spec.wager(h);
      t.rows[table_key(h)] = row;
    }
  }
  return t;
}

inline void write_table(std::ostream& os, const StrategyTable& t) {
  os << "# granular-table v1\n";
  os << "depth=" << t.depth << " granularity=" << (t.granularity.empty() ? "?" : t.granularity)
     << " label=" << t.label << " initial=" << fraction_string(t.initial) << "\n";
  os << "history,capital,wager,save\n";
  for (std::size_t len = 0; len <= t.depth; ++len) {
    std::uint64_t count = std::uint64_t{1} << len;
    for (std::uint64_t i = 0; i < count; ++i) {
      History h = History::from_index(len, i);
      auto it = t.rows.find(table_key(h));
      if (it == t.rows.end()) throw ConfigError("table misses history '" + h.to_string() + "'");
      const auto& row = it->second;
      os << (h.empty() ? "-" : h.to_string()) << "," << fraction_string(row.capital) << ","
         << fraction_string(row.wager) << "," << fraction_string(row.save) << "\n";
    }
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads a table and re-verifies the capital recurrence, the no-debt rule,
// and nonnegative saves on every edge it contains.
inline StrategyTable read_table(std::istream& is) {
  StrategyTable t;
  std::string line;
  if (!std::getline(is, line) || detail::trimmed(line) != "# granular-table v1")
    throw ConfigError("not a strategy table: bad magic line");
  if (!std::getline(is, line)) throw ConfigError("strategy table misses its header line");
  for (const std::string& field : detail::split(detail::trimmed(line), ' ')) {
    auto kv = detail::split(field, '=');
    if (kv.size() != 2) throw ConfigError("bad table header field '" + field + "'");
    if (kv[0] == "depth")
      t.depth = static_cast<std::size_t>(std::stoull(kv[1]));
    else if (kv[0] == "granularity")
      t.granularity = kv[1] == "?" ? "" : kv[1];
    else if (kv[0] == "label")
      t.label = kv[1];
    else if (kv[0] == "initial")
      t.initial = parse_rational(kv[1]);
    else
      throw ConfigError("unknown table header field '" + kv[0] + "'");
  }
  if (!std::getline(is, line) || detail::trimmed(line) != "history,capital,wager,save")
    throw ConfigError("strategy table misses its column line");
  while (std::getline(is, line)) {
    line = detail::trimmed(line);
    if (line.empty() || line[0] == '#') continue;
    auto parts = detail::split(line, ',');
    if (parts.size() != 4) throw ConfigError("bad table row '" + line + "'");
    std::string key = parts[0] == "-" ? "" : parts[0];
    History h = History::from_string(key);
    if (h.size() > t.depth)
      throw ConfigError("table row '" + parts[0] + "' is deeper than the declared depth");
    StrategyTable::Row row{parse_rational(parts[1]), parse_rational(parts[2]),
                           parse_rational(parts[3])};
    if (!t.rows.emplace(key, row).second)
      throw ConfigError("duplicate table row '" + parts[0] + "'");
  }

  // Structural verification.
  auto lookup = [&t](const History& h) -> const StrategyTable::Row& {
    auto it = t.rows.find(table_key(h));
    if (it == t.rows.end()) throw ConfigError("table misses history '" + h.to_string() + "'");
    return it->second;
  };
  const auto& root = lookup(History());
  if (root.capital != t.initial)
    throw ConfigError("table root capital disagrees with the declared initial");
  if (root.save != 0) throw ConfigError("table declares a save at the empty history");
  for (const auto& [key, row] : t.rows) {
    History h = History::from_string(key);
    if (row.save < 0) throw ConfigError("negative save at '" + key + "'");
    if (row.capital < 0) throw ConfigError("negative capital at '" + key + "'");
    if (abs_of(row.wager) > row.capital)
      throw ConfigError("wager exceeds capital at '" + (key.empty() ? "-" : key) + "'");
    if (h.size() == t.depth) {
      if (row.wager != 0)
        throw ConfigError("nonzero wager at table leaf '" + (key.empty() ? "-" : key) + "'");
      continue;
    }
    for (int bit : {0, 1}) {
      History child = h.child(bit);
      const auto& crow = lookup(child);
      Rational expect = row.capital + (bit ? row.wager : -row.wager) - crow.save;
      if (crow.capital != expect)
        throw ConfigError("capital recurrence breaks on edge to '" + child.to_string() + "'");
    }
  }
  return t;
}

// Turns a (verified) table back into a strategy. Shares the table.
inline StrategySpec table_strategy(StrategyTable table) {
  auto t = std::make_shared<StrategyTable>(std::move(table));
  StrategySpec out;
  out.initial = t->initial;
  out.wager = [t](const History& h) {
    if (h.size() >= t->depth) return Rational(0);
    auto it = t->rows.find(table_key(h));
    if (it == t->rows.end()) throw ConfigError("table misses history '" + h.to_string() + "'");
    return it->second.wager;
  };
  out.save = [t](const History& h) {
    if (h.empty() || h.size() > t->depth) return Rational(0);
    auto it = t->rows.find(table_key(h));
    if (it == t->rows.end()) throw ConfigError("table misses history '" + h.to_string() + "'");
    return it->second.save;
  };
  out.label = t->label;
  return out;
}

}  // namespace granular
