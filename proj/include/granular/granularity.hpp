#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "granular/rational.hpp"

namespace granular {

inline std::size_t isqrt(std::size_t n) {
  if (n < 2) return n;
  std::size_t x = n, y = (x + 1) / 2;
  while (y < x) {
    x = y;
    y = (x + n / x) / 2;
  }
  return x;
}

// A nondecreasing exponent schedule g: N -> N. The wager placed at step n
// must be an integer multiple of the granule 2^-g(n+1); granules shrink (or
// stay put) as the game runs. Fine means the granules have a finite sum,
// coarse means they do not.
class GranularitySpec {
 public:
  enum class Family { Constant, Linear, FloorLog, FloorSqrt, Table };
  enum class Classification { Fine, Coarse, Unknown };

  static GranularitySpec constant(unsigned c) { return GranularitySpec(Family::Constant, c, 0, {}, {}); }

  static GranularitySpec linear(unsigned a, unsigned b) {
    return GranularitySpec(Family::Linear, a, b, {}, {});
  }

  static GranularitySpec floor_log() { return GranularitySpec(Family::FloorLog, 0, 0, {}, {}); }

  static GranularitySpec floor_sqrt() { return GranularitySpec(Family::FloorSqrt, 0, 0, {}, {}); }

  // Values give g on an initial segment; past the end the last value repeats
  // (which keeps g nondecreasing and makes the granule sum diverge, hence the
  // coarse default). Callers may assert a different classification.
  static GranularitySpec table(std::vector<unsigned> values,
                              std::optional<Classification> asserted = std::nullopt) {
    if (values.empty()) throw std::invalid_argument("granularity table must be non-empty");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1])
        throw std::invalid_argument("granularity table must be nondecreasing");
    return GranularitySpec(Family::Table, 0, 0, std::move(values), asserted);
  }

  Family family() const { return family_; }

  unsigned g(std::size_t n) const {
    switch (family_) {
      case Family::Constant:
        return a_;
      case Family::Linear:
        return static_cast<unsigned>(a_ * n + b_);
      case Family::FloorLog:
        return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(n) + 1) - 1);
      case Family::FloorSqrt:
        return static_cast<unsigned>(isqrt(n));
      case Family::Table:
        return table_[n < table_.size() ? n : table_.size() - 1];
    }
    throw std::logic_error("unreachable");
  }

  // The minimum wager unit in force for the bet placed at step n-1, equally
  // the capital grid unit at step n: 2^-g(n).
  Rational granule(std::size_t n) const { return pow2(-static_cast<long>(g(n))); }

  Classification classification() const {
    switch (family_) {
      case Family::Constant:
        return Classification::Coarse;
      case Family::Linear:
        return a_ >= 1 ? Classification::Fine : Classification::Coarse;
      case Family::FloorLog:
        return Classification::Coarse;
      case Family::FloorSqrt:
        return Classification::Fine;
      case Family::Table:
        return asserted_.value_or(Classification::Coarse);
    }
    throw std::logic_error("unreachable");
  }

  bool unbounded() const {
    switch (family_) {
      case Family::Constant:
        return false;
      case Family::Linear:
        return a_ >= 1;
      case Family::FloorLog:
      case Family::FloorSqrt:
        return true;
      case Family::Table:
        return false;
    }
    throw std::logic_error("unreachable");
  }

  // Exact value of sum_n 2^-g(n) when the family admits one.
  std::optional<Rational> analytic_sum() const {
    switch (family_) {
      case Family::Linear:
        if (a_ >= 1) {
          Rational base = pow2(static_cast<long>(a_));
          return Rational(pow2(-static_cast<long>(b_)) * base / (base - 1));
        }
        return std::nullopt;
      case Family::FloorSqrt:
        // sum_k (2k+1) 2^-k over the blocks where floor(sqrt n) = k.
        return Rational(6);
      default:
        return std::nullopt;
    }
  }

  Rational partial_sum(std::size_t count) const {
    Rational s = 0;
    for (std::size_t n = 0; n < count; ++n) s += granule(n);
    return s;
  }

  std::string describe() const {
    switch (family_) {
      case Family::Constant:
        return "constant(" + std::to_string(a_) + ")";
      case Family::Linear:
        return "linear(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
      case Family::FloorLog:
        return "floor-log";
      case Family::FloorSqrt:
        return "floor-sqrt";
      case Family::Table: {
        std::string s = "table(";
        for (std::size_t i = 0; i < table_.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(table_[i]);
        }
        return s + ")";
      }
    }
    throw std::logic_error("unreachable");
  }

  static GranularitySpec parse(std::string_view text) {
    auto bad = [&] {
      return std::invalid_argument("unknown granularity: '" + std::string(text) + "'");
    };
    if (text == "floor-log") return floor_log();
    if (text == "floor-sqrt") return floor_sqrt();
    std::size_t open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')') throw bad();
    std::string_view name = text.substr(0, open);
    std::string_view body = text.substr(open + 1, text.size() - open - 2);
    std::vector<unsigned> args;
    std::size_t pos = 0;
    while (pos <= body.size() && !body.empty()) {
      std::size_t comma = body.find(',', pos);
      std::string_view tok = body.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
      if (tok.empty()) throw bad();
      unsigned v = 0;
      for (char c : tok) {
        if (c < '0' || c > '9') throw bad();
        v = v * 10 + static_cast<unsigned>(c - '0');
      }
      args.push_back(v);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (name == "constant" && args.size() == 1) return constant(args[0]);
    if (name == "linear" && args.size() == 2) return linear(args[0], args[1]);
    if (name == "table" && !args.empty()) return table(args);
    throw bad();
  }

 private:
  GranularitySpec(Family family, unsigned a, unsigned b, std::vector<unsigned> table,
                  std::optional<Classification> asserted)
      : family_(family), a_(a), b_(b), table_(std::move(table)), asserted_(asserted) {}

  Family family_;
  unsigned a_ = 0;
  unsigned b_ = 0;
  std::vector<unsigned> table_;
  std::optional<Classification> asserted_;
};

}  // namespace granular
