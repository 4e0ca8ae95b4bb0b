#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "granular/rational.hpp"
#include "granular/strategy.hpp"

namespace granular {

// One strategy's slice of a simulation step. The arithmetic identity
// capital_after = capital_before + (outcome ? wager : -wager) - save
// holds for every record and is re-verified when files are read back.
struct StrategyStep {
  Rational capital_before;
  Rational wager;
  Rational save;
  Rational capital_after;
  Rational savings_total;
};

// Per-level annotation of the nested division state in the universal game.
struct LevelAnnotation {
  bool defined = false;
  Rational m;
  Int q;
  Rational r;
};

inline StrategyStep to_step(const StrategyCursor::StepRecord& rec) {
  return StrategyStep{rec.capital_before, rec.wager, rec.save, rec.capital_after,
                      rec.savings_total};
}

struct TrajectoryRecord {
  std::size_t step = 0;
  int outcome = 0;
  std::vector<StrategyStep> strategies;
  std::optional<Int> q;       // coarse duel: quotient at the stage start
  std::optional<Rational> r;  // coarse duel: remainder at the stage start
  std::vector<LevelAnnotation> levels;
  std::string phase;  // hedge: stage classification of the arrival
};

struct Trajectory {
  std::vector<std::string> labels;
  std::vector<TrajectoryRecord> rows;
};

}  // namespace granular
