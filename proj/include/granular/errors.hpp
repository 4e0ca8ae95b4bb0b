#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "granular/history.hpp"

namespace granular {

// A wager or arrival save would push some capital below zero. Carries the
// history at which the violation occurs.
struct NoDebtViolation : std::runtime_error {
  History witness;
  explicit NoDebtViolation(History at, const std::string& what)
      : std::runtime_error("no-debt violation at '" + at.to_string() + "': " + what),
        witness(std::move(at)) {}
};

struct NotGranular : std::runtime_error {
  History witness;
  explicit NotGranular(History at)
      : std::runtime_error("wager at '" + at.to_string() +
                           "' is not an integer multiple of the step granule"),
        witness(std::move(at)) {}
};

struct InitialTooSmall : std::runtime_error {
  explicit InitialTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct BadBound : std::runtime_error {
  explicit BadBound(const std::string& what) : std::runtime_error(what) {}
};

struct TimidityViolation : std::runtime_error {
  std::size_t strategy_index;
  History witness;
  TimidityViolation(std::size_t index, History at)
      : std::runtime_error("strategy " + std::to_string(index) + " exceeds its wager envelope at '" +
                           at.to_string() + "'"),
        strategy_index(index),
        witness(std::move(at)) {}
};

struct BoundedGranularity : std::runtime_error {
  explicit BoundedGranularity(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace granular
