#pragma once

// Exact-arithmetic simulation of betting strategies on binary outcome
// sequences under granularity constraints: strategy transforms that bank
// savings, adversarial outcome sequences against coarse-grained savers, and
// hedged strategy pairs under vanishing wager envelopes.

#include "granular/adversary.hpp"
#include "granular/checks.hpp"
#include "granular/config.hpp"
#include "granular/descriptor.hpp"
#include "granular/errors.hpp"
#include "granular/generators.hpp"
#include "granular/granularity.hpp"
#include "granular/hedging.hpp"
#include "granular/history.hpp"
#include "granular/rational.hpp"
#include "granular/runner.hpp"
#include "granular/strategy.hpp"
#include "granular/table_format.hpp"
#include "granular/trajectory.hpp"
#include "granular/transforms.hpp"
