#pragma once

#include <functional>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "granular/history.hpp"

namespace granular::detail {

// Per-history state derived step by step from the parent's state. Lookups
// memoize every prefix they touch, so walking a path is amortized O(1) state
// steps per node and evaluation order never affects results (the step
// function must be pure). A mutex makes concurrent readers safe.
template <class State>
class HistoryChain {
 public:
  using StepFn = std::function<State(const State& parent, const History& parent_h, int bit,
                                     const History& child)>;

  HistoryChain(State root, StepFn step) : root_(std::move(root)), step_(std::move(step)) {}

  State at(const History& h) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (h.empty()) return root_;
    auto hit = memo_.find(h);
    if (hit != memo_.end()) return hit->second;

    std::vector<History> missing;
    History cur = h;
    while (!cur.empty() && !memo_.count(cur)) {
      missing.push_back(cur);
      cur.pop_back();
    }
    State state = cur.empty() ? root_ : memo_.at(cur);
    for (auto it = missing.rbegin(); it != missing.rend(); ++it) {
      History parent = it->parent();
      state = step_(state, parent, it->last(), *it);
      memo_.emplace(*it, state);
    }
    return state;
  }

 private:
  State root_;
  StepFn step_;
  mutable std::mutex mu_;
  mutable std::unordered_map<History, State, HistoryHash> memo_;
};

}  // namespace granular::detail
