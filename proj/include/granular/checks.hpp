#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "granular/granularity.hpp"
#include "granular/strategy.hpp"

namespace granular {

struct InvariantCheck {
  std::string name;
  std::size_t depth = 0;
  bool passed = true;
  std::optional<History> witness;
  std::string detail;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  InvariantCheck* find(const std::string& name) {
    for (auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  void fail(const std::string& name, const History& witness, const std::string& detail) {
    if (auto* c = find(name); c && !c->passed) return;  // keep the first witness
    if (auto* c = find(name)) {
      c->passed = false;
      c->witness = witness;
      c->detail = detail;
      return;
    }
    checks.push_back({name, 0, false, witness, detail});
  }
};

namespace detail {

// Depth-first sweep of all histories up to `depth`, carrying capital so the
// no-debt rule is enforced exactly where a real play would hit it. `visit`
// sees (history, capital, wager) for every node with |h| < depth whose
// capitals are still well defined.
template <class Visit>
void sweep_capitals(const StrategySpec& spec, std::size_t depth, InvariantReport& report,
                    Visit&& visit) {
  auto guarded = [&report](auto&& fn, Rational& out) {
    try {
      out = fn();
      return true;
    } catch (const NoDebtViolation& e) {
      report.fail("no-debt", e.witness, e.what());
    } catch (const NotGranular& e) {
      report.fail("granular", e.witness, e.what());
    }
    return false;
  };

  Rational root_save;
  if (guarded([&] { return spec.save(History()); }, root_save) && root_save != 0)
    report.fail("root-save", History(), "save rule must vanish on the empty history");
  if (spec.initial < 0) {
    report.fail("no-debt", History(), "negative initial capital");
    return;
  }

  History h;
  auto walk = [&](auto&& self, const Rational& cap) -> void {
    if (h.size() >= depth) return;
    Rational w;
    if (!guarded([&] { return spec.wager(h); }, w)) return;
    if (abs_of(w) > cap) {
      report.fail("no-debt", h, "wager exceeds capital");
      return;
    }
    Rational child_cap[2];
    Rational child_save[2];
    bool ok[2];
    for (int j = 0; j < 2; ++j) {
      h.push_back(j);
      ok[j] = guarded([&] { return spec.save(h); }, child_save[j]);
      if (ok[j] && child_save[j] < 0) {
        report.fail("save-nonnegative", h, "negative save");
        ok[j] = false;
      }
      if (ok[j]) {
        child_cap[j] = cap + (j ? w : -w) - child_save[j];
        if (child_cap[j] < 0) {
          report.fail("no-debt", h, "capital below zero after save");
          ok[j] = false;
        }
      }
      h.pop_back();
    }
    if (ok[0] && ok[1]) {
      if (2 * cap < child_cap[0] + child_cap[1])
        report.fail("supermartingale", h, "2*capital(h) < capital(h0) + capital(h1)");
      else if (child_save[0] == 0 && child_save[1] == 0 &&
               2 * cap != child_cap[0] + child_cap[1])
        report.fail("supermartingale", h, "martingale transition is not an equality");
    }
    visit(static_cast<const History&>(h), cap, w);
    for (int j = 0; j < 2; ++j) {
      if (!ok[j]) continue;
      h.push_back(j);
      self(self, child_cap[j]);
      h.pop_back();
    }
  };
  walk(walk, spec.initial);
}

}  // namespace detail

// Exhaustively verifies the fairness inequality, nonnegative saves and the
// no-debt rule on every history shorter than `depth`.
inline InvariantReport check_supermartingale(const StrategySpec& spec, std::size_t depth) {
  InvariantReport report;
  report.checks.push_back({"no-debt", depth, true, {}, {}});
  report.checks.push_back({"save-nonnegative", depth, true, {}, {}});
  report.checks.push_back({"supermartingale", depth, true, {}, {}});
  detail::sweep_capitals(spec, depth, report, [](const History&, const Rational&, const Rational&) {});
  for (auto& c : report.checks) c.depth = depth;
  return report;
}

// Verifies every wager at |h| < depth is an integer multiple of the granule
// in force for that step.
inline InvariantReport check_granular(const StrategySpec& spec, const GranularitySpec& g,
                                      std::size_t depth) {
  InvariantReport report;
  report.checks.push_back({"granular", depth, true, {}, {}});
  detail::sweep_capitals(spec, depth, report,
                         [&](const History& h, const Rational&, const Rational& w) {
                           if (!is_multiple_of(w, g.granule(h.size() + 1)))
                             report.fail("granular", h, "wager is not a granule multiple");
                         });
  for (auto& c : report.checks) c.depth = depth;
  return report;
}

// Granularity plus the timid wager cap |w| <= C * granule.
inline InvariantReport check_timid(const StrategySpec& spec, const GranularitySpec& g,
                                   const Int& timidity, std::size_t depth) {
  InvariantReport report;
  report.checks.push_back({"granular", depth, true, {}, {}});
  report.checks.push_back({"timid", depth, true, {}, {}});
  detail::sweep_capitals(spec, depth, report,
                         [&](const History& h, const Rational&, const Rational& w) {
                           Rational unit = g.granule(h.size() + 1);
                           if (!is_multiple_of(w, unit))
                             report.fail("granular", h, "wager is not a granule multiple");
                           if (abs_of(w) > timidity * unit)
                             report.fail("timid", h, "wager exceeds the timidity envelope");
                         });
  for (auto& c : report.checks) c.depth = depth;
  return report;
}

}  // namespace granular
