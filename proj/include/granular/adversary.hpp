#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "granular/checks.hpp"
#include "granular/detail/memo.hpp"
#include "granular/errors.hpp"
#include "granular/granularity.hpp"
#include "granular/strategy.hpp"
#include "granular/trajectory.hpp"
#include "granular/transforms.hpp"

namespace granular {

// Starts with one granule and always stakes the next granule on outcome 1,
// pausing whenever capital cannot cover that stake.
inline StrategySpec unit_bet_martingale(const GranularitySpec& g) {
  auto gp = std::make_shared<GranularitySpec>(g);
  auto step = [gp](const Rational& cap, const History& parent, int bit, const History&) {
    Rational unit = gp->granule(parent.size() + 1);
    Rational w = cap >= unit ? unit : Rational(0);
    return Rational(cap + (bit ? w : -w));
  };
  auto chain =
      std::make_shared<detail::HistoryChain<Rational>>(g.granule(0), std::move(step));
  StrategySpec out;
  out.initial = g.granule(0);
  out.wager = [gp, chain](const History& h) {
    Rational unit = gp->granule(h.size() + 1);
    return chain->at(h) >= unit ? unit : Rational(0);
  };
  out.save = zero_rule();
  out.label = "unit-bet";
  return out;
}

struct DuelState {
  Rational m;  // adversary capital
  Rational t;  // saver capital
  Int q;       // floor(t/m)
  Rational r;  // t - q*m
  std::size_t step = 0;
};

// The outcome the adversary feeds the saver: 1 exactly when the saver's
// signed wager is at most q times the next granule (boundary goes to 1).
inline int adversary_outcome(const DuelState& state, const Rational& wager,
                             const Rational& next_granule) {
  return wager <= state.q * next_granule ? 1 : 0;
}

struct DuelResult {
  History x;
  Trajectory trajectory;
  Rational normalize_shift;  // ceil(T(empty)) - T(empty), applied before play
  bool coarse_warning = false;
  std::size_t stabilization_step = 0;  // first step of the final constant-q run
  Int q_stable;
  Rational r_at_stabilization;
  Rational savings_after_stabilization;
  Rational m_final;
  Rational t_final;
  Rational t_savings_final;
  InvariantReport invariants;
};

namespace detail {

// Monotonicity and bookkeeping checks over a finished duel, phrased on the
// two sub-steps of each stage: the bet (both capitals move) and the arrival
// save (saver only). Records the first counterexample per property.
inline void scan_duel_rows(const std::vector<TrajectoryRecord>& rows, const History& x,
                           const GranularitySpec& g, InvariantReport& report) {
  for (const auto& name :
       {"m-lower-bound", "ratio-nonincreasing", "quotient-monotone", "zero-outcome-strict",
        "zero-outcome-granule-drop", "save-remainder-identity"})
    report.checks.push_back({name, rows.size(), true, {}, {}});

  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto& row = rows[s];
    const auto& m_step = row.strategies[0];
    const auto& t_step = row.strategies[1];
    History at = x.prefix(s);
    Rational g_star = g.granule(s);
    Rational g_plus = g.granule(s + 1);
    if (m_step.capital_before < g_star)
      report.fail("m-lower-bound", at, "adversary capital fell below the current granule");

    Int q = *row.q;
    Rational r = *row.r;
    Rational m_mid = m_step.capital_after;  // the adversary never saves
    Rational t_mid = t_step.capital_after + t_step.save;
    auto mid = divide(t_mid, m_mid);

    // Betting sub-step: quotient never grows; with an equal quotient the
    // remainder cannot grow, and a 0 outcome shrinks it by a full granule.
    if (mid.quotient > q)
      report.fail("quotient-monotone", at, "quotient grew across a betting step");
    else if (mid.quotient == q) {
      if (mid.remainder > r)
        report.fail("quotient-monotone", at, "remainder grew at constant quotient");
      if (row.outcome == 0) {
        if (mid.remainder >= r)
          report.fail("zero-outcome-strict", at, "0 outcome did not shrink the remainder");
        if (r - mid.remainder < g_plus)
          report.fail("zero-outcome-granule-drop", at,
                      "0 outcome shrank the remainder by less than one granule");
      }
    }

    // Saving sub-step: the saved amount reappears as a remainder drop while
    // the quotient holds.
    auto end = divide(t_step.capital_after, m_mid);
    if (end.quotient > mid.quotient)
      report.fail("quotient-monotone", at, "quotient grew across a saving step");
    else if (end.quotient == mid.quotient && t_step.save != mid.remainder - end.remainder)
      report.fail("save-remainder-identity", at, "save does not equal the remainder drop");

    // Stage-to-stage ratio monotonicity, strict on 0 outcomes.
    Rational before = t_step.capital_before * m_mid;
    Rational after = t_step.capital_after * m_step.capital_before;
    if (after > before)
      report.fail("ratio-nonincreasing", at, "t/m grew across a stage");
    else if (row.outcome == 0 && after >= before)
      report.fail("ratio-nonincreasing", at, "t/m failed to shrink on a 0 outcome");
  }
}

}  // namespace detail

// Plays the coarse-granularity duel: the unit-bet adversary chooses each
// outcome against the (normalized) saver so that the saver's capital-to-m
// ratio can never recover. Runs for `horizon` steps and verifies the
// monotonicity facts the construction promises.
inline DuelResult build_sequence(const StrategySpec& saver, const GranularitySpec& g,
                                 std::size_t horizon) {
  DuelResult out;
  out.coarse_warning = g.classification() != GranularitySpec::Classification::Coarse;
  StrategySpec normalized = normalize(saver, g);
  out.normalize_shift = normalized.initial - saver.initial;
  StrategySpec m_spec = unit_bet_martingale(g);

  StrategyCursor m_cur(m_spec), t_cur(normalized);
  out.trajectory.labels = {m_spec.label, normalized.label};
  for (std::size_t s = 0; s < horizon; ++s) {
    DuelState state;
    state.m = m_cur.capital();
    state.t = t_cur.capital();
    auto div = divide(state.t, state.m);
    state.q = div.quotient;
    state.r = div.remainder;
    state.step = s;
    Rational w = t_cur.wager();
    int x = adversary_outcome(state, w, g.granule(s + 1));

    TrajectoryRecord row;
    row.step = s;
    row.outcome = x;
    row.q = state.q;
    row.r = state.r;
    auto mrec = m_cur.step(x);
    auto trec = t_cur.step(x);
    row.strategies = {{mrec.capital_before, mrec.wager, mrec.save, mrec.capital_after,
                       mrec.savings_total},
                      {trec.capital_before, trec.wager, trec.save, trec.capital_after,
                       trec.savings_total}};
    out.x.push_back(x);
    out.trajectory.rows.push_back(std::move(row));
  }

  const auto& rows = out.trajectory.rows;
  std::size_t stab = rows.empty() ? 0 : rows.size() - 1;
  while (stab > 0 && *rows[stab - 1].q == *rows.back().q) --stab;
  out.stabilization_step = stab;
  if (!rows.empty()) {
    out.q_stable = *rows[stab].q;
    out.r_at_stabilization = *rows[stab].r;
    out.m_final = rows.back().strategies[0].capital_after;
    out.t_final = rows.back().strategies[1].capital_after;
    out.t_savings_final = rows.back().strategies[1].savings_total;
    Rational before = stab == 0 ? Rational(0) : rows[stab - 1].strategies[1].savings_total;
    out.savings_after_stabilization = out.t_savings_final - before;
    detail::scan_duel_rows(rows, out.x, g, out.invariants);
    if (out.savings_after_stabilization > out.r_at_stabilization)
      out.invariants.fail("post-stabilization-savings-bound", out.x.prefix(stab),
                          "savings after stabilization exceed the remainder there");
    else
      out.invariants.checks.push_back(
          {"post-stabilization-savings-bound", rows.size(), true, {}, {}});
  }
  return out;
}

struct NestedLevel {
  bool defined = false;
  Rational m;
  Int q;
  Rational r;
};

struct NestedState {
  std::vector<NestedLevel> levels;
};

// The nested division ladder: level 0 divides t_0 by m; level i shrinks the
// divisor by c_i * r_{i-1} + i and is defined only while that stays positive.
// c is indexed per strategy; c[0] is not consumed by the ladder.
inline NestedState nested_state(const Rational& m, const std::vector<Rational>& t,
                                const std::vector<Int>& c) {
  if (t.size() > c.size()) throw std::invalid_argument("nested_state: need one constant per level");
  NestedState out;
  out.levels.resize(t.size());
  Rational prev_m = m;
  Rational prev_r;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto& level = out.levels[i];
    if (i == 0) {
      if (m <= 0) break;
      level.m = m;
    } else {
      if (!out.levels[i - 1].defined) break;
      if (Rational(Int(i)) + c[i] * prev_r >= prev_m) break;
      level.m = prev_m - c[i] * prev_r - Int(i);
    }
    level.defined = true;
    auto div = divide(t[i], level.m);
    level.q = div.quotient;
    level.r = div.remainder;
    prev_m = level.m;
    prev_r = level.r;
  }
  return out;
}

inline bool requires_attention(const NestedState& state, std::size_t i, const Rational& wager,
                               const Rational& next_granule) {
  return state.levels[i].defined && wager != state.levels[i].q * next_granule;
}

struct UniversalLevelStats {
  bool activated = false;
  std::size_t first_defined_step = 0;
  std::size_t definedness_flaps = 0;
  bool stabilized = false;
  std::size_t stabilization_step = 0;
  Int q_stable;
  Rational r_at_stabilization;
  Rational savings_after_stabilization;
  Rational savings_final;
};

struct UniversalResult {
  History x;
  Trajectory trajectory;
  std::vector<Rational> normalize_shifts;
  bool coarse_warning = false;
  std::vector<UniversalLevelStats> levels;
  Rational m_final;
  InvariantReport invariants;
};

// One adversary against countably many timid savers: each stage serves the
// least eligible level whose wager disagrees with its quotient's granule
// multiple, feeding it the single-saver rule. Strategy i must keep its wager
// strictly below (C_i - 1) next granules; a bankrupt saver's wagers are
// frozen at zero.
inline UniversalResult universal_sequence(const std::vector<StrategySpec>& savers,
                                          const std::vector<Int>& timidity,
                                          const GranularitySpec& g, std::size_t horizon) {
  if (savers.size() != timidity.size())
    throw ConfigError("universal_sequence: one timidity constant per saver");
  for (const auto& c : timidity)
    if (c < 1) throw ConfigError("timidity constants must be positive");

  UniversalResult out;
  out.coarse_warning = g.classification() != GranularitySpec::Classification::Coarse;
  std::size_t k = savers.size();
  std::vector<StrategySpec> normalized;
  normalized.reserve(k);
  for (const auto& s : savers) {
    normalized.push_back(normalize(s, g));
    out.normalize_shifts.push_back(normalized.back().initial - s.initial);
  }
  StrategySpec m_spec = unit_bet_martingale(g);
  StrategyCursor m_cur(m_spec);

  out.trajectory.labels.push_back(m_spec.label);
  for (const auto& s : normalized) out.trajectory.labels.push_back(s.label);

  History h;
  std::vector<Rational> cap(k), saved(k);
  for (std::size_t i = 0; i < k; ++i) cap[i] = normalized[i].initial;

  for (std::size_t s = 0; s < horizon; ++s) {
    Rational m = m_cur.capital();
    Rational g_plus = g.granule(s + 1);
    std::vector<Rational> wagers(k);
    for (std::size_t i = 0; i < k; ++i) {
      Rational w = cap[i] == 0 ? Rational(0) : normalized[i].wager(h);
      if (abs_of(w) > cap[i]) throw NoDebtViolation(h, "saver wager exceeds capital");
      if (abs_of(w) >= (timidity[i] - 1) * g_plus) throw TimidityViolation(i, h);
      wagers[i] = w;
    }
    NestedState nested = nested_state(m, cap, timidity);

    int x = 1;
    for (std::size_t i = 0; i < k && i <= s; ++i) {
      if (requires_attention(nested, i, wagers[i], g_plus)) {
        x = wagers[i] <= nested.levels[i].q * g_plus ? 1 : 0;
        break;
      }
    }

    TrajectoryRecord row;
    row.step = s;
    row.outcome = x;
    auto mrec = m_cur.step(x);
    row.strategies.push_back(
        {mrec.capital_before, mrec.wager, mrec.save, mrec.capital_after, mrec.savings_total});
    h.push_back(x);
    for (std::size_t i = 0; i < k; ++i) {
      Rational before = cap[i];
      Rational save = normalized[i].save(h);
      if (save < 0) throw NoDebtViolation(h, "negative save");
      cap[i] += (x ? wagers[i] : -wagers[i]);
      cap[i] -= save;
      if (cap[i] < 0) throw NoDebtViolation(h, "saver capital below zero");
      saved[i] += save;
      row.strategies.push_back({before, wagers[i], save, cap[i], saved[i]});
    }
    for (const auto& level : nested.levels)
      row.levels.push_back({level.defined, level.m, level.q, level.r});
    out.x.push_back(x);
    out.trajectory.rows.push_back(std::move(row));
  }
  out.m_final = m_cur.capital();

  const auto& rows = out.trajectory.rows;
  out.invariants.checks.push_back({"m-lower-bound", rows.size(), true, {}, {}});
  for (std::size_t s = 0; s < rows.size(); ++s)
    if (rows[s].strategies[0].capital_before < g.granule(s))
      out.invariants.fail("m-lower-bound", out.x.prefix(s),
                          "adversary capital fell below the current granule");

  out.levels.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& st = out.levels[i];
    std::size_t last_undefined = rows.size();
    for (std::size_t s = 0; s < rows.size(); ++s) {
      bool defined = rows[s].levels[i].defined;
      if (defined && !st.activated) {
        st.activated = true;
        st.first_defined_step = s;
      }
      if (!defined) {
        if (st.activated && (s == 0 || rows[s - 1].levels[i].defined)) ++st.definedness_flaps;
        last_undefined = s;
      }
    }
    st.savings_final = rows.empty() ? Rational(0) : rows.back().strategies[i + 1].savings_total;
    if (!st.activated) continue;
    std::size_t from = 0;
    if (last_undefined != rows.size()) {
      if (last_undefined + 1 >= rows.size()) continue;  // no defined tail to stabilize on
      from = last_undefined + 1;
    }
    // Least step from which the quotient is constant and the remainder
    // nonincreasing through the horizon.
    std::size_t stab = rows.size() - 1;
    while (stab > from) {
      const auto& prev = rows[stab - 1].levels[i];
      const auto& cur = rows[stab].levels[i];
      if (prev.q != cur.q || prev.r < cur.r) break;
      --stab;
    }
    st.stabilized = true;
    st.stabilization_step = stab;
    st.q_stable = rows[stab].levels[i].q;
    st.r_at_stabilization = rows[stab].levels[i].r;
    Rational before = stab == 0 ? Rational(0) : rows[stab - 1].strategies[i + 1].savings_total;
    st.savings_after_stabilization = st.savings_final - before;
  }
  return out;
}

}  // namespace granular
