#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "granular/detail/memo.hpp"
#include "granular/errors.hpp"
#include "granular/granularity.hpp"
#include "granular/strategy.hpp"

namespace granular {

// The wager envelope h(n) = C * 2^-g(n). Hedging needs it to vanish, hence
// the unbounded-granularity requirement.
struct TimidityEnvelope {
  GranularitySpec g;
  Int c;

  Rational at(std::size_t n) const { return c * g.granule(n); }

  std::size_t first_step_below(const Rational& eps) const {
    if (eps <= 0) throw std::invalid_argument("envelope threshold must be positive");
    std::size_t n = 0;
    while (at(n) >= eps) ++n;
    return n;
  }
};

inline TimidityEnvelope timidity_envelope(const GranularitySpec& g, const Int& c) {
  if (c < 1) throw std::invalid_argument("timidity constant must be positive");
  if (!g.unbounded())
    throw BoundedGranularity("hedging needs an unbounded granularity schedule");
  return TimidityEnvelope{g, c};
}

// How a history was reached: as a plain neutral stage, as a sub-cycle stage
// (including the cycle start), or as the neutral stage right after a
// sub-cycle closed in one of the two possible ways.
enum class StageType { Neutral, SubCycle, TFailedEnding, TSuccessfulEnding };

inline const char* stage_name(StageType t) {
  switch (t) {
    case StageType::Neutral:
      return "neutral";
    case StageType::SubCycle:
      return "sub-cycle";
    case StageType::TFailedEnding:
      return "t-failed-ending";
    case StageType::TSuccessfulEnding:
      return "t-successful-ending";
  }
  return "?";
}

struct StageState {
  StageType type = StageType::Neutral;
  History index;  // the backup active at this history
  Rational c;     // recovery target of the current or next sub-cycle
  Rational r;     // lead of the main strategy over the base
  Rational r0;    // lead before the arrival save, distinct only at endings
};

// Hedged pair for a timid base strategy: a main strategy T that shadows the
// base at neutral stages and doubles its bets inside sub-cycles, plus one
// active backup that bets against those sub-cycles. A sub-cycle either ends
// successfully (T banks one unit and a fresh backup starts) or fails (the
// backup banks one unit and the recovery target halves at worst), so along
// any play at least one of the two banks unboundedly often when the base
// wins unboundedly.
class Hedge {
 public:
  Hedge(const StrategySpec& base, const GranularitySpec& g, TimidityEnvelope envelope)
      : base_(std::make_shared<StrategySpec>(base)), env_(std::move(envelope)) {
    if (env_.g.describe() != g.describe())
      throw std::invalid_argument("envelope granularity disagrees with the supplied one");
    auto b = base_;
    TimidityEnvelope env = env_;
    GranularitySpec gg = g;
    Node root;
    root.type = StageType::Neutral;
    root.subcycle = false;
    root.index = History();
    root.c = 1;
    root.r = 1;
    root.r0 = 1;
    root.m_cap = b->initial;
    root.t_cap = b->initial + 1;
    root.n_cap = b->initial;
    auto step = [b, env, gg](const Node& ps, const History& parent, int bit,
                             const History& child) {
      Rational wm = b->wager(parent);
      if (!is_multiple_of(wm, gg.granule(parent.size() + 1))) throw NotGranular(parent);
      if (abs_of(wm) > env.at(parent.size())) throw TimidityViolation(0, parent);
      if (b->save(child) != 0)
        throw std::invalid_argument("hedging needs a base strategy that never saves");
      Node next;
      next.m_cap = ps.m_cap + (bit ? wm : -wm);
      if (!ps.subcycle) {
        next.t_cap = ps.t_cap + (bit ? wm : -wm);
        next.n_cap = ps.n_cap + (bit ? wm : -wm);
        next.r = next.t_cap - next.m_cap;
        next.r0 = next.r;
        next.c = ps.c;
        next.index = ps.index;
        Int reach = ceil_of(Rational(2 / ps.c));
        bool start = next.n_cap > 2 * reach &&
                     env.at(child.size()) < (ps.c / 4 < 1 ? Rational(ps.c / 4) : Rational(1));
        next.subcycle = start;
        next.type = start ? StageType::SubCycle : StageType::Neutral;
      } else {
        Int reach = ceil_of(Rational(2 / ps.c));
        Rational v = 2 * wm;
        Rational n = -reach * wm;
        Rational t0 = ps.t_cap + (bit ? v : -v);
        Rational n0 = ps.n_cap + (bit ? n : -n);
        Rational r0 = t0 - next.m_cap;
        next.r0 = r0;
        if (r0 > ps.c / 2 && r0 < ps.c + 1) {
          next.type = StageType::SubCycle;
          next.subcycle = true;
          next.c = ps.c;
          next.index = ps.index;
          next.t_cap = t0;
          next.n_cap = n0;
          next.r = r0;
        } else if (r0 <= ps.c / 2) {
          next.type = StageType::TFailedEnding;
          next.subcycle = false;
          next.t_cap = t0;
          next.n_cap = n0 - 1;
          next.r = r0;
          next.c = next.r;
          next.index = ps.index;
        } else {
          next.type = StageType::TSuccessfulEnding;
          next.subcycle = false;
          next.t_cap = t0 - 1;
          next.n_cap = next.m_cap;
          next.r = r0 - 1;
          next.c = next.r;
          next.index = child;
        }
      }
      if (next.r <= 0)
        throw std::logic_error("hedge lead collapsed at '" + child.to_string() + "'");
      return next;
    };
    chain_ = std::make_shared<detail::HistoryChain<Node>>(std::move(root), std::move(step));

    auto chain = chain_;
    main_.initial = base.initial + 1;
    main_.wager = [b, chain](const History& h) {
      Rational wm = b->wager(h);
      return chain->at(h).subcycle ? Rational(2 * wm) : wm;
    };
    main_.save = [chain](const History& h) {
      if (h.empty()) return Rational(0);
      return Rational(chain->at(h).type == StageType::TSuccessfulEnding ? 1 : 0);
    };
    main_.label = base.label + ".hedge";
  }

  const StrategySpec& main() const { return main_; }
  const StrategySpec& base() const { return *base_; }
  const TimidityEnvelope& envelope() const { return env_; }

  StageState classify(const History& h) const {
    Node node = chain_->at(h);
    return StageState{node.type, node.index, node.c, node.r, node.r0};
  }

  // Capital of the backup active at h; meaningful alongside classify(h).
  Rational active_backup_capital(const History& h) const { return chain_->at(h).n_cap; }

  // The frozen-outside-its-life backup strategy with index rho. rho must be
  // an actual index: the root, or a history arrived at by a successful
  // ending.
  StrategySpec backup(const History& rho) const {
    Node at_rho = chain_->at(rho);
    if (!(at_rho.index == rho))
      throw std::invalid_argument("'" + rho.to_string() + "' is not a backup index");
    auto b = base_;
    auto chain = chain_;
    StrategySpec out;
    out.initial = at_rho.m_cap;
    out.wager = [b, chain, rho](const History& h) {
      Node node = chain->at(h);
      if (!(node.index == rho)) return Rational(0);
      Rational wm = b->wager(h);
      if (!node.subcycle) return wm;
      return Rational(-ceil_of(Rational(2 / node.c)) * wm);
    };
    out.save = [chain, rho](const History& h) {
      if (h.empty()) return Rational(0);
      Node node = chain->at(h);
      return Rational(node.type == StageType::TFailedEnding && node.index == rho ? 1 : 0);
    };
    out.label = b->label + ".backup[" + (rho.empty() ? std::string("-") : rho.to_string()) + "]";
    return out;
  }

 private:
  struct Node {
    StageType type = StageType::Neutral;
    bool subcycle = false;
    History index;
    Rational c, r, r0;
    Rational m_cap, t_cap, n_cap;
  };

  std::shared_ptr<StrategySpec> base_;
  TimidityEnvelope env_;
  std::shared_ptr<detail::HistoryChain<Node>> chain_;
  StrategySpec main_;
};

inline History active_index(const Hedge& hedge, const History& h) {
  return hedge.classify(h).index;
}

enum class IntervalKind { Neutral, SubCycle };
enum class IntervalResult { None, TSuccess, TFailure, Open };

// A maximal run of same-kind stages along a path: positions begin..end
// inclusive, counted as history lengths.
struct CycleInterval {
  std::size_t begin = 0;
  std::size_t end = 0;
  IntervalKind kind = IntervalKind::Neutral;
  IntervalResult result = IntervalResult::None;
  History index;
};

struct CycleReport {
  std::vector<CycleInterval> intervals;
  std::size_t t_successes = 0;
  std::size_t t_failures = 0;
  // Savings banked per backup index, ordered by activation.
  std::vector<std::pair<History, std::size_t>> backup_savings;
};

// Partitions the prefixes of x into neutral and sub-cycle intervals and tots
// up who banked what: the main strategy banks one unit per successful
// ending, the then-active backup one unit per failed ending.
inline CycleReport cycle_report(const Hedge& hedge, const History& x) {
  CycleReport report;
  auto bank = [&report](const History& index) -> std::size_t& {
    for (auto& [idx, n] : report.backup_savings)
      if (idx == index) return n;
    report.backup_savings.emplace_back(index, 0);
    return report.backup_savings.back().second;
  };
  bank(History());

  CycleInterval current;
  current.kind = IntervalKind::Neutral;
  current.index = History();
  for (std::size_t p = 1; p <= x.size(); ++p) {
    StageState state = hedge.classify(x.prefix(p));
    if (state.type == StageType::TSuccessfulEnding) {
      ++report.t_successes;
      bank(state.index);  // activation order bookkeeping for the new backup
    } else if (state.type == StageType::TFailedEnding) {
      ++report.t_failures;
      ++bank(state.index);
    }
    IntervalKind kind =
        state.type == StageType::SubCycle ? IntervalKind::SubCycle : IntervalKind::Neutral;
    if (kind != current.kind) {
      if (current.kind == IntervalKind::SubCycle)
        current.result = state.type == StageType::TSuccessfulEnding ? IntervalResult::TSuccess
                                                                    : IntervalResult::TFailure;
      report.intervals.push_back(current);
      current = CycleInterval{p, p, kind, IntervalResult::None, state.index};
    } else {
      current.end = p;
    }
  }
  if (current.kind == IntervalKind::SubCycle) current.result = IntervalResult::Open;
  report.intervals.push_back(current);
  return report;
}

}  // namespace granular
