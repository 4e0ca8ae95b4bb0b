#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "granular/detail/memo.hpp"
#include "granular/errors.hpp"
#include "granular/granularity.hpp"
#include "granular/strategy.hpp"

namespace granular {

// Shifting by one unit of capital preserves wagers, saves and the no-debt
// rule; it is the standard device for assuming capital >= 1.
inline StrategySpec shift_up(const StrategySpec& spec) {
  return StrategySpec{Rational(spec.initial + 1), spec.wager, spec.save, spec.label + "+1"};
}

// Positions along h at which capital first reaches at least twice its last
// recorded value; position 0 always counts. Applied to spec shifted up when
// the initial capital is below 1.
struct DoublingIndex {
  std::vector<std::size_t> positions;
  std::size_t l() const { return positions.size() - 1; }
};

inline DoublingIndex doubling_index(const StrategySpec& spec, const History& h) {
  StrategySpec base = spec.initial < 1 ? shift_up(spec) : spec;
  DoublingIndex index;
  index.positions.push_back(0);
  StrategyCursor cur(base);
  Rational marked = cur.capital();
  for (std::size_t n = 0; n < h.size(); ++n) {
    cur.step(h[n]);
    if (cur.capital() >= 2 * marked) {
      marked = cur.capital();
      index.positions.push_back(n + 1);
    }
  }
  return index;
}

// Rounds x toward zero to the granule grid of the bet placed at h: the
// largest integer multiple of 2^-g(|h|+1) that is <= |x|, with x's sign. The
// rounding error is strictly below one granule.
inline Rational int_g(const GranularitySpec& g, const History& h, const Rational& x) {
  if (x == 0) return Rational(0);
  Rational unit = g.granule(h.size() + 1);
  Int q = divide(abs_of(x), unit).quotient;
  Rational magnitude = q * unit;
  return x < 0 ? Rational(-magnitude) : magnitude;
}

namespace detail {

struct TrickState {
  Rational m_cap;
  Rational n_cap;
  Rational marked;
  Rational ratio;
  bool marker_here = false;
};

struct LimState {
  Rational m_cap;
  bool copying = false;
  bool closed_here = false;
};

struct FineState {
  Rational m_cap;
  Rational marked;
  Int l;
  Rational nhat;
};

inline std::shared_ptr<HistoryChain<LimState>> make_lim_chain(std::shared_ptr<StrategySpec> m,
                                                              Rational q) {
  LimState root{m->initial, false, false};
  auto step = [m, q](const LimState& s, const History& parent, int bit, const History& child) {
    LimState next;
    Rational w = m->wager(parent);
    next.m_cap = s.m_cap + (bit ? w : -w) - m->save(child);
    if (s.copying) {
      next.copying = !(next.m_cap > q + 1);
      next.closed_here = !next.copying;
    } else {
      next.copying = next.m_cap < q;
      next.closed_here = false;
    }
    return next;
  };
  return std::make_shared<HistoryChain<LimState>>(std::move(root), std::move(step));
}

}  // namespace detail

// Proportional-scaling saver: bets like `spec` (scaled), and banks one unit
// each time the base capital more than doubles its last marked value. The
// scale is re-anchored at each marker so both no-debt and fairness survive.
inline StrategySpec savings_trick(const StrategySpec& spec) {
  if (spec.initial <= 1)
    throw InitialTooSmall("savings_trick needs initial capital strictly above 1");
  auto m = std::make_shared<StrategySpec>(spec);
  detail::TrickState root{m->initial, m->initial, m->initial, Rational(1), false};
  auto step = [m](const detail::TrickState& s, const History& parent, int bit,
                  const History& child) {
    Rational w = m->wager(parent);
    Rational m_next = s.m_cap + (bit ? w : -w) - m->save(child);
    Rational n_pre = s.n_cap + (bit ? Rational(s.ratio * w) : Rational(-s.ratio * w));
    if (m_next > 2 * s.marked) {
      Rational n_next = n_pre - 1;
      return detail::TrickState{m_next, n_next, m_next, Rational(n_next / m_next), true};
    }
    return detail::TrickState{m_next, n_pre, s.marked, s.ratio, false};
  };
  auto chain =
      std::make_shared<detail::HistoryChain<detail::TrickState>>(std::move(root), std::move(step));
  StrategySpec out;
  out.initial = spec.initial;
  out.wager = [m, chain](const History& h) { return Rational(chain->at(h).ratio * m->wager(h)); };
  out.save = [chain](const History& h) {
    if (h.empty()) return Rational(0);
    return Rational(chain->at(h).marker_here ? 1 : 0);
  };
  out.label = spec.label + ".trick";
  return out;
}

// Rounds a granular strategy onto the granule grid: same wagers, initial
// capital rounded up to an integer, savings banked only in whole units (the
// floor of the original savings). Capital then lives on the granule grid and
// stays within a bounded distance of the original. Wagers are validated
// lazily; a non-granular wager raises NotGranular when evaluated.
inline StrategySpec normalize(const StrategySpec& spec, const GranularitySpec& g) {
  auto m = std::make_shared<StrategySpec>(spec);
  auto gp = std::make_shared<GranularitySpec>(g);
  auto step = [m](const Rational& sm, const History&, int, const History& child) {
    return Rational(sm + m->save(child));
  };
  auto chain = std::make_shared<detail::HistoryChain<Rational>>(Rational(0), std::move(step));
  StrategySpec out;
  out.initial = Rational(ceil_of(spec.initial));
  out.wager = [m, gp](const History& h) {
    Rational w = m->wager(h);
    if (!is_multiple_of(w, gp->granule(h.size() + 1))) throw NotGranular(h);
    return w;
  };
  out.save = [chain](const History& h) {
    if (h.empty()) return Rational(0);
    return Rational(floor_of(chain->at(h)) - floor_of(chain->at(h.parent())));
  };
  out.label = spec.label + ".norm";
  return out;
}

// Sets capital q aside and shadows `spec` only while it is underwater:
// copying starts after spec's capital drops strictly below q and stops once
// it climbs strictly above q+1, each completed copy interval netting more
// than one unit.
inline StrategySpec lim_transform(const StrategySpec& spec, const Rational& q) {
  if (q <= 0) throw std::invalid_argument("lim_transform needs a positive anchor q");
  auto m = std::make_shared<StrategySpec>(spec);
  auto chain = detail::make_lim_chain(m, q);
  StrategySpec out;
  out.initial = q;
  out.wager = [m, chain](const History& h) {
    return chain->at(h).copying ? m->wager(h) : Rational(0);
  };
  out.save = zero_rule();
  out.label = spec.label + ".lim";
  return out;
}

// The saving variant of lim_transform: banks one unit at the close of each
// completed copy interval.
inline StrategySpec saver_family_nq(const StrategySpec& spec, const Rational& q) {
  if (q <= 0) throw std::invalid_argument("saver_family_nq needs a positive anchor q");
  auto m = std::make_shared<StrategySpec>(spec);
  auto chain = detail::make_lim_chain(m, q);
  StrategySpec out;
  out.initial = q;
  out.wager = [m, chain](const History& h) {
    return chain->at(h).copying ? m->wager(h) : Rational(0);
  };
  out.save = [chain](const History& h) {
    if (h.empty()) return Rational(0);
    return Rational(chain->at(h).closed_here ? 1 : 0);
  };
  out.label = spec.label + ".nq";
  return out;
}

struct FineSaverResult {
  StrategySpec saver;        // N: granular, saves one unit per doubling of the base
  StrategySpec saver_cover;  // N-hat: same wagers, no saving
  bool shifted = false;      // base was shifted up to reach initial capital >= 1
};

// Granular saver for a fine granularity: scales the base strategy's bets by
// (N-hat - l)/M, rounded onto the granule grid toward zero, where l counts
// doublings of the base capital. Starts with floor(G * M(empty)) + 1 where
// the integer G must exceed 2 plus the full granule sum.
inline FineSaverResult fine_saver(const StrategySpec& spec, const GranularitySpec& g,
                                  const Int& G) {
  auto sum = g.analytic_sum();
  if (!sum)
    throw BadBound("fine_saver needs a granularity with a finite analytic granule sum");
  if (Rational(G) <= 2 + *sum)
    throw BadBound("fine_saver bound too small: G must exceed 2 + " + fraction_string(*sum));

  bool shifted = spec.initial < 1;
  auto m = std::make_shared<StrategySpec>(shifted ? shift_up(spec) : spec);
  auto gp = std::make_shared<GranularitySpec>(g);

  auto scaled_wager = [m, gp](const detail::FineState& s, const History& h) {
    if (s.m_cap == 0) return Rational(0);
    Rational w = m->wager(h);
    if (w == 0) return Rational(0);
    Rational target = w * (s.nhat - s.l) / s.m_cap;
    return int_g(*gp, h, target);
  };

  detail::FineState root{m->initial, m->initial, Int(0),
                         Rational(floor_of(Rational(G * m->initial)) + 1)};
  auto step = [m, scaled_wager](const detail::FineState& s, const History& parent, int bit,
                                const History& child) {
    detail::FineState next;
    Rational wn = scaled_wager(s, parent);
    next.nhat = s.nhat + (bit ? wn : -wn);
    Rational wm = m->wager(parent);
    next.m_cap = s.m_cap + (bit ? wm : -wm) - m->save(child);
    if (next.m_cap >= 2 * s.marked) {
      next.marked = next.m_cap;
      next.l = s.l + 1;
    } else {
      next.marked = s.marked;
      next.l = s.l;
    }
    return next;
  };
  auto chain =
      std::make_shared<detail::HistoryChain<detail::FineState>>(root, std::move(step));

  FineSaverResult out;
  out.shifted = shifted;
  out.saver.initial = root.nhat;
  out.saver.wager = [chain, scaled_wager](const History& h) {
    return scaled_wager(chain->at(h), h);
  };
  out.saver.save = [chain](const History& h) {
    if (h.empty()) return Rational(0);
    History parent = h.parent();
    Int l_parent = chain->at(parent).l;
    Int l_grand = parent.empty() ? Int(0) : chain->at(parent.parent()).l;
    return Rational(l_parent - l_grand);
  };
  out.saver.label = spec.label + ".fine";
  out.saver_cover = cover(out.saver);
  return out;
}

}  // namespace granular
