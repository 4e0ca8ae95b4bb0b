#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "granular/detail/memo.hpp"
#include "granular/granularity.hpp"
#include "granular/history.hpp"
#include "granular/strategy.hpp"

namespace granular {

// Stateless 64-bit mixer; all randomness here is a pure function of
// (seed, history, salt), so reruns are reproducible bit for bit.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t key, std::uint64_t salt) {
  return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc908ULL) + splitmix64(key) +
                    salt * 0x9e3779b97f4a7c15ULL);
}

inline History random_path(std::uint64_t seed, std::size_t length) {
  History h;
  std::uint64_t s = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < length; ++i) {
    if (i % 64 == 0) word = (s = splitmix64(s));
    h.push_back(static_cast<int>((word >> (i % 64)) & 1));
  }
  return h;
}

// Each bit is 1 with chance num/den, independently per position.
inline History random_biased_path(std::uint64_t seed, std::size_t length, unsigned num,
                                  unsigned den) {
  if (den == 0 || num > den) throw std::invalid_argument("bias must be a chance in [0,1]");
  History h;
  std::uint64_t s = splitmix64(seed ^ 0xb7e151628aed2a6bULL);
  for (std::size_t i = 0; i < length; ++i) {
    s = splitmix64(s);
    h.push_back(s % den < num ? 1 : 0);
  }
  return h;
}

struct GenOptions {
  Rational initial = 1;
  std::uint64_t seed = 0;
  // Chance num/den of placing a nonzero wager at a given history.
  unsigned bet_num = 1;
  unsigned bet_den = 2;
  // Wager magnitude is 1..max_mult granules, capped by what the floor allows.
  unsigned max_mult = 4;
  // Capital never drops below this, saves included.
  Rational floor = 0;
  // Chance num/den of moving money to the savings account on arrival;
  // zero makes a plain martingale.
  unsigned save_num = 0;
  unsigned save_den = 1;
  unsigned save_max_mult = 1;
  std::string label = "rnd";
};

// Seeded granular strategy: wagers are multiples of the scheduled granule,
// sized so capital stays at or above the floor whatever the outcomes, saves
// (if enabled) are granule multiples paid out of the slack above the floor.
inline StrategySpec gen_random_granular(const GranularitySpec& g, const GenOptions& opt) {
  if (opt.bet_den == 0 || opt.save_den == 0)
    throw std::invalid_argument("probability denominators must be nonzero");
  if (opt.initial < opt.floor) throw std::invalid_argument("initial capital below floor");
  if (opt.floor < 0) throw std::invalid_argument("floor must be nonnegative");

  GranularitySpec gg = g;
  GenOptions o = opt;

  auto pick_wager = [gg, o](const Rational& cap, const History& h) -> Rational {
    std::uint64_t u = mix(o.seed, h.hash(), 1);
    if (u % o.bet_den >= o.bet_num) return 0;
    Rational unit = gg.granule(h.size() + 1);
    Int room = floor_of((cap - o.floor) / unit);
    Int top = room < Int(o.max_mult) ? room : Int(o.max_mult);
    if (top < 1) return 0;
    std::uint64_t k = mix(o.seed, h.hash(), 2) % static_cast<std::uint64_t>(top) + 1;
    Rational w = Int(k) * unit;
    return mix(o.seed, h.hash(), 3) & 1 ? w : -w;
  };

  auto pick_save = [gg, o](const Rational& cap_arrived, const History& h) -> Rational {
    if (o.save_num == 0) return 0;
    std::uint64_t u = mix(o.seed, h.hash(), 4);
    if (u % o.save_den >= o.save_num) return 0;
    Rational unit = gg.granule(h.size());
    Int room = floor_of((cap_arrived - o.floor) / unit);
    Int top = room < Int(o.save_max_mult) ? room : Int(o.save_max_mult);
    if (top < 1) return 0;
    std::uint64_t k = mix(o.seed, h.hash(), 5) % static_cast<std::uint64_t>(top) + 1;
    return Int(k) * unit;
  };

  // Post-save capital, memoized; wagers and saves are derived from it.
  auto chain = std::make_shared<detail::HistoryChain<Rational>>(
      Rational(o.initial),
      [pick_wager, pick_save](const Rational& cap, const History& parent, int bit,
                              const History& child) {
        Rational w = pick_wager(cap, parent);
        Rational arrived = cap + (bit ? w : -w);
        return Rational(arrived - pick_save(arrived, child));
      });

  StrategySpec out;
  out.initial = o.initial;
  out.wager = [chain, pick_wager](const History& h) { return pick_wager(chain->at(h), h); };
  out.save = [chain, pick_wager, pick_save](const History& h) {
    if (h.empty()) return Rational(0);
    History parent = h.parent();
    Rational cap = chain->at(parent);
    Rational w = pick_wager(cap, parent);
    Rational arrived = cap + (h.last() ? w : -w);
    return pick_save(arrived, h);
  };
  out.label = o.label + "[" + std::to_string(o.seed) + "]";
  return out;
}

}  // namespace granular
