#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "granular/errors.hpp"
#include "granular/history.hpp"
#include "granular/rational.hpp"

namespace granular {

// A betting strategy over the binary outcome tree. `wager(h)` is the signed
// stake placed at h (positive bets on outcome 1); `save(h)` is the amount
// moved to the savings account on arrival at the nonempty history h. Capital
// follows
//
//   capital(empty)   = initial
//   capital(h + j)   = capital(h) + (j ? +1 : -1) * wager(h) - save(h + j)
//
// Wagers may never exceed current capital and capital may never go negative
// (the no-debt rule); evaluation raises NoDebtViolation with the offending
// history the moment either bound breaks. Rules must be pure functions of the
// history; memoization inside derived strategies is permitted because of
// that.
struct StrategySpec {
  Rational initial;
  std::function<Rational(const History&)> wager;
  std::function<Rational(const History&)> save;
  std::string label = "M";
};

inline std::function<Rational(const History&)> zero_rule() {
  return [](const History&) { return Rational(0); };
}

inline StrategySpec make_martingale(Rational initial,
                                    std::function<Rational(const History&)> wager,
                                    std::string label = "M") {
  return StrategySpec{std::move(initial), std::move(wager), zero_rule(), std::move(label)};
}

// Walks one path through the tree, maintaining capital and the savings total.
class StrategyCursor {
 public:
  explicit StrategyCursor(const StrategySpec& spec) : spec_(&spec), capital_(spec.initial) {
    if (capital_ < 0) throw NoDebtViolation(History(), "negative initial capital");
  }

  const History& history() const { return history_; }
  const Rational& capital() const { return capital_; }
  const Rational& savings_total() const { return savings_; }

  // The wager currently on the table, validated against capital.
  Rational wager() const {
    Rational w = spec_->wager(history_);
    if (abs_of(w) > capital_) throw NoDebtViolation(history_, "wager exceeds capital");
    return w;
  }

  struct StepRecord {
    Rational capital_before;
    Rational wager;
    Rational save;
    Rational capital_after;
    Rational savings_total;
  };

  StepRecord step(int bit) {
    StepRecord rec;
    rec.capital_before = capital_;
    rec.wager = wager();
    capital_ += bit ? rec.wager : -rec.wager;
    history_.push_back(bit);
    rec.save = spec_->save(history_);
    if (rec.save < 0) throw NoDebtViolation(history_, "negative save");
    capital_ -= rec.save;
    if (capital_ < 0) throw NoDebtViolation(history_, "capital below zero after save");
    savings_ += rec.save;
    rec.capital_after = capital_;
    rec.savings_total = savings_;
    return rec;
  }

 private:
  const StrategySpec* spec_;
  History history_;
  Rational capital_;
  Rational savings_ = 0;
};

inline Rational capital(const StrategySpec& spec, const History& h) {
  StrategyCursor cur(spec);
  for (std::size_t i = 0; i < h.size(); ++i) cur.step(h[i]);
  return cur.capital();
}

// The signed wager a strategy places at h. For pure capital functions use
// wager_from_capitals on the two child values instead.
inline Rational wager_of(const StrategySpec& spec, const History& h) { return spec.wager(h); }

inline Rational wager_from_capitals(const Rational& at_zero, const Rational& at_one) {
  return Rational((at_one - at_zero) / 2);
}

// The unique strategy with the same initial capital and wagers but no saving;
// its capital dominates the original everywhere.
inline StrategySpec cover(const StrategySpec& spec) {
  return StrategySpec{spec.initial, spec.wager, zero_rule(), spec.label + "^"};
}

// Total amount saved along h: computed both as the running sum of saves and
// as cover capital minus capital, which must agree.
inline Rational savings(const StrategySpec& spec, const History& h) {
  StrategyCursor cur(spec);
  Rational swung = 0;  // net wager outcome, reconstructs the cover capital
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto rec = cur.step(h[i]);
    swung += h[i] ? rec.wager : -rec.wager;
  }
  Rational by_sum = cur.savings_total();
  Rational by_cover = spec.initial + swung - cur.capital();
  if (by_sum != by_cover)
    throw std::logic_error("savings mismatch between save-sum and cover difference");
  return by_sum;
}

}  // namespace granular
