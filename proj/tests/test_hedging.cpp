#include <catch_amalgamated.hpp>

#include "granular/adversary.hpp"
#include "granular/checks.hpp"
#include "granular/hedging.hpp"

using namespace granular;

TEST_CASE("wager envelopes") {
  SECTION("bounded schedules are rejected") {
    CHECK_THROWS_AS(timidity_envelope(GranularitySpec::constant(3), 1), BoundedGranularity);
    CHECK_THROWS_AS(timidity_envelope(GranularitySpec::table({0, 1, 2}), 1),
                    BoundedGranularity);
    CHECK_NOTHROW(timidity_envelope(GranularitySpec::floor_log(), 1));
  }
  SECTION("pointwise values") {
    auto env = timidity_envelope(GranularitySpec::floor_sqrt(), 1);
    CHECK(env.at(16) == Rational(1, 16));
    auto env3 = timidity_envelope(GranularitySpec::floor_sqrt(), 3);
    CHECK(env3.at(16) == Rational(3, 16));
  }
  SECTION("nonincreasing over a long scan") {
    auto env = timidity_envelope(GranularitySpec::floor_log(), 2);
    for (std::size_t n = 0; n < 10000; ++n) CHECK(env.at(n + 1) <= env.at(n));
  }
  SECTION("first step under a threshold") {
    auto env = timidity_envelope(GranularitySpec::floor_log(), 1);
    // Strictly below 1/8 requires g(n) >= 4, first at n = 15; the weak bound
    // h(n) <= 1/8 is first met at n = 7.
    CHECK(env.first_step_below(Rational(1, 8)) == 15);
    std::size_t weak = 0;
    while (env.at(weak) > Rational(1, 8)) ++weak;
    CHECK(weak == 7);
    CHECK_THROWS_AS(env.first_step_below(Rational(0)), std::invalid_argument);
  }
}

namespace {

struct Scenario {
  GranularitySpec g = GranularitySpec::floor_log();
  StrategySpec base;
  Hedge hedge;
  Scenario()
      : base(unit_bet_martingale(g)), hedge(base, g, timidity_envelope(g, 1)) {}
};

// Extends x by `bit` until pred(classify) holds, up to `cap` pushes.
template <class Pred>
bool push_until(const Hedge& hedge, History& x, int bit, std::size_t cap, Pred&& pred) {
  for (std::size_t i = 0; i < cap; ++i) {
    x.push_back(bit);
    if (pred(hedge.classify(x))) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("construction basics") {
  Scenario sc;
  SECTION("root stage") {
    StageState st = sc.hedge.classify(History());
    CHECK(st.type == StageType::Neutral);
    CHECK(st.index == History());
    CHECK(st.c == 1);
    CHECK(st.r == 1);
    CHECK(sc.hedge.main().initial == sc.base.initial + 1);
    CHECK(sc.hedge.backup(History()).initial == sc.base.initial);
  }
  SECTION("a saving base strategy is rejected when stepped") {
    StrategySpec saver;
    saver.initial = 2;
    saver.wager = zero_rule();
    saver.save = [](const History& h) {
      return h.to_string() == "1" ? Rational(1) : Rational(0);
    };
    Hedge bad(saver, sc.g, timidity_envelope(sc.g, 4));
    CHECK_THROWS_AS(bad.classify(History::from_string("1")), std::invalid_argument);
  }
  SECTION("an envelope breach is rejected when stepped") {
    auto g = GranularitySpec::floor_log();
    StrategySpec bold = make_martingale(8, [g](const History& h) {
      return Rational(2 * g.granule(h.size()));  // 2C granules of the current size
    });
    Hedge bad(bold, g, timidity_envelope(g, 1));
    CHECK_THROWS_AS(bad.classify(History::from_string("0")), TimidityViolation);
  }
  SECTION("only real indices have backups") {
    CHECK_THROWS_AS(sc.hedge.backup(History::from_string("01")), std::invalid_argument);
  }
}

TEST_CASE("one failed and one successful cycle, end to end") {
  Scenario sc;
  const Hedge& hedge = sc.hedge;
  History x;

  // Phase A: ride outcome 1 until the first sub-cycle opens. The unit-bet
  // base reaches capital > 4 first at length 15 under floor-log granules.
  REQUIRE(push_until(hedge, x, 1, 50, [](const StageState& st) {
    return st.type == StageType::SubCycle;
  }));
  CHECK(x.size() == 15);
  History cycle1_start = x;
  CHECK(hedge.classify(x).c == 1);
  CHECK(hedge.classify(x.parent()).type == StageType::Neutral);

  SECTION("neutral run before the cycle keeps the lead constant (and equal to c)") {
    for (std::size_t p = 0; p + 1 <= 14; ++p) {
      StageState st = hedge.classify(x.prefix(p));
      CHECK(st.type == StageType::Neutral);
      CHECK(st.r == 1);
      CHECK(st.c == 1);
      CHECK(st.index == History());
    }
  }

  SECTION("wagers inside a c=1 sub-cycle are 2x and -2x the base") {
    Rational w = sc.base.wager(x);
    REQUIRE(w > 0);
    CHECK(hedge.main().wager(x) == 2 * w);
    CHECK(hedge.backup(History()).wager(x) == -2 * w);
  }

  // Phase B: feed zeros; the lead melts by one wager per step until the
  // ending boundary r <= c/2 closes the cycle as a failure for T.
  REQUIRE(push_until(hedge, x, 0, 50, [](const StageState& st) {
    return st.type != StageType::SubCycle;
  }));
  CHECK(x.size() == 23);
  StageState fail_state = hedge.classify(x);
  CHECK(fail_state.type == StageType::TFailedEnding);
  CHECK(fail_state.r0 == Rational(1, 2));    // exactly c/2 closes as failure
  CHECK(fail_state.r0 > Rational(1) / 4);    // failure keeps a quarter of the lead
  CHECK(fail_state.c == Rational(1, 2));     // the recovery target halves
  CHECK(fail_state.index == History());      // the backup's index survives a failure

  SECTION("the backup banks exactly one unit at the failure") {
    StrategySpec backup = hedge.backup(History());
    CHECK(backup.save(x) == 1);
    CHECK(hedge.main().save(x) == 0);
  }

  // Phase C: ride ones again; the next gate needs capital above 8 and an
  // envelope below 1/8, reached first at length 383.
  REQUIRE(push_until(hedge, x, 1, 1000, [](const StageState& st) {
    return st.type == StageType::SubCycle;
  }));
  CHECK(x.size() == 383);

  SECTION("the halved target demands doubled reach and quadrupled hedging") {
    // Gate check: the stage right before was still neutral with N <= 8.
    Rational w = sc.base.wager(x);
    REQUIRE(w > 0);
    CHECK(hedge.main().wager(x) == 2 * w);
    CHECK(hedge.backup(History()).wager(x) == -4 * w);  // ceil(2 / (1/2)) = 4
    CHECK(hedge.active_backup_capital(x) > 8);
    CHECK(hedge.active_backup_capital(x.parent()) <= 8);
    CHECK(hedge.envelope().at(x.size()) < Rational(1, 8));
  }

  // Phase D: stay on ones until the lead grows past c+1 and T banks a unit.
  REQUIRE(push_until(hedge, x, 1, 2000, [](const StageState& st) {
    return st.type != StageType::SubCycle;
  }));
  CHECK(x.size() == 768);
  StageState succ_state = hedge.classify(x);
  CHECK(succ_state.type == StageType::TSuccessfulEnding);
  CHECK(succ_state.index == x);  // a success re-indexes to the ending stage
  CHECK(succ_state.r >= Rational(1, 2));  // >= r at the cycle start
  CHECK(succ_state.r0 >= fail_state.c + 1);
  CHECK(succ_state.c == succ_state.r);

  SECTION("T banks the unit, the new backup opens at the base's capital") {
    CHECK(hedge.main().save(x) == 1);
    StrategyCursor bc(sc.base);
    for (std::size_t p = 1; p <= x.size(); ++p) bc.step(x.prefix(p).last());
    CHECK(hedge.backup(x).initial == bc.capital());
    CHECK(hedge.active_backup_capital(x) == bc.capital());
  }

  SECTION("the old backup freezes after its life ends") {
    StrategySpec old_backup = hedge.backup(History());
    History later = x;
    later.push_back(1);
    CHECK(old_backup.wager(later.parent()) == 0);
    CHECK(old_backup.save(later) == 0);
  }

  SECTION("cycle report partitions the path and counts the banked units") {
    // The fresh backup opens above the gate threshold, so a new sub-cycle
    // starts immediately after the successful ending.
    History extended = x;
    extended.push_back(0);
    extended.push_back(1);
    CycleReport rep = cycle_report(hedge, extended);
    CHECK(rep.t_successes == 1);
    CHECK(rep.t_failures == 1);
    REQUIRE(rep.intervals.size() == 6);
    CHECK(rep.intervals[0].kind == IntervalKind::Neutral);
    CHECK(rep.intervals[0].begin == 0);
    CHECK(rep.intervals[0].end == 14);
    CHECK(rep.intervals[1].kind == IntervalKind::SubCycle);
    CHECK(rep.intervals[1].begin == 15);
    CHECK(rep.intervals[1].end == 22);
    CHECK(rep.intervals[1].result == IntervalResult::TFailure);
    CHECK(rep.intervals[1].index == History());
    CHECK(rep.intervals[2].kind == IntervalKind::Neutral);
    CHECK(rep.intervals[2].end == 382);
    CHECK(rep.intervals[3].kind == IntervalKind::SubCycle);
    CHECK(rep.intervals[3].begin == 383);
    CHECK(rep.intervals[3].end == 767);
    CHECK(rep.intervals[3].result == IntervalResult::TSuccess);
    CHECK(rep.intervals[3].index == History());
    CHECK(rep.intervals[4].kind == IntervalKind::Neutral);
    CHECK(rep.intervals[4].begin == 768);
    CHECK(rep.intervals[4].end == 768);
    CHECK(rep.intervals[5].kind == IntervalKind::SubCycle);
    CHECK(rep.intervals[5].result == IntervalResult::Open);
    CHECK(rep.intervals[5].index == x);
    REQUIRE(rep.backup_savings.size() == 2);
    CHECK(rep.backup_savings[0].first == History());
    CHECK(rep.backup_savings[0].second == 1);
    CHECK(rep.backup_savings[1].first == x);
    CHECK(rep.backup_savings[1].second == 0);
  }

  SECTION("an open sub-cycle is reported as open") {
    History y = cycle1_start;  // 15 ones: inside the first sub-cycle
    CycleReport rep = cycle_report(hedge, y);
    REQUIRE(rep.intervals.size() == 2);
    CHECK(rep.intervals[1].kind == IntervalKind::SubCycle);
    CHECK(rep.intervals[1].result == IntervalResult::Open);
  }

  SECTION("index monotone along prefixes") {
    History prev_index;
    for (std::size_t p = 0; p <= x.size(); ++p) {
      History idx = active_index(hedge, x.prefix(p));
      CHECK(prev_index.is_prefix_of(idx));
      prev_index = idx;
    }
  }

  SECTION("capitals along the crafted path match cursor replays") {
    StrategySpec backup_spec = hedge.backup(History());
    StrategyCursor main_cur(hedge.main());
    StrategyCursor backup_cur(backup_spec);
    StrategyCursor base_cur(sc.base);
    for (std::size_t p = 1; p <= x.size(); ++p) {
      int bit = x.prefix(p).last();
      auto mr = main_cur.step(bit);
      auto br = backup_cur.step(bit);
      auto base_r = base_cur.step(bit);
      StageState st = hedge.classify(x.prefix(p));
      CHECK(mr.capital_after - base_r.capital_after == st.r);
      if (st.index == History())
        CHECK(br.capital_after == hedge.active_backup_capital(x.prefix(p)));
    }
    CHECK(main_cur.savings_total() == 1);
    CHECK(backup_cur.savings_total() == 1);
  }
}

TEST_CASE("depth-limited exhaustive checks on a small hedge") {
  auto g = GranularitySpec::floor_sqrt();
  StrategySpec base = unit_bet_martingale(g);
  Hedge hedge(base, g, timidity_envelope(g, 1));
  CHECK(check_supermartingale(hedge.main(), 9).all_passed());
  CHECK(check_granular(hedge.main(), g, 9).all_passed());
  StrategySpec backup = hedge.backup(History());
  CHECK(check_supermartingale(backup, 9).all_passed());
  CHECK(check_granular(backup, g, 9).all_passed());
}
