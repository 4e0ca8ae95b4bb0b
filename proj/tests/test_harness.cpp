#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "granular/granular.hpp"

using namespace granular;

namespace {

// Capital agreement over every history up to the given depth.
bool same_capitals(const StrategySpec& a, const StrategySpec& b, std::size_t depth) {
  for (std::size_t len = 0; len <= depth; ++len) {
    std::uint64_t count = 1ull << len;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      History h = History::from_index(len, idx);
      if (capital(a, h) != capital(b, h)) return false;
    }
  }
  return true;
}

std::filesystem::path fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("granular-test-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s)
    if (ch == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("strategy descriptors") {
  DescriptorContext ctx{GranularitySpec::floor_log(), ""};

  SECTION("constant capital") {
    StrategySpec s = parse_strategy("constant(3/2)", ctx);
    CHECK(s.initial == Rational(3, 2));
    CHECK(s.wager(History::from_string("01")) == 0);
    CHECK(s.label == "constant[3/2]");
  }
  SECTION("unit bet follows the granule schedule") {
    StrategySpec s = parse_strategy("unit-bet", ctx);
    CHECK(s.wager(History()) == Rational(1, 2));  // granule at length 1
    CHECK(s.wager(History::from_string("111")) == Rational(1, 4));
  }
  SECTION("seeded generators are reproducible and parameterized") {
    StrategySpec a = parse_strategy("random-granular(seed=7, initial=4, max-mult=2)", ctx);
    StrategySpec b = parse_strategy("random-granular(seed=7, initial=4, max-mult=2)", ctx);
    StrategySpec c = parse_strategy("random-granular(seed=8, initial=4, max-mult=2)", ctx);
    CHECK(a.initial == 4);
    CHECK(same_capitals(a, b, 6));
    bool differs = !same_capitals(a, c, 6);
    CHECK(differs);
  }
  SECTION("savers save by default") {
    StrategySpec s = parse_strategy("random-saver(seed=3, initial=9)", ctx);
    StrategyCursor cur(s);
    for (int i = 0; i < 64; ++i) cur.step(i % 2);
    CHECK(cur.savings_total() > 0);
  }
  SECTION("nesting carries descriptors through transforms") {
    StrategySpec s = parse_strategy("normalize(of=savings-trick(of=random-granular(seed=5, initial=3)))", ctx);
    CHECK(is_integer(s.initial));
    StrategySpec t = parse_strategy("lim(of=nq-saver(of=unit-bet, q=2), q=1/2)", ctx);
    CHECK(t.initial >= 0);
  }
  SECTION("hedge descriptors") {
    StrategySpec main_s = parse_strategy("hedge-main(of=unit-bet, envelope=1)", ctx);
    CHECK(main_s.initial == 2);  // base initial 1, plus the one-unit lead
    StrategySpec backup_s = parse_strategy("hedge-backup(of=unit-bet, rho=-)", ctx);
    CHECK(backup_s.initial == 1);
  }
  SECTION("fine saver needs a fine schedule") {
    DescriptorContext fine{GranularitySpec::linear(1, 0), ""};
    StrategySpec s = parse_strategy("fine-saver(of=constant(6), bound=5)", fine);
    CHECK(s.initial == 31);  // floor(5 * 6) + 1
  }
  SECTION("malformed descriptors are configuration errors") {
    CHECK_THROWS_AS(parse_strategy("no-such-strategy", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("constant(1", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("constant()", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("constant(1,2)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("savings-trick()", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("random-granular(bet=3/2)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("random-granular(volume=11)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("fine-saver(of=unit-bet, bound=0)", ctx), ConfigError);
    CHECK_THROWS_AS(parse_strategy("", ctx), ConfigError);
  }
}

TEST_CASE("strategy tables") {
  GranularitySpec g = GranularitySpec::floor_log();
  DescriptorContext ctx{g, ""};
  StrategySpec src = parse_strategy("random-saver(seed=11, initial=6)", ctx);

  SECTION("write-read round trip preserves behavior") {
    StrategyTable table = tabulate(src, 5, g.describe());
    std::ostringstream os;
    write_table(os, table);
    std::istringstream is(os.str());
    StrategyTable back = read_table(is);
    CHECK(back.depth == 5);
    CHECK(back.granularity == g.describe());
    StrategySpec replay = table_strategy(back);
    CHECK(same_capitals(src, replay, 5));
    // Beyond the tabulated depth the replay idles.
    History deep = History::from_string("0101010");
    CHECK(replay.wager(deep) == 0);
    CHECK(replay.save(deep) == 0);
  }
  SECTION("rewriting a parsed table is byte-stable") {
    StrategyTable table = tabulate(src, 4, g.describe());
    std::ostringstream first;
    write_table(first, table);
    std::istringstream is(first.str());
    std::ostringstream second;
    write_table(second, read_table(is));
    CHECK(first.str() == second.str());
  }
  SECTION("structural damage is rejected") {
    StrategyTable table = tabulate(src, 3, g.describe());
    std::ostringstream os;
    write_table(os, table);
    std::string text = os.str();

    std::string broken = text;
    std::size_t pos = broken.find("\n-,");  // the root row
    REQUIRE(pos != std::string::npos);
    broken.replace(pos + 3, broken.find(',', pos + 3) - pos - 3, "99");
    std::istringstream bad(broken);
    CHECK_THROWS_AS(read_table(bad), ConfigError);

    std::istringstream not_a_table("hello\nworld\n");
    CHECK_THROWS_AS(read_table(not_a_table), ConfigError);

    std::istringstream empty("");
    CHECK_THROWS_AS(read_table(empty), ConfigError);
  }
  SECTION("tables load through the descriptor language") {
    auto dir = fresh_dir("tables");
    StrategyTable table = tabulate(src, 4, g.describe());
    std::ofstream os(dir / "s.tbl");
    write_table(os, table);
    os.close();
    DescriptorContext rel{g, dir.string()};
    StrategySpec replay = parse_strategy("table(s.tbl)", rel);
    CHECK(same_capitals(src, replay, 4));
    CHECK_THROWS_AS(parse_strategy("table(missing.tbl)", rel), ConfigError);
  }
}

TEST_CASE("run configuration files") {
  SECTION("comments, repeats, and embedded equals signs") {
    std::istringstream is(
        "# demo configuration\n"
        "mode = duel\n"
        "granularity = constant(0)   # coarse\n"
        "strategy = lim(of=unit-bet, q=1/2)\n"
        "strategy = constant(2)\n"
        "\n"
        "horizon = 40\n");
    RunConfig cfg = read_config(is);
    CHECK(cfg.get("mode") == "duel");
    CHECK(cfg.get("granularity") == "constant(0)");
    CHECK(cfg.get("horizon") == "40");
    CHECK(cfg.get("absent", "fallback") == "fallback");
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[0] == "lim(of=unit-bet, q=1/2)");
    CHECK(cfg.strategies[1] == "constant(2)");
  }
  SECTION("diagnostics carry line numbers") {
    std::istringstream no_eq("mode = duel\njust words\n");
    try {
      read_config(no_eq);
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream no_key("= value\n");
    CHECK_THROWS_AS(read_config(no_key), ConfigError);
  }
}

TEST_CASE("runner modes and exit codes") {
  SECTION("duel run succeeds and reports the adversary's bookkeeping") {
    RunOptions opt;
    opt.mode = "duel";
    opt.g = GranularitySpec::constant(0);
    opt.strategies = {"constant(2)"};
    opt.horizon = 40;
    RunResult res = run(opt);
    CHECK(res.exit_code == 0);
    CHECK(res.summary["mode"] == "duel");
    CHECK(res.summary["all_passed"] == true);
    CHECK(res.summary["x"] == std::string(40, '1'));  // a mute saver never wins a bet
    CHECK(res.summary["coarse_warning"] == false);
    REQUIRE(res.artifacts.size() == 1);
    CHECK(res.artifacts[0].first == "trajectory.csv");
    const std::string& csv = res.artifacts[0].second;
    CHECK(count_lines(csv) == 41);
    CHECK(csv.rfind("step,outcome", 0) == 0);
    CHECK(csv.find(".wager") != std::string::npos);
  }
  SECTION("universal run layers saver statistics") {
    RunOptions opt;
    opt.mode = "universal";
    opt.g = GranularitySpec::constant(0);
    opt.strategies = {"constant(2)", "constant(3)"};
    opt.timidity = {Int(2), Int(2)};
    opt.horizon = 30;
    RunResult res = run(opt);
    CHECK(res.exit_code == 0);
    CHECK(res.summary["levels"].size() == 2);
    CHECK(res.summary["all_passed"] == true);
  }
  SECTION("hedge run on an explicit path") {
    RunOptions opt;
    opt.mode = "hedge";
    opt.g = GranularitySpec::floor_log();
    opt.path_bits = std::string(15, '1') + std::string(8, '0');
    RunResult res = run(opt);
    CHECK(res.exit_code == 0);
    CHECK(res.summary["t_failures"] == 1);
    CHECK(res.summary["t_successes"] == 0);
    CHECK(res.summary["final_phase"] == "t-failed-ending");
    CHECK(res.summary["final_c"] == "1/2");
    CHECK(res.summary["backup_savings"][0]["saved"] == 1);
  }
  SECTION("transform run emits a table artifact") {
    RunOptions opt;
    opt.mode = "transform";
    opt.kind = "normalize";
    opt.g = GranularitySpec::floor_log();
    opt.strategies = {"random-granular(seed=2, initial=5/2)"};
    opt.depth = 5;
    RunResult res = run(opt);
    CHECK(res.exit_code == 0);
    REQUIRE(res.artifacts.size() == 1);
    CHECK(res.artifacts[0].first == "derived.tbl");
    std::istringstream is(res.artifacts[0].second);
    StrategyTable table = read_table(is);
    CHECK(table.depth == 5);
    CHECK(is_integer(table.initial));
  }
  SECTION("verify flags a non-granular table with a witness") {
    auto dir = fresh_dir("verify");
    {
      StrategySpec third = make_martingale(1, [](const History&) { return Rational(1, 3); });
      StrategyTable table = tabulate(third, 2, "constant(0)");
      std::ofstream os(dir / "bad.tbl");
      write_table(os, table);
    }
    RunOptions opt;
    opt.mode = "verify";
    opt.input = (std::filesystem::path(dir) / "bad.tbl").string();
    RunResult res = run(opt);
    CHECK(res.exit_code == 1);
    bool found = false;
    for (const auto& c : res.summary["checks"]) {
      if (c["name"] == "granular") {
        found = true;
        CHECK(c["passed"] == false);
        CHECK(c["witness"] == "-");  // the root already wagers off-grid
      }
    }
    CHECK(found);
  }
  SECTION("verify accepts a timid strategy under its envelope") {
    RunOptions opt;
    opt.mode = "verify";
    opt.g = GranularitySpec::floor_log();
    opt.strategies = {"unit-bet"};
    opt.timidity = {Int(1)};
    opt.depth = 6;
    RunResult res = run(opt);
    CHECK(res.exit_code == 0);
    CHECK(res.summary["timidity"] == "1");
  }
  SECTION("configuration problems exit with code 2") {
    RunOptions opt;
    opt.mode = "no-such-mode";
    RunResult res = run(opt);
    CHECK(res.exit_code == 2);
    CHECK(res.summary.contains("error"));

    RunOptions opt2;
    opt2.mode = "duel";
    opt2.strategies = {"constant(nonsense)"};
    RunResult res2 = run(opt2);
    CHECK(res2.exit_code == 2);

    RunOptions opt3;
    opt3.mode = "transform";
    opt3.kind = "mystify";
    opt3.strategies = {"constant(1)"};
    RunResult res3 = run(opt3);
    CHECK(res3.exit_code == 2);
  }
  SECTION("gen is deterministic and writes one table per strategy") {
    RunOptions opt;
    opt.mode = "gen";
    opt.g = GranularitySpec::floor_sqrt();
    opt.strategies = {"random-granular(seed=1)", "random-saver(seed=2, initial=3)"};
    opt.depth = 4;
    RunResult first = run(opt);
    RunResult second = run(opt);
    CHECK(first.exit_code == 0);
    REQUIRE(first.artifacts.size() == 2);
    CHECK(first.artifacts[0].first == "strategy-0.tbl");
    CHECK(first.artifacts[1].first == "strategy-1.tbl");
    CHECK(first.artifacts[0].second == second.artifacts[0].second);
    CHECK(first.artifacts[1].second == second.artifacts[1].second);
    CHECK(first.summary.dump() == second.summary.dump());
  }
  SECTION("artifacts land on disk next to the summary") {
    auto dir = fresh_dir("artifacts");
    RunOptions opt;
    opt.mode = "gen";
    opt.g = GranularitySpec::constant(1);
    opt.strategies = {"unit-bet"};
    opt.depth = 3;
    RunResult res = run(opt);
    write_artifacts(res, dir.string());
    CHECK(std::filesystem::exists(dir / "strategy-0.tbl"));
    REQUIRE(std::filesystem::exists(dir / "summary.json"));
    std::ifstream is(dir / "summary.json");
    std::stringstream buf;
    buf << is.rdbuf();
    CHECK(buf.str() == res.summary.dump(2) + "\n");
  }
}

TEST_CASE("trajectory CSV layout") {
  SECTION("universal runs add per-level columns") {
    RunOptions opt;
    opt.mode = "universal";
    opt.g = GranularitySpec::constant(0);
    opt.strategies = {"constant(2)"};
    opt.timidity = {Int(3)};
    opt.horizon = 5;
    RunResult res = run(opt);
    REQUIRE(res.exit_code == 0);
    std::istringstream csv(res.artifacts[0].second);
    std::string header;
    REQUIRE(std::getline(csv, header));
    CHECK(header.find("level0.defined") != std::string::npos);
    std::string row;
    std::size_t rows = 0;
    while (std::getline(csv, row)) {
      ++rows;
      CHECK(row.find(',') != std::string::npos);
    }
    CHECK(rows == 5);
  }
  SECTION("duel runs add the division columns") {
    RunOptions opt;
    opt.mode = "duel";
    opt.g = GranularitySpec::constant(0);
    opt.strategies = {"constant(2)"};
    opt.horizon = 5;
    RunResult res = run(opt);
    REQUIRE(res.exit_code == 0);
    std::istringstream csv(res.artifacts[0].second);
    std::string header;
    REQUIRE(std::getline(csv, header));
    CHECK(header.find(",q,r") != std::string::npos);
  }
  SECTION("hedge runs add the phase column") {
    RunOptions opt;
    opt.mode = "hedge";
    opt.g = GranularitySpec::floor_log();
    opt.path_bits = "1100";
    RunResult res = run(opt);
    REQUIRE(res.exit_code == 0);
    std::istringstream csv(res.artifacts[0].second);
    std::string header;
    REQUIRE(std::getline(csv, header));
    CHECK(header.find(",phase") != std::string::npos);
    std::string row;
    REQUIRE(std::getline(csv, row));
    CHECK(row.rfind("0,1,", 0) == 0);
    CHECK(row.find("neutral") != std::string::npos);
  }
}
