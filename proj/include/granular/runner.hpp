#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "granular/adversary.hpp"
#include "granular/checks.hpp"
#include "granular/config.hpp"
#include "granular/descriptor.hpp"
#include "granular/generators.hpp"
#include "granular/hedging.hpp"
#include "granular/table_format.hpp"
#include "granular/trajectory.hpp"
#include "granular/transforms.hpp"

namespace granular {

using json = nlohmann::ordered_json;

struct RunOptions {
  std::string mode;
  GranularitySpec g = GranularitySpec::constant(0);
  std::vector<std::string> strategies;
  std::vector<Int> timidity;
  std::size_t horizon = 256;
  std::size_t depth = 8;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string path_bits;      // hedge: explicit outcome string, else seeded
  std::string kind;           // transform: savings-trick|normalize|lim|nq-saver|fine-saver|cover
  Rational q = 1;             // lim / nq-saver threshold
  Int bound = 5;              // fine-saver integer bound
  Int envelope = 1;           // hedge timidity constant
  std::string input;          // verify: table path
  std::string base_dir;       // relative table paths resolve against this
};

struct RunResult {
  int exit_code = 0;  // 0 checks passed, 1 checks failed, 2 unusable configuration
  json summary;
  // Artifact name -> contents; caller decides where (and whether) to put them.
  std::vector<std::pair<std::string, std::string>> artifacts;
};

namespace detail {

inline json check_json(const InvariantReport& report) {
  json arr = json::array();
  for (const auto& c : report.checks) {
    json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    if (!c.passed) {
      e["witness"] = !c.witness ? "-" : (c.witness->empty() ? "-" : c.witness->to_string());
      e["detail"] = c.detail;
    }
    arr.push_back(e);
  }
  return arr;
}

inline std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream os;
  bool any_qr = false, any_phase = false;
  std::size_t level_count = 0;
  for (const auto& row : t.rows) {
    if (row.q.has_value() || row.r.has_value()) any_qr = true;
    if (!row.phase.empty()) any_phase = true;
    if (row.levels.size() > level_count) level_count = row.levels.size();
  }
  os << "step,outcome";
  for (const auto& label : t.labels)
    os << "," << label << ".capital," << label << ".wager," << label << ".save," << label
       << ".savings";
  if (any_qr) os << ",q,r";
  for (std::size_t i = 0; i < level_count; ++i)
    os << ",level" << i << ".defined,level" << i << ".m,level" << i << ".q,level" << i << ".r";
  if (any_phase) os << ",phase";
  os << "\n";
  for (const auto& row : t.rows) {
    os << row.step << "," << row.outcome;
    for (const auto& s : row.strategies)
      os << "," << fraction_string(s.capital_after) << "," << fraction_string(s.wager) << ","
         << fraction_string(s.save) << "," << fraction_string(s.savings_total);
    if (any_qr) {
      os << ",";
      if (row.q.has_value()) os << row.q->str();
      os << ",";
      if (row.r.has_value()) os << fraction_string(*row.r);
    }
    for (std::size_t i = 0; i < level_count; ++i) {
      if (i < row.levels.size() && row.levels[i].defined) {
        const auto& lv = row.levels[i];
        os << ",1," << fraction_string(lv.m) << "," << lv.q.str() << "," << fraction_string(lv.r);
      } else {
        os << ",0,,,";
      }
    }
    if (any_phase) os << "," << row.phase;
    os << "\n";
  }
  return os.str();
}

inline StrategySpec parse_one_strategy(const RunOptions& opt, const std::string& what) {
  if (opt.strategies.size() != 1)
    throw ConfigError(opt.mode + " needs exactly one strategy (" + what + ")");
  DescriptorContext ctx{opt.g, opt.base_dir};
  return parse_strategy(opt.strategies[0], ctx);
}

inline json common_header(const RunOptions& opt) {
  json j;
  j["mode"] = opt.mode;
  j["granularity"] = opt.g.describe();
  return j;
}

inline RunResult run_duel(const RunOptions& opt) {
  StrategySpec saver = parse_one_strategy(opt, "the saver to defeat");
  DuelResult res = build_sequence(saver, opt.g, opt.horizon);
  RunResult out;
  json j = common_header(opt);
  j["horizon"] = opt.horizon;
  j["saver"] = saver.label;
  j["normalize_shift"] = fraction_string(res.normalize_shift);
  j["coarse_warning"] = res.coarse_warning;
  j["x"] = res.x.to_string();
  j["stabilization_step"] = res.stabilization_step;
  j["q_stable"] = res.q_stable.str();
  j["r_at_stabilization"] = fraction_string(res.r_at_stabilization);
  j["savings_after_stabilization"] = fraction_string(res.savings_after_stabilization);
  j["m_final"] = fraction_string(res.m_final);
  j["t_final"] = fraction_string(res.t_final);
  j["t_savings_final"] = fraction_string(res.t_savings_final);
  j["checks"] = check_json(res.invariants);
  j["all_passed"] = res.invariants.all_passed();
  out.summary = j;
  out.exit_code = res.invariants.all_passed() ? 0 : 1;
  out.artifacts.emplace_back("trajectory.csv", trajectory_csv(res.trajectory));
  return out;
}

inline RunResult run_universal(const RunOptions& opt) {
  if (opt.strategies.empty()) throw ConfigError("universal needs at least one strategy");
  DescriptorContext ctx{opt.g, opt.base_dir};
  std::vector<StrategySpec> savers;
  for (const auto& d : opt.strategies) savers.push_back(parse_strategy(d, ctx));
  std::vector<Int> c = opt.timidity;
  if (c.empty()) c.assign(savers.size(), Int(2));
  UniversalResult res = universal_sequence(savers, c, opt.g, opt.horizon);
  RunResult out;
  json j = common_header(opt);
  j["horizon"] = opt.horizon;
  json names = json::array();
  for (const auto& s : savers) names.push_back(s.label);
  j["savers"] = names;
  json cs = json::array();
  for (const auto& v : c) cs.push_back(v.str());
  j["timidity"] = cs;
  j["x"] = res.x.to_string();
  json levels = json::array();
  for (const auto& st : res.levels) {
    json lv;
    lv["activated"] = st.activated;
    if (st.activated) lv["first_defined_step"] = st.first_defined_step;
    lv["definedness_flaps"] = st.definedness_flaps;
    lv["stabilized"] = st.stabilized;
    if (st.stabilized) {
      lv["stabilization_step"] = st.stabilization_step;
      lv["q_stable"] = st.q_stable.str();
      lv["r_at_stabilization"] = fraction_string(st.r_at_stabilization);
      lv["savings_after_stabilization"] = fraction_string(st.savings_after_stabilization);
    }
    lv["savings_final"] = fraction_string(st.savings_final);
    levels.push_back(lv);
  }
  j["levels"] = levels;
  j["checks"] = check_json(res.invariants);
  j["all_passed"] = res.invariants.all_passed();
  out.summary = j;
  out.exit_code = res.invariants.all_passed() ? 0 : 1;
  out.artifacts.emplace_back("trajectory.csv", trajectory_csv(res.trajectory));
  return out;
}

inline RunResult run_hedge(const RunOptions& opt) {
  StrategySpec base;
  if (opt.strategies.empty()) {
    base = unit_bet_martingale(opt.g);
  } else {
    base = parse_one_strategy(opt, "the base strategy to hedge");
  }
  Hedge hedge(base, opt.g, timidity_envelope(opt.g, opt.envelope));
  History x = opt.path_bits.empty() ? random_path(opt.seed, opt.horizon)
                                    : History::from_string(opt.path_bits);

  Trajectory traj;
  traj.labels = {hedge.main().label, base.label};
  StrategyCursor main_cur(hedge.main());
  StrategyCursor base_cur(base);
  for (std::size_t p = 1; p <= x.size(); ++p) {
    int bit = x.prefix(p).last();
    TrajectoryRecord row;
    row.step = p - 1;
    row.outcome = bit;
    row.strategies.push_back(to_step(main_cur.step(bit)));
    row.strategies.push_back(to_step(base_cur.step(bit)));
    StageState st = hedge.classify(x.prefix(p));
    row.phase = stage_name(st.type);
    row.r = st.r;
    traj.rows.push_back(row);
  }

  CycleReport rep = cycle_report(hedge, x);
  StageState final_state = hedge.classify(x);
  RunResult out;
  json j = common_header(opt);
  j["horizon"] = x.size();
  j["base"] = base.label;
  j["envelope"] = opt.envelope.str();
  if (opt.path_bits.empty()) j["seed"] = opt.seed;
  j["x"] = x.to_string();
  j["t_successes"] = rep.t_successes;
  j["t_failures"] = rep.t_failures;
  json banks = json::array();
  for (const auto& [index, saved] : rep.backup_savings) {
    json b;
    b["index"] = index.empty() ? "-" : index.to_string();
    b["saved"] = saved;
    banks.push_back(b);
  }
  j["backup_savings"] = banks;
  j["intervals"] = rep.intervals.size();
  j["final_phase"] = stage_name(final_state.type);
  j["final_c"] = fraction_string(final_state.c);
  j["final_r"] = fraction_string(final_state.r);
  j["t_final"] = fraction_string(main_cur.capital());
  j["t_savings_final"] = fraction_string(main_cur.savings_total());
  j["all_passed"] = true;  // construction enforces its side conditions by throwing
  out.summary = j;
  out.exit_code = 0;
  out.artifacts.emplace_back("trajectory.csv", trajectory_csv(traj));
  return out;
}

inline RunResult run_transform(const RunOptions& opt) {
  StrategySpec base = parse_one_strategy(opt, "the strategy to transform");
  StrategySpec derived;
  bool expect_granular = false;
  if (opt.kind == "savings-trick") {
    derived = savings_trick(base);
  } else if (opt.kind == "normalize") {
    derived = normalize(base, opt.g);
    expect_granular = true;
  } else if (opt.kind == "lim") {
    derived = lim_transform(base, opt.q);
  } else if (opt.kind == "nq-saver") {
    derived = saver_family_nq(base, opt.q);
  } else if (opt.kind == "fine-saver") {
    derived = fine_saver(base, opt.g, opt.bound).saver;
    expect_granular = true;
  } else if (opt.kind == "cover") {
    derived = cover(base);
  } else {
    throw ConfigError("unknown transform kind '" + opt.kind + "'");
  }
  InvariantReport report = check_supermartingale(derived, opt.depth);
  if (expect_granular) {
    InvariantReport granular_report = check_granular(derived, opt.g, opt.depth);
    for (auto& c : granular_report.checks) report.checks.push_back(c);
  }
  RunResult out;
  json j = common_header(opt);
  j["kind"] = opt.kind;
  j["base"] = base.label;
  j["derived"] = derived.label;
  j["depth"] = opt.depth;
  j["initial"] = fraction_string(derived.initial);
  j["checks"] = check_json(report);
  j["all_passed"] = report.all_passed();
  out.summary = j;
  out.exit_code = report.all_passed() ? 0 : 1;
  std::ostringstream table;
  write_table(table, tabulate(derived, opt.depth, opt.g.describe()));
  out.artifacts.emplace_back("derived.tbl", table.str());
  return out;
}

inline RunResult run_verify(const RunOptions& opt) {
  StrategySpec spec;
  std::string granularity = opt.g.describe();
  std::string source;
  if (!opt.input.empty()) {
    std::string path = opt.input;
    if (!path.empty() && path[0] != '/' && !opt.base_dir.empty())
      path = opt.base_dir + "/" + path;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table '" + path + "'");
    StrategyTable table = read_table(in);
    if (!table.granularity.empty()) granularity = table.granularity;
    spec = table_strategy(std::move(table));
    source = opt.input;
  } else {
    spec = parse_one_strategy(opt, "the strategy to verify");
    source = spec.label;
  }
  GranularitySpec g = GranularitySpec::parse(granularity);
  InvariantReport report = check_supermartingale(spec, opt.depth);
  InvariantReport granular_report =
      opt.timidity.empty() ? check_granular(spec, g, opt.depth)
                           : check_timid(spec, g, opt.timidity.front(), opt.depth);
  for (auto& c : granular_report.checks) report.checks.push_back(c);
  RunResult out;
  json j = common_header(opt);
  j["granularity"] = granularity;
  j["source"] = source;
  j["depth"] = opt.depth;
  if (!opt.timidity.empty()) j["timidity"] = opt.timidity.front().str();
  j["checks"] = check_json(report);
  j["all_passed"] = report.all_passed();
  out.summary = j;
  out.exit_code = report.all_passed() ? 0 : 1;
  return out;
}

inline RunResult run_gen(const RunOptions& opt) {
  if (opt.strategies.empty()) throw ConfigError("gen needs at least one strategy to tabulate");
  DescriptorContext ctx{opt.g, opt.base_dir};
  RunResult out;
  json j = common_header(opt);
  j["depth"] = opt.depth;
  json files = json::array();
  for (std::size_t i = 0; i < opt.strategies.size(); ++i) {
    StrategySpec spec = parse_strategy(opt.strategies[i], ctx);
    std::ostringstream table;
    write_table(table, tabulate(spec, opt.depth, opt.g.describe()));
    std::string name = "strategy-" + std::to_string(i) + ".tbl";
    out.artifacts.emplace_back(name, table.str());
    json f;
    f["file"] = name;
    f["label"] = spec.label;
    f["initial"] = fraction_string(spec.initial);
    files.push_back(f);
  }
  j["files"] = files;
  j["all_passed"] = true;
  out.summary = j;
  out.exit_code = 0;
  return out;
}

}  // namespace detail

// Runs one mode. Configuration problems surface as exit code 2 with the
// reason in the summary; failed checks as exit code 1.
inline RunResult run(const RunOptions& opt) {
  try {
    if (opt.mode == "duel") return detail::run_duel(opt);
    if (opt.mode == "universal") return detail::run_universal(opt);
    if (opt.mode == "hedge") return detail::run_hedge(opt);
    if (opt.mode == "transform") return detail::run_transform(opt);
    if (opt.mode == "verify") return detail::run_verify(opt);
    if (opt.mode == "gen") return detail::run_gen(opt);
    throw ConfigError("unknown mode '" + opt.mode + "'");
  } catch (const std::exception& e) {
    RunResult out;
    out.exit_code = 2;
    json j;
    j["mode"] = opt.mode;
    j["error"] = e.what();
    out.summary = j;
    return out;
  }
}

// Writes the artifacts plus summary.json under dir (created if needed).
inline void write_artifacts(const RunResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, contents] : result.artifacts) {
    std::ofstream os(dir + "/" + name, std::ios::binary);
    if (!os) throw ConfigError("cannot write artifact '" + dir + "/" + name + "'");
    os << contents;
  }
  std::ofstream os(dir + "/summary.json", std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + dir + "/summary.json'");
  os << result.summary.dump(2) << "\n";
}

}  // namespace granular
