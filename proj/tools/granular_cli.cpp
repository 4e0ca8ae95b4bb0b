// Command line front end: simulate coarse-granularity duels, the universal
// adversary, and hedged strategy pairs; apply savings transforms; verify and
// generate strategy tables.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "granular/granular.hpp"

namespace {

struct CliState {
  std::string config_path;
  std::string granularity;
  std::vector<std::string> strategies;
  std::vector<std::string> timidity;
  std::string horizon, depth, seed, q, bound, envelope;
  std::string out_dir, path_bits, kind, input;
};

void add_common(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "key=value run configuration file");
  cmd->add_option("-g,--granularity", st.granularity,
                  "granularity schedule: constant(k), linear(a,b), floor-log, floor-sqrt, "
                  "table(g0,g1,...)");
  cmd->add_option("-s,--strategy", st.strategies, "strategy descriptor (repeatable)");
  cmd->add_option("-o,--out-dir", st.out_dir, "directory for trajectory.csv / summary.json");
  cmd->add_option("--depth", st.depth, "exhaustive check / table depth");
  cmd->add_option("--horizon", st.horizon, "number of simulated steps");
  cmd->add_option("--seed", st.seed, "seed for generated randomness");
}

granular::RunOptions build_options(const std::string& mode, const CliState& st) {
  granular::RunOptions opt;
  opt.mode = mode;

  granular::RunConfig cfg;
  if (!st.config_path.empty()) {
    std::ifstream in(st.config_path);
    if (!in) throw granular::ConfigError("cannot open config '" + st.config_path + "'");
    cfg = granular::read_config(in);
    std::size_t slash = st.config_path.find_last_of('/');
    if (slash != std::string::npos) opt.base_dir = st.config_path.substr(0, slash);
  }

  auto pick = [&cfg](const std::string& flag, const std::string& key,
                     const std::string& fallback) {
    return !flag.empty() ? flag : cfg.get(key, fallback);
  };

  opt.g = granular::GranularitySpec::parse(pick(st.granularity, "granularity", "constant(0)"));
  opt.strategies = st.strategies.empty() ? cfg.strategies : st.strategies;
  opt.horizon = std::stoull(pick(st.horizon, "horizon", "256"));
  opt.depth = std::stoull(pick(st.depth, "depth", "8"));
  opt.seed = std::stoull(pick(st.seed, "seed", "0"));
  opt.path_bits = pick(st.path_bits, "path", "");
  opt.kind = pick(st.kind, "kind", "");
  opt.q = granular::parse_rational(pick(st.q, "q", "1"));
  opt.bound = granular::Int(pick(st.bound, "bound", "5"));
  opt.envelope = granular::Int(pick(st.envelope, "envelope", "1"));
  opt.input = pick(st.input, "input", "");
  opt.out_dir = !st.out_dir.empty() ? st.out_dir : cfg.get("out-dir", "");

  std::string timidity_csv;
  for (const auto& t : st.timidity) timidity_csv += (timidity_csv.empty() ? "" : ",") + t;
  if (timidity_csv.empty()) timidity_csv = cfg.get("timidity", "");
  if (!timidity_csv.empty())
    for (const auto& part : granular::detail::split(timidity_csv, ','))
      opt.timidity.emplace_back(granular::detail::trimmed(part));
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulate and verify granular betting strategies"};
  app.require_subcommand(1);

  CliState st;
  auto* duel = app.add_subcommand(
      "duel", "build an outcome sequence that keeps one saver's savings bounded");
  auto* universal = app.add_subcommand(
      "universal", "build one outcome sequence against several timid savers at once");
  auto* hedge =
      app.add_subcommand("hedge", "run a hedged main/backup pair over an outcome path");
  auto* transform =
      app.add_subcommand("transform", "derive a saving strategy and tabulate it");
  auto* verify = app.add_subcommand("verify", "re-check a strategy table or descriptor");
  auto* gen = app.add_subcommand("gen", "tabulate seeded random strategies");

  for (auto* cmd : {duel, universal, hedge, transform, verify, gen}) add_common(cmd, st);
  universal->add_option("--timidity", st.timidity,
                        "per-saver timidity constants, e.g. 2,3,4 (repeatable)");
  hedge->add_option("--path", st.path_bits, "explicit outcome bits, e.g. 0110 (else seeded)");
  hedge->add_option("--envelope", st.envelope, "wager envelope constant C in C*2^-g(n)");
  transform->add_option("--kind", st.kind,
                        "savings-trick | normalize | lim | nq-saver | fine-saver | cover");
  transform->add_option("--q", st.q, "threshold for lim / nq-saver");
  transform->add_option("--bound", st.bound, "integer bound for fine-saver");
  verify->add_option("--input", st.input, "strategy table to re-check");
  verify->add_option("--timidity", st.timidity, "check wagers against C*granule too");

  CLI11_PARSE(app, argc, argv);

  std::string mode = app.get_subcommands().front()->get_name();
  granular::RunResult result;
  try {
    granular::RunOptions opt = build_options(mode, st);
    result = granular::run(opt);
    if (!opt.out_dir.empty() && result.exit_code != 2)
      granular::write_artifacts(result, opt.out_dir);
  } catch (const std::exception& e) {
    granular::json j;
    j["mode"] = mode;
    j["error"] = e.what();
    result.summary = j;
    result.exit_code = 2;
  }
  std::cout << result.summary.dump(2) << "\n";
  return result.exit_code;
}
