#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "granular/adversary.hpp"
#include "granular/errors.hpp"
#include "granular/generators.hpp"
#include "granular/granularity.hpp"
#include "granular/hedging.hpp"
#include "granular/strategy.hpp"
#include "granular/table_format.hpp"
#include "granular/transforms.hpp"

namespace granular {

// Strategy descriptors, e.g.
//   unit-bet
//   constant(5/2)
//   random-granular(seed=7,initial=2)
//   random-saver(seed=7,initial=4,floor=1,save=1/4)
//   table(saved.tbl)
//   savings-trick(of=constant(2))
//   normalize(of=random-saver(seed=1,initial=2))
//   lim(of=table(m.tbl),q=1)
//   nq-saver(of=table(m.tbl),q=1)
//   fine-saver(of=random-granular(seed=3,initial=2,floor=1),bound=5)
//   hedge-main(of=unit-bet,envelope=1)
//   hedge-backup(of=unit-bet,envelope=1,rho=-)
// The ambient granularity schedule comes from the surrounding run.
struct DescriptorContext {
  GranularitySpec g = GranularitySpec::constant(0);
  std::string base_dir;  // tables resolve relative paths against this
};

namespace detail {

struct Call {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;
};

// Splits "name(arg,key=value,...)" respecting nested parentheses.
inline Call parse_call(const std::string& text) {
  std::string s = trimmed(text);
  if (s.empty()) throw ConfigError("empty strategy descriptor");
  Call call;
  std::size_t open = s.find('(');
  if (open == std::string::npos) {
    call.name = s;
    return call;
  }
  call.name = trimmed(s.substr(0, open));
  if (s.back() != ')')
    throw ConfigError("descriptor '" + text + "' misses its closing parenthesis");
  std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> args;
  int depth = 0;
  std::string cur;
  for (char ch : inner) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (depth < 0) throw ConfigError("unbalanced parentheses in '" + text + "'");
    if (ch == ',' && depth == 0) {
      args.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (depth != 0) throw ConfigError("unbalanced parentheses in '" + text + "'");
  if (!trimmed(cur).empty() || !args.empty()) args.push_back(cur);
  for (const std::string& raw : args) {
    std::string arg = trimmed(raw);
    std::size_t eq = arg.find('=');
    std::size_t nest = arg.find('(');
    if (eq != std::string::npos && (nest == std::string::npos || eq < nest)) {
      std::string key = trimmed(arg.substr(0, eq));
      if (!call.named.emplace(key, trimmed(arg.substr(eq + 1))).second)
        throw ConfigError("duplicate argument '" + key + "' in '" + text + "'");
    } else {
      call.positional.push_back(arg);
    }
  }
  return call;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
}

}  // namespace detail

inline StrategySpec parse_strategy(const std::string& text, const DescriptorContext& ctx);

namespace detail {

inline StrategySpec need_of(const Call& call, const DescriptorContext& ctx) {
  auto it = call.named.find("of");
  if (it == call.named.end()) {
    if (call.positional.size() == 1) return parse_strategy(call.positional[0], ctx);
    throw ConfigError("descriptor '" + call.name + "' needs of=<strategy>");
  }
  return parse_strategy(it->second, ctx);
}

inline std::string named_or(const Call& call, const std::string& key, const std::string& fallback) {
  auto it = call.named.find(key);
  return it == call.named.end() ? fallback : it->second;
}

inline const std::string& need_named(const Call& call, const std::string& key) {
  auto it = call.named.find(key);
  if (it == call.named.end())
    throw ConfigError("descriptor '" + call.name + "' needs " + key + "=...");
  return it->second;
}

}  // namespace detail

inline StrategySpec parse_strategy(const std::string& text, const DescriptorContext& ctx) {
  using detail::Call;
  Call call = detail::parse_call(text);
  const std::string& name = call.name;

  auto gen_options = [&call](bool saver) {
    GenOptions opt;
    opt.label = saver ? "rnd-saver" : "rnd";
    for (const auto& [key, value] : call.named) {
      if (key == "seed")
        opt.seed = detail::parse_u64(value, "seed");
      else if (key == "initial")
        opt.initial = parse_rational(value);
      else if (key == "floor")
        opt.floor = parse_rational(value);
      else if (key == "bet") {
        Rational p = parse_rational(value);
        if (p < 0 || p > 1) throw ConfigError("bet chance must lie in [0,1]");
        opt.bet_num = static_cast<unsigned>(numerator(p));
        opt.bet_den = static_cast<unsigned>(denominator(p));
      } else if (key == "max-mult")
        opt.max_mult = static_cast<unsigned>(detail::parse_u64(value, "max-mult"));
      else if (key == "save" && saver) {
        Rational p = parse_rational(value);
        if (p < 0 || p > 1) throw ConfigError("save chance must lie in [0,1]");
        opt.save_num = static_cast<unsigned>(numerator(p));
        opt.save_den = static_cast<unsigned>(denominator(p));
      } else if (key == "save-max-mult" && saver)
        opt.save_max_mult = static_cast<unsigned>(detail::parse_u64(value, "save-max-mult"));
      else
        throw ConfigError("unknown argument '" + key + "' for '" + call.name + "'");
    }
    if (saver && opt.save_num == 0) {
      opt.save_num = 1;
      opt.save_den = 4;
    }
    return opt;
  };

  if (name == "unit-bet") {
    return unit_bet_martingale(ctx.g);
  }
  if (name == "constant") {
    if (call.positional.size() != 1)
      throw ConfigError("constant(<capital>) needs exactly one value");
    Rational v = parse_rational(call.positional[0]);
    StrategySpec out = make_martingale(v, zero_rule());
    out.label = "constant[" + fraction_string(v) + "]";
    return out;
  }
  if (name == "random-granular") return gen_random_granular(ctx.g, gen_options(false));
  if (name == "random-saver") return gen_random_granular(ctx.g, gen_options(true));
  if (name == "table") {
    if (call.positional.size() != 1) throw ConfigError("table(<path>) needs exactly one path");
    std::string path = call.positional[0];
    if (!path.empty() && path[0] != '/' && !ctx.base_dir.empty())
      path = ctx.base_dir + "/" + path;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table '" + path + "'");
    return table_strategy(read_table(in));
  }
  if (name == "savings-trick") return savings_trick(detail::need_of(call, ctx));
  if (name == "normalize") return normalize(detail::need_of(call, ctx), ctx.g);
  if (name == "lim")
    return lim_transform(detail::need_of(call, ctx),
                         parse_rational(detail::named_or(call, "q", "1")));
  if (name == "nq-saver")
    return saver_family_nq(detail::need_of(call, ctx),
                           parse_rational(detail::named_or(call, "q", "1")));
  if (name == "fine-saver") {
    Rational b = parse_rational(detail::need_named(call, "bound"));
    if (!is_integer(b) || b < 1) throw ConfigError("fine-saver bound must be a positive integer");
    return fine_saver(detail::need_of(call, ctx), ctx.g, numerator(b)).saver;
  }
  if (name == "hedge-main" || name == "hedge-backup") {
    Rational c = parse_rational(detail::named_or(call, "envelope", "1"));
    if (!is_integer(c) || c < 1)
      throw ConfigError("hedge envelope constant must be a positive integer");
    Hedge hedge(detail::need_of(call, ctx), ctx.g, timidity_envelope(ctx.g, numerator(c)));
    if (name == "hedge-main") return hedge.main();
    std::string rho = detail::named_or(call, "rho", "-");
    return hedge.backup(rho == "-" ? History() : History::from_string(rho));
  }
  throw ConfigError("unknown strategy descriptor '" + name + "'");
}

}  // namespace granular
