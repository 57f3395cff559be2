#pragma once

// Experiment configuration: the flat key=value file format and validation.
//
//   # comment
//   x=100
//   strategy=optimal:0.5+khe:0.5
//   seeds=1..20
//   sweep.K=50,100,200,400
//
// Lists are comma separated; `a..b` expands to an inclusive integer range.
// Keys prefixed with `sweep.` declare sweep axes over any plain key.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rsl/learners.hpp"
#include "rsl/payoff_games.hpp"
#include "rsl/rewiring.hpp"
#include "rsl/social_net.hpp"

namespace rsl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TopologyName { Regular, SmallWorld, ScaleFree };

inline std::string_view to_string(TopologyName t) {
  switch (t) {
    case TopologyName::Regular: return "regular";
    case TopologyName::SmallWorld: return "smallworld";
    case TopologyName::ScaleFree: return "scalefree";
  }
  return "?";
}

struct StrategyShare {
  RewiringStrategy strategy;
  double fraction;
};

struct SimConfig {
  std::size_t agents = 100;  // x
  std::size_t degree = 4;    // y
  std::size_t reach = 12;    // z
  TopologyName topology = TopologyName::Regular;
  double ws_beta = 0.1;
  int ba_attach = 0;  // 0: degree / 2
  DistFamily family = DistFamily::Mixed;
  double phi = 0.01;
  double cost = 20.0;
  double sight = 400.0;  // K
  std::uint64_t rounds = 1000;
  LearnerKind learner = LearnerKind::FP;
  std::vector<StrategyShare> strategy_mix{{RewiringStrategy::Optimal, 1.0}};
  std::vector<std::uint64_t> seeds{1};
  ExplorationSchedule exploration{};
  LearnerParams learner_params{};
  std::uint64_t record_every = 1;
  bool check_invariants = false;
};

inline TopologyKind topology_kind(const SimConfig& c) {
  const int y = static_cast<int>(c.degree);
  switch (c.topology) {
    case TopologyName::Regular: return Regular{y};
    case TopologyName::SmallWorld: return SmallWorld{y, c.ws_beta};
    case TopologyName::ScaleFree: return ScaleFree{c.ba_attach > 0 ? c.ba_attach : std::max(1, y / 2)};
  }
  throw std::logic_error("unreachable topology");
}

inline std::string format_strategy_mix(const std::vector<StrategyShare>& mix) {
  if (mix.size() == 1) {
    std::string s(to_string(mix.front().strategy));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
  }
  std::ostringstream os;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    std::string s(to_string(mix[k].strategy));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    os << (k ? "+" : "") << s << ":" << mix[k].fraction;
  }
  return os.str();
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    // Accept integral values written in floating notation, e.g. 1e5.
    const double d = parse_double(key, v);
    if (d < 0.0 || std::floor(d) != d || d > 1.8e19) {
      throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + v + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& v) {
  std::vector<std::uint64_t> seeds;
  if (trim(v).empty()) return seeds;
  for (const auto& item : split(v, ',')) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const auto lo = parse_uint(key, trim(item.substr(0, dots)));
      const auto hi = parse_uint(key, trim(item.substr(dots + 2)));
      if (hi < lo) throw ConfigError("key '" + key + "': empty range '" + item + "'");
      if (hi - lo > 1'000'000) throw ConfigError("key '" + key + "': range too large");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_uint(key, item));
    }
  }
  return seeds;
}

inline std::vector<StrategyShare> parse_strategy_mix(const std::string& key, const std::string& v) {
  std::vector<StrategyShare> mix;
  for (const auto& part : split(v, '+')) {
    const auto colon = part.find(':');
    const std::string name = trim(part.substr(0, colon));
    double fraction = 1.0;
    if (colon != std::string::npos) {
      const std::string frac = trim(part.substr(colon + 1));
      if (const auto slash = frac.find('/'); slash != std::string::npos) {
        fraction = parse_double(key, trim(frac.substr(0, slash))) / parse_double(key, trim(frac.substr(slash + 1)));
      } else {
        fraction = parse_double(key, frac);
      }
    }
    try {
      mix.push_back({parse_rewiring_strategy(name), fraction});
    } catch (const std::invalid_argument& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
  }
  return mix;
}

}  // namespace detail

/// Applies one key=value setting. Throws ConfigError for unknown keys or
/// malformed values.
inline void apply_setting(SimConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  try {
    if (key == "x") c.agents = parse_uint(key, value);
    else if (key == "y") c.degree = parse_uint(key, value);
    else if (key == "z") c.reach = parse_uint(key, value);
    else if (key == "topology") {
      if (value == "regular") c.topology = TopologyName::Regular;
      else if (value == "smallworld") c.topology = TopologyName::SmallWorld;
      else if (value == "scalefree") c.topology = TopologyName::ScaleFree;
      else throw ConfigError("key 'topology': unknown topology '" + value + "'");
    } else if (key == "ws_beta") c.ws_beta = parse_double(key, value);
    else if (key == "ba_attach") c.ba_attach = static_cast<int>(parse_uint(key, value));
    else if (key == "family") c.family = parse_dist_family(value);
    else if (key == "phi") c.phi = parse_double(key, value);
    else if (key == "cost") c.cost = parse_double(key, value);
    else if (key == "K") c.sight = parse_double(key, value);
    else if (key == "rounds") c.rounds = parse_uint(key, value);
    else if (key == "learner") c.learner = parse_learner_kind(value);
    else if (key == "strategy") c.strategy_mix = parse_strategy_mix(key, value);
    else if (key == "seeds") c.seeds = parse_seed_list(key, value);
    else if (key == "exploration") c.exploration.kind = parse_exploration_kind(value);
    else if (key == "explore_start") c.exploration.start = parse_double(key, value);
    else if (key == "explore_end") c.exploration.end = parse_double(key, value);
    else if (key == "explore_fraction") c.exploration.fraction = parse_double(key, value);
    else if (key == "step") c.learner_params.step = parse_double(key, value);
    else if (key == "delta_win") c.learner_params.delta_win = parse_double(key, value);
    else if (key == "delta_lose") c.learner_params.delta_lose = parse_double(key, value);
    else if (key == "record_every") c.record_every = parse_uint(key, value);
    else if (key == "check_invariants") c.check_invariants = parse_bool(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

/// Throws ConfigError naming the offending key.
inline void validate(const SimConfig& c) {
  const auto fail = [](const std::string& key, const std::string& msg) {
    throw ConfigError("key '" + key + "': " + msg);
  };
  if (c.agents < 2) fail("x", "need at least 2 agents");
  if (c.topology != TopologyName::ScaleFree) {
    if (c.degree < 2 || c.degree % 2 != 0) fail("y", "ring-based topologies need an even degree >= 2");
    if (c.degree >= c.agents) fail("y", "degree must be smaller than the agent count");
  } else {
    const int m = c.ba_attach > 0 ? c.ba_attach : std::max<int>(1, static_cast<int>(c.degree) / 2);
    if (static_cast<std::size_t>(m) + 1 > c.agents) fail("ba_attach", "too large for the agent count");
  }
  if (c.reach < c.degree) fail("z", "reachable-set size z must be >= y");
  if (c.reach > c.agents - 1) fail("z", "reachable-set size z must be <= x-1");
  if (!(c.ws_beta >= 0.0 && c.ws_beta <= 1.0)) fail("ws_beta", "must lie in [0, 1]");
  if (!(c.phi >= 0.0 && c.phi <= 1.0)) fail("phi", "must lie in [0, 1]");
  if (!(c.cost >= 0.0)) fail("cost", "must be >= 0");
  if (!(c.sight >= 1.0)) fail("K", "must be >= 1");
  if (c.strategy_mix.empty()) fail("strategy", "at least one strategy required");
  double total = 0.0;
  for (const auto& s : c.strategy_mix) {
    if (!(s.fraction >= 0.0)) fail("strategy", "fractions must be nonnegative");
    total += s.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("strategy", "fractions must sum to 1");
  const double start = c.exploration.start.value_or(default_explore_start(c.learner));
  if (!(start >= 0.0)) fail("explore_start", "must be >= 0");
  if (!(c.exploration.end >= 0.0)) fail("explore_end", "must be >= 0");
  if (c.exploration.kind == ExplorationKind::Epsilon && start > 1.0) fail("explore_start", "epsilon must lie in [0, 1]");
  if (c.exploration.kind == ExplorationKind::Epsilon && c.exploration.end > 1.0) fail("explore_end", "epsilon must lie in [0, 1]");
  if (!(c.exploration.fraction >= 0.0 && c.exploration.fraction <= 1.0)) fail("explore_fraction", "must lie in [0, 1]");
  if (!(c.learner_params.step > 0.0 && c.learner_params.step <= 1.0)) fail("step", "must lie in (0, 1]");
  if (!(c.learner_params.delta_win > 0.0)) fail("delta_win", "must be > 0");
  if (!(c.learner_params.delta_win < c.learner_params.delta_lose)) fail("delta_lose", "must exceed delta_win");
  if (c.record_every < 1) fail("record_every", "must be >= 1");
}

/// Base configuration plus named sweep axes (cartesian product).
struct SweepSpec {
  SimConfig base;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::size_t max_grid_points = 10'000;

  std::size_t grid_size() const {
    std::size_t n = 1;
    for (const auto& [_, values] : axes) n *= values.size();
    return n;
  }

  void set_axis(const std::string& key, std::vector<std::string> values) {
    for (auto& [k, v] : axes) {
      if (k == key) {
        v = std::move(values);
        return;
      }
    }
    axes.emplace_back(key, std::move(values));
  }
};

inline constexpr double kDefaultCostPerRound = 0.1;

/// Applies key=value text on top of `spec`. `origin` labels error messages.
inline void parse_config_into(SweepSpec& spec, std::istream& in, const std::string& origin = "<config>") {
  bool sight_given = false;
  bool cost_given = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    try {
      if (key.rfind("sweep.", 0) == 0) {
        const std::string axis = key.substr(6);
        SimConfig probe;
        auto values = detail::split(value, ',');
        for (const auto& v : values) apply_setting(probe, axis, v);
        spec.set_axis(axis, std::move(values));
      } else if (key == "max_grid_points") {
        spec.max_grid_points = detail::parse_uint(key, value);
      } else {
        apply_setting(spec.base, key, value);
        if (key == "K") sight_given = true;
        if (key == "cost") cost_given = true;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (cost_given && !sight_given && spec.base.cost > 0.0) {
    spec.base.sight = std::max(1.0, spec.base.cost / kDefaultCostPerRound);
  }
  validate(spec.base);
}

inline SweepSpec parse_config(std::istream& in, const std::string& origin = "<config>") {
  SweepSpec spec;
  parse_config_into(spec, in, origin);
  return spec;
}

inline SweepSpec parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  std::istringstream in(text);
  return parse_config(in, origin);
}

inline void load_config_into(SweepSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  parse_config_into(spec, in, path);
}

inline SweepSpec load_config(const std::string& path) {
  SweepSpec spec;
  load_config_into(spec, path);
  return spec;
}

/// A config file without sweep axes.
inline SimConfig load_sim_config(const std::string& path) {
  auto spec = load_config(path);
  if (!spec.axes.empty()) throw ConfigError(path + ": sweep axes are not allowed here");
  return spec.base;
}

}  // namespace rsl
