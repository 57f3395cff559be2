#pragma once

// Campaigns: grid expansion, parallel replicate runs, aggregation and CSV
// output. Results are ordered by (grid point, seed) regardless of how many
// workers execute them.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rsl/config.hpp"
#include "rsl/sim_engine.hpp"

namespace rsl {

struct GridPoint {
  std::string label;
  SimConfig config;
};

/// Cartesian product of the sweep axes, first axis slowest. Every point is
/// validated; a spec without axes yields the single point "base".
inline std::vector<GridPoint> expand_grid(const SweepSpec& spec) {
  const std::size_t n = spec.grid_size();
  if (n > spec.max_grid_points) {
    throw ConfigError("sweep grid has " + std::to_string(n) + " points, above max_grid_points=" +
                      std::to_string(spec.max_grid_points));
  }
  std::vector<GridPoint> out;
  if (spec.axes.empty()) {
    validate(spec.base);
    out.push_back({"base", spec.base});
    return out;
  }
  std::vector<std::size_t> digit(spec.axes.size(), 0);
  for (std::size_t p = 0; p < n; ++p) {
    GridPoint gp{"", spec.base};
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const auto& [key, values] = spec.axes[a];
      apply_setting(gp.config, key, values[digit[a]]);
      gp.label += (a ? ";" : "") + key + "=" + values[digit[a]];
    }
    try {
      validate(gp.config);
    } catch (const ConfigError& e) {
      throw ConfigError("grid point " + gp.label + ": " + e.what());
    }
    out.push_back(std::move(gp));
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      if (++digit[a] < spec.axes[a].second.size()) break;
      digit[a] = 0;
    }
  }
  return out;
}

struct RunResult {
  std::size_t run_id;
  std::size_t grid_index;
  std::string grid_label;
  std::uint64_t seed;
  std::optional<MetricsRecord> record;
  std::string error;
};

struct CampaignResult {
  std::vector<GridPoint> grid;
  std::vector<RunResult> runs;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunResult& r) { return !r.record; }));
  }
};

/// Runs every (grid point, seed) pair on up to `jobs` threads. A failing run
/// records its error and the campaign continues.
inline CampaignResult run_campaign(const SweepSpec& spec, unsigned jobs = 1) {
  CampaignResult result;
  result.grid = expand_grid(spec);
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    for (std::uint64_t seed : result.grid[g].config.seeds) {
      result.runs.push_back({result.runs.size(), g, result.grid[g].label, seed, std::nullopt, {}});
    }
  }
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < result.runs.size(); k = next++) {
      auto& run = result.runs[k];
      try {
        run.record = run_simulation(result.grid[run.grid_index].config, run.seed);
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(result.runs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return result;
}

struct SummaryRow {
  std::string grid_point;
  RewiringStrategy strategy;
  double avg;
  double max;
  double min;
  double mean_rewires;
  double mean_cost;
  std::size_t agents;
};

struct AgentSample {
  RewiringStrategy strategy;
  double payoff;
  std::uint64_t rewires;
  double cost_paid;
};

/// Per strategy: mean, max and min of accumulated payoff over agents.
/// Rows come out in strategy enum order.
inline std::vector<SummaryRow> summarize(const std::string& grid_point, const std::vector<AgentSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: no agent records");
  std::map<RewiringStrategy, SummaryRow> groups;
  for (const auto& s : samples) {
    auto [it, fresh] = groups.try_emplace(s.strategy, SummaryRow{grid_point, s.strategy, 0.0,
                                                                  -std::numeric_limits<double>::infinity(),
                                                                  std::numeric_limits<double>::infinity(), 0.0, 0.0, 0});
    auto& row = it->second;
    row.avg += s.payoff;
    row.max = std::max(row.max, s.payoff);
    row.min = std::min(row.min, s.payoff);
    row.mean_rewires += static_cast<double>(s.rewires);
    row.mean_cost += s.cost_paid;
    ++row.agents;
  }
  std::vector<SummaryRow> out;
  for (auto& [_, row] : groups) {
    const auto n = static_cast<double>(row.agents);
    row.avg /= n;
    row.mean_rewires /= n;
    row.mean_cost /= n;
    out.push_back(row);
  }
  return out;
}

/// Summary rows for every grid point with at least one successful run.
inline std::vector<SummaryRow> summarize(const CampaignResult& result) {
  std::vector<std::vector<AgentSample>> per_point(result.grid.size());
  for (const auto& run : result.runs) {
    if (!run.record) continue;
    for (const auto& a : run.record->agents) {
      per_point[run.grid_index].push_back({a.strategy, a.payoff, a.rewires, a.cost_paid});
    }
  }
  std::vector<SummaryRow> out;
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    if (per_point[g].empty()) continue;
    auto rows = summarize(result.grid[g].label, per_point[g]);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

/// Mean accumulated payoff of `strategy` over the successful runs of a grid
/// point; NaN if no such agent exists.
inline double mean_payoff(const CampaignResult& result, std::size_t grid_index, RewiringStrategy strategy) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& run : result.runs) {
    if (run.grid_index != grid_index || !run.record) continue;
    for (const auto& a : run.record->agents) {
      if (a.strategy != strategy) continue;
      total += a.payoff;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(n);
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000" so equal values always print identically.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void close_csv(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace detail

inline constexpr const char* kRunsHeader =
    "run_id,grid_point,seed,agent_id,strategy,learner,accum_payoff,rewire_count,cost_paid";
inline constexpr const char* kRoundsHeader = "run_id,round,mean_round_payoff,optne_pct,suboptne_pct,rewires";
inline constexpr const char* kSummaryHeader = "grid_point,strategy,avg,max,min";

/// Writes runs.csv, rounds.csv and summary.csv into `dir` (created if
/// missing). Throws std::runtime_error naming the failing path.
inline void emit_csv(const CampaignResult& result, const std::filesystem::path& dir) {
  using detail::csv_field;
  using detail::fixed6;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  const auto runs_path = dir / "runs.csv";
  auto runs = detail::open_csv(runs_path);
  runs << kRunsHeader << '\n';
  const auto rounds_path = dir / "rounds.csv";
  auto rounds = detail::open_csv(rounds_path);
  rounds << kRoundsHeader << '\n';
  for (const auto& run : result.runs) {
    if (!run.record) continue;
    const auto& rec = *run.record;
    for (const auto& a : rec.agents) {
      runs << run.run_id << ',' << csv_field(run.grid_label) << ',' << run.seed << ',' << a.id << ','
           << to_string(a.strategy) << ',' << to_string(rec.learner) << ',' << fixed6(a.payoff) << ','
           << a.rewires << ',' << fixed6(a.cost_paid) << '\n';
    }
    for (const auto& r : rec.rounds) {
      rounds << run.run_id << ',' << r.round << ',' << fixed6(r.mean_round_payoff) << ',' << fixed6(r.optne_pct)
             << ',' << fixed6(r.suboptne_pct) << ',' << r.rewires << '\n';
    }
  }
  detail::close_csv(runs, runs_path);
  detail::close_csv(rounds, rounds_path);

  const auto summary_path = dir / "summary.csv";
  auto summary = detail::open_csv(summary_path);
  summary << kSummaryHeader << '\n';
  for (const auto& row : summarize(result)) {
    summary << csv_field(row.grid_point) << ',' << to_string(row.strategy) << ',' << fixed6(row.avg) << ','
            << fixed6(row.max) << ',' << fixed6(row.min) << '\n';
  }
  detail::close_csv(summary, summary_path);
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

struct Preset {
  const char* name;
  const char* description;
  const char* text;
};

inline constexpr Preset kPresets[] = {
    {"table1", "pure environments, (100,4,z) for z in {8,12,16}, c=20, K=400",
     "x=100\ny=4\nphi=0.01\ncost=20\nK=400\nrounds=1000\nseeds=1..20\n"
     "sweep.z=8,12,16\nsweep.strategy=random,khe,optimal\n"},
    {"fig2a", "sight sweep of the optimal strategy for several costs",
     "x=100\ny=4\nz=12\nphi=0.01\nrounds=1000\nseeds=1..20\nstrategy=optimal\n"
     "sweep.cost=10,20,40\nsweep.K=10,20,50,100,200,400,1000,2000,10000\n"},
    {"fig2b", "cost sweep at K=200, pure environments",
     "x=100\ny=4\nz=12\nphi=0.01\nK=200\nrounds=1000\nseeds=1..20\n"
     "sweep.cost=0,20,40,60,80,100,120,140,160\nsweep.strategy=optimal,khe,random\n"},
    {"fig2c", "cost sweep at K=200, equal three-way mix",
     "x=100\ny=4\nz=12\nphi=0.01\nK=200\nrounds=1000\nseeds=1..20\n"
     "strategy=optimal:1/3+khe:1/3+random:1/3\n"
     "sweep.cost=0,20,40,60,80,100,120,140,160\n"},
    {"fig2d", "K-HE share from 10% to 90% against the optimal strategy",
     "x=100\ny=4\nz=12\nphi=0.01\nK=200\nrounds=1000\nseeds=1..20\n"
     "sweep.cost=20,60,100\n"
     "sweep.strategy=optimal:0.9+khe:0.1,optimal:0.7+khe:0.3,optimal:0.5+khe:0.5,"
     "optimal:0.3+khe:0.7,optimal:0.1+khe:0.9\n"},
    {"fig3", "learner comparison, rare and expensive rewiring",
     "x=100\ny=4\nz=12\nphi=0.0001\ncost=2000\nK=10000\nrounds=100000\nseeds=1..5\n"
     "strategy=optimal\nrecord_every=100\nsweep.learner=fp,jal,jawolf\n"},
};

inline const Preset* find_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return &p;
  }
  return nullptr;
}

inline SweepSpec preset_spec(std::string_view name) {
  const Preset* p = find_preset(name);
  if (p == nullptr) throw ConfigError("unknown preset '" + std::string(name) + "'");
  return parse_config_text(p->text, "preset " + std::string(name));
}

}  // namespace rsl
