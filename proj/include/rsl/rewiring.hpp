#pragma once

// Rewiring decisions: neighbor valuation, baselines, the K-sight index and
// the three rewiring strategies (K-sight optimal, K-HE, random).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsl/learners.hpp"
#include "rsl/payoff_games.hpp"
#include "rsl/social_net.hpp"
#include "rsl/stat_dist.hpp"

namespace rsl {

enum class RewiringStrategy { Optimal, KHE, Random };

inline RewiringStrategy parse_rewiring_strategy(std::string_view s) {
  if (s == "optimal" || s == "OPTIMAL") return RewiringStrategy::Optimal;
  if (s == "khe" || s == "KHE") return RewiringStrategy::KHE;
  if (s == "random" || s == "RANDOM") return RewiringStrategy::Random;
  throw std::invalid_argument("unknown rewiring strategy '" + std::string(s) + "'");
}

inline std::string_view to_string(RewiringStrategy s) {
  switch (s) {
    case RewiringStrategy::Optimal: return "OPTIMAL";
    case RewiringStrategy::KHE: return "KHE";
    case RewiringStrategy::Random: return "RANDOM";
  }
  return "?";
}

inline constexpr double kNoSecondBaseline = std::numeric_limits<double>::infinity();

struct NeighborValue {
  AgentId id;
  double value;
};

struct RewiringState {
  double baseline;
  /// kNoSecondBaseline when the agent has a single neighbor.
  double second_baseline;
  AgentId worst_neighbor;
};

template <class D>
struct Candidate {
  AgentId id;
  D dist;
  double cost;
};

struct IndexResult {
  AgentId target;
  double index;
  double cost;
};

struct RewireDecision {
  std::optional<AgentId> unlink;
  AgentId link;
  double cost;
};

/// v = max_m [p(m) u_m + (1 - p(m)) miscoord], with u_m observed or the prior mean.
inline double neighbor_value(const OpponentModel& model, const GamePrior& prior, double miscoord) {
  const ActionValues ev = fp_expected_values(model, prior, miscoord);
  return std::max(ev[0], ev[1]);
}

/// Worst and second-worst neighbor values; nullopt for an empty neighborhood.
inline std::optional<RewiringState> baseline(std::span<const NeighborValue> neighbors) {
  if (neighbors.empty()) return std::nullopt;
  const auto worse = [](const NeighborValue& a, const NeighborValue& b) {
    return a.value < b.value || (a.value == b.value && a.id < b.id);
  };
  const auto worst = std::min_element(neighbors.begin(), neighbors.end(), worse);
  double second = kNoSecondBaseline;
  for (auto it = neighbors.begin(); it != neighbors.end(); ++it) {
    if (it != worst) second = std::min(second, it->value);
  }
  return RewiringState{worst->value, second, worst->id};
}

/// Behaviour estimate for an unseen peer: the action frequencies the agent
/// has observed across all of its own interactions.
inline Policy estimate_peer_policy(const std::array<std::uint64_t, kNumActions>& observed_actions) {
  const auto total = observed_actions[0] + observed_actions[1];
  if (total == 0) return {0.5, 0.5};
  const double pa = static_cast<double>(observed_actions[0]) / static_cast<double>(total);
  return {pa, 1.0 - pa};
}

/// Per-round advantage of linking a peer with value distribution `vd` over
/// standing pat at baseline y, net of the cost amortized over K rounds:
///
///   y'     = E[min(X, y_sec)]
///   index  = E[X 1{X <= y}] + y' P(X > y) - y - c/K
///
/// With a single neighbor (y_sec = +inf) the post-rewire baseline is x
/// itself and the index reduces to E[X] - y - c/K.
template <BoundedDistribution D>
double pandora_index(const D& vd, double y, double y_sec, double cost, double sight) {
  if (!(sight >= 1.0)) throw std::invalid_argument("sight K must be >= 1");
  if (!(cost >= 0.0)) throw std::invalid_argument("rewiring cost must be >= 0");
  if (y > y_sec) throw std::invalid_argument("baseline must not exceed the second baseline");
  const double amortized = cost / sight;
  if (std::isinf(y_sec)) return vd.mean() - y - amortized;
  const double below = vd.partial_expectation(y);
  const double y_new = capped_expectation(vd, y_sec);
  return below + y_new * (1.0 - vd.cdf(y)) - y - amortized;
}

namespace detail {

inline bool better_candidate(double score, AgentId id, double best_score, AgentId best_id) {
  return score > best_score || (score == best_score && id < best_id);
}

// An empty neighborhood earns nothing per round and has nobody to unlink.
inline RewiringState empty_neighborhood_state() { return {0.0, kNoSecondBaseline, 0}; }

}  // namespace detail

template <BoundedDistribution D>
std::vector<IndexResult> compute_indices(const RewiringState& st, std::span<const Candidate<D>> candidates,
                                         double sight) {
  std::vector<IndexResult> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.push_back({c.id, pandora_index(c.dist, st.baseline, st.second_baseline, c.cost, sight), c.cost});
  }
  return out;
}

/// K-sight rewiring: link the candidate with the largest index if that index
/// is >= 0, unlinking the worst neighbor.
template <BoundedDistribution D>
std::optional<RewireDecision> ksight_decide(std::span<const NeighborValue> neighbors,
                                            std::span<const Candidate<D>> candidates, double sight) {
  if (candidates.empty()) return std::nullopt;
  const auto base = baseline(neighbors);
  const RewiringState st = base ? *base : detail::empty_neighborhood_state();
  std::optional<IndexResult> best;
  for (const auto& c : candidates) {
    const double idx = pandora_index(c.dist, st.baseline, st.second_baseline, c.cost, sight);
    if (!best || detail::better_candidate(idx, c.id, best->index, best->target)) best = IndexResult{c.id, idx, c.cost};
  }
  if (best->index < 0.0) return std::nullopt;
  return RewireDecision{base ? std::optional<AgentId>(st.worst_neighbor) : std::nullopt, best->target, best->cost};
}

/// K-HE: link the candidate with the highest E[X] - c/K when that score
/// exceeds the current baseline.
template <BoundedDistribution D>
std::optional<RewireDecision> khe_decide(std::span<const NeighborValue> neighbors,
                                         std::span<const Candidate<D>> candidates, double sight) {
  if (candidates.empty()) return std::nullopt;
  if (!(sight >= 1.0)) throw std::invalid_argument("sight K must be >= 1");
  const auto base = baseline(neighbors);
  const RewiringState st = base ? *base : detail::empty_neighborhood_state();
  std::optional<IndexResult> best;
  for (const auto& c : candidates) {
    const double score = c.dist.mean() - c.cost / sight;
    if (!best || detail::better_candidate(score, c.id, best->index, best->target)) best = IndexResult{c.id, score, c.cost};
  }
  if (!(best->index > st.baseline)) return std::nullopt;
  return RewireDecision{base ? std::optional<AgentId>(st.worst_neighbor) : std::nullopt, best->target, best->cost};
}

/// Random rewiring: any candidate, uniformly; no-rewire only without candidates.
inline std::optional<RewireDecision> random_decide(std::span<const NeighborValue> neighbors,
                                                   std::span<const AgentId> candidates, double cost, Rng& rng) {
  if (candidates.empty()) return std::nullopt;
  const AgentId target = candidates[uniform_index(rng, candidates.size())];
  const auto base = baseline(neighbors);
  return RewireDecision{base ? std::optional<AgentId>(base->worst_neighbor) : std::nullopt, target, cost};
}

}  // namespace rsl
