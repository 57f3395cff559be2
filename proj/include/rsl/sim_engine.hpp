#pragma once

// The round loop: rewiring opportunities, partner selection, play, learning
// and metric capture.
//
// Randomness is split into named substreams of the run seed:
//   "topology"  network construction
//   prior/game  per-pair streams inside GameBook
//   "strategy"  assignment of rewiring strategies to agents
//   "schedule"  per-round agent permutation
//   "opportunity" one rewiring coin per agent per round
//   "random_rewire" target choice of the random strategy
//   "partner"   interaction partner choice
//   "learn"     action selection
// Strategy choice therefore never perturbs topology, games or scheduling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rsl/config.hpp"
#include "rsl/learners.hpp"
#include "rsl/rewiring.hpp"
#include "rsl/rng.hpp"
#include "rsl/social_net.hpp"
#include "rsl/stat_dist.hpp"

namespace rsl {

struct PairLearning {
  OpponentModel model;
  LearnerState learner;
};

struct AgentState {
  RewiringStrategy strategy = RewiringStrategy::Optimal;
  std::unordered_map<AgentId, PairLearning> pairs;
  /// Opponent actions seen across all of this agent's interactions.
  std::array<std::uint64_t, kNumActions> observed_actions{};
  /// Interaction payoffs received minus rewiring costs paid.
  double payoff = 0.0;
  double received = 0.0;
  double cost_paid = 0.0;
  std::uint64_t rewires = 0;
  std::uint64_t interactions = 0;
  double round_payoff = 0.0;
  std::uint32_t round_interactions = 0;
};

struct RoundMetrics {
  std::uint64_t round;
  double mean_round_payoff;
  double optne_pct;
  double suboptne_pct;
  /// Rewires executed since the previous recorded row.
  std::uint64_t rewires;
};

struct AgentOutcome {
  AgentId id;
  RewiringStrategy strategy;
  double payoff;
  std::uint64_t rewires;
  double cost_paid;
};

struct MetricsRecord {
  std::uint64_t seed = 0;
  LearnerKind learner = LearnerKind::FP;
  std::vector<RoundMetrics> rounds;
  std::vector<AgentOutcome> agents;
};

struct NeStats {
  double optne_pct;
  double suboptne_pct;
};

/// Exact-count assignment: largest remainder, ties to the earlier entry.
inline std::vector<RewiringStrategy> strategy_counts(const std::vector<StrategyShare>& mix, std::size_t n) {
  std::vector<std::size_t> count(mix.size());
  std::vector<double> remainder(mix.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    const double exact = mix[k].fraction * static_cast<double>(n);
    count[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[k] = exact - static_cast<double>(count[k]);
    assigned += count[k];
  }
  std::vector<std::size_t> order(mix.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % order.size(), ++assigned) ++count[order[k]];
  std::vector<RewiringStrategy> out;
  out.reserve(n);
  for (std::size_t k = 0; k < mix.size(); ++k) out.insert(out.end(), count[k], mix[k].strategy);
  out.resize(n);
  return out;
}

class World {
 public:
  /// Builds topology, games, reachable sets and strategy assignment.
  World(const SimConfig& config, std::uint64_t seed) : World(config, seed, build_network(config, seed)) {
    auto strategies = strategy_counts(config.strategy_mix, config.agents);
    Rng rng = make_stream(seed, "strategy");
    std::shuffle(strategies.begin(), strategies.end(), rng);
    for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i].strategy = strategies[i];
  }

  /// Uses a caller-built network; every agent starts with strategy_mix[0].
  World(const SimConfig& config, std::uint64_t seed, SocialNetwork net)
      : config_(config),
        seed_(seed),
        net_(std::move(net)),
        agents_(net_.agent_count()),
        schedule_rng_(make_stream(seed, "schedule")),
        opportunity_rng_(make_stream(seed, "opportunity")),
        random_rewire_rng_(make_stream(seed, "random_rewire")),
        partner_rng_(make_stream(seed, "partner")),
        learn_rng_(make_stream(seed, "learn")) {
    if (config_.strategy_mix.empty()) throw std::invalid_argument("strategy mix must not be empty");
    for (auto& a : agents_) a.strategy = config_.strategy_mix.front().strategy;
    order_.resize(agents_.size());
  }

  const SimConfig& config() const { return config_; }
  const SocialNetwork& network() const { return net_; }
  SocialNetwork& network() { return net_; }
  const AgentState& agent(AgentId i) const { return agents_.at(i); }
  std::size_t agent_count() const { return agents_.size(); }
  std::uint64_t round() const { return round_; }
  std::uint64_t rewires_last_round() const { return rewires_this_round_; }

  void set_strategy(AgentId i, RewiringStrategy s) { agents_.at(i).strategy = s; }

  /// Sum of each interaction's payoff, counted once.
  double interaction_total() const { return shadow_interactions_; }
  double cost_total() const { return shadow_costs_; }

  /// One round: each agent, in a seeded random order, may rewire and then
  /// initiates one interaction with a uniformly chosen neighbor.
  void run_round() {
    for (auto& a : agents_) {
      a.round_payoff = 0.0;
      a.round_interactions = 0;
    }
    rewires_this_round_ = 0;
    const Exploration ex =
        config_.exploration.at(round_, config_.rounds, default_explore_start(config_.learner));

    std::iota(order_.begin(), order_.end(), AgentId{0});
    std::shuffle(order_.begin(), order_.end(), schedule_rng_);
    for (AgentId i : order_) {
      const double coin = uniform01(opportunity_rng_);
      // An isolated agent earns nothing by waiting, so it always looks.
      if (coin < config_.phi || net_.degree(i) == 0) try_rewire(i);
      if (net_.degree(i) == 0) continue;
      const auto nbrs = net_.neighbors(i);
      const AgentId j = nbrs[uniform_index(partner_rng_, nbrs.size())];
      interact(i, j, ex);
    }
    ++round_;
    if (config_.check_invariants) check_invariants();
  }

  /// Mean over agents that interacted this round of payoff per interaction.
  double mean_round_payoff() const {
    double total = 0.0;
    std::size_t active = 0;
    for (const auto& a : agents_) {
      if (a.round_interactions == 0) continue;
      total += a.round_payoff / a.round_interactions;
      ++active;
    }
    return active == 0 ? 0.0 : total / static_cast<double>(active);
  }

  /// Classifies every linked pair by both endpoints' greedy actions.
  NeStats ne_stats() const {
    std::size_t pairs = 0;
    std::size_t opt = 0;
    std::size_t sub = 0;
    for (AgentId i = 0; i < agents_.size(); ++i) {
      for (AgentId j : net_.neighbors(i)) {
        if (j < i) continue;
        ++pairs;
        const auto& g = net_.game(i, j);
        const Action ai = greedy_for(i, j, g);
        const Action aj = greedy_for(j, i, g);
        if (ai != aj) continue;
        if (ai == optimal_action(g)) ++opt;
        else ++sub;
      }
    }
    if (pairs == 0) return {0.0, 0.0};
    return {100.0 * static_cast<double>(opt) / pairs, 100.0 * static_cast<double>(sub) / pairs};
  }

  std::vector<AgentOutcome> outcomes() const {
    std::vector<AgentOutcome> out;
    out.reserve(agents_.size());
    for (AgentId i = 0; i < agents_.size(); ++i) {
      const auto& a = agents_[i];
      out.push_back({i, a.strategy, a.payoff, a.rewires, a.cost_paid});
    }
    return out;
  }

  /// Network invariants plus ledger conservation. Throws std::logic_error.
  void check_invariants() const {
    net_.check_invariants();
    double ledger = 0.0;
    for (const auto& a : agents_) {
      ledger += a.payoff;
      if (std::abs(a.payoff - (a.received - a.cost_paid)) > 1e-6 * (1.0 + std::abs(a.received))) {
        throw std::logic_error("agent ledger does not balance");
      }
    }
    const double expected = 2.0 * shadow_interactions_ - shadow_costs_;
    if (std::abs(ledger - expected) > 1e-6 * (1.0 + std::abs(expected))) {
      throw std::logic_error("population ledger does not match the shadow accumulator");
    }
  }

 private:
  static SocialNetwork build_network(const SimConfig& config, std::uint64_t seed) {
    validate(config);
    Rng rng = make_stream(seed, "topology");
    auto net = build_topology(topology_kind(config), config.agents, GameBook(config.family, seed), rng);
    init_reachable_sets(net, config.reach);
    return net;
  }

  PairLearning& pair_state(AgentId i, AgentId j) {
    auto& pairs = agents_[i].pairs;
    auto it = pairs.find(j);
    if (it == pairs.end()) {
      it = pairs.emplace(j, PairLearning{{}, make_learner(config_.learner, config_.learner_params)}).first;
    }
    return it->second;
  }

  Action greedy_for(AgentId i, AgentId j, const CooperativeGame& g) const {
    const auto& pairs = agents_[i].pairs;
    if (auto it = pairs.find(j); it != pairs.end()) {
      return greedy_action(it->second.learner, it->second.model, g.prior, g.miscoord);
    }
    const PairLearning fresh{{}, make_learner(config_.learner, config_.learner_params)};
    return greedy_action(fresh.learner, fresh.model, g.prior, g.miscoord);
  }

  void interact(AgentId i, AgentId j, Exploration ex) {
    const CooperativeGame& g = net_.game(i, j);
    PairLearning& si = pair_state(i, j);
    PairLearning& sj = pair_state(j, i);
    const Action ai = select_action(si.learner, si.model, g.prior, g.miscoord, ex, learn_rng_);
    const Action aj = select_action(sj.learner, sj.model, g.prior, g.miscoord, ex, learn_rng_);
    const auto [ri, rj] = payoff(g, ai, aj);
    credit(i, ri);
    credit(j, rj);
    shadow_interactions_ += ri;
    learner_update(si.learner, si.model, ai, aj, ri);
    update_opponent_model(si.model, aj, ai, ri);
    learner_update(sj.learner, sj.model, aj, ai, rj);
    update_opponent_model(sj.model, ai, aj, rj);
    ++agents_[i].observed_actions[index(aj)];
    ++agents_[j].observed_actions[index(ai)];
  }

  void credit(AgentId i, double r) {
    auto& a = agents_[i];
    a.payoff += r;
    a.received += r;
    a.round_payoff += r;
    ++a.round_interactions;
    ++a.interactions;
  }

  std::vector<NeighborValue> neighbor_values(AgentId i) {
    std::vector<NeighborValue> out;
    for (AgentId j : net_.neighbors(i)) {
      const auto& g = net_.game(i, j);
      const auto& pairs = agents_[i].pairs;
      const auto it = pairs.find(j);
      const OpponentModel model = it == pairs.end() ? OpponentModel{} : it->second.model;
      out.push_back({j, neighbor_value(model, g.prior, g.miscoord)});
    }
    return out;
  }

  std::optional<RewireDecision> decide(AgentId i, const std::vector<AgentId>& candidates) {
    const auto nbrs = neighbor_values(i);
    const auto& agent = agents_[i];
    if (agent.strategy == RewiringStrategy::Random) {
      return random_decide(nbrs, candidates, config_.cost, random_rewire_rng_);
    }
    const Policy peer_policy = estimate_peer_policy(agent.observed_actions);
    std::vector<Candidate<ValueDistribution>> cands;
    cands.reserve(candidates.size());
    for (AgentId w : candidates) {
      const GamePrior& pr = net_.games().prior(i, w);
      cands.push_back({w, compose_value_distribution(pr.dists(), peer_policy, pr.miscoord), config_.cost});
    }
    const std::span<const Candidate<ValueDistribution>> view(cands);
    if (agent.strategy == RewiringStrategy::KHE) return khe_decide(std::span<const NeighborValue>(nbrs), view, config_.sight);
    return ksight_decide(std::span<const NeighborValue>(nbrs), view, config_.sight);
  }

  void try_rewire(AgentId i) {
    const auto candidates = net_.rewirable(i);
    if (candidates.empty()) return;
    const auto d = decide(i, candidates);
    if (!d) return;
    net_.rewire(i, d->unlink, d->link);
    if (d->unlink) {
      agents_[i].pairs.erase(*d->unlink);
      agents_[*d->unlink].pairs.erase(i);
    }
    auto& a = agents_[i];
    a.payoff -= d->cost;
    a.cost_paid += d->cost;
    ++a.rewires;
    shadow_costs_ += d->cost;
    ++rewires_this_round_;
  }

  SimConfig config_;
  std::uint64_t seed_;
  SocialNetwork net_;
  std::vector<AgentState> agents_;
  std::vector<AgentId> order_;
  Rng schedule_rng_;
  Rng opportunity_rng_;
  Rng random_rewire_rng_;
  Rng partner_rng_;
  Rng learn_rng_;
  std::uint64_t round_ = 0;
  std::uint64_t rewires_this_round_ = 0;
  double shadow_interactions_ = 0.0;
  double shadow_costs_ = 0.0;
};

/// Runs `world` for the configured number of rounds, recording every
/// `record_every`-th round and always the last one.
inline MetricsRecord run_world(World& world, std::uint64_t seed) {
  const auto& config = world.config();
  MetricsRecord rec;
  rec.seed = seed;
  rec.learner = config.learner;
  std::uint64_t pending_rewires = 0;
  for (std::uint64_t r = 0; r < config.rounds; ++r) {
    world.run_round();
    pending_rewires += world.rewires_last_round();
    const bool last = r + 1 == config.rounds;
    if ((r + 1) % config.record_every == 0 || last) {
      const NeStats ne = world.ne_stats();
      rec.rounds.push_back({r + 1, world.mean_round_payoff(), ne.optne_pct, ne.suboptne_pct, pending_rewires});
      pending_rewires = 0;
    }
  }
  rec.agents = world.outcomes();
  return rec;
}

/// A run is a pure function of (config, seed).
inline MetricsRecord run_simulation(const SimConfig& config, std::uint64_t seed) {
  validate(config);
  World world(config, seed);
  return run_world(world, seed);
}

}  // namespace rsl
