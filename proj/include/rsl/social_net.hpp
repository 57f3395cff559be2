#pragma once

// Interaction topology, reachable sets and the mutual link/unlink mechanics
// of rewiring.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "rsl/payoff_games.hpp"
#include "rsl/rng.hpp"

namespace rsl {

using AgentId = std::uint32_t;

inline std::uint64_t pair_key(AgentId i, AgentId j) {
  const auto lo = std::min(i, j);
  const auto hi = std::max(i, j);
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

/// Pair-keyed store of game priors and realized games.
///
/// The prior and the realization of pair {i, j} come from their own seeded
/// substreams, so they do not depend on the order in which pairs are touched.
class GameBook {
 public:
  using PriorSource = std::function<GamePrior(AgentId lo, AgentId hi)>;

  GameBook(DistFamily family, std::uint64_t seed)
      : seed_(seed), source_([family, seed](AgentId lo, AgentId hi) {
          Rng rng = make_stream(seed, "prior", lo, hi);
          return generate_game_prior(family, rng);
        }) {}

  GameBook(PriorSource source, std::uint64_t seed) : seed_(seed), source_(std::move(source)) {}

  const GamePrior& prior(AgentId i, AgentId j) {
    const auto key = pair_key(i, j);
    if (auto it = games_.find(key); it != games_.end()) return it->second.prior;
    if (auto it = priors_.find(key); it != priors_.end()) return it->second;
    return priors_.emplace(key, source_(std::min(i, j), std::max(i, j))).first->second;
  }

  /// Realizes the game of {i, j} on first use; afterwards it never changes.
  const CooperativeGame& realize(AgentId i, AgentId j) {
    const auto key = pair_key(i, j);
    if (auto it = games_.find(key); it != games_.end()) return it->second;
    GamePrior pr = prior(i, j);
    priors_.erase(key);
    Rng rng = make_stream(seed_, "game", std::min(i, j), std::max(i, j));
    return games_.emplace(key, realize_game(pr, rng)).first->second;
  }

  const CooperativeGame* find(AgentId i, AgentId j) const {
    auto it = games_.find(pair_key(i, j));
    return it == games_.end() ? nullptr : &it->second;
  }

  std::size_t game_count() const { return games_.size(); }

 private:
  std::uint64_t seed_;
  PriorSource source_;
  std::unordered_map<std::uint64_t, GamePrior> priors_;
  std::unordered_map<std::uint64_t, CooperativeGame> games_;
};

struct Regular {
  int degree;
};

struct SmallWorld {
  int degree;
  double rewire_prob = 0.1;
};

struct ScaleFree {
  int attach;
};

using TopologyKind = std::variant<Regular, SmallWorld, ScaleFree>;

class SocialNetwork {
 public:
  SocialNetwork(std::size_t agent_count, GameBook games)
      : neighbors_(agent_count),
        potentials_(agent_count),
        discarded_(agent_count),
        reach_limit_(agent_count, 0),
        games_(std::move(games)) {}

  std::size_t agent_count() const { return neighbors_.size(); }

  std::span<const AgentId> neighbors(AgentId i) const { return neighbors_.at(i); }
  std::span<const AgentId> potentials(AgentId i) const { return potentials_.at(i); }
  std::span<const AgentId> discarded(AgentId i) const { return discarded_.at(i); }
  std::size_t degree(AgentId i) const { return neighbors_.at(i).size(); }
  std::size_t reach_limit(AgentId i) const { return reach_limit_.at(i); }

  bool linked(AgentId i, AgentId j) const { return contains(neighbors_.at(i), j); }
  bool is_potential(AgentId i, AgentId j) const { return contains(potentials_.at(i), j); }
  bool is_discarded(AgentId i, AgentId j) const { return contains(discarded_.at(i), j); }

  /// Potential partners of i that also hold i as a potential partner; only
  /// these can be linked without growing the passive side's reach.
  std::vector<AgentId> rewirable(AgentId i) const {
    std::vector<AgentId> out;
    for (AgentId w : potentials_.at(i)) {
      if (contains(potentials_[w], i)) out.push_back(w);
    }
    return out;
  }

  /// Adds a symmetric link during construction and realizes its game.
  void add_link(AgentId i, AgentId j) {
    check_agent(i);
    check_agent(j);
    if (i == j) throw std::invalid_argument("self links are not allowed");
    if (linked(i, j)) return;
    insert_sorted(neighbors_[i], j);
    insert_sorted(neighbors_[j], i);
    reach_limit_[i] = std::max(reach_limit_[i], reach_size(i));
    reach_limit_[j] = std::max(reach_limit_[j], reach_size(j));
    games_.realize(i, j);
  }

  void remove_link_unchecked(AgentId i, AgentId j) {
    erase_sorted(neighbors_[i], j);
    erase_sorted(neighbors_[j], i);
  }

  /// Replaces the potential-partner set of i (construction only).
  void set_potentials(AgentId i, std::vector<AgentId> peers) {
    check_agent(i);
    std::sort(peers.begin(), peers.end());
    peers.erase(std::unique(peers.begin(), peers.end()), peers.end());
    for (AgentId w : peers) {
      check_agent(w);
      if (w == i || linked(i, w) || is_discarded(i, w)) {
        throw std::invalid_argument("potential partners must be disjoint from self, neighbors and discarded");
      }
    }
    potentials_[i] = std::move(peers);
    reach_limit_[i] = reach_size(i);
  }

  /// i unlinks `unlink` (if any) and links `link`. Both sides see the change.
  /// Throws std::invalid_argument, leaving the network untouched, when
  /// `unlink` is not a neighbor or `link` is not a mutually reachable
  /// potential partner.
  void rewire(AgentId i, std::optional<AgentId> unlink, AgentId link) {
    check_agent(i);
    check_agent(link);
    if (unlink && !linked(i, *unlink)) {
      throw std::invalid_argument("rewire: agent " + std::to_string(*unlink) + " is not a neighbor of " +
                                  std::to_string(i));
    }
    if (!is_potential(i, link) || !is_potential(link, i)) {
      throw std::invalid_argument("rewire: agent " + std::to_string(link) +
                                  " is not a mutually reachable potential partner of " + std::to_string(i));
    }
    if (unlink) {
      const AgentId k = *unlink;
      erase_sorted(neighbors_[i], k);
      erase_sorted(neighbors_[k], i);
      insert_sorted(discarded_[i], k);
      insert_sorted(discarded_[k], i);
    }
    erase_sorted(potentials_[i], link);
    erase_sorted(potentials_[link], i);
    insert_sorted(neighbors_[i], link);
    insert_sorted(neighbors_[link], i);
    games_.realize(i, link);
  }

  GameBook& games() { return games_; }
  const GameBook& games() const { return games_; }

  const CooperativeGame& game(AgentId i, AgentId j) const {
    const auto* g = games_.find(i, j);
    if (g == nullptr) throw std::out_of_range("no game realized for pair");
    return *g;
  }

  std::vector<std::pair<AgentId, AgentId>> edges() const {
    std::vector<std::pair<AgentId, AgentId>> out;
    for (AgentId i = 0; i < agent_count(); ++i) {
      for (AgentId j : neighbors_[i]) {
        if (i < j) out.emplace_back(i, j);
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& n : neighbors_) total += n.size();
    return total / 2;
  }

  /// One "i j" pair per line, i < j, ascending.
  void write_edge_list(std::ostream& os) const {
    for (const auto& [i, j] : edges()) os << i << ' ' << j << '\n';
  }

  std::string edge_list() const {
    std::ostringstream os;
    write_edge_list(os);
    return os.str();
  }

  /// Throws std::logic_error describing the first violated structural invariant.
  void check_invariants() const {
    const auto fail = [](AgentId i, const std::string& what) {
      throw std::logic_error("network invariant violated at agent " + std::to_string(i) + ": " + what);
    };
    for (AgentId i = 0; i < agent_count(); ++i) {
      for (AgentId j : neighbors_[i]) {
        if (j == i) fail(i, "self link");
        if (!contains(neighbors_[j], i)) fail(i, "asymmetric link to " + std::to_string(j));
        if (contains(potentials_[i], j) || contains(discarded_[i], j)) fail(i, "neighbor also potential/discarded");
        if (games_.find(i, j) == nullptr) fail(i, "linked pair without game");
      }
      for (AgentId j : potentials_[i]) {
        if (j == i) fail(i, "self in potentials");
        if (contains(discarded_[i], j)) fail(i, "potential also discarded");
      }
      for (AgentId j : discarded_[i]) {
        if (j == i) fail(i, "self in discarded");
      }
      if (reach_size(i) > reach_limit_[i]) fail(i, "reachable set grew beyond its initial size");
    }
  }

 private:
  static bool contains(const std::vector<AgentId>& v, AgentId x) {
    return std::binary_search(v.begin(), v.end(), x);
  }
  static void insert_sorted(std::vector<AgentId>& v, AgentId x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  }
  static void erase_sorted(std::vector<AgentId>& v, AgentId x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
  }
  void check_agent(AgentId i) const {
    if (i >= agent_count()) throw std::out_of_range("agent id " + std::to_string(i) + " out of range");
  }
  std::size_t reach_size(AgentId i) const {
    return neighbors_[i].size() + potentials_[i].size() + discarded_[i].size();
  }

  std::vector<std::vector<AgentId>> neighbors_;
  std::vector<std::vector<AgentId>> potentials_;
  std::vector<std::vector<AgentId>> discarded_;
  std::vector<std::size_t> reach_limit_;
  GameBook games_;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_lattice(int degree, std::size_t x) {
  if (degree < 2 || degree % 2 != 0) throw std::invalid_argument("ring lattice degree must be even and >= 2");
  if (x <= static_cast<std::size_t>(degree)) {
    throw std::invalid_argument("ring lattice needs more agents than its degree");
  }
}

inline void build_ring(SocialNetwork& net, int degree) {
  const auto x = static_cast<AgentId>(net.agent_count());
  for (AgentId i = 0; i < x; ++i) {
    for (int k = 1; k <= degree / 2; ++k) net.add_link(i, (i + k) % x);
  }
}

}  // namespace detail

inline std::size_t min_agent_count(const TopologyKind& kind) {
  return std::visit(
      [](const auto& k) -> std::size_t {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ScaleFree>) return static_cast<std::size_t>(std::max(k.attach, 0)) + 1;
        else return static_cast<std::size_t>(std::max(k.degree, 0)) + 1;
      },
      kind);
}

/// Regular ring lattice, Watts-Strogatz small world, or Barabasi-Albert
/// scale-free graph; every edge gets its game realized.
inline SocialNetwork build_topology(const TopologyKind& kind, std::size_t x, GameBook games, Rng& rng) {
  SocialNetwork net(x, std::move(games));
  if (const auto* reg = std::get_if<Regular>(&kind)) {
    detail::validate_lattice(reg->degree, x);
    detail::build_ring(net, reg->degree);
  } else if (const auto* sw = std::get_if<SmallWorld>(&kind)) {
    detail::validate_lattice(sw->degree, x);
    if (!(sw->rewire_prob >= 0.0 && sw->rewire_prob <= 1.0)) {
      throw std::invalid_argument("small-world rewiring probability must lie in [0, 1]");
    }
    // Lattice edges are decided before any game exists, so build the edge
    // set first and realize games at the end.
    const auto n = static_cast<AgentId>(x);
    std::vector<std::vector<AgentId>> adj(x);
    const auto has = [&adj](AgentId a, AgentId b) {
      return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
    };
    const auto link = [&adj](AgentId a, AgentId b) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    };
    const auto unlink = [&adj](AgentId a, AgentId b) {
      adj[a].erase(std::find(adj[a].begin(), adj[a].end(), b));
      adj[b].erase(std::find(adj[b].begin(), adj[b].end(), a));
    };
    for (AgentId i = 0; i < n; ++i) {
      for (int k = 1; k <= sw->degree / 2; ++k) link(i, (i + k) % n);
    }
    for (int k = 1; k <= sw->degree / 2; ++k) {
      for (AgentId i = 0; i < n; ++i) {
        const AgentId j = (i + k) % n;
        if (uniform01(rng) >= sw->rewire_prob) continue;
        if (!has(i, j) || adj[i].size() + 1 >= x) continue;
        AgentId w = static_cast<AgentId>(uniform_index(rng, x));
        while (w == i || has(i, w)) w = static_cast<AgentId>(uniform_index(rng, x));
        unlink(i, j);
        link(i, w);
      }
    }
    for (AgentId i = 0; i < n; ++i) {
      std::sort(adj[i].begin(), adj[i].end());
      for (AgentId j : adj[i]) {
        if (i < j) net.add_link(i, j);
      }
    }
  } else {
    const auto& sf = std::get<ScaleFree>(kind);
    if (sf.attach < 1) throw std::invalid_argument("scale-free attachment count must be >= 1");
    const auto m = static_cast<std::size_t>(sf.attach);
    if (x < m + 1) throw std::invalid_argument("scale-free graph needs at least attach+1 agents");
    std::vector<AgentId> endpoints;
    for (AgentId i = 0; i <= m; ++i) {
      for (AgentId j = i + 1; j <= m; ++j) {
        net.add_link(i, j);
        endpoints.push_back(i);
        endpoints.push_back(j);
      }
    }
    for (auto v = static_cast<AgentId>(m + 1); v < x; ++v) {
      std::vector<AgentId> targets;
      while (targets.size() < m) {
        const AgentId t = endpoints[uniform_index(rng, endpoints.size())];
        if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
      }
      std::sort(targets.begin(), targets.end());
      for (AgentId t : targets) {
        net.add_link(v, t);
        endpoints.push_back(v);
        endpoints.push_back(t);
      }
    }
  }
  return net;
}

/// Fills each agent's potential partners with the z - |O_i| nearest
/// non-neighbors by hop distance (ties by ascending id; unreachable nodes
/// count as infinitely far).
inline void init_reachable_sets(SocialNetwork& net, std::size_t z) {
  const std::size_t x = net.agent_count();
  if (x == 0) return;
  if (z > x - 1) {
    throw std::invalid_argument("reachable-set size z=" + std::to_string(z) + " exceeds x-1=" +
                                std::to_string(x - 1));
  }
  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(x);
  for (AgentId i = 0; i < x; ++i) {
    std::fill(dist.begin(), dist.end(), kUnreached);
    std::queue<AgentId> frontier;
    dist[i] = 0;
    frontier.push(i);
    while (!frontier.empty()) {
      const AgentId u = frontier.front();
      frontier.pop();
      for (AgentId w : net.neighbors(u)) {
        if (dist[w] == kUnreached) {
          dist[w] = dist[u] + 1;
          frontier.push(w);
        }
      }
    }
    const std::size_t deg = net.degree(i);
    const std::size_t want = z > deg ? z - deg : 0;
    std::vector<AgentId> order;
    order.reserve(x);
    for (AgentId j = 0; j < x; ++j) {
      if (j != i && !net.linked(i, j)) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&dist](AgentId a, AgentId b) { return dist[a] < dist[b]; });
    order.resize(std::min(want, order.size()));
    net.set_potentials(i, std::move(order));
  }
}

}  // namespace rsl
