#pragma once

// Exact backward induction over the sequential rewiring problem, used as a
// test oracle for the K-sight index policy.
//
// State: (remaining candidates, current baseline y). The second baseline
// y_sec is a constant of the instance. Linking candidate j costs c_j and
// draws x ~ F_j:
//   x <= y  ->  the new baseline is x
//   x >  y  ->  the new baseline is y'_j = E[min(X_j, y_sec)]
//               (or x itself when there is no second neighbor)
// Stopping at baseline y is worth K y.
//
// Candidates must be finite (DiscreteAtoms / PointMass) so the set of
// reachable baselines is finite and the recursion is exact.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rsl/rewiring.hpp"
#include "rsl/stat_dist.hpp"

namespace rsl {

inline constexpr std::size_t kOracleMaxCandidates = 6;
inline constexpr std::size_t kOracleMaxAtoms = 6;

struct OracleInstance {
  double baseline;
  double second_baseline;  // kNoSecondBaseline for a single neighbor
  std::vector<Candidate<PayoffDistribution>> candidates;
  double sight;
};

struct OracleResult {
  /// Optimal expected K-round utility from the initial state.
  double value;
  /// K * baseline.
  double stop_value;
  /// Expected utility of linking candidate k first, then acting optimally.
  std::vector<double> rewire_values;
  /// An optimal first action; nullopt means "do not rewire". Ties prefer
  /// stopping, then the lowest candidate id.
  std::optional<std::size_t> best;

  /// True if `action` (candidate position or nullopt) is optimal within tol.
  bool is_optimal_first_action(std::optional<std::size_t> action, double tol) const {
    const double v = action ? rewire_values.at(*action) : stop_value;
    return v >= value - tol;
  }
};

namespace detail {

struct OracleAtoms {
  std::vector<Atom> atoms;
};

inline OracleAtoms oracle_atoms(const PayoffDistribution& d) {
  if (const auto* pm = std::get_if<PointMass>(&d.family())) return {{Atom{pm->value, 1.0}}};
  if (const auto* da = std::get_if<DiscreteAtoms>(&d.family())) {
    if (da->atoms.size() > kOracleMaxAtoms) throw std::invalid_argument("oracle: candidate has too many atoms");
    return {da->atoms};
  }
  throw std::invalid_argument("oracle: candidate distributions must be finite (point mass or discrete atoms)");
}

class OracleSolver {
 public:
  enum class Mode { Optimal, IndexPolicy };

  OracleSolver(const OracleInstance& inst, Mode mode) : inst_(inst), mode_(mode) {
    if (inst.candidates.size() > kOracleMaxCandidates) {
      throw std::invalid_argument("oracle: too many candidates for exact solution");
    }
    if (!(inst.sight >= 1.0)) throw std::invalid_argument("oracle: sight K must be >= 1");
    if (inst.baseline > inst.second_baseline) throw std::invalid_argument("oracle: y must not exceed y_sec");
    for (const auto& c : inst.candidates) {
      atoms_.push_back(oracle_atoms(c.dist));
      capped_.push_back(std::isinf(inst.second_baseline) ? 0.0
                                                          : capped_expectation(c.dist, inst.second_baseline));
    }
  }

  double value(std::uint32_t mask, double y) {
    const Key key{mask, y};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double v = 0.0;
    if (mode_ == Mode::Optimal) {
      v = stop(y);
      for (std::size_t k = 0; k < inst_.candidates.size(); ++k) {
        if (mask & (1u << k)) v = std::max(v, rewire(mask, y, k));
      }
    } else {
      const auto choice = index_choice(mask, y);
      v = choice ? rewire(mask, y, *choice) : stop(y);
    }
    memo_.emplace(key, v);
    return v;
  }

  double stop(double y) const { return inst_.sight * y; }

  double rewire(std::uint32_t mask, double y, std::size_t k) {
    const std::uint32_t rest = mask & ~(1u << k);
    double total = -inst_.candidates[k].cost;
    double above = 0.0;
    for (const auto& a : atoms_[k].atoms) {
      if (a.value <= y) {
        total += a.prob * value(rest, a.value);
      } else if (std::isinf(inst_.second_baseline)) {
        total += a.prob * value(rest, a.value);
      } else {
        above += a.prob;
      }
    }
    if (above > 0.0) total += above * value(rest, capped_[k]);
    return total;
  }

  /// Candidate the K-sight index policy links in state (mask, y), if any.
  std::optional<std::size_t> index_choice(std::uint32_t mask, double y) const {
    std::optional<std::size_t> best;
    double best_index = 0.0;
    for (std::size_t k = 0; k < inst_.candidates.size(); ++k) {
      if (!(mask & (1u << k))) continue;
      const auto& c = inst_.candidates[k];
      const double second = std::isinf(inst_.second_baseline) ? inst_.second_baseline
                                                              : std::max(inst_.second_baseline, y);
      const double idx = pandora_index(c.dist, y, second, c.cost, inst_.sight);
      if (!best || detail::better_candidate(idx, c.id, best_index, inst_.candidates[*best].id)) {
        best = k;
        best_index = idx;
      }
    }
    if (!best || best_index < 0.0) return std::nullopt;
    return best;
  }

 private:
  struct Key {
    std::uint32_t mask;
    double y;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(k.y) * 31u + k.mask);
    }
  };

  const OracleInstance& inst_;
  Mode mode_;
  std::vector<OracleAtoms> atoms_;
  std::vector<double> capped_;
  std::unordered_map<Key, double, KeyHash> memo_;
};

inline std::uint32_t full_mask(std::size_t n) { return n == 0 ? 0u : ((1u << n) - 1u); }

}  // namespace detail

inline OracleResult bellman_oracle(const OracleInstance& inst) {
  detail::OracleSolver solver(inst, detail::OracleSolver::Mode::Optimal);
  const auto mask = detail::full_mask(inst.candidates.size());
  OracleResult r;
  r.stop_value = solver.stop(inst.baseline);
  r.value = solver.value(mask, inst.baseline);
  double best_value = r.stop_value;
  for (std::size_t k = 0; k < inst.candidates.size(); ++k) {
    r.rewire_values.push_back(solver.rewire(mask, inst.baseline, k));
    const double q = r.rewire_values.back();
    if (q > best_value ||
        (q == best_value && r.best && inst.candidates[k].id < inst.candidates[*r.best].id)) {
      best_value = q;
      r.best = k;
    }
  }
  return r;
}

/// Expected K-round utility of following the K-sight index policy at every
/// state of the instance.
inline double evaluate_index_policy(const OracleInstance& inst) {
  detail::OracleSolver solver(inst, detail::OracleSolver::Mode::IndexPolicy);
  return solver.value(detail::full_mask(inst.candidates.size()), inst.baseline);
}

/// First action of the index policy: candidate position or nullopt.
inline std::optional<std::size_t> index_first_action(const OracleInstance& inst) {
  detail::OracleSolver solver(inst, detail::OracleSolver::Mode::IndexPolicy);
  return solver.index_choice(detail::full_mask(inst.candidates.size()), inst.baseline);
}

}  // namespace rsl
