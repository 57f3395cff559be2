#pragma once

// Per-opponent interaction learners: fictitious play (FP), joint-action
// learner (JAL) and joint-action WoLF-PHC (JA-WoLF).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "rsl/payoff_games.hpp"
#include "rsl/rng.hpp"

namespace rsl {

using ActionValues = std::array<double, kNumActions>;
using Policy = std::array<double, kNumActions>;
using JointTable = std::array<std::array<double, kNumActions>, kNumActions>;

// ---------------------------------------------------------------------------
// Opponent model
// ---------------------------------------------------------------------------

struct OpponentModel {
  std::array<std::uint32_t, kNumActions> action_counts{};
  /// Diagonal payoff u_m, known once the pair coordinated on m.
  std::array<std::optional<double>, kNumActions> observed_payoffs{};
  std::uint32_t interactions = 0;

  /// Empirical frequency of the opponent playing m; uniform before any data.
  double p(Action m) const {
    if (interactions == 0) return 1.0 / kNumActions;
    return static_cast<double>(action_counts[index(m)]) / interactions;
  }

  Policy policy() const { return {p(Action::A), p(Action::B)}; }
};

inline void update_opponent_model(OpponentModel& model, Action opp_action, Action own_action, double reward) {
  ++model.action_counts[index(opp_action)];
  ++model.interactions;
  auto& slot = model.observed_payoffs[index(opp_action)];
  if (own_action == opp_action && !slot) slot = reward;
}

/// Observed diagonal payoff, or the generating prior's mean when unseen.
inline double estimated_payoff(const OpponentModel& model, const GamePrior& prior, Action m) {
  const auto& seen = model.observed_payoffs[index(m)];
  return seen ? *seen : prior.dist(m).mean();
}

// ---------------------------------------------------------------------------
// Exploration wrapper
// ---------------------------------------------------------------------------

enum class ExplorationKind { Epsilon, Boltzmann };

inline ExplorationKind parse_exploration_kind(std::string_view s) {
  if (s == "epsilon") return ExplorationKind::Epsilon;
  if (s == "boltzmann") return ExplorationKind::Boltzmann;
  throw std::invalid_argument("unknown exploration kind '" + std::string(s) + "'");
}

inline std::string_view to_string(ExplorationKind k) {
  return k == ExplorationKind::Epsilon ? "epsilon" : "boltzmann";
}

/// Exploration in effect for one decision: epsilon, or softmax temperature.
struct Exploration {
  ExplorationKind kind = ExplorationKind::Epsilon;
  double value = 0.0;

  static Exploration none() { return {}; }
};

/// Linear decay from `start` to `end` over the first `fraction` of the run,
/// then held at `end`. An unset `start` means the learner's default.
struct ExplorationSchedule {
  ExplorationKind kind = ExplorationKind::Epsilon;
  std::optional<double> start;
  double end = 0.0;
  double fraction = 0.2;

  Exploration at(std::uint64_t round, std::uint64_t total_rounds, double default_start = 0.2) const {
    const double from = start.value_or(default_start);
    const double horizon = fraction * static_cast<double>(total_rounds);
    if (horizon <= 0.0) return {kind, end};
    const double progress = std::min(1.0, static_cast<double>(round) / horizon);
    return {kind, from + (end - from) * progress};
  }
};

inline Action greedy(const ActionValues& ev) { return ev[index(Action::B)] > ev[index(Action::A)] ? Action::B : Action::A; }

inline Action random_action(Rng& rng) { return uniform01(rng) < 0.5 ? Action::A : Action::B; }

/// Greedy choice over `ev` wrapped by the exploration rule. Ties go to A.
inline Action explore_select(const ActionValues& ev, Exploration ex, Rng& rng) {
  if (ex.value <= 0.0) return greedy(ev);
  if (ex.kind == ExplorationKind::Epsilon) {
    if (uniform01(rng) < ex.value) return random_action(rng);
    return greedy(ev);
  }
  const double z = (ev[index(Action::A)] - ev[index(Action::B)]) / ex.value;
  const double p_b = 1.0 / (1.0 + std::exp(std::clamp(z, -700.0, 700.0)));
  return uniform01(rng) < p_b ? Action::B : Action::A;
}

// ---------------------------------------------------------------------------
// Fictitious play
// ---------------------------------------------------------------------------

struct FpState {};

/// EV(m) = p(m) u_m + (1 - p(m)) miscoord.
inline ActionValues fp_expected_values(const OpponentModel& model, const GamePrior& prior, double miscoord) {
  ActionValues ev{};
  for (Action m : kActions) {
    const double p = model.p(m);
    ev[index(m)] = p * estimated_payoff(model, prior, m) + (1.0 - p) * miscoord;
  }
  return ev;
}

inline Action fp_select(const OpponentModel& model, const GamePrior& prior, double miscoord, Exploration ex,
                        Rng& rng) {
  return explore_select(fp_expected_values(model, prior, miscoord), ex, rng);
}

// ---------------------------------------------------------------------------
// Joint-action learner
// ---------------------------------------------------------------------------

struct JalState {
  JointTable q{};
  double step = 0.1;
};

/// EV(a) = sum_m Q(a, m) p(m).
inline ActionValues joint_expected_values(const JointTable& q, const OpponentModel& model) {
  ActionValues ev{};
  for (Action a : kActions) {
    double v = 0.0;
    for (Action m : kActions) v += q[index(a)][index(m)] * model.p(m);
    ev[index(a)] = v;
  }
  return ev;
}

inline Action jal_select(const JalState& state, const OpponentModel& model, Exploration ex, Rng& rng) {
  return explore_select(joint_expected_values(state.q, model), ex, rng);
}

inline void jal_update(JalState& state, Action own, Action opp, double reward) {
  double& q = state.q[index(own)][index(opp)];
  q = (1.0 - state.step) * q + state.step * reward;
}

// ---------------------------------------------------------------------------
// Joint-action WoLF-PHC
// ---------------------------------------------------------------------------

struct WolfState {
  JointTable q{};
  Policy policy{0.5, 0.5};
  Policy avg_policy{0.5, 0.5};
  std::uint64_t update_count = 0;
  double delta_win = 0.05;
  double delta_lose = 0.2;
  double step = 0.1;
  /// Hill-climbing rate used by the most recent update.
  double last_delta = 0.0;
};

/// Samples from the current mixed policy; epsilon exploration mixes in a
/// uniform action, softmax exploration does not apply to a mixed policy.
inline Action wolf_select(const WolfState& state, Exploration ex, Rng& rng) {
  if (ex.kind == ExplorationKind::Epsilon && ex.value > 0.0 && uniform01(rng) < ex.value) {
    return random_action(rng);
  }
  return uniform01(rng) < state.policy[index(Action::A)] ? Action::A : Action::B;
}

/// Winning iff the current policy earns at least as much as the average
/// policy against the opponent model.
inline bool wolf_is_winning(const WolfState& state, const OpponentModel& model) {
  const ActionValues ev = joint_expected_values(state.q, model);
  double current = 0.0;
  double average = 0.0;
  for (Action a : kActions) {
    current += state.policy[index(a)] * ev[index(a)];
    average += state.avg_policy[index(a)] * ev[index(a)];
  }
  return current >= average;
}

inline void wolf_update(WolfState& state, const OpponentModel& model, Action own, Action opp, double reward) {
  double& q = state.q[index(own)][index(opp)];
  q = (1.0 - state.step) * q + state.step * reward;

  ++state.update_count;
  for (Action a : kActions) {
    state.avg_policy[index(a)] +=
        (state.policy[index(a)] - state.avg_policy[index(a)]) / static_cast<double>(state.update_count);
  }

  const double delta = wolf_is_winning(state, model) ? state.delta_win : state.delta_lose;
  state.last_delta = delta;

  const Action best = greedy(joint_expected_values(state.q, model));
  const Action worse = other(best);
  const double moved = std::min(state.policy[index(worse)], delta / (kNumActions - 1));
  state.policy[index(worse)] -= moved;
  state.policy[index(best)] += moved;
  // Keep the policy exactly on the simplex.
  state.policy[index(best)] = 1.0 - state.policy[index(worse)];
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

enum class LearnerKind { FP, JAL, JAWoLF };

inline LearnerKind parse_learner_kind(std::string_view s) {
  if (s == "fp" || s == "FP") return LearnerKind::FP;
  if (s == "jal" || s == "JAL") return LearnerKind::JAL;
  if (s == "jawolf" || s == "JAWOLF" || s == "wolf") return LearnerKind::JAWoLF;
  throw std::invalid_argument("unknown learner '" + std::string(s) + "'");
}

inline std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::FP: return "FP";
    case LearnerKind::JAL: return "JAL";
    case LearnerKind::JAWoLF: return "JAWOLF";
  }
  return "?";
}

/// FP starts from prior-mean payoff estimates and needs little exploration;
/// JAL and JA-WoLF start from an all-zero joint-action table and would lock
/// onto whichever joint action they happen to sample first, so they begin
/// fully exploratory.
inline double default_explore_start(LearnerKind kind) { return kind == LearnerKind::FP ? 0.2 : 1.0; }

struct LearnerParams {
  double step = 0.1;
  double delta_win = 0.05;
  double delta_lose = 0.2;
};

using LearnerState = std::variant<FpState, JalState, WolfState>;

inline LearnerState make_learner(LearnerKind kind, const LearnerParams& params) {
  switch (kind) {
    case LearnerKind::FP: return FpState{};
    case LearnerKind::JAL: return JalState{{}, params.step};
    case LearnerKind::JAWoLF: {
      WolfState s;
      s.delta_win = params.delta_win;
      s.delta_lose = params.delta_lose;
      s.step = params.step;
      return s;
    }
  }
  throw std::logic_error("unreachable learner kind");
}

inline Action select_action(const LearnerState& state, const OpponentModel& model, const GamePrior& prior,
                            double miscoord, Exploration ex, Rng& rng) {
  if (std::holds_alternative<FpState>(state)) return fp_select(model, prior, miscoord, ex, rng);
  if (const auto* jal = std::get_if<JalState>(&state)) return jal_select(*jal, model, ex, rng);
  return wolf_select(std::get<WolfState>(state), ex, rng);
}

/// Exploration-free choice, used to classify equilibria.
inline Action greedy_action(const LearnerState& state, const OpponentModel& model, const GamePrior& prior,
                            double miscoord) {
  if (std::holds_alternative<FpState>(state)) return greedy(fp_expected_values(model, prior, miscoord));
  if (const auto* jal = std::get_if<JalState>(&state)) return greedy(joint_expected_values(jal->q, model));
  const auto& wolf = std::get<WolfState>(state);
  return wolf.policy[index(Action::B)] > wolf.policy[index(Action::A)] ? Action::B : Action::A;
}

inline void learner_update(LearnerState& state, const OpponentModel& model, Action own, Action opp,
                           double reward) {
  if (auto* jal = std::get_if<JalState>(&state)) {
    jal_update(*jal, own, opp, reward);
  } else if (auto* wolf = std::get_if<WolfState>(&state)) {
    wolf_update(*wolf, model, own, opp, reward);
  }
}

}  // namespace rsl
