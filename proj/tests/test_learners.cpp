#include <gtest/gtest.h>

#include "rsl/learners.hpp"

namespace {

using rsl::Action;
using rsl::Exploration;
using rsl::OpponentModel;
using rsl::PayoffDistribution;

OpponentModel model_with(std::uint32_t a_count, std::uint32_t b_count) {
  OpponentModel m;
  m.action_counts = {a_count, b_count};
  m.interactions = a_count + b_count;
  return m;
}

rsl::GamePrior uniform_prior(double miscoord = -0.1) {
  return {PayoffDistribution::uniform(0, 1), PayoffDistribution::uniform(0, 1), miscoord};
}

// --- opponent model ----------------------------------------------------------

TEST(OpponentModel, FreshModelIsUniform) {
  const OpponentModel m;
  EXPECT_EQ(m.p(Action::A), 0.5);
  EXPECT_EQ(m.p(Action::B), 0.5);
}

TEST(OpponentModel, Frequencies) {
  OpponentModel m;
  rsl::update_opponent_model(m, Action::A, Action::B, -0.1);
  EXPECT_EQ(m.p(Action::A), 1.0);
  EXPECT_EQ(m.p(Action::B), 0.0);
  rsl::update_opponent_model(m, Action::B, Action::A, -0.1);
  EXPECT_EQ(m.p(Action::A), 0.5);
  EXPECT_EQ(m.p(Action::B), 0.5);
  EXPECT_FALSE(m.observed_payoffs[0]);
  EXPECT_FALSE(m.observed_payoffs[1]);
}

TEST(OpponentModel, CoordinationRecordsDiagonalPayoff) {
  OpponentModel m;
  rsl::update_opponent_model(m, Action::A, Action::A, 0.9);
  EXPECT_EQ(m.observed_payoffs[0], 0.9);
  rsl::update_opponent_model(m, Action::A, Action::A, 0.9);
  EXPECT_EQ(m.observed_payoffs[0], 0.9);
  EXPECT_EQ(m.interactions, 2u);
}

// --- FP ----------------------------------------------------------------------

TEST(Fp, HandEvaluatedExample) {
  auto m = model_with(8, 2);
  m.observed_payoffs[0] = 0.9;
  const auto ev = rsl::fp_expected_values(m, uniform_prior(), -0.1);
  EXPECT_NEAR(ev[0], 0.70, 1e-15);
  EXPECT_NEAR(ev[1], 0.02, 1e-15);
  rsl::Rng rng(1);
  EXPECT_EQ(rsl::fp_select(m, uniform_prior(), -0.1, Exploration::none(), rng), Action::A);
}

TEST(Fp, DegenerateOpponentForcesMiscoordOnOtherAction) {
  auto m = model_with(5, 0);
  m.observed_payoffs[0] = 0.3;
  m.observed_payoffs[1] = 0.95;
  const auto ev = rsl::fp_expected_values(m, uniform_prior(), -0.1);
  EXPECT_EQ(ev[1], -0.1);
  rsl::Rng rng(2);
  EXPECT_EQ(rsl::fp_select(m, uniform_prior(), -0.1, Exploration::none(), rng), Action::A);
}

TEST(Fp, SymmetricInputsTieToA) {
  auto m = model_with(3, 3);
  m.observed_payoffs = {0.6, 0.6};
  rsl::Rng rng(3);
  EXPECT_EQ(rsl::fp_select(m, uniform_prior(), -0.1, Exploration::none(), rng), Action::A);
}

TEST(Fp, UnknownPayoffUsesPriorMean) {
  const rsl::GamePrior pr{PayoffDistribution::beta(2, 8), PayoffDistribution::uniform(0.5, 0.9), -0.05};
  const OpponentModel m;
  EXPECT_DOUBLE_EQ(rsl::estimated_payoff(m, pr, Action::A), 0.2);
  EXPECT_DOUBLE_EQ(rsl::estimated_payoff(m, pr, Action::B), 0.7);
}

// --- JAL ---------------------------------------------------------------------

TEST(Jal, HandEvaluatedExamples) {
  rsl::JalState s;
  s.q[0][0] = 1.0;
  auto ev = rsl::joint_expected_values(s.q, model_with(1, 1));
  EXPECT_DOUBLE_EQ(ev[0], 0.5);
  EXPECT_DOUBLE_EQ(ev[1], 0.0);
  rsl::Rng rng(4);
  EXPECT_EQ(rsl::jal_select(s, model_with(1, 1), Exploration::none(), rng), Action::A);

  s.q[1][1] = 0.8;
  ev = rsl::joint_expected_values(s.q, model_with(3, 7));
  EXPECT_DOUBLE_EQ(ev[0], 0.3);
  EXPECT_DOUBLE_EQ(ev[1], 0.56);
  EXPECT_EQ(rsl::jal_select(s, model_with(3, 7), Exploration::none(), rng), Action::B);
}

TEST(Jal, ZeroTableTiesToA) {
  rsl::Rng rng(5);
  EXPECT_EQ(rsl::jal_select(rsl::JalState{}, model_with(2, 9), Exploration::none(), rng), Action::A);
}

TEST(Jal, UpdateStepsAndFixedPoint) {
  rsl::JalState s;
  rsl::jal_update(s, Action::A, Action::B, 1.0);
  EXPECT_DOUBLE_EQ(s.q[0][1], 0.1);
  for (int k = 0; k < 2000; ++k) rsl::jal_update(s, Action::A, Action::B, 0.37);
  EXPECT_NEAR(s.q[0][1], 0.37, 1e-12);
  s.step = 1.0;
  rsl::jal_update(s, Action::B, Action::B, 0.81);
  EXPECT_EQ(s.q[1][1], 0.81);
}

// --- JA-WoLF -----------------------------------------------------------------

TEST(Wolf, PureAPolicyAlwaysPlaysA) {
  rsl::WolfState s;
  s.policy = {1.0, 0.0};
  rsl::Rng rng(6);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(rsl::wolf_select(s, Exploration::none(), rng), Action::A);
}

TEST(Wolf, UniformPolicyFrequency) {
  rsl::WolfState s;
  rsl::Rng rng(7);
  int a = 0;
  for (int k = 0; k < 10000; ++k) a += rsl::wolf_select(s, Exploration::none(), rng) == Action::A;
  EXPECT_NEAR(a / 10000.0, 0.5, 0.02);
}

TEST(Wolf, ZeroEpsilonLeavesPolicyDistribution) {
  rsl::WolfState s;
  s.policy = {0.3, 0.7};
  rsl::Rng r1(8), r2(8);
  for (int k = 0; k < 1000; ++k) {
    ASSERT_EQ(rsl::wolf_select(s, Exploration{rsl::ExplorationKind::Epsilon, 0.0}, r1),
              rsl::wolf_select(s, Exploration::none(), r2));
  }
}

TEST(Wolf, WinningUsesDeltaWin) {
  rsl::WolfState s;
  s.q[0][0] = 1.0;
  s.policy = {0.9, 0.1};
  s.avg_policy = {0.5, 0.5};
  const auto m = model_with(4, 0);
  EXPECT_TRUE(rsl::wolf_is_winning(s, m));  // 0.9 >= 0.5
  s.update_count = 1'000'000;               // keep the average where it is
  rsl::wolf_update(s, m, Action::A, Action::A, 1.0);
  EXPECT_EQ(s.last_delta, s.delta_win);
  EXPECT_NEAR(s.policy[0], 0.95, 1e-12);
}

TEST(Wolf, LosingUsesDeltaLose) {
  rsl::WolfState s;
  s.q[0][0] = 1.0;
  s.policy = {0.2, 0.8};
  s.avg_policy = {0.6, 0.4};
  s.update_count = 1'000'000;
  const auto m = model_with(4, 0);
  EXPECT_FALSE(rsl::wolf_is_winning(s, m));
  rsl::wolf_update(s, m, Action::A, Action::A, 1.0);
  EXPECT_EQ(s.last_delta, s.delta_lose);
  EXPECT_NEAR(s.policy[0], 0.4, 1e-12);
}

TEST(Wolf, EqualPoliciesCountAsWinning) {
  rsl::WolfState s;
  s.q = {{{0.3, -0.1}, {-0.1, 0.8}}};
  s.policy = s.avg_policy = {0.4, 0.6};
  EXPECT_TRUE(rsl::wolf_is_winning(s, model_with(2, 5)));
}

TEST(Wolf, ConvergesToPureBestAction) {
  rsl::WolfState s;
  const auto m = model_with(10, 0);
  for (int k = 0; k < 200; ++k) rsl::wolf_update(s, m, Action::A, Action::A, 0.8);
  EXPECT_EQ(s.policy[0], 1.0);
  EXPECT_EQ(s.policy[1], 0.0);
}

// --- exploration and dispatch -------------------------------------------------

TEST(Exploration, LinearDecaySchedule) {
  rsl::ExplorationSchedule sched;
  EXPECT_DOUBLE_EQ(sched.at(0, 1000).value, 0.2);
  EXPECT_DOUBLE_EQ(sched.at(100, 1000).value, 0.1);
  EXPECT_DOUBLE_EQ(sched.at(200, 1000).value, 0.0);
  EXPECT_DOUBLE_EQ(sched.at(900, 1000).value, 0.0);
  EXPECT_DOUBLE_EQ(sched.at(0, 1000, rsl::default_explore_start(rsl::LearnerKind::JAL)).value, 1.0);
  sched.start = 0.0;
  EXPECT_DOUBLE_EQ(sched.at(0, 1000, 1.0).value, 0.0);
}

TEST(Exploration, FullEpsilonIsUniform) {
  rsl::Rng rng(9);
  int a = 0;
  for (int k = 0; k < 10000; ++k) a += rsl::explore_select({1.0, 0.0}, Exploration{rsl::ExplorationKind::Epsilon, 1.0}, rng) == Action::A;
  EXPECT_NEAR(a / 10000.0, 0.5, 0.02);
}

TEST(Dispatch, ParseAndPrint) {
  EXPECT_EQ(rsl::parse_learner_kind("jawolf"), rsl::LearnerKind::JAWoLF);
  EXPECT_EQ(rsl::parse_learner_kind("fp"), rsl::LearnerKind::FP);
  EXPECT_EQ(rsl::to_string(rsl::LearnerKind::JAL), "JAL");
  EXPECT_THROW(rsl::parse_learner_kind("il"), std::invalid_argument);
  EXPECT_THROW(rsl::parse_exploration_kind("greedy"), std::invalid_argument);
}

// --- properties -----------------------------------------------------------------

TEST(Property, WolfPoliciesStayOnSimplex) {
  rsl::Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    rsl::WolfState s;
    s.delta_win = 0.01 + 0.1 * rsl::uniform01(rng);
    s.delta_lose = s.delta_win + 0.5 * rsl::uniform01(rng);
    OpponentModel m;
    for (int k = 0; k < 300; ++k) {
      const Action own = rsl::random_action(rng);
      const Action opp = rsl::random_action(rng);
      rsl::update_opponent_model(m, opp, own, own == opp ? rsl::uniform01(rng) : -0.1);
      rsl::wolf_update(s, m, own, opp, own == opp ? rsl::uniform01(rng) : -0.1);
      for (const auto& pi : {s.policy, s.avg_policy}) {
        ASSERT_GE(pi[0], 0.0);
        ASSERT_GE(pi[1], 0.0);
        ASSERT_LE(pi[0], 1.0);
        ASSERT_NEAR(pi[0] + pi[1], 1.0, 1e-9);
      }
    }
  }
}

TEST(Property, FpInvariantToPositiveScaling) {
  rsl::Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const double lo_a = 0.4 * rsl::uniform01(rng), lo_b = 0.4 * rsl::uniform01(rng);
    const double hi_a = lo_a + 0.1 + 0.5 * rsl::uniform01(rng), hi_b = lo_b + 0.1 + 0.5 * rsl::uniform01(rng);
    const double miscoord = -0.2 * rsl::uniform01(rng);
    auto m = model_with(static_cast<std::uint32_t>(rsl::uniform_index(rng, 20)),
                        static_cast<std::uint32_t>(rsl::uniform_index(rng, 20)));
    if (rsl::uniform01(rng) < 0.5) m.observed_payoffs[0] = lo_a + (hi_a - lo_a) * rsl::uniform01(rng);
    if (rsl::uniform01(rng) < 0.5) m.observed_payoffs[1] = lo_b + (hi_b - lo_b) * rsl::uniform01(rng);
    const double s = 0.01 + 50.0 * rsl::uniform01(rng);
    auto scaled = m;
    for (auto& u : scaled.observed_payoffs) {
      if (u) *u *= s;
    }
    const rsl::GamePrior pr{PayoffDistribution::uniform(lo_a, hi_a), PayoffDistribution::uniform(lo_b, hi_b),
                            miscoord};
    const rsl::GamePrior pr_s{PayoffDistribution::uniform(lo_a * s, hi_a * s),
                              PayoffDistribution::uniform(lo_b * s, hi_b * s), miscoord * s};
    const auto ev = rsl::fp_expected_values(m, pr, miscoord);
    if (std::abs(ev[0] - ev[1]) < 1e-9) continue;  // exact ties are a rounding lottery once scaled
    rsl::Rng r1(1), r2(1);
    ASSERT_EQ(rsl::fp_select(m, pr, miscoord, Exploration::none(), r1),
              rsl::fp_select(scaled, pr_s, miscoord * s, Exploration::none(), r2));
  }
}

// Two learners of the same kind repeatedly play one fixed game, with the
// default exploration schedule, and must end on a pure coordinated outcome.
bool self_play_coordinates(rsl::LearnerKind kind, std::uint64_t seed) {
  rsl::Rng rng = rsl::make_stream(seed, "selfplay");
  const double u_a = 0.1 + 0.9 * rsl::uniform01(rng);
  const double u_b = 0.1 + 0.9 * rsl::uniform01(rng);
  const rsl::CooperativeGame g{u_a, u_b, -0.1, uniform_prior()};
  constexpr std::uint64_t kInteractions = 10000;
  const rsl::ExplorationSchedule sched;
  std::array<rsl::LearnerState, 2> learner{rsl::make_learner(kind, {}), rsl::make_learner(kind, {})};
  std::array<OpponentModel, 2> model{};
  for (std::uint64_t t = 0; t < kInteractions; ++t) {
    const auto ex = sched.at(t, kInteractions, rsl::default_explore_start(kind));
    const Action a0 = rsl::select_action(learner[0], model[0], g.prior, g.miscoord, ex, rng);
    const Action a1 = rsl::select_action(learner[1], model[1], g.prior, g.miscoord, ex, rng);
    const double r = rsl::payoff(g, a0, a1).first;
    rsl::learner_update(learner[0], model[0], a0, a1, r);
    rsl::update_opponent_model(model[0], a1, a0, r);
    rsl::learner_update(learner[1], model[1], a1, a0, r);
    rsl::update_opponent_model(model[1], a0, a1, r);
  }
  const Action g0 = rsl::greedy_action(learner[0], model[0], g.prior, g.miscoord);
  const Action g1 = rsl::greedy_action(learner[1], model[1], g.prior, g.miscoord);
  if (g0 != g1) return false;
  for (const auto& l : learner) {
    if (const auto* w = std::get_if<rsl::WolfState>(&l); w && w->policy[rsl::index(g0)] < 0.99) return false;
  }
  return true;
}

TEST(Property, JalSelfPlayReachesPureCoordination) {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) ok += self_play_coordinates(rsl::LearnerKind::JAL, seed);
  EXPECT_GE(ok, 95);
}

TEST(Property, WolfSelfPlayReachesPureCoordination) {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) ok += self_play_coordinates(rsl::LearnerKind::JAWoLF, seed);
  EXPECT_GE(ok, 95);
}

}  // namespace
