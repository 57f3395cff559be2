#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <variant>

#include "rsl/payoff_games.hpp"

namespace {

using rsl::Action;
using rsl::DistFamily;
using rsl::GamePrior;
using rsl::PayoffDistribution;

GamePrior prior_of(PayoffDistribution a, PayoffDistribution b, double miscoord) {
  return GamePrior{std::move(a), std::move(b), miscoord};
}

rsl::CooperativeGame game(double u_a, double u_b, double miscoord) {
  return rsl::CooperativeGame{u_a, u_b, miscoord,
                              prior_of(PayoffDistribution::uniform(0, 1), PayoffDistribution::uniform(0, 1), -0.2)};
}

TEST(GeneratePrior, UniformFamilyBounds) {
  rsl::Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const auto p = rsl::generate_game_prior(DistFamily::Uniform, rng);
    for (const auto& d : p.dists()) {
      ASSERT_TRUE(std::holds_alternative<rsl::Uniform>(d.family()));
      ASSERT_GE(d.support_lo(), 0.0);
      ASSERT_LT(d.support_lo(), d.support_hi());
      ASSERT_LE(d.support_hi(), 1.0);
    }
  }
}

TEST(GeneratePrior, BetaShapesAreIntegersOneToTen) {
  rsl::Rng rng(2);
  std::set<std::pair<double, double>> seen;
  for (int k = 0; k < 5000; ++k) {
    const auto p = rsl::generate_game_prior(DistFamily::Beta, rng);
    for (const auto& d : p.dists()) {
      const auto* beta = std::get_if<rsl::Beta>(&d.family());
      ASSERT_NE(beta, nullptr);
      const double a = beta->shape_a;
      const double b = beta->shape_b;
      ASSERT_EQ(a, std::floor(a));
      ASSERT_EQ(b, std::floor(b));
      ASSERT_GE(a, 1.0);
      ASSERT_LE(a, 10.0);
      ASSERT_GE(b, 1.0);
      ASSERT_LE(b, 10.0);
      seen.emplace(a, b);
    }
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(GeneratePrior, MiscoordRange) {
  rsl::Rng rng(3);
  for (auto family : {DistFamily::Uniform, DistFamily::Beta, DistFamily::Mixed}) {
    for (int k = 0; k < 10000; ++k) {
      const auto p = rsl::generate_game_prior(family, rng);
      ASSERT_GE(p.miscoord, -0.2);
      ASSERT_LE(p.miscoord, 0.0);
    }
  }
}

TEST(GeneratePrior, MixedFamilyDrawsBoth) {
  rsl::Rng rng(4);
  int uniform = 0, beta = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto p = rsl::generate_game_prior(DistFamily::Mixed, rng);
    (std::holds_alternative<rsl::Uniform>(p.dist_a.family()) ? uniform : beta)++;
  }
  EXPECT_GT(uniform, 400);
  EXPECT_GT(beta, 400);
}

TEST(ParseFamily, KnownAndUnknown) {
  EXPECT_EQ(rsl::parse_dist_family("beta"), DistFamily::Beta);
  EXPECT_EQ(rsl::to_string(DistFamily::Mixed), "mixed");
  EXPECT_THROW(rsl::parse_dist_family("gamma"), std::invalid_argument);
}

TEST(Realize, PointMassIsExact) {
  rsl::Rng rng(5);
  const auto g = rsl::realize_game(
      prior_of(PayoffDistribution::point_mass(0.7), PayoffDistribution::point_mass(0.3), -0.1), rng);
  EXPECT_EQ(g.u_a, 0.7);
  EXPECT_EQ(g.u_b, 0.3);
  EXPECT_EQ(g.miscoord, -0.1);
}

TEST(Realize, WithinPriorBounds) {
  rsl::Rng rng(6);
  const auto pr = prior_of(PayoffDistribution::uniform(0.2, 0.8), PayoffDistribution::uniform(0.2, 0.8), -0.1);
  for (int k = 0; k < 10000; ++k) {
    const auto g = rsl::realize_game(pr, rng);
    ASSERT_GE(g.u_a, 0.2);
    ASSERT_LE(g.u_a, 0.8);
    ASSERT_GE(g.u_b, 0.2);
    ASSERT_LE(g.u_b, 0.8);
  }
}

TEST(Realize, DifferentSeedsGiveDistinctContinuousDraws) {
  const auto pr = prior_of(PayoffDistribution::beta(3, 4), PayoffDistribution::uniform(0.1, 0.9), -0.1);
  std::set<double> seen;
  for (std::uint64_t s = 0; s < 100; ++s) {
    rsl::Rng rng = rsl::make_stream(s, "game");
    const auto g = rsl::realize_game(pr, rng);
    seen.insert(g.u_a);
    seen.insert(g.u_b);
  }
  EXPECT_EQ(seen.size(), 200u);
}

TEST(Realize, RejectsMiscoordInsideSupport) {
  rsl::Rng rng(7);
  EXPECT_THROW(
      rsl::realize_game(prior_of(PayoffDistribution::uniform(0.1, 0.9), PayoffDistribution::uniform(0, 1), 0.2), rng),
      std::invalid_argument);
}

TEST(Payoff, DiagonalAndOffDiagonal) {
  const auto g = game(0.9, 0.4, -0.1);
  EXPECT_EQ(rsl::payoff(g, Action::A, Action::A), std::make_pair(0.9, 0.9));
  EXPECT_EQ(rsl::payoff(g, Action::B, Action::B), std::make_pair(0.4, 0.4));
  EXPECT_EQ(rsl::payoff(g, Action::A, Action::B), std::make_pair(-0.1, -0.1));
}

TEST(Payoff, SymmetricInPlayers) {
  const auto g = game(0.6, 0.3, -0.05);
  for (Action x : rsl::kActions) {
    for (Action y : rsl::kActions) {
      const auto [p, q] = rsl::payoff(g, x, y);
      const auto [r, s] = rsl::payoff(g, y, x);
      EXPECT_EQ(p, s);
      EXPECT_EQ(q, r);
      EXPECT_EQ(p, q);
    }
  }
}

TEST(OptimalAction, ArgmaxWithTieToA) {
  EXPECT_EQ(rsl::optimal_action(game(0.9, 0.4, -0.1)), Action::A);
  EXPECT_EQ(rsl::optimal_action(game(0.4, 0.9, -0.1)), Action::B);
  EXPECT_EQ(rsl::optimal_action(game(0.5, 0.5, -0.1)), Action::A);
}

// Every generated game is a pure coordination game: the two diagonal outcomes
// are its only pure Nash equilibria.
TEST(Property, ExactlyTwoPureNashEquilibria) {
  rsl::Rng rng(8);
  for (int k = 0; k < 10000; ++k) {
    const auto g = rsl::realize_game(rsl::generate_game_prior(DistFamily::Mixed, rng), rng);
    int equilibria = 0;
    for (Action x : rsl::kActions) {
      for (Action y : rsl::kActions) {
        const double px = rsl::payoff(g, x, y).first;
        const double py = rsl::payoff(g, x, y).second;
        const bool row_best = px >= rsl::payoff(g, rsl::other(x), y).first;
        const bool col_best = py >= rsl::payoff(g, x, rsl::other(y)).second;
        if (row_best && col_best) {
          ++equilibria;
          ASSERT_EQ(x, y);
        }
      }
    }
    ASSERT_EQ(equilibria, 2) << "u_a=" << g.u_a << " u_b=" << g.u_b << " miscoord=" << g.miscoord;
  }
}

}  // namespace
