#pragma once

// Per-pair 2x2 common-interest coordination games.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "rsl/rng.hpp"
#include "rsl/stat_dist.hpp"

namespace rsl {

enum class Action : std::uint8_t { A = 0, B = 1 };

inline constexpr std::array<Action, kNumActions> kActions{Action::A, Action::B};

constexpr std::size_t index(Action a) { return static_cast<std::size_t>(a); }
constexpr Action other(Action a) { return a == Action::A ? Action::B : Action::A; }

enum class DistFamily { Uniform, Beta, Mixed };

inline DistFamily parse_dist_family(std::string_view s) {
  if (s == "uniform") return DistFamily::Uniform;
  if (s == "beta") return DistFamily::Beta;
  if (s == "mixed") return DistFamily::Mixed;
  throw std::invalid_argument("unknown distribution family '" + std::string(s) + "'");
}

inline std::string_view to_string(DistFamily f) {
  switch (f) {
    case DistFamily::Uniform: return "uniform";
    case DistFamily::Beta: return "beta";
    case DistFamily::Mixed: return "mixed";
  }
  return "?";
}

inline constexpr double kMiscoordLo = -0.2;
inline constexpr double kMiscoordHi = 0.0;
inline constexpr int kBetaShapeMax = 10;

struct GamePrior {
  PayoffDistribution dist_a;
  PayoffDistribution dist_b;
  double miscoord;

  const PayoffDistribution& dist(Action m) const { return m == Action::A ? dist_a : dist_b; }
  std::array<PayoffDistribution, kNumActions> dists() const { return {dist_a, dist_b}; }
};

struct CooperativeGame {
  double u_a;
  double u_b;
  double miscoord;
  GamePrior prior;

  double diagonal(Action m) const { return m == Action::A ? u_a : u_b; }
};

namespace detail {

inline PayoffDistribution draw_uniform_prior(Rng& rng) {
  double n = uniform01(rng);
  double m = uniform01(rng);
  while (n == m) m = uniform01(rng);
  return PayoffDistribution::uniform(std::min(n, m), std::max(n, m));
}

inline PayoffDistribution draw_beta_prior(Rng& rng) {
  std::uniform_int_distribution<int> shape(1, kBetaShapeMax);
  const int a = shape(rng);
  const int b = shape(rng);
  return PayoffDistribution::beta(a, b);
}

inline PayoffDistribution draw_prior(DistFamily family, Rng& rng) {
  switch (family) {
    case DistFamily::Uniform: return draw_uniform_prior(rng);
    case DistFamily::Beta: return draw_beta_prior(rng);
    case DistFamily::Mixed:
      return uniform01(rng) < 0.5 ? draw_uniform_prior(rng) : draw_beta_prior(rng);
  }
  throw std::logic_error("unreachable distribution family");
}

}  // namespace detail

/// Draws the generative environment of one pair: independent priors for the
/// two diagonal payoffs and a mis-coordination payoff in [-0.2, 0).
inline GamePrior generate_game_prior(DistFamily family, Rng& rng) {
  auto dist_a = detail::draw_prior(family, rng);
  auto dist_b = detail::draw_prior(family, rng);
  const double miscoord = std::uniform_real_distribution<double>(kMiscoordLo, kMiscoordHi)(rng);
  return GamePrior{std::move(dist_a), std::move(dist_b), miscoord};
}

inline CooperativeGame realize_game(const GamePrior& prior, Rng& rng) {
  if (!(prior.miscoord < prior.dist_a.support_lo()) || !(prior.miscoord < prior.dist_b.support_lo())) {
    throw std::invalid_argument("game prior requires miscoord below both diagonal supports");
  }
  const double u_a = prior.dist_a.sample(rng);
  const double u_b = prior.dist_b.sample(rng);
  return CooperativeGame{u_a, u_b, prior.miscoord, prior};
}

/// Common payoff: identical for both players.
inline std::pair<double, double> payoff(const CooperativeGame& g, Action a_i, Action a_j) {
  const double v = (a_i == a_j) ? g.diagonal(a_i) : g.miscoord;
  return {v, v};
}

inline Action optimal_action(const CooperativeGame& g) { return g.u_b > g.u_a ? Action::B : Action::A; }

}  // namespace rsl
