#pragma once

// Bounded one-dimensional payoff distributions and the composed
// interaction-value distribution of an unknown peer.
//
// All distributions here have compact support, so every expectation is a
// finite integral. Truncated means use integration by parts,
//   E[X 1{X <= t}] = t F(t) - \int_lo^t F(x) dx,
// which only needs the CDF and is well behaved across atoms.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rsl/rng.hpp"

namespace rsl {

inline constexpr double kQuadratureTolerance = 1e-9;
inline constexpr int kQuadratureMaxDepth = 40;
inline constexpr double kBetaRelTolerance = 1e-12;
inline constexpr double kAtomSumTolerance = 1e-12;
inline constexpr double kPolicySumTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Numerics
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, int min_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || (min_depth <= 0 && std::abs(delta) <= 15.0 * tol)) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, min_depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, min_depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b].
///
/// `fa` and `fb` are passed explicitly so callers integrating a function with
/// a jump at an endpoint can supply the one-sided limit belonging to the
/// interval.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fb,
                        double tol = kQuadratureTolerance, int max_depth = kQuadratureMaxDepth) {
  if (!(b > a)) return 0.0;
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, 3);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = kQuadratureTolerance,
                        int max_depth = kQuadratureMaxDepth) {
  return adaptive_simpson(f, a, b, f(a), f(b), tol, max_depth);
}

namespace detail {

inline bool is_small_integer(double v) { return v >= 1.0 && v <= 60.0 && std::floor(v) == v; }

// Lentz evaluation of the incomplete-beta continued fraction.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kBetaRelTolerance) break;
  }
  return h;
}

// Integer shapes: I_x(a, b) = P(Binomial(a+b-1, x) >= a), a short finite sum.
inline double incomplete_beta_integer(int a, int b, double x) {
  if (x > 0.5) return 1.0 - incomplete_beta_integer(b, a, 1.0 - x);
  const int n = a + b - 1;
  double binom = 1.0;
  for (int k = 1; k <= a; ++k) binom = binom * (n - a + k) / k;
  double term = binom * std::pow(x, a) * std::pow(1.0 - x, n - a);
  const double ratio = x / (1.0 - x);
  double sum = 0.0;
  for (int j = a; j <= n; ++j) {
    sum += term;
    term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * ratio;
  }
  return sum;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0.
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (detail::is_small_integer(a) && detail::is_small_integer(b) && a + b <= 61.0) {
    return detail::incomplete_beta_integer(static_cast<int>(a), static_cast<int>(b), x);
  }
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// ---------------------------------------------------------------------------
// Payoff distributions
// ---------------------------------------------------------------------------

struct Uniform {
  double lo;
  double hi;
};

/// Beta(shape_a, shape_b) on [0, 1].
struct Beta {
  double shape_a;
  double shape_b;
};

struct PointMass {
  double value;
};

struct Atom {
  double value;
  double prob;
};

/// Finite distribution; atoms sorted by value with distinct values.
struct DiscreteAtoms {
  std::vector<Atom> atoms;
};

class PayoffDistribution {
 public:
  using Family = std::variant<Uniform, Beta, PointMass, DiscreteAtoms>;

  static PayoffDistribution uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("uniform distribution requires finite lo < hi");
    }
    return PayoffDistribution(Uniform{lo, hi});
  }

  static PayoffDistribution beta(double shape_a, double shape_b) {
    if (!(shape_a > 0.0) || !(shape_b > 0.0) || !std::isfinite(shape_a) || !std::isfinite(shape_b)) {
      throw std::invalid_argument("beta distribution requires positive finite shapes");
    }
    return PayoffDistribution(Beta{shape_a, shape_b});
  }

  static PayoffDistribution point_mass(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("point mass requires a finite value");
    return PayoffDistribution(PointMass{value});
  }

  static PayoffDistribution discrete(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("discrete distribution requires at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.prob >= 0.0) || !std::isfinite(a.value)) {
        throw std::invalid_argument("discrete atoms need finite values and nonnegative probabilities");
      }
      total += a.prob;
    }
    if (std::abs(total - 1.0) > kAtomSumTolerance) {
      throw std::invalid_argument("discrete atom probabilities must sum to 1");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.value < r.value; });
    std::vector<Atom> merged;
    for (const auto& a : atoms) {
      if (!merged.empty() && merged.back().value == a.value) {
        merged.back().prob += a.prob;
      } else {
        merged.push_back(a);
      }
    }
    return PayoffDistribution(DiscreteAtoms{std::move(merged)});
  }

  const Family& family() const { return family_; }

  double support_lo() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return d.lo;
          if constexpr (std::is_same_v<T, Beta>) return 0.0;
          if constexpr (std::is_same_v<T, PointMass>) return d.value;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) return d.atoms.front().value;
        },
        family_);
  }

  double support_hi() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return d.hi;
          if constexpr (std::is_same_v<T, Beta>) return 1.0;
          if constexpr (std::is_same_v<T, PointMass>) return d.value;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) return d.atoms.back().value;
        },
        family_);
  }

  /// P(X <= t).
  double cdf(double t) const {
    return std::visit(
        [t](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) {
            if (t <= d.lo) return 0.0;
            if (t >= d.hi) return 1.0;
            return (t - d.lo) / (d.hi - d.lo);
          }
          if constexpr (std::is_same_v<T, Beta>) return regularized_incomplete_beta(d.shape_a, d.shape_b, t);
          if constexpr (std::is_same_v<T, PointMass>) return t >= d.value ? 1.0 : 0.0;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            double acc = 0.0;
            for (const auto& a : d.atoms) {
              if (a.value > t) break;
              acc += a.prob;
            }
            return std::min(acc, 1.0);
          }
        },
        family_);
  }

  /// P(X < t); differs from cdf only at atoms.
  double cdf_below(double t) const {
    return std::visit(
        [this, t](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, PointMass>) return t > d.value ? 1.0 : 0.0;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            double acc = 0.0;
            for (const auto& a : d.atoms) {
              if (a.value >= t) break;
              acc += a.prob;
            }
            return std::min(acc, 1.0);
          }
          if constexpr (std::is_same_v<T, Uniform> || std::is_same_v<T, Beta>) return cdf(t);
        },
        family_);
  }

  /// E[X 1{X <= t}].
  double partial_expectation(double t) const {
    return std::visit(
        [t](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) {
            if (t <= d.lo) return 0.0;
            const double u = std::min(t, d.hi);
            return (u * u - d.lo * d.lo) / (2.0 * (d.hi - d.lo));
          }
          if constexpr (std::is_same_v<T, Beta>) {
            // x f_{a,b}(x) = a/(a+b) f_{a+1,b}(x)
            const double m = d.shape_a / (d.shape_a + d.shape_b);
            return m * regularized_incomplete_beta(d.shape_a + 1.0, d.shape_b, t);
          }
          if constexpr (std::is_same_v<T, PointMass>) return t >= d.value ? d.value : 0.0;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            double acc = 0.0;
            for (const auto& a : d.atoms) {
              if (a.value > t) break;
              acc += a.value * a.prob;
            }
            return acc;
          }
        },
        family_);
  }

  double mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return 0.5 * (d.lo + d.hi);
          if constexpr (std::is_same_v<T, Beta>) return d.shape_a / (d.shape_a + d.shape_b);
          if constexpr (std::is_same_v<T, PointMass>) return d.value;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            double acc = 0.0;
            for (const auto& a : d.atoms) acc += a.value * a.prob;
            return acc;
          }
        },
        family_);
  }

  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return d.lo + (d.hi - d.lo) * uniform01(rng);
          if constexpr (std::is_same_v<T, Beta>) {
            const double ga = std::gamma_distribution<double>(d.shape_a, 1.0)(rng);
            const double gb = std::gamma_distribution<double>(d.shape_b, 1.0)(rng);
            return ga / (ga + gb);
          }
          if constexpr (std::is_same_v<T, PointMass>) return d.value;
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            const double u = uniform01(rng);
            double acc = 0.0;
            for (const auto& a : d.atoms) {
              acc += a.prob;
              if (u < acc) return a.value;
            }
            return d.atoms.back().value;
          }
        },
        family_);
  }

  /// Points where the CDF has a jump or a kink.
  std::vector<double> breakpoints() const {
    return std::visit(
        [](const auto& d) -> std::vector<double> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return {d.lo, d.hi};
          if constexpr (std::is_same_v<T, Beta>) return {0.0, 1.0};
          if constexpr (std::is_same_v<T, PointMass>) return {d.value};
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            std::vector<double> out;
            out.reserve(d.atoms.size());
            for (const auto& a : d.atoms) out.push_back(a.value);
            return out;
          }
        },
        family_);
  }

  bool is_continuous() const {
    return std::holds_alternative<Uniform>(family_) || std::holds_alternative<Beta>(family_);
  }

  std::string describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) os << "U(" << d.lo << "," << d.hi << ")";
          if constexpr (std::is_same_v<T, Beta>) os << "Beta(" << d.shape_a << "," << d.shape_b << ")";
          if constexpr (std::is_same_v<T, PointMass>) os << "Point(" << d.value << ")";
          if constexpr (std::is_same_v<T, DiscreteAtoms>) {
            os << "Atoms{";
            for (std::size_t k = 0; k < d.atoms.size(); ++k) {
              os << (k ? " " : "") << d.atoms[k].value << ":" << d.atoms[k].prob;
            }
            os << "}";
          }
        },
        family_);
    return os.str();
  }

 private:
  explicit PayoffDistribution(Family f) : family_(std::move(f)) {}
  Family family_;
};

// ---------------------------------------------------------------------------
// Value distribution of an unknown peer
// ---------------------------------------------------------------------------

inline constexpr std::size_t kNumActions = 2;

/// Distribution of max_m [p(m) x_m + (1 - p(m)) miscoord] with independent
/// x_m ~ prior_m. Its CDF is the product of the branch CDFs.
class ValueDistribution {
 public:
  ValueDistribution(std::array<PayoffDistribution, kNumActions> priors,
                    std::array<double, kNumActions> policy, double miscoord)
      : priors_(std::move(priors)), policy_(policy), miscoord_(miscoord) {
    double total = 0.0;
    for (double p : policy_) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("policy entries must lie in [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kPolicySumTolerance) {
      throw std::invalid_argument("policy estimate must sum to 1");
    }
    for (const auto& prior : priors_) {
      if (!(miscoord_ <= prior.support_lo())) {
        throw std::invalid_argument("mis-coordination payoff must not exceed any prior's support");
      }
    }
    lo_ = -std::numeric_limits<double>::infinity();
    hi_ = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < kNumActions; ++m) {
      lo_ = std::max(lo_, branch_value(m, priors_[m].support_lo()));
      hi_ = std::max(hi_, branch_value(m, priors_[m].support_hi()));
      for (double b : priors_[m].breakpoints()) breakpoints_.push_back(branch_value(m, b));
      breakpoints_.push_back(branch_value(m, priors_[m].support_lo()));
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
    mean_ = hi_ - integrate_cdf(lo_, hi_);
  }

  const PayoffDistribution& prior(std::size_t m) const { return priors_[m]; }
  const std::array<double, kNumActions>& policy() const { return policy_; }
  double miscoord() const { return miscoord_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  double mean() const { return mean_; }

  double cdf(double t) const {
    double f = 1.0;
    for (std::size_t m = 0; m < kNumActions && f > 0.0; ++m) f *= branch_cdf(m, t, false);
    return f;
  }

  double cdf_below(double t) const {
    double f = 1.0;
    for (std::size_t m = 0; m < kNumActions && f > 0.0; ++m) f *= branch_cdf(m, t, true);
    return f;
  }

  double partial_expectation(double t) const {
    if (t < lo_) return 0.0;
    if (t >= hi_) return mean_;
    return t * cdf(t) - integrate_cdf(lo_, t);
  }

  double sample(Rng& rng) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < kNumActions; ++m) {
      const double x = priors_[m].sample(rng);
      best = std::max(best, branch_value(m, x));
    }
    return best;
  }

 private:
  double branch_value(std::size_t m, double x) const {
    return policy_[m] * x + (1.0 - policy_[m]) * miscoord_;
  }

  double branch_cdf(std::size_t m, double t, bool strict) const {
    const double w = policy_[m];
    if (w == 0.0) {
      return strict ? (t > miscoord_ ? 1.0 : 0.0) : (t >= miscoord_ ? 1.0 : 0.0);
    }
    const double x = (t - (1.0 - w) * miscoord_) / w;
    return strict ? priors_[m].cdf_below(x) : priors_[m].cdf(x);
  }

  // \int_a^b F(x) dx, split at every jump or kink of F.
  double integrate_cdf(double a, double b) const {
    if (!(b > a)) return 0.0;
    const auto f = [this](double x) { return cdf(x); };
    const double width = b - a;
    double total = 0.0;
    double left = a;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), a);
    while (left < b) {
      const double right = (it != breakpoints_.end() && *it < b) ? *it : b;
      if (right > left) {
        const double tol = kQuadratureTolerance * (right - left) / width;
        total += adaptive_simpson(f, left, right, cdf(left), cdf_below(right), tol);
      }
      left = right;
      if (it != breakpoints_.end()) ++it;
    }
    return total;
  }

  std::array<PayoffDistribution, kNumActions> priors_;
  std::array<double, kNumActions> policy_;
  double miscoord_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double mean_ = 0.0;
  std::vector<double> breakpoints_;
};

// ---------------------------------------------------------------------------
// Generic operations
// ---------------------------------------------------------------------------

template <class D>
concept BoundedDistribution = requires(const D& d, double t) {
  { d.cdf(t) } -> std::convertible_to<double>;
  { d.partial_expectation(t) } -> std::convertible_to<double>;
  { d.mean() } -> std::convertible_to<double>;
  { d.support_lo() } -> std::convertible_to<double>;
  { d.support_hi() } -> std::convertible_to<double>;
};

template <BoundedDistribution D>
double cdf(const D& d, double t) {
  return d.cdf(t);
}

template <BoundedDistribution D>
double partial_expectation(const D& d, double t) {
  return d.partial_expectation(t);
}

/// E[min(X, t)].
template <BoundedDistribution D>
double capped_expectation(const D& d, double t) {
  return d.partial_expectation(t) + t * (1.0 - d.cdf(t));
}

template <BoundedDistribution D>
double sample(const D& d, Rng& rng) {
  return d.sample(rng);
}

inline ValueDistribution compose_value_distribution(std::array<PayoffDistribution, kNumActions> priors,
                                                    std::array<double, kNumActions> policy,
                                                    double miscoord) {
  return ValueDistribution(std::move(priors), policy, miscoord);
}

}  // namespace rsl
