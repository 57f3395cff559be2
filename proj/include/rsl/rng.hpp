#pragma once

// Named, seedable random substreams.
//
// Every consumer of randomness receives an explicit engine derived from the
// master seed and a stream name (plus optional integer keys), so that adding
// draws to one subsystem never perturbs another.

#include <cstdint>
#include <random>
#include <string_view>

namespace rsl {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                    std::uint64_t key_a = 0, std::uint64_t key_b = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a(stream));
  h = splitmix64(h ^ key_a);
  h = splitmix64(h ^ (key_b + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t master, std::string_view stream, std::uint64_t key_a = 0,
                       std::uint64_t key_b = 0) {
  return Rng{derive_seed(master, stream, key_a, key_b)};
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace rsl
