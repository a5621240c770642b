#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace drcsim {

// Named sub-streams derived from one run seed. Every random decision in a
// run draws from exactly one stream, so a run is reproducible from the seed
// alone and independent components never share a generator.
enum class RngStream : std::uint64_t {
  EnvExogenous = 1,  // channel, factors, arrivals, event draw
  AgentExplore = 2,  // epsilon-greedy draws
  WeightInit = 3,    // network initialization
  ReplaySample = 4,  // mini-batch sampling
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, RngStream stream) {
  std::uint64_t s = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(stream) + 1);
  splitmix64(s);
  return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
  return std::mt19937_64(mix_seed(seed, stream));
}

// 53-bit uniform in [0, 1); bit-identical across platforms for a given engine
// state, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& rng, double p) {
  return uniform01(rng) < p;
}

// Knuth's product method; adequate for the small rates used here.
inline int poisson(std::mt19937_64& rng, double lambda) {
  const double limit = std::exp(-lambda);
  int k = 0;
  double prod = uniform01(rng);
  while (prod > limit) {
    ++k;
    prod *= uniform01(rng);
  }
  return k;
}

// Unbiased integer in [0, n), n >= 1.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t bound = (UINT64_MAX / n) * n;
  std::uint64_t x = rng();
  while (x >= bound) x = rng();
  return x % n;
}

}  // namespace drcsim
