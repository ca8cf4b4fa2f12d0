#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lobkit {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replica `index` under `master`. Distinct indices never collide.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline double uniform01(Rng& rng) {
  // 53 random bits in [0,1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in (0,1], safe for log().
inline double uniform_open0(Rng& rng) { return 1.0 - uniform01(rng); }

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open0(rng)) / rate; }

inline int random_sign(Rng& rng) { return (rng() >> 63) ? 1 : -1; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Standard normal via Box-Muller; stateless so streams stay reproducible.
inline double standard_normal(Rng& rng) {
  const double u1 = uniform_open0(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Integer-valued Pareto draw: floor(U^{-1/alpha}), support {1,2,...},
/// P(L >= l) ~ l^{-alpha}.
inline std::int64_t pareto_int(Rng& rng, double alpha) {
  const double x = std::pow(uniform_open0(rng), -1.0 / alpha);
  if (x > 9.0e18) return static_cast<std::int64_t>(9.0e18);
  return static_cast<std::int64_t>(std::floor(x));
}

/// Continuous Pareto on [lo, hi] with density ~ x^{-alpha-1}, by inverse CDF.
inline double truncated_pareto(Rng& rng, double alpha, double lo, double hi) {
  const double u = uniform01(rng);
  const double a = std::pow(lo, -alpha);
  const double b = std::pow(hi, -alpha);
  return std::pow(a - u * (a - b), -1.0 / alpha);
}

}  // namespace lobkit
