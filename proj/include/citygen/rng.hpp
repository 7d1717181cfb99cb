#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace citygen {

// Seedable random stream. The engine is std::mt19937_64, which is fully
// specified by the standard; the conversions below are written out by hand
// because the <random> distributions differ between standard libraries and
// run logs must replay identically everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling keeps it unbiased.
  int uniformInt(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return static_cast<int>(static_cast<std::int64_t>(lo) + static_cast<std::int64_t>(r % span));
  }

  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

  // Box-Muller; one draw per call so the stream position is easy to reason about.
  double normal(double mean, double sd) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a root seed and a key path,
// e.g. deriveSeed(runSeed, {generation, child}).
inline std::uint64_t deriveSeed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(root);
  for (const std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags used with deriveSeed so distinct consumers never share a stream.
namespace stream {
inline constexpr std::uint64_t kSeedPopulation = 1;
inline constexpr std::uint64_t kBreed = 2;
inline constexpr std::uint64_t kRandomStep = 3;
inline constexpr std::uint64_t kAgentFallback = 4;
inline constexpr std::uint64_t kOracle = 5;
}  // namespace stream

}  // namespace citygen
