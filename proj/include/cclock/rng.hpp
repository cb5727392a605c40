#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cclock {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** generator seeded through SplitMix64.
/// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      s = mix64(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_positive() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  bool bernoulli(double prob) noexcept { return uniform() < prob; }

  double exponential(double rate) noexcept { return -std::log(uniform_positive()) / rate; }

  /// Geom_0(ratio): P(N = i) = (1 - ratio) ratio^i, i >= 0.
  std::int64_t geometric0(double ratio) noexcept {
    if (ratio <= 0.0) return 0;
    return static_cast<std::int64_t>(std::floor(std::log(uniform_positive()) / std::log(ratio)));
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

/// Independent stream for replica `index` of an ensemble seeded by `master_seed`.
inline Rng replica_stream(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return Rng(mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace cclock
