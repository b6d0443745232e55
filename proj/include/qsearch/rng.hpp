#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qsearch {

/// Weyl increment used by splitmix64 and by every seed derivation in the
/// library.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// splitmix64 output finalizer (Steele, Lea & Flood constants).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Advances a splitmix64 state and returns the next output.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += kGoldenGamma;
  return splitmix64_mix(state);
}

/// Derives the seed of child `index` from `master`:
/// splitmix64_mix(master + kGoldenGamma * (index + 1)).
///
/// Trial seeds, codebook seeds and per-purpose substreams are all derived
/// with this function, so results never depend on how work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64_mix(master + kGoldenGamma * (index + 1));
}

/// xoshiro256** 1.0 (Blackman & Vigna), seeded by four splitmix64 outputs.
///
/// Satisfies UniformRandomBitGenerator. `uniform()` maps the top 53 bits
/// of one output to [0, 1), so every variate consumes exactly one draw.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

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

  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
};

}  // namespace qsearch
