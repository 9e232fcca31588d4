#pragma once

#include <cstdint>
#include <limits>

namespace pacauction {

/// SplitMix64 generator with keyed sub-streams.
///
/// Every Monte Carlo loop in the library derives one stream per trial from
/// (seed, trial index) via `Rng::stream`, so results never depend on the
/// order (or thread) in which trials are evaluated. Satisfies
/// UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t state) noexcept : state_(state) {}

  static constexpr Rng stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return Rng(mix(seed ^ mix(index + 0x632BE59BD9B4E019ULL)));
  }

  // Independent child stream; the parent advances by one draw.
  constexpr Rng split() noexcept { return Rng(mix((*this)())); }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

  // Uniform on [lo, hi).
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace pacauction
