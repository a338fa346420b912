#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "dyclu/numerics.hpp"

namespace dyclu {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** seeded through splitmix64. Bit streams, uniforms, integer
/// draws and Gaussians are all derived here so that runs replay exactly on
/// any platform; std:: distributions are never used.
///
/// Reference output: Rng(42) first three draws are
/// 0x15780b2e0c2ec716, 0x6104d9866d113a7e, 0xae17533239e499a1.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  /// Independent stream keyed by (seed, stream, index).
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept;

  /// Standard normal (Marsaglia polar method, no cached spare).
  double normal() noexcept;

  /// Standard Gaussian vector normalized to unit length.
  Vector unit_vector(std::size_t d);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace dyclu
