#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dyclu/learner.hpp"
#include "dyclu/numerics.hpp"
#include "dyclu/rng.hpp"

namespace dyclu {

struct EnvironmentConfig {
  std::size_t d = 25;
  std::size_t n_users = 100;
  std::size_t m = 10;
  std::size_t arm_pool_size = 1000;
  std::size_t candidate_size = 25;
  std::size_t horizon = 2500;  // total steps T across all users
  std::size_t smin = 400;      // stationary-period length range, user-local steps
  std::size_t smax = 2500;
  double sigma = 0.09;
  double gamma = 0.9;  // separation margin between unique parameters

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// A stationary period starting at a user-local interaction index (1-based).
struct ScheduleEntry {
  std::size_t start = 1;
  std::size_t param = 0;
};

/// Immutable ground truth for one run.
struct EnvSpec {
  EnvironmentConfig config;
  std::uint64_t seed = 0;
  std::vector<Vector> unique_params;  // m unit vectors, pairwise ≥ γ apart
  Matrix arm_pool;                    // K × d, unit rows
  std::vector<std::vector<ScheduleEntry>> schedules;

  double sigma2() const noexcept { return config.sigma * config.sigma; }
  std::size_t d() const noexcept { return config.d; }
  std::size_t n_users() const noexcept { return config.n_users; }
  std::size_t horizon() const noexcept { return config.horizon; }

  /// Number of interactions user `user` receives within the horizon.
  std::size_t local_horizon(UserId user) const;
  /// Parameter index governing the user's `local_step`-th interaction.
  std::size_t param_at(UserId user, std::size_t local_step) const;
};

inline constexpr std::size_t kRejectionBudget = 1'000'000;

/// Fixed stream ids for Rng::for_stream.
inline constexpr std::uint64_t kEnvironmentStream = 1;
inline constexpr std::uint64_t kCandidateStream = 2;
inline constexpr std::uint64_t kNoiseStream = 3;

EnvSpec generate_environment(const EnvironmentConfig& cfg, std::uint64_t seed);

/// Round-robin user, a fresh seeded candidate subset and the ground-truth
/// parameter for step t ∈ [1, T].
StepContext next_step(const EnvSpec& env, std::size_t t);

struct Realization {
  double reward = 0.0;
  double regret = 0.0;  // best expected reward minus chosen expected reward
};

/// Noise generator for step t; depends only on (seed, t).
Rng noise_stream(const EnvSpec& env, std::size_t t);

Realization realize_reward(const EnvSpec& env, const StepContext& step, std::size_t chosen,
                           Rng& rng);

}  // namespace dyclu
