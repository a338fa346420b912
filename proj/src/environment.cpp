#include "dyclu/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, "environment." + field + ": " + what);
}

std::vector<Vector> sample_separated(std::size_t m, std::size_t d, double gamma, Rng& rng) {
  std::vector<Vector> accepted;
  accepted.reserve(m);
  std::size_t attempts = 0;
  while (accepted.size() < m) {
    if (++attempts > kRejectionBudget) {
      throw Error(ErrorCode::InfeasibleSeparation,
                  "could not place " + std::to_string(m) + " unit vectors in d=" +
                      std::to_string(d) + " with margin " + std::to_string(gamma));
    }
    Vector candidate = rng.unit_vector(d);
    const bool separated = std::all_of(accepted.begin(), accepted.end(), [&](const Vector& v) {
      return (v - candidate).norm() >= gamma;
    });
    if (separated) accepted.push_back(std::move(candidate));
  }
  return accepted;
}

}  // namespace

void EnvironmentConfig::validate() const {
  require(d >= 1, "d", "must be >= 1");
  require(n_users >= 1, "n_users", "must be >= 1");
  require(m >= 1, "m", "must be >= 1");
  require(arm_pool_size >= 1, "arm_pool_size", "must be >= 1");
  require(candidate_size >= 1 && candidate_size <= arm_pool_size, "candidate_size",
          "must lie in [1, arm_pool_size]");
  require(horizon >= n_users, "horizon", "must be >= n_users");
  require(smin >= 1, "smin", "must be >= 1");
  require(smax >= smin, "smax", "must be >= smin");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma", "must be finite and >= 0");
  require(gamma >= 0.0 && std::isfinite(gamma), "gamma", "must be finite and >= 0");
}

std::size_t EnvSpec::local_horizon(UserId user) const {
  const std::size_t n = config.n_users;
  if (user.value() == 0 || user.index() >= n) {
    throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user.value()));
  }
  return config.horizon / n + (user.index() < config.horizon % n ? 1 : 0);
}

std::size_t EnvSpec::param_at(UserId user, std::size_t local_step) const {
  if (user.value() == 0 || user.index() >= schedules.size()) {
    throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user.value()));
  }
  const auto& schedule = schedules[user.index()];
  auto it = std::upper_bound(schedule.begin(), schedule.end(), local_step,
                             [](std::size_t s, const ScheduleEntry& e) { return s < e.start; });
  if (it == schedule.begin()) throw Error(ErrorCode::OutOfHorizon, "local step before schedule");
  return std::prev(it)->param;
}

EnvSpec generate_environment(const EnvironmentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EnvSpec env;
  env.config = cfg;
  env.seed = seed;
  Rng rng = Rng::for_stream(seed, kEnvironmentStream);

  env.unique_params = sample_separated(cfg.m, cfg.d, cfg.gamma, rng);
  env.arm_pool.resize(static_cast<Eigen::Index>(cfg.arm_pool_size), static_cast<Eigen::Index>(cfg.d));
  for (std::size_t j = 0; j < cfg.arm_pool_size; ++j) {
    env.arm_pool.row(static_cast<Eigen::Index>(j)) = rng.unit_vector(cfg.d).transpose();
  }

  env.schedules.resize(cfg.n_users);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    const std::size_t local = env.local_horizon(UserId::from_index(i));
    auto& schedule = env.schedules[i];
    if (cfg.m == 1) {
      // A single parameter admits no change points.
      schedule.push_back({1, 0});
      continue;
    }
    std::size_t start = 1;
    while (start <= local) {
      const std::size_t length = rng.between(cfg.smin, cfg.smax);
      std::size_t k = rng.below(cfg.m);
      if (!schedule.empty()) {
        while (k == schedule.back().param) k = rng.below(cfg.m);
      }
      schedule.push_back({start, k});
      start += length;
    }
  }
  return env;
}

StepContext next_step(const EnvSpec& env, std::size_t t) {
  if (t < 1 || t > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon,
                "t=" + std::to_string(t) + " outside [1, " + std::to_string(env.horizon()) + "]");
  }
  const std::size_t n = env.n_users();
  StepContext step;
  step.t = t;
  step.user = UserId::from_index((t - 1) % n);
  step.local_step = (t - 1) / n + 1;
  step.true_param = env.param_at(step.user, step.local_step);

  const auto pool = static_cast<std::size_t>(env.arm_pool.rows());
  const std::size_t c = env.config.candidate_size;
  if (c == pool) {
    step.candidates = env.arm_pool;
    return step;
  }
  // Partial Fisher-Yates over arm indices.
  Rng rng = Rng::for_stream(env.seed, kCandidateStream, t);
  std::vector<std::size_t> index(pool);
  std::iota(index.begin(), index.end(), std::size_t{0});
  step.candidates.resize(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(env.d()));
  for (std::size_t j = 0; j < c; ++j) {
    const std::size_t pick = j + rng.below(pool - j);
    std::swap(index[j], index[pick]);
    step.candidates.row(static_cast<Eigen::Index>(j)) =
        env.arm_pool.row(static_cast<Eigen::Index>(index[j]));
  }
  return step;
}

Rng noise_stream(const EnvSpec& env, std::size_t t) {
  return Rng::for_stream(env.seed, kNoiseStream, t);
}

Realization realize_reward(const EnvSpec& env, const StepContext& step, std::size_t chosen,
                           Rng& rng) {
  if (chosen >= static_cast<std::size_t>(step.candidates.rows())) {
    throw Error(ErrorCode::NoCandidates, "chosen index out of range");
  }
  if (!step.true_param || *step.true_param >= env.unique_params.size()) {
    throw Error(ErrorCode::UnknownParameter, "step has no valid ground-truth parameter");
  }
  const Vector& theta = env.unique_params[*step.true_param];
  const Vector expected = step.candidates * theta;
  const double mean = expected(static_cast<Eigen::Index>(chosen));
  Realization out;
  out.regret = expected.maxCoeff() - mean;
  out.reward = env.config.sigma > 0.0 ? mean + env.config.sigma * rng.normal() : mean;
  return out;
}

}  // namespace dyclu
