#include "dyclu/dyclu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "dyclu/environment.hpp"
#include "dyclu/error.hpp"
#include "test_support.hpp"

namespace dyclu {
namespace {

Vector e(Eigen::Index d, Eigen::Index i) { return Vector::Unit(d, i); }

DyCluConfig config(std::size_t d, double sigma2 = 0.0081) {
  DyCluConfig cfg = DyCluConfig::with_defaults(d, sigma2);
  return cfg;
}

template <typename Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), code) << err.what();
  }
}

TEST(DyCluConfig, DefaultsAndValidation) {
  const DyCluConfig cfg = DyCluConfig::with_defaults(5, 0.01);
  EXPECT_NEAR(cfg.upsilon_e, 3.841458820694124, 1e-9);
  EXPECT_NEAR(cfg.upsilon_c, 11.070497693516351, 1e-8);
  EXPECT_NO_THROW(cfg.validate());
  DyCluConfig bad = cfg;
  bad.tau = 0;
  expect_error(ErrorCode::ConfigError, [&] { bad.validate(); });
  bad = cfg;
  bad.delta = 1.0;
  expect_error(ErrorCode::ConfigError, [&] { bad.validate(); });
  bad = cfg;
  bad.lambda = 0.0;
  expect_error(ErrorCode::ConfigError, [&] { bad.validate(); });
  bad = cfg;
  bad.sigma2 = 0.0;
  expect_error(ErrorCode::ConfigError, [&] { bad.validate(); });
}

TEST(DetectionThreshold, Examples) {
  DyCluConfig cfg = config(1);
  cfg.delta_e = 1.0;
  EXPECT_NEAR(detection_threshold(cfg), 0.05, 1e-12);
  cfg.upsilon_e = 1e6;
  EXPECT_NEAR(detection_threshold(cfg), 0.0, 1e-15);
  cfg.upsilon_e = 3.841;
  cfg.delta_e = std::exp(-2.0);
  cfg.tau = 50;
  EXPECT_NEAR(detection_threshold(cfg), 0.19143504000126627, 1e-12);
}

TEST(UserModel, WindowMeanTracksContents) {
  UserModel m(ModelId(0), UserId(1), 2, 3, 0);
  EXPECT_EQ(m.e_mean(), 0.0);
  m.push_indicator(true);
  EXPECT_EQ(m.e_mean(), 1.0);
  m.push_indicator(false);
  EXPECT_EQ(m.e_mean(), 0.5);
  m.push_indicator(false);
  m.push_indicator(false);  // evicts the leading 1
  EXPECT_EQ(m.window().size(), 3u);
  EXPECT_EQ(m.e_mean(), 0.0);
}

TEST(SelectArm, FreshPoolScoresByWidthAlone) {
  ModelPool pool(1, 2, 30);
  DyCluConfig cfg = config(2, 1.0);
  cfg.lambda = 1.0;
  cfg.delta = std::exp(-0.5);
  const Aggregate agg = aggregate_statistics(pool, pool.neighborhood(UserId(1)), cfg);
  Matrix cand(1, 2);
  cand.row(0) = e(2, 0).transpose();
  const auto scores = ucb_scores(agg.gram, agg.moment, agg.n_obs, cand, cfg.ucb());
  EXPECT_NEAR(scores[0], 2.0, 1e-15);
  EXPECT_EQ(select_arm(pool, UserId(1), cand, cfg), 0u);

  Matrix twins(2, 2);
  twins.row(0) = e(2, 1).transpose();
  twins.row(1) = e(2, 1).transpose();
  EXPECT_EQ(select_arm(pool, UserId(1), twins, cfg), 0u);
  expect_error(ErrorCode::NoCandidates, [&] { select_arm(pool, UserId(1), Matrix(0, 2), cfg); });
}

TEST(SelectArm, RidgeEstimateFromAggregatedStatistics) {
  ModelPool pool(1, 2, 30);
  for (int i = 0; i < 99; ++i) pool.current_mut(UserId(1)).append(e(2, 0), 1.0);
  const DyCluConfig cfg = config(2);
  const Aggregate agg = aggregate_statistics(pool, pool.neighborhood(UserId(1)), cfg);
  const Vector theta = agg.gram.llt().solve(agg.moment);
  EXPECT_NEAR(theta.dot(e(2, 0)), 0.99, 1e-12);
  EXPECT_EQ(agg.n_obs, 99u);
}

TEST(AggregateStatistics, Examples) {
  ModelPool pool(3, 2, 30);
  DyCluConfig cfg = config(2);
  cfg.lambda = 2.0;
  const std::vector<ModelId> all{ModelId(0), ModelId(1), ModelId(2)};
  Aggregate empty = aggregate_statistics(pool, all, cfg);
  EXPECT_TRUE(empty.gram.isApprox(2.0 * Matrix::Identity(2, 2)));
  EXPECT_TRUE(empty.moment.isZero());
  EXPECT_EQ(empty.n_obs, 0u);

  pool.current_mut(UserId(1)).append(e(2, 0), 2.0);
  const Aggregate one = aggregate_statistics(pool, {ModelId(0)}, cfg);
  Matrix expected = 2.0 * Matrix::Identity(2, 2);
  expected(0, 0) += 1.0;
  EXPECT_TRUE(one.gram.isApprox(expected));
  EXPECT_TRUE(one.moment.isApprox(Vector(2.0 * e(2, 0))));
  EXPECT_EQ(one.n_obs, 1u);

  ModelPool pool2(2, 2, 30);
  pool2.current_mut(UserId(1)).append(e(2, 0), 1.0);
  pool2.current_mut(UserId(2)).append(e(2, 0), 1.0);
  const Aggregate two = aggregate_statistics(pool2, {ModelId(0), ModelId(1)}, cfg);
  Dataset pooled(2);
  pooled.append(e(2, 0), 1.0);
  pooled.append(e(2, 0), 1.0);
  EXPECT_EQ(two.n_obs, 2u);
  EXPECT_TRUE(two.moment.isApprox(pooled.moment()));
  EXPECT_TRUE((two.gram - 2.0 * Matrix::Identity(2, 2)).isApprox(pooled.gram()));
  expect_error(ErrorCode::EmptyNeighborhood, [&] { aggregate_statistics(pool, {}, cfg); });
}

TEST(Observe, FirstObservationIsStored) {
  ModelPool pool(2, 2, 30);
  const StepEvent ev = observe(pool, UserId(1), e(2, 0), 0.3, config(2), 1);
  EXPECT_TRUE(ev.model_updated);
  EXPECT_FALSE(ev.observation_discarded);
  EXPECT_FALSE(ev.change_detected);
  EXPECT_EQ(pool.current(UserId(1)).data().size(), 1u);
  expect_error(ErrorCode::UnknownUser, [&] { observe(pool, UserId(3), e(2, 0), 0.3, config(2), 2); });
}

TEST(Observe, OutlierIsDiscardedWithoutDetectionWhenThresholdExceedsOne) {
  ModelPool pool(1, 1, 1);
  DyCluConfig cfg = config(1);
  cfg.tau = 1;
  cfg.delta_e = 0.01;
  cfg.upsilon_e = 3.841;
  EXPECT_NEAR(detection_threshold(cfg), 1.567440813149103, 1e-12);
  observe(pool, UserId(1), e(1, 0), 1.0, cfg, 1);
  const StepEvent ev = observe(pool, UserId(1), e(1, 0), -1.0, cfg, 2);
  EXPECT_TRUE(ev.observation_discarded);
  EXPECT_FALSE(ev.model_updated);
  EXPECT_FALSE(ev.change_detected);
  EXPECT_EQ(pool.current(UserId(1)).data().size(), 1u);
  EXPECT_EQ(pool.current(UserId(1)).e_mean(), 1.0);
}

TEST(Observe, FullWindowOfFlagsTriggersDetection) {
  ModelPool pool(1, 1, 10);
  DyCluConfig cfg = config(1);
  cfg.tau = 10;
  cfg.delta_e = 0.1;
  cfg.upsilon_e = chi2_quantile(0.95, 1);
  EXPECT_NEAR(detection_threshold(cfg), 0.05 + std::sqrt(std::log(10.0) / 20.0), 1e-9);
  // Fill the window with ones directly, then feed one more flagged point.
  UserModel& m = pool.current_mut(UserId(1));
  m.append(e(1, 0), 1.0);
  for (int i = 0; i < 9; ++i) m.push_indicator(true);
  const ModelId old = m.id();
  const StepEvent ev = observe(pool, UserId(1), e(1, 0), -1.0, cfg, 5);
  EXPECT_TRUE(ev.change_detected);
  EXPECT_FALSE(ev.model_updated);
  EXPECT_EQ(pool.current(UserId(1)).data().size(), 0u);
  EXPECT_TRUE(pool.current(UserId(1)).window().empty());
  ASSERT_EQ(pool.outdated().size(), 1u);
  EXPECT_EQ(pool.outdated().front(), old);
  EXPECT_EQ(pool.model(old).retired_at(), std::optional<std::size_t>(5));
  EXPECT_FALSE(pool.model(old).up_to_date());
}

TEST(Neighborhood, Examples) {
  ModelPool fresh(3, 2, 30);
  for (std::size_t u = 1; u <= 3; ++u) {
    const auto& nb = neighborhood_of(fresh, UserId(u));
    ASSERT_EQ(nb.size(), 1u);
    EXPECT_EQ(nb.front(), fresh.current(UserId(u)).id());
  }

  ModelPool twins(2, 1, 30);
  DyCluConfig cfg = config(1, 1.0);
  cfg.upsilon_c = 0.0;
  observe(twins, UserId(1), e(1, 0), 0.7, cfg, 1);
  observe(twins, UserId(2), e(1, 0), 0.7, cfg, 2);
  recompute_neighborhood(twins, UserId(1), cfg);
  EXPECT_EQ(neighborhood_of(twins, UserId(1)).size(), 2u);
  EXPECT_EQ(neighborhood_of(twins, UserId(2)).size(), 2u);

  ModelPool apart(2, 1, 30);
  cfg.upsilon_c = 1.0;
  observe(apart, UserId(1), e(1, 0), 0.0, cfg, 1);
  observe(apart, UserId(2), e(1, 0), 2.0, cfg, 2);
  recompute_neighborhood(apart, UserId(1), cfg);
  EXPECT_EQ(neighborhood_of(apart, UserId(1)).size(), 1u);
  EXPECT_EQ(neighborhood_of(apart, UserId(2)).size(), 1u);
  expect_error(ErrorCode::UnknownUser, [&] { neighborhood_of(apart, UserId(9)); });
}

TEST(ModelPool, OutdatedCapDropsOldest) {
  ModelPool pool(1, 1, 5);
  const ModelId first = pool.current(UserId(1)).id();
  pool.retire_and_replace(UserId(1), 1, 2);
  const ModelId second = pool.current(UserId(1)).id();
  pool.retire_and_replace(UserId(1), 2, 2);
  pool.retire_and_replace(UserId(1), 3, 2);
  ASSERT_EQ(pool.outdated().size(), 2u);
  EXPECT_EQ(pool.outdated().front(), second);
  const auto active = pool.active_models();
  EXPECT_EQ(std::count(active.begin(), active.end(), first), 0);
  EXPECT_EQ(active.size(), 3u);
}

// Drives a learner on a generated environment and checks the structural
// invariants after every step.
class DyCluRunTest : public ::testing::Test {
 protected:
  static EnvironmentConfig env_config() {
    EnvironmentConfig c;
    c.d = 5;
    c.n_users = 6;
    c.m = 3;
    c.arm_pool_size = 60;
    c.candidate_size = 10;
    c.horizon = 1800;
    c.smin = 30;
    c.smax = 90;
    c.sigma = 0.1;
    return c;
  }
};

TEST_F(DyCluRunTest, InvariantsHoldThroughoutARun) {
  const EnvSpec env = generate_environment(env_config(), 17);
  DyCluLearner learner(env.n_users(), DyCluConfig::with_defaults(env.d(), env.sigma2()));
  std::map<std::size_t, std::uint64_t> frozen;  // outdated model → fingerprint
  std::size_t detections = 0;
  for (std::size_t t = 1; t <= env.horizon(); ++t) {
    const StepContext step = next_step(env, t);
    const std::size_t chosen = learner.select(step);
    Rng noise = noise_stream(env, t);
    const double reward = realize_reward(env, step, chosen, noise).reward;
    const Vector x = step.candidates.row(static_cast<Eigen::Index>(chosen)).transpose();
    const std::size_t before = learner.pool().current(step.user).data().size();
    const StepEvent ev = learner.observe(step, chosen, reward);
    const ModelPool& pool = learner.pool();

    // Event flags are mutually consistent.
    if (ev.change_detected) {
      EXPECT_FALSE(ev.model_updated);
    }
    if (ev.model_updated) {
      EXPECT_FALSE(ev.observation_discarded);
    }
    detections += ev.change_detected ? 1 : 0;

    // |U| = n and |O| = number of detections.
    std::size_t up_to_date = 0;
    for (const ModelId id : pool.active_models()) up_to_date += pool.model(id).up_to_date() ? 1 : 0;
    ASSERT_EQ(up_to_date, env.n_users());
    ASSERT_EQ(pool.outdated().size(), detections);

    // Every neighborhood contains the user's own model.
    for (std::size_t u = 1; u <= env.n_users(); ++u) {
      const auto& nb = pool.neighborhood(UserId(u));
      ASSERT_NE(std::find(nb.begin(), nb.end(), pool.current(UserId(u)).id()), nb.end());
    }

    // A discarded observation is not stored anywhere.
    if (ev.observation_discarded) {
      EXPECT_EQ(pool.current(step.user).data().size(), before);
      for (const ModelId id : pool.active_models()) {
        for (const Observation& o : pool.model(id).data().observations()) {
          EXPECT_FALSE(o.reward == reward && o.context == x);
        }
      }
    }

    // Outdated datasets never change after retirement.
    for (const ModelId id : pool.outdated()) {
      const auto fp = pool.model(id).data().fingerprint();
      const auto [it, inserted] = frozen.emplace(id.value(), fp);
      if (!inserted) {
        ASSERT_EQ(it->second, fp) << "outdated model " << id.value() << " mutated";
      }
    }

    // e_mean equals the window average.
    const UserModel& own = pool.current(step.user);
    if (!own.window().empty()) {
      const double ones = static_cast<double>(std::count(own.window().begin(), own.window().end(), true));
      EXPECT_NEAR(own.e_mean(), ones / static_cast<double>(own.window().size()), 1e-12);
    }
  }
  EXPECT_GT(detections, 0u);
  EXPECT_EQ(learner.detections(), detections);
}

TEST_F(DyCluRunTest, IdenticalSeedsReproduceExactly) {
  const EnvSpec env = generate_environment(env_config(), 3);
  auto run = [&] {
    DyCluLearner learner(env.n_users(), DyCluConfig::with_defaults(env.d(), env.sigma2()));
    std::vector<std::size_t> arms;
    for (std::size_t t = 1; t <= 600; ++t) {
      const StepContext step = next_step(env, t);
      const std::size_t chosen = learner.select(step);
      Rng noise = noise_stream(env, t);
      learner.observe(step, chosen, realize_reward(env, step, chosen, noise).reward);
      arms.push_back(chosen);
    }
    return arms;
  };
  EXPECT_EQ(run(), run());
}

TEST(MonotoneInformation, ConfidenceWidthShrinksOnAppend) {
  std::mt19937_64 gen(12);
  ModelPool pool(2, 4, 30);
  const DyCluConfig cfg = config(4);
  const std::vector<ModelId> nb{ModelId(0), ModelId(1)};
  for (int step = 0; step < 40; ++step) {
    const Aggregate before = aggregate_statistics(pool, nb, cfg);
    const Vector probe = testing::random_unit(gen, 4);
    const double w0 = probe.dot(before.gram.llt().solve(probe));
    pool.current_mut(UserId(1 + step % 2)).append(testing::random_unit(gen, 4), 0.0);
    const Aggregate after = aggregate_statistics(pool, nb, cfg);
    EXPECT_LE(probe.dot(after.gram.llt().solve(probe)), w0 + 1e-12);
  }
}

TEST(ArgmaxInvariance, PositiveScalingKeepsChoice) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(12);
    for (double& s : scores) s = testing::random_matrix(gen, 1, 1)(0, 0);
    if (trial % 5 == 0) scores[7] = scores[3] = *std::max_element(scores.begin(), scores.end());
    const double c = scale(gen);
    std::vector<double> scaled = scores;
    for (double& s : scaled) s *= c;
    EXPECT_EQ(argmax_first(scores), argmax_first(scaled));
  }
}

}  // namespace
}  // namespace dyclu
