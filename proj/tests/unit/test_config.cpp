#include "dyclu/config.hpp"

#include <gtest/gtest.h>

#include "dyclu/error.hpp"
#include "test_support.hpp"

namespace dyclu {
namespace {

constexpr const char* kMinimal = R"({
  "environment": {"d": 4, "n": 3, "m": 2, "K": 20, "candidate_size": 5, "T": 30,
                  "smin": 2, "smax": 4, "sigma": 0.1, "gamma": 0.5},
  "learners": [{"name": "dyclu"}, {"name": "linucb-ind", "label": "ind", "lambda": 2.0}],
  "seeds": [3, 4],
  "output_dir": "out"
})";

void expect_error(const std::string& text, ErrorCode code, const std::string& needle) {
  try {
    parse_experiment_config(text);
    FAIL() << "expected " << to_string(code) << " for " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

std::string with_learners(const std::string& learners) {
  return R"({"environment": {"d": 2, "n": 2, "T": 10, "K": 5, "candidate_size": 5, "m": 2, "smin": 1, "smax": 3},
            "learners": )" + learners + "}";
}

TEST(ParseConfig, Minimal) {
  const ExperimentConfig cfg = parse_experiment_config(kMinimal);
  ASSERT_EQ(cfg.environments.size(), 1u);
  EXPECT_FALSE(cfg.named_environments);
  const EnvironmentConfig& env = cfg.environments.front().config;
  EXPECT_EQ(env.d, 4u);
  EXPECT_EQ(env.n_users, 3u);
  EXPECT_EQ(env.arm_pool_size, 20u);
  EXPECT_EQ(env.horizon, 30u);
  EXPECT_EQ(env.gamma, 0.5);
  ASSERT_EQ(cfg.learners.size(), 2u);
  EXPECT_EQ(cfg.learners[0].label, "dyclu");
  EXPECT_EQ(cfg.learners[1].label, "ind");
  EXPECT_EQ(cfg.learners[1].lambda, 2.0);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(cfg.output_dir, "out");
}

TEST(ParseConfig, Defaults) {
  const ExperimentConfig cfg = parse_experiment_config(with_learners(R"([{"name": "club"}])"));
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0}));
  EXPECT_EQ(cfg.output_dir, "results");
  const LearnerSpec& l = cfg.learners.front();
  EXPECT_EQ(l.tau, 30u);
  EXPECT_EQ(l.beta, 1.0);
  EXPECT_FALSE(l.upsilon_c.has_value());
}

TEST(ParseConfig, NamedEnvironments) {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "environments": [{"name": "a", "d": 2, "n": 2, "T": 10, "K": 5, "candidate_size": 5, "m": 1},
                     {"name": "b", "d": 3, "n": 2, "T": 10, "K": 5, "candidate_size": 5, "m": 1}],
    "learners": [{"name": "linucb-one"}]})");
  EXPECT_TRUE(cfg.named_environments);
  ASSERT_EQ(cfg.environments.size(), 2u);
  EXPECT_EQ(cfg.environments[1].name, "b");
  EXPECT_EQ(cfg.environments[1].config.d, 3u);
}

TEST(ParseConfig, UnknownKeysNameTheFieldPath) {
  expect_error(with_learners(R"([{"name": "dyclu"}, {"name": "dyclu", "label": "x", "upsilon_ee": 1}])"),
               ErrorCode::ConfigError, "learners[1].upsilon_ee");
  expect_error(R"({"environment": {"d": 2, "bogus": 1}, "learners": [{"name": "dyclu"}]})",
               ErrorCode::ConfigError, "environment.bogus");
  expect_error(with_learners(R"([{"name": "dyclu"}])").replace(0, 1, R"({"extra": 1,)"),
               ErrorCode::ConfigError, "extra");
}

TEST(ParseConfig, RangeAndTypeErrors) {
  expect_error(with_learners(R"([{"name": "dyclu", "tau": 0}])"), ErrorCode::ConfigError,
               "learners[0].tau");
  expect_error(with_learners(R"([{"name": "dyclu", "delta": "x"}])"), ErrorCode::ConfigError,
               "learners[0].delta");
  expect_error(with_learners(R"([{"name": "dyclu", "lambda": -1}])"), ErrorCode::ConfigError,
               "learners[0].lambda");
  expect_error(R"({"environment": {"n": 5, "T": 4}, "learners": [{"name": "dyclu"}]})",
               ErrorCode::ConfigError, "environment.T");
  expect_error(with_learners(R"([{"name": "thompson"}])"), ErrorCode::ConfigError, "learners[0].name");
  expect_error(with_learners("[]"), ErrorCode::ConfigError, "learners");
  expect_error(with_learners(R"([{"name": "dyclu"}, {"name": "dyclu"}])"), ErrorCode::ConfigError,
               "dyclu");
}

TEST(ParseConfig, EnvironmentIsOptionalForReplayConfigs) {
  const ExperimentConfig cfg = parse_experiment_config(R"({"learners": [{"name": "dyclu", "sigma": 0.1}]})");
  EXPECT_TRUE(cfg.environments.empty());
}

TEST(ParseConfig, AdaptiveThompsonIsUnsupported) {
  expect_error(with_learners(R"([{"name": "adts"}])"), ErrorCode::Unsupported, "adts");
}

TEST(ParseConfig, MalformedJsonIsParseError) {
  expect_error("{\"learners\": [", ErrorCode::ParseError, "");
  expect_error("[1, 2]", ErrorCode::ConfigError, "");
}

TEST(LoadConfig, MissingFileNamesThePath) {
  try {
    load_experiment_config("/no/such/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("/no/such/config.json"), std::string::npos);
  }
  testing::ScratchDir dir("config");
  EXPECT_EQ(load_experiment_config(dir.write("c.json", kMinimal)).seeds.size(), 2u);
}

TEST(LearnerSigma, FallsBackToEnvironment) {
  LearnerSpec spec;
  spec.name = "dyclu";
  EnvironmentConfig env;
  env.sigma = 0.2;
  EXPECT_EQ(learner_sigma(spec, &env, 0), 0.2);
  spec.sigma = 0.5;
  EXPECT_EQ(learner_sigma(spec, &env, 0), 0.5);
  spec.sigma.reset();
  env.sigma = 0.0;
  EXPECT_THROW(learner_sigma(spec, &env, 0), Error);
}

}  // namespace
}  // namespace dyclu
