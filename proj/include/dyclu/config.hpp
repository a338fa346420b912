#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dyclu/environment.hpp"

namespace dyclu {

/// One learner block. Every numeric field has a default; parameters that do
/// not apply to the named learner are accepted and ignored.
struct LearnerSpec {
  std::string name;   // dyclu, linucb-one, linucb-ind, oracle-linucb, dlinucb-restart, club
  std::string label;  // output tag; defaults to `name`
  double lambda = 1.0;
  double delta = 0.1;
  std::size_t tau = 30;
  double delta_e = 0.01;
  std::optional<double> upsilon_e;  // default χ²₁ 0.95-quantile
  std::optional<double> upsilon_c;  // default χ²_d 0.95-quantile
  std::optional<double> sigma;      // noise sd assumed by the learner; default environment σ
  std::optional<std::size_t> max_outdated;
  double beta = 1.0;  // club edge-deletion constant
};

struct NamedEnvironment {
  std::string name;  // empty for a lone "environment" block
  EnvironmentConfig config;
};

struct ExperimentConfig {
  std::vector<NamedEnvironment> environments;
  std::vector<LearnerSpec> learners;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "results";

  /// True when environments come from the named "environments" array, in
  /// which case outputs go to one subdirectory per environment.
  bool named_environments = false;
};

inline const std::vector<std::string>& learner_names() {
  static const std::vector<std::string> names{"dyclu",         "linucb-one",      "linucb-ind",
                                              "oracle-linucb", "dlinucb-restart", "club"};
  return names;
}

/// Parses JSON text. Unknown keys, wrong types and out-of-range values raise
/// ConfigError naming the field path (e.g. `learners[1].tau`); the name
/// "adts" raises Unsupported; malformed JSON raises ParseError.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Reads and parses a config file; a missing file raises IoError naming it.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Noise standard deviation the learner assumes, falling back to the
/// environment's σ. Throws ConfigError when neither is positive.
double learner_sigma(const LearnerSpec& spec, const EnvironmentConfig* env, std::size_t index);

}  // namespace dyclu
