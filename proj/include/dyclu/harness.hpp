#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dyclu/config.hpp"
#include "dyclu/environment.hpp"
#include "dyclu/learner.hpp"
#include "dyclu/replay.hpp"

namespace dyclu {

/// One row of a run's CSV.
struct RunRecord {
  std::size_t t = 0;
  std::size_t user = 0;
  std::size_t chosen_index = 0;
  double reward = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  bool discarded = false;
  bool change_detected = false;
  bool model_updated = false;
  std::size_t neighborhood_size = 0;
};

inline constexpr const char* kRunRecordHeader =
    "t,user,algorithm,chosen_index,reward,inst_regret,cum_regret,discarded,change_detected,"
    "model_updated,neighborhood_size";

struct RunResult {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;
  double wall_ms = 0.0;
};

/// Builds the named learner for an environment (uses d, n, m and σ).
std::unique_ptr<Learner> make_learner(const LearnerSpec& spec, const EnvironmentConfig& env,
                                      std::size_t index = 0);

/// Drives select → reward → observe for t = 1..T.
RunResult run_single(const EnvSpec& env, const LearnerSpec& spec, Learner& learner);
RunResult run_single(const EnvSpec& env, const LearnerSpec& spec);

/// Shortest round-trip decimal form of a double.
std::string format_real(double value);

void write_run_csv(std::ostream& out, const std::string& label,
                   const std::vector<RunRecord>& records);
/// Reads a run CSV back; returns the algorithm label via `label`.
std::vector<RunRecord> read_run_csv(const std::filesystem::path& path, std::string& label);

std::string run_file_name(const std::string& label, std::uint64_t seed);

struct RunSummary {
  std::string environment;  // empty for a lone environment block
  std::string learner;
  std::uint64_t seed = 0;
  double final_regret = 0.0;
  std::size_t detections = 0;
  double mean_neighborhood = 0.0;
  double wall_ms = 0.0;
};

struct LearnerAggregate {
  std::string environment;
  std::string learner;
  std::size_t seeds = 0;
  double final_regret_mean = 0.0;
  double final_regret_std = 0.0;  // sample standard deviation; 0 for one seed
  double detections_mean = 0.0;
  double detections_std = 0.0;
  double mean_neighborhood_mean = 0.0;
  double mean_neighborhood_std = 0.0;
};

/// Runs sorted by (environment, learner, seed), aggregates by
/// (environment, learner).
struct SummaryReport {
  std::vector<RunSummary> runs;
  std::vector<LearnerAggregate> aggregates;
};

RunSummary summarize_run(const std::string& environment, const std::string& label,
                         std::uint64_t seed, const std::vector<RunRecord>& records,
                         double wall_ms);
/// Sorts runs and recomputes the aggregates.
SummaryReport build_report(std::vector<RunSummary> runs);

std::string report_to_json(const SummaryReport& report);
SummaryReport report_from_json(const std::string& text);

inline constexpr const char* kSummaryFile = "summary.json";

/// Runs every (environment, learner, seed) combination, in parallel up to
/// DYCLU_THREADS workers, writing one CSV per run plus summary.json.
SummaryReport run_experiment(const ExperimentConfig& cfg);

/// Rebuilds the report from the CSVs under `dir`. Wall-clock times are not
/// derivable from CSVs and are carried over from an existing summary.json.
SummaryReport summarize(const std::filesystem::path& dir);

/// Worker count from DYCLU_THREADS, else the number of logical cores.
std::size_t worker_count();

/// JSON serialization of a generated environment, for inspection.
std::string env_to_json(const EnvSpec& env);

/// Offline evaluation on a logged stream by rejection sampling: an event
/// counts only when the learner picks the logged arm, and only then does
/// the learner observe the reward.
struct ReplayResult {
  std::string learner;
  std::size_t events = 0;
  std::size_t matched = 0;
  double total_reward = 0.0;
  double baseline_mean = 0.0;  // mean random_reward, else mean logged reward
  double normalized_reward = 0.0;  // (total_reward / matched) / baseline_mean
};

/// `fallback_sigma` (if positive) stands in for an unset learner σ.
ReplayResult replay_evaluate(const std::vector<ReplayEvent>& events, const LearnerSpec& spec,
                             std::size_t index = 0, double fallback_sigma = 0.0);
std::string replay_to_json(const std::vector<ReplayResult>& results);

}  // namespace dyclu
