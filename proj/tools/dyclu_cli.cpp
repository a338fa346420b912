// Command-line front end: run experiments, dump environments, replay logs
// and rebuild summaries.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyclu/config.hpp"
#include "dyclu/environment.hpp"
#include "dyclu/error.hpp"
#include "dyclu/harness.hpp"
#include "dyclu/replay.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;      // bad config, bad input, unknown command
constexpr int kExitInternal = 2;  // anything else

int exit_code_for(dyclu::ErrorCode code) {
  switch (code) {
    case dyclu::ErrorCode::ConfigError:
    case dyclu::ErrorCode::ParseError:
    case dyclu::ErrorCode::IoError:
    case dyclu::ErrorCode::Unsupported:
    case dyclu::ErrorCode::InfeasibleSeparation:
      return kExitUser;
    default:
      return kExitInternal;
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw dyclu::Error(dyclu::ErrorCode::IoError, "cannot write " + out_path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyclu: clustered piecewise-stationary linear bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  auto* run = app.add_subcommand("run", "Run every learner x seed in a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed_override, "Run only this seed, overriding the config");

  std::uint64_t env_seed = 0;
  std::string env_out;
  std::string env_name;
  auto* gen = app.add_subcommand("gen-env", "Write a generated environment as JSON");
  gen->add_option("config", config_path, "Experiment config (JSON)")->required();
  gen->add_option("--seed", env_seed, "Environment seed")->required();
  gen->add_option("--out", env_out, "Output file (default: stdout)");
  gen->add_option("--env", env_name, "Environment name when the config lists several");

  std::string log_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "Evaluate learners offline on a logged CSV");
  replay->add_option("log", log_path, "Interaction log (CSV)")->required();
  replay->add_option("config", config_path, "Experiment config (JSON)")->required();
  replay->add_option("--out", replay_out, "Output file (default: stdout)");

  std::string summary_dir;
  auto* summarize = app.add_subcommand("summarize", "Rebuild summary.json from run CSVs");
  summarize->add_option("dir", summary_dir, "Output directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUser;
  }

  try {
    if (*run) {
      auto cfg = dyclu::load_experiment_config(config_path);
      if (seed_override) cfg.seeds = {*seed_override};
      const auto report = dyclu::run_experiment(cfg);
      for (const auto& a : report.aggregates) {
        std::cout << (a.environment.empty() ? "" : a.environment + "/") << a.learner
                  << ": final regret " << a.final_regret_mean << " +/- " << a.final_regret_std
                  << " over " << a.seeds << " seed(s)\n";
      }
      std::cout << "wrote " << (cfg.output_dir / dyclu::kSummaryFile).string() << "\n";
    } else if (*gen) {
      const auto cfg = dyclu::load_experiment_config(config_path);
      if (cfg.environments.empty()) {
        throw dyclu::Error(dyclu::ErrorCode::ConfigError, "environment: required");
      }
      const dyclu::NamedEnvironment* chosen = &cfg.environments.front();
      if (!env_name.empty()) {
        chosen = nullptr;
        for (const auto& e : cfg.environments) {
          if (e.name == env_name) chosen = &e;
        }
        if (!chosen) {
          throw dyclu::Error(dyclu::ErrorCode::ConfigError,
                             "environments: no environment named \"" + env_name + "\"");
        }
      }
      emit(dyclu::env_to_json(dyclu::generate_environment(chosen->config, env_seed)), env_out);
    } else if (*replay) {
      const auto cfg = dyclu::load_experiment_config(config_path);
      const auto events = dyclu::load_replay(log_path);
      const double fallback = cfg.environments.empty() ? 0.0 : cfg.environments.front().config.sigma;
      std::vector<dyclu::ReplayResult> results;
      for (std::size_t i = 0; i < cfg.learners.size(); ++i) {
        results.push_back(dyclu::replay_evaluate(events, cfg.learners[i], i, fallback));
      }
      emit(dyclu::replay_to_json(results), replay_out);
    } else if (*summarize) {
      const auto report = dyclu::summarize(summary_dir);
      const auto path = std::filesystem::path(summary_dir) / dyclu::kSummaryFile;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw dyclu::Error(dyclu::ErrorCode::IoError, "cannot write " + path.string());
      out << dyclu::report_to_json(report);
      std::cout << "wrote " << path.string() << "\n";
    }
  } catch (const dyclu::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
