#include "dyclu/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "dyclu/baselines.hpp"
#include "dyclu/dyclu.hpp"
#include "dyclu/error.hpp"

namespace dyclu {
namespace {

using nlohmann::json;

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

Stats mean_std(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (const double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, where + ": bad number \"" + text + "\"");
  }
  return value;
}

bool parse_flag(const std::string& text, const std::string& where) {
  if (text == "0") return false;
  if (text == "1") return true;
  throw Error(ErrorCode::ParseError, where + ": expected 0 or 1, got \"" + text + "\"");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

DyCluConfig dyclu_config(const LearnerSpec& spec, std::size_t d, double sigma) {
  DyCluConfig cfg = DyCluConfig::with_defaults(d, sigma * sigma);
  cfg.tau = spec.tau;
  cfg.delta = spec.delta;
  cfg.delta_e = spec.delta_e;
  cfg.lambda = spec.lambda;
  if (spec.upsilon_e) cfg.upsilon_e = *spec.upsilon_e;
  if (spec.upsilon_c) cfg.upsilon_c = *spec.upsilon_c;
  cfg.max_outdated = spec.max_outdated;
  return cfg;
}

}  // namespace

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec, const EnvironmentConfig& env,
                                      std::size_t index) {
  const double sigma = learner_sigma(spec, &env, index);
  const UcbParams ucb{spec.lambda, sigma, spec.delta};
  const std::size_t n = env.n_users;
  const std::size_t d = env.d;
  if (spec.name == "dyclu") {
    return std::make_unique<DyCluLearner>(n, dyclu_config(spec, d, sigma));
  }
  if (spec.name == "linucb-one") {
    return std::make_unique<LinUcbLearner>(n, d, ucb, LinUcbLearner::Sharing::Shared);
  }
  if (spec.name == "linucb-ind") {
    return std::make_unique<LinUcbLearner>(n, d, ucb, LinUcbLearner::Sharing::PerUser);
  }
  if (spec.name == "oracle-linucb") {
    return std::make_unique<OracleLinUcbLearner>(env.m, d, ucb);
  }
  if (spec.name == "dlinucb-restart") {
    RestartConfig rc;
    rc.ucb = ucb;
    rc.tau = spec.tau;
    rc.delta_e = spec.delta_e;
    rc.upsilon_e = spec.upsilon_e ? *spec.upsilon_e : chi2_quantile(0.95, 1);
    rc.sigma2 = sigma * sigma;
    return std::make_unique<RestartLinUcbLearner>(n, d, rc);
  }
  if (spec.name == "club") {
    return std::make_unique<ClubLearner>(n, d, ucb, spec.beta);
  }
  if (spec.name == "adts") {
    throw Error(ErrorCode::Unsupported, "learner \"adts\" is not supported");
  }
  throw Error(ErrorCode::ConfigError,
              "learners[" + std::to_string(index) + "].name: unknown learner \"" + spec.name + "\"");
}

RunResult run_single(const EnvSpec& env, const LearnerSpec& spec, Learner& learner) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.label = spec.label.empty() ? spec.name : spec.label;
  result.seed = env.seed;
  result.records.reserve(env.horizon());
  double cumulative = 0.0;
  for (std::size_t t = 1; t <= env.horizon(); ++t) {
    const StepContext step = next_step(env, t);
    const std::size_t chosen = learner.select(step);
    Rng noise = noise_stream(env, t);
    const Realization outcome = realize_reward(env, step, chosen, noise);
    const StepEvent event = learner.observe(step, chosen, outcome.reward);
    cumulative += outcome.regret;

    RunRecord rec;
    rec.t = t;
    rec.user = step.user.value();
    rec.chosen_index = chosen;
    rec.reward = outcome.reward;
    rec.inst_regret = outcome.regret;
    rec.cum_regret = cumulative;
    rec.discarded = event.observation_discarded;
    rec.change_detected = event.change_detected;
    rec.model_updated = event.model_updated;
    rec.neighborhood_size = event.neighborhood_size;
    result.records.push_back(rec);
  }
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult run_single(const EnvSpec& env, const LearnerSpec& spec) {
  auto learner = make_learner(spec, env.config);
  return run_single(env, spec, *learner);
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf, ptr);
}

void write_run_csv(std::ostream& out, const std::string& label,
                   const std::vector<RunRecord>& records) {
  out << kRunRecordHeader << '\n';
  for (const RunRecord& r : records) {
    out << r.t << ',' << r.user << ',' << label << ',' << r.chosen_index << ','
        << format_real(r.reward) << ',' << format_real(r.inst_regret) << ','
        << format_real(r.cum_regret) << ',' << (r.discarded ? 1 : 0) << ','
        << (r.change_detected ? 1 : 0) << ',' << (r.model_updated ? 1 : 0) << ','
        << r.neighborhood_size << '\n';
  }
}

std::vector<RunRecord> read_run_csv(const std::filesystem::path& path, std::string& label) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRunRecordHeader) {
    throw Error(ErrorCode::ParseError, path.string() + ":1: unexpected header");
  }
  std::vector<RunRecord> records;
  std::size_t line_no = 1;
  label.clear();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto f = split(line, ',');
    if (f.size() != 11) throw Error(ErrorCode::ParseError, where + ": expected 11 fields");
    RunRecord r;
    r.t = parse_number<std::size_t>(f[0], where);
    r.user = parse_number<std::size_t>(f[1], where);
    if (label.empty()) label = f[2];
    r.chosen_index = parse_number<std::size_t>(f[3], where);
    r.reward = parse_number<double>(f[4], where);
    r.inst_regret = parse_number<double>(f[5], where);
    r.cum_regret = parse_number<double>(f[6], where);
    r.discarded = parse_flag(f[7], where);
    r.change_detected = parse_flag(f[8], where);
    r.model_updated = parse_flag(f[9], where);
    r.neighborhood_size = parse_number<std::size_t>(f[10], where);
    records.push_back(r);
  }
  return records;
}

std::string run_file_name(const std::string& label, std::uint64_t seed) {
  return label + "_seed" + std::to_string(seed) + ".csv";
}

RunSummary summarize_run(const std::string& environment, const std::string& label,
                         std::uint64_t seed, const std::vector<RunRecord>& records,
                         double wall_ms) {
  RunSummary s;
  s.environment = environment;
  s.learner = label;
  s.seed = seed;
  s.wall_ms = wall_ms;
  if (records.empty()) return s;
  s.final_regret = records.back().cum_regret;
  double neighborhood = 0.0;
  for (const RunRecord& r : records) {
    if (r.change_detected) ++s.detections;
    neighborhood += static_cast<double>(r.neighborhood_size);
  }
  s.mean_neighborhood = neighborhood / static_cast<double>(records.size());
  return s;
}

SummaryReport build_report(std::vector<RunSummary> runs) {
  std::sort(runs.begin(), runs.end(), [](const RunSummary& a, const RunSummary& b) {
    return std::tie(a.environment, a.learner, a.seed) < std::tie(b.environment, b.learner, b.seed);
  });
  SummaryReport report;
  report.runs = std::move(runs);
  std::size_t i = 0;
  while (i < report.runs.size()) {
    std::size_t j = i;
    std::vector<double> regret, detections, neighborhood;
    while (j < report.runs.size() && report.runs[j].environment == report.runs[i].environment &&
           report.runs[j].learner == report.runs[i].learner) {
      regret.push_back(report.runs[j].final_regret);
      detections.push_back(static_cast<double>(report.runs[j].detections));
      neighborhood.push_back(report.runs[j].mean_neighborhood);
      ++j;
    }
    LearnerAggregate agg;
    agg.environment = report.runs[i].environment;
    agg.learner = report.runs[i].learner;
    agg.seeds = j - i;
    const Stats r = mean_std(regret), dct = mean_std(detections), nb = mean_std(neighborhood);
    agg.final_regret_mean = r.mean;
    agg.final_regret_std = r.stddev;
    agg.detections_mean = dct.mean;
    agg.detections_std = dct.stddev;
    agg.mean_neighborhood_mean = nb.mean;
    agg.mean_neighborhood_std = nb.stddev;
    report.aggregates.push_back(agg);
    i = j;
  }
  return report;
}

std::string report_to_json(const SummaryReport& report) {
  json runs = json::array();
  for (const RunSummary& r : report.runs) {
    json j;
    if (!r.environment.empty()) j["environment"] = r.environment;
    j["learner"] = r.learner;
    j["seed"] = r.seed;
    j["final_regret"] = r.final_regret;
    j["detections"] = r.detections;
    j["mean_neighborhood"] = r.mean_neighborhood;
    j["wall_ms"] = r.wall_ms;
    runs.push_back(std::move(j));
  }
  json aggregates = json::array();
  for (const LearnerAggregate& a : report.aggregates) {
    json j;
    if (!a.environment.empty()) j["environment"] = a.environment;
    j["learner"] = a.learner;
    j["seeds"] = a.seeds;
    j["final_regret_mean"] = a.final_regret_mean;
    j["final_regret_std"] = a.final_regret_std;
    j["detections_mean"] = a.detections_mean;
    j["detections_std"] = a.detections_std;
    j["mean_neighborhood_mean"] = a.mean_neighborhood_mean;
    j["mean_neighborhood_std"] = a.mean_neighborhood_std;
    aggregates.push_back(std::move(j));
  }
  json root;
  root["runs"] = std::move(runs);
  root["aggregates"] = std::move(aggregates);
  return root.dump(2) + "\n";
}

SummaryReport report_from_json(const std::string& text) {
  SummaryReport report;
  try {
    const json root = json::parse(text);
    for (const json& j : root.at("runs")) {
      RunSummary r;
      r.environment = j.value("environment", std::string());
      r.learner = j.at("learner").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.final_regret = j.at("final_regret").get<double>();
      r.detections = j.at("detections").get<std::size_t>();
      r.mean_neighborhood = j.at("mean_neighborhood").get<double>();
      r.wall_ms = j.at("wall_ms").get<double>();
      report.runs.push_back(std::move(r));
    }
    for (const json& j : root.at("aggregates")) {
      LearnerAggregate a;
      a.environment = j.value("environment", std::string());
      a.learner = j.at("learner").get<std::string>();
      a.seeds = j.at("seeds").get<std::size_t>();
      a.final_regret_mean = j.at("final_regret_mean").get<double>();
      a.final_regret_std = j.at("final_regret_std").get<double>();
      a.detections_mean = j.at("detections_mean").get<double>();
      a.detections_std = j.at("detections_std").get<double>();
      a.mean_neighborhood_mean = j.at("mean_neighborhood_mean").get<double>();
      a.mean_neighborhood_std = j.at("mean_neighborhood_std").get<double>();
      report.aggregates.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("summary report: ") + e.what());
  }
  return report;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("DYCLU_THREADS")) {
    std::size_t n = 0;
    const std::string text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec == std::errc() && ptr == text.data() + text.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SummaryReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.environments.empty()) throw Error(ErrorCode::ConfigError, "environment: required");
  if (cfg.learners.empty()) throw Error(ErrorCode::ConfigError, "learners: at least one learner is required");
  if (cfg.seeds.empty()) throw Error(ErrorCode::ConfigError, "seeds: at least one seed is required");
  // Validate learner/environment compatibility before any work starts.
  for (const auto& env : cfg.environments) {
    for (std::size_t i = 0; i < cfg.learners.size(); ++i) make_learner(cfg.learners[i], env.config, i);
  }

  struct Job {
    std::size_t env;
    std::size_t learner;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t e = 0; e < cfg.environments.size(); ++e) {
    const auto dir = cfg.named_environments ? cfg.output_dir / cfg.environments[e].name : cfg.output_dir;
    std::filesystem::create_directories(dir);
    for (std::size_t l = 0; l < cfg.learners.size(); ++l) {
      for (const std::uint64_t seed : cfg.seeds) jobs.push_back({e, l, seed});
    }
  }

  std::vector<RunSummary> summaries(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        const Job& job = jobs[k];
        const NamedEnvironment& named = cfg.environments[job.env];
        const LearnerSpec& spec = cfg.learners[job.learner];
        const EnvSpec env = generate_environment(named.config, job.seed);
        auto learner = make_learner(spec, named.config, job.learner);
        const RunResult result = run_single(env, spec, *learner);
        const auto dir = cfg.named_environments ? cfg.output_dir / named.name : cfg.output_dir;
        std::ostringstream csv;
        write_run_csv(csv, result.label, result.records);
        write_text(dir / run_file_name(result.label, job.seed), csv.str());
        summaries[k] = summarize_run(named.name, result.label, job.seed, result.records, result.wall_ms);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min(worker_count(), jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 1; i < n_workers; ++i) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);

  SummaryReport report = build_report(std::move(summaries));
  write_text(cfg.output_dir / kSummaryFile, report_to_json(report));
  return report;
}

SummaryReport summarize(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  }
  std::map<std::tuple<std::string, std::string, std::uint64_t>, double> wall;
  const auto existing = dir / kSummaryFile;
  if (std::filesystem::exists(existing)) {
    std::ifstream in(existing);
    std::ostringstream text;
    text << in.rdbuf();
    for (const RunSummary& r : report_from_json(text.str()).runs) {
      wall[{r.environment, r.learner, r.seed}] = r.wall_ms;
    }
  }

  std::vector<RunSummary> runs;
  auto scan = [&](const std::filesystem::path& folder, const std::string& environment) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(folder)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string stem = file.stem().string();
      const auto mark = stem.rfind("_seed");
      if (mark == std::string::npos) continue;
      const std::uint64_t seed =
          parse_number<std::uint64_t>(stem.substr(mark + 5), file.string());
      std::string label;
      const auto records = read_run_csv(file, label);
      if (label.empty()) label = stem.substr(0, mark);
      const auto it = wall.find({environment, label, seed});
      runs.push_back(summarize_run(environment, label, seed, records,
                                   it == wall.end() ? 0.0 : it->second));
    }
  };
  scan(dir, "");
  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& sub : subdirs) scan(sub, sub.filename().string());
  return build_report(std::move(runs));
}

std::string env_to_json(const EnvSpec& env) {
  const EnvironmentConfig& c = env.config;
  json root;
  root["seed"] = env.seed;
  root["config"] = {{"d", c.d},         {"n", c.n_users},
                    {"m", c.m},         {"K", c.arm_pool_size},
                    {"candidate_size", c.candidate_size},
                    {"T", c.horizon},   {"smin", c.smin},
                    {"smax", c.smax},   {"sigma", c.sigma},
                    {"gamma", c.gamma}};
  json params = json::array();
  for (const Vector& v : env.unique_params) params.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  root["unique_params"] = std::move(params);
  json arms = json::array();
  for (Eigen::Index r = 0; r < env.arm_pool.rows(); ++r) {
    const Vector row = env.arm_pool.row(r).transpose();
    arms.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  root["arm_pool"] = std::move(arms);
  json schedules = json::array();
  for (std::size_t i = 0; i < env.schedules.size(); ++i) {
    json entries = json::array();
    for (const ScheduleEntry& e : env.schedules[i]) entries.push_back({{"start", e.start}, {"param", e.param}});
    schedules.push_back({{"user", i + 1},
                         {"local_horizon", env.local_horizon(UserId::from_index(i))},
                         {"intervals", std::move(entries)}});
  }
  root["schedules"] = std::move(schedules);
  return root.dump(2) + "\n";
}

ReplayResult replay_evaluate(const std::vector<ReplayEvent>& events, const LearnerSpec& spec,
                             std::size_t index, double fallback_sigma) {
  if (spec.name == "oracle-linucb") {
    throw Error(ErrorCode::Unsupported,
                "learners[" + std::to_string(index) + "].name: oracle-linucb needs ground truth, "
                "which a replay log does not provide");
  }
  ReplayResult result;
  result.learner = spec.label.empty() ? spec.name : spec.label;
  result.events = events.size();
  if (events.empty()) return result;

  std::unordered_map<std::string, std::size_t> users;
  for (const ReplayEvent& ev : events) users.emplace(ev.user, users.size());

  EnvironmentConfig shape;
  shape.d = static_cast<std::size_t>(events.front().candidates.cols());
  shape.n_users = users.size();
  shape.m = 1;
  shape.sigma = fallback_sigma;
  auto learner = make_learner(spec, shape, index);

  double baseline = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const ReplayEvent& ev = events[i];
    baseline += ev.random_reward ? *ev.random_reward : ev.reward;
    StepContext step;
    step.t = i + 1;
    step.user = UserId::from_index(users.at(ev.user));
    step.candidates = ev.candidates;
    const std::size_t chosen = learner->select(step);
    if (chosen != ev.chosen) continue;
    learner->observe(step, chosen, ev.reward);
    ++result.matched;
    result.total_reward += ev.reward;
  }
  result.baseline_mean = baseline / static_cast<double>(events.size());
  if (result.matched > 0 && result.baseline_mean != 0.0) {
    result.normalized_reward =
        result.total_reward / static_cast<double>(result.matched) / result.baseline_mean;
  }
  return result;
}

std::string replay_to_json(const std::vector<ReplayResult>& results) {
  json out = json::array();
  for (const ReplayResult& r : results) {
    out.push_back({{"learner", r.learner},
                   {"events", r.events},
                   {"matched", r.matched},
                   {"total_reward", r.total_reward},
                   {"baseline_mean", r.baseline_mean},
                   {"normalized_reward", r.normalized_reward}});
  }
  return json{{"replay", std::move(out)}}.dump(2) + "\n";
}

}  // namespace dyclu
