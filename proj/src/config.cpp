#include "dyclu/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, path + ": " + what);
}

/// Field access for one JSON object with strict key checking.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path, std::set<std::string> allowed)
      : object_(object), path_(std::move(path)) {
    if (!object.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : object.items()) {
      if (!allowed.count(key)) fail(field(key), "unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return object_.contains(key); }
  const json& raw(const std::string& key) const { return object_.at(key); }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) fail(field(key), "expected a finite number");
    return v.get<double>();
  }

  std::optional<double> optional_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key, 0.0);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(field(key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  std::optional<std::size_t> optional_count(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return count(key, 0);
  }

  std::string text(const std::string& key) const {
    if (!has(key)) fail(field(key), "required");
    const json& v = object_.at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& object_;
  std::string path_;
};

EnvironmentConfig parse_environment(const json& j, const std::string& path, bool named,
                                    std::string* name) {
  std::set<std::string> keys{"d", "n", "m", "K", "candidate_size", "T",
                             "smin", "smax", "sigma", "gamma"};
  if (named) keys.insert("name");
  const ObjectReader r(j, path, keys);
  if (named) *name = r.text("name");

  EnvironmentConfig c;
  c.d = r.count("d", c.d);
  c.n_users = r.count("n", c.n_users);
  c.m = r.count("m", c.m);
  c.arm_pool_size = r.count("K", c.arm_pool_size);
  c.candidate_size = r.count("candidate_size", c.candidate_size);
  c.horizon = r.count("T", c.horizon);
  c.smin = r.count("smin", c.smin);
  c.smax = r.count("smax", c.smax);
  c.sigma = r.real("sigma", c.sigma);
  c.gamma = r.real("gamma", c.gamma);

  if (c.d < 1) fail(r.field("d"), "must be >= 1");
  if (c.n_users < 1) fail(r.field("n"), "must be >= 1");
  if (c.m < 1) fail(r.field("m"), "must be >= 1");
  if (c.arm_pool_size < 1) fail(r.field("K"), "must be >= 1");
  if (c.candidate_size < 1 || c.candidate_size > c.arm_pool_size) {
    fail(r.field("candidate_size"), "must lie in [1, K]");
  }
  if (c.horizon < c.n_users) fail(r.field("T"), "must be >= n");
  if (c.smin < 1) fail(r.field("smin"), "must be >= 1");
  if (c.smax < c.smin) fail(r.field("smax"), "must be >= smin");
  if (c.sigma < 0.0) fail(r.field("sigma"), "must be >= 0");
  if (c.gamma < 0.0) fail(r.field("gamma"), "must be >= 0");
  c.validate();
  return c;
}

LearnerSpec parse_learner(const json& j, const std::string& path) {
  const ObjectReader r(j, path,
                       {"name", "label", "lambda", "delta", "tau", "delta_e", "upsilon_e",
                        "upsilon_c", "sigma", "max_outdated", "beta"});
  LearnerSpec s;
  s.name = r.text("name");
  if (s.name == "adts") {
    throw Error(ErrorCode::Unsupported, r.field("name") + ": learner \"adts\" is not supported");
  }
  const auto& names = learner_names();
  if (std::find(names.begin(), names.end(), s.name) == names.end()) {
    fail(r.field("name"), "unknown learner \"" + s.name + "\"");
  }
  s.label = r.has("label") ? r.text("label") : s.name;
  if (s.label.empty() || s.label.find_first_of("/\\,\"\n") != std::string::npos) {
    fail(r.field("label"), "must be non-empty and free of path separators, commas and quotes");
  }
  s.lambda = r.real("lambda", s.lambda);
  s.delta = r.real("delta", s.delta);
  s.tau = r.count("tau", s.tau);
  s.delta_e = r.real("delta_e", s.delta_e);
  s.upsilon_e = r.optional_real("upsilon_e");
  s.upsilon_c = r.optional_real("upsilon_c");
  s.sigma = r.optional_real("sigma");
  s.max_outdated = r.optional_count("max_outdated");
  s.beta = r.real("beta", s.beta);

  if (!(s.lambda > 0.0)) fail(r.field("lambda"), "must be positive");
  if (!(s.delta > 0.0 && s.delta < 1.0)) fail(r.field("delta"), "must lie in (0, 1)");
  if (s.tau < 1) fail(r.field("tau"), "must be >= 1");
  if (!(s.delta_e > 0.0 && s.delta_e <= 1.0)) fail(r.field("delta_e"), "must lie in (0, 1]");
  if (s.upsilon_e && *s.upsilon_e < 0.0) fail(r.field("upsilon_e"), "must be >= 0");
  if (s.upsilon_c && *s.upsilon_c < 0.0) fail(r.field("upsilon_c"), "must be >= 0");
  if (s.sigma && !(*s.sigma > 0.0)) fail(r.field("sigma"), "must be positive");
  if (!(s.beta > 0.0)) fail(r.field("beta"), "must be positive");
  return s;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  const ObjectReader r(root, "", {"environment", "environments", "learners", "seeds", "output_dir"});

  ExperimentConfig cfg;
  if (r.has("environment") && r.has("environments")) {
    fail("environments", "give either \"environment\" or \"environments\", not both");
  }
  if (r.has("environment")) {
    cfg.environments.push_back({"", parse_environment(r.raw("environment"), "environment", false, nullptr)});
  } else if (r.has("environments")) {
    const json& list = r.raw("environments");
    if (!list.is_array() || list.empty()) fail("environments", "expected a non-empty array");
    cfg.named_environments = true;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "environments[" + std::to_string(i) + "]";
      NamedEnvironment env;
      env.config = parse_environment(list[i], path, true, &env.name);
      if (env.name.empty() || env.name.find_first_of("/\\") != std::string::npos || env.name == "." ||
          env.name == "..") {
        fail(path + ".name", "must be a plain non-empty directory name");
      }
      if (!seen.insert(env.name).second) fail(path + ".name", "duplicate name \"" + env.name + "\"");
      cfg.environments.push_back(std::move(env));
    }
  }

  if (!r.has("learners")) fail("learners", "required");
  const json& learners = r.raw("learners");
  if (!learners.is_array() || learners.empty()) fail("learners", "at least one learner is required");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const std::string path = "learners[" + std::to_string(i) + "]";
    LearnerSpec s = parse_learner(learners[i], path);
    if (!labels.insert(s.label).second) fail(path + ".label", "duplicate label \"" + s.label + "\"");
    cfg.learners.push_back(std::move(s));
  }

  if (r.has("seeds")) {
    const json& seeds = r.raw("seeds");
    if (!seeds.is_array() || seeds.empty()) fail("seeds", "expected a non-empty array of integers");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!seeds[i].is_number_unsigned()) {
        fail("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
      }
      cfg.seeds.push_back(seeds[i].get<std::uint64_t>());
    }
  } else {
    cfg.seeds = {0};
  }

  if (r.has("output_dir")) {
    const std::string dir = r.text("output_dir");
    if (dir.empty()) fail("output_dir", "must be non-empty");
    cfg.output_dir = dir;
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

double learner_sigma(const LearnerSpec& spec, const EnvironmentConfig* env, std::size_t index) {
  if (spec.sigma) return *spec.sigma;
  if (env && env->sigma > 0.0) return env->sigma;
  fail("learners[" + std::to_string(index) + "].sigma",
       "required when the environment does not supply a positive sigma");
}

}  // namespace dyclu
