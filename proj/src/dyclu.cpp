#include "dyclu/dyclu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, field + ": " + what);
}

}  // namespace

DyCluConfig DyCluConfig::with_defaults(std::size_t d, double sigma2) {
  DyCluConfig cfg;
  cfg.d = d;
  cfg.sigma2 = sigma2;
  cfg.upsilon_e = chi2_quantile(0.95, 1);
  cfg.upsilon_c = chi2_quantile(0.95, d);
  return cfg;
}

void DyCluConfig::validate() const {
  require(d >= 1, "d", "must be >= 1");
  require(tau >= 1, "tau", "must be >= 1");
  require(delta > 0.0 && delta < 1.0, "delta", "must lie in (0, 1)");
  require(delta_e > 0.0 && delta_e <= 1.0, "delta_e", "must lie in (0, 1]");
  require(upsilon_e >= 0.0, "upsilon_e", "must be >= 0");
  require(upsilon_c >= 0.0, "upsilon_c", "must be >= 0");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda", "must be positive");
  require(sigma2 > 0.0 && std::isfinite(sigma2), "sigma2", "must be positive");
}

UcbParams DyCluConfig::ucb() const { return {lambda, std::sqrt(sigma2), delta}; }

UserModel::UserModel(ModelId id, UserId owner, std::size_t dim, std::size_t tau,
                     std::size_t created_at)
    : id_(id), owner_(owner), data_(dim), capacity_(tau), created_at_(created_at) {}

double UserModel::e_mean() const noexcept {
  if (window_.empty()) return 0.0;
  return static_cast<double>(ones_) / static_cast<double>(window_.size());
}

void UserModel::push_indicator(bool e) {
  window_.push_back(e);
  if (e) ++ones_;
  if (window_.size() > capacity_) {
    if (window_.front()) --ones_;
    window_.pop_front();
  }
}

ModelPool::ModelPool(std::size_t n_users, std::size_t dim, std::size_t tau)
    : dim_(dim), tau_(tau), neighborhoods_(n_users) {
  if (n_users == 0) throw Error(ErrorCode::ConfigError, "n_users: must be >= 1");
  current_.reserve(n_users);
  for (std::size_t i = 0; i < n_users; ++i) {
    const ModelId id(models_.size());
    models_.emplace_back(id, UserId::from_index(i), dim, tau, 0);
    dropped_.push_back(false);
    current_.push_back(id);
    neighborhoods_[i] = {id};
  }
}

void ModelPool::check_user(UserId user) const {
  if (user.value() == 0 || user.index() >= current_.size()) {
    throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user.value()));
  }
}

const UserModel& ModelPool::model(ModelId id) const {
  if (id.value() >= models_.size()) {
    throw Error(ErrorCode::UnknownParameter, "model " + std::to_string(id.value()));
  }
  return models_[id.value()];
}

const UserModel& ModelPool::current(UserId user) const {
  check_user(user);
  return models_[current_[user.index()].value()];
}

UserModel& ModelPool::current_mut(UserId user) {
  check_user(user);
  return models_[current_[user.index()].value()];
}

const std::vector<ModelId>& ModelPool::neighborhood(UserId user) const {
  check_user(user);
  return neighborhoods_[user.index()];
}

ModelId ModelPool::retire_and_replace(UserId user, std::size_t t,
                                      std::optional<std::size_t> max_outdated) {
  check_user(user);
  const ModelId old = current_[user.index()];
  models_[old.value()].retired_at_ = t;
  outdated_.push_back(old);

  const ModelId fresh(models_.size());
  models_.emplace_back(fresh, user, dim_, tau_, t);
  dropped_.push_back(false);
  current_[user.index()] = fresh;

  if (max_outdated && outdated_.size() > *max_outdated) {
    const ModelId victim = outdated_.front();
    outdated_.erase(outdated_.begin());
    dropped_[victim.value()] = true;
    for (auto& members : neighborhoods_) std::erase(members, victim);
  }
  // The replaced model may no longer be referenced as the user's own entry.
  auto& own = neighborhoods_[user.index()];
  std::erase(own, old);
  own.insert(own.begin(), fresh);
  return fresh;
}

void ModelPool::set_neighborhood(UserId user, std::vector<ModelId> members) {
  check_user(user);
  neighborhoods_[user.index()] = std::move(members);
}

std::vector<ModelId> ModelPool::active_models() const {
  std::vector<ModelId> out;
  out.reserve(models_.size());
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (!dropped_[i]) out.emplace_back(i);
  }
  return out;
}

double detection_threshold(const DyCluConfig& cfg) {
  return 1.0 - central_chi2_cdf(cfg.upsilon_e, 1) + hoeffding_margin(cfg.delta_e, cfg.tau);
}

Aggregate aggregate_statistics(const ModelPool& pool, const std::vector<ModelId>& members,
                               const DyCluConfig& cfg) {
  if (members.empty()) throw Error(ErrorCode::EmptyNeighborhood, "neighborhood is empty");
  const auto d = static_cast<Eigen::Index>(pool.dim());
  Aggregate agg{cfg.lambda * Matrix::Identity(d, d), Vector::Zero(d), 0};
  for (const ModelId id : members) {
    const Dataset& data = pool.model(id).data();
    agg.gram += data.gram();
    agg.moment += data.moment();
    agg.n_obs += data.size();
  }
  return agg;
}

std::size_t select_arm(const ModelPool& pool, UserId user, const Matrix& candidates,
                       const DyCluConfig& cfg) {
  if (candidates.rows() == 0) throw Error(ErrorCode::NoCandidates, "candidate set is empty");
  const Aggregate agg = aggregate_statistics(pool, pool.neighborhood(user), cfg);
  return argmax_first(ucb_scores(agg.gram, agg.moment, agg.n_obs, candidates, cfg.ucb()));
}

void recompute_neighborhood(ModelPool& pool, UserId user, const DyCluConfig& cfg) {
  const UserModel& own = pool.current(user);
  std::vector<ModelId> members{own.id()};
  if (!own.data().empty()) {
    const NoiseModel noise(cfg.sigma2);
    for (const ModelId id : pool.active_models()) {
      if (id == own.id()) continue;
      const Dataset& other = pool.model(id).data();
      if (other.empty()) continue;
      if (homogeneity_statistic(own.data(), other, noise).statistic <= cfg.upsilon_c) {
        members.push_back(id);
      }
    }
  }
  pool.set_neighborhood(user, std::move(members));
}

StepEvent observe(ModelPool& pool, UserId user, const Vector& context, double reward,
                  const DyCluConfig& cfg, std::size_t t) {
  UserModel& model = pool.current_mut(user);
  bool e = false;
  if (!model.data().empty()) {
    const NoiseModel noise(cfg.sigma2);
    e = one_sample_statistic(model.data(), context, reward, noise).statistic > cfg.upsilon_e;
  }
  model.push_indicator(e);

  StepEvent event;
  if (model.e_mean() <= detection_threshold(cfg)) {
    if (!e) {
      model.append(context, reward);
      event.model_updated = true;
    } else {
      event.observation_discarded = true;
    }
  } else {
    pool.retire_and_replace(user, t, cfg.max_outdated);
    event.change_detected = true;
  }
  recompute_neighborhood(pool, user, cfg);
  event.neighborhood_size = pool.neighborhood(user).size();
  return event;
}

const std::vector<ModelId>& neighborhood_of(const ModelPool& pool, UserId user) {
  return pool.neighborhood(user);
}

DyCluLearner::DyCluLearner(std::size_t n_users, DyCluConfig cfg, Mode mode)
    : cfg_(cfg), mode_(mode), pool_(n_users, cfg.d, std::max<std::size_t>(cfg.tau, 1)) {
  cfg_.validate();
}

std::vector<ModelId> DyCluLearner::labelled_models(std::size_t k) const {
  std::vector<ModelId> out;
  for (const ModelId id : pool_.active_models()) {
    const auto label = pool_.model(id).label();
    if (label && *label == k) out.push_back(id);
  }
  return out;
}

std::size_t DyCluLearner::select(const StepContext& step) {
  if (mode_ == Mode::Learned) return select_arm(pool_, step.user, step.candidates, cfg_);
  if (!step.true_param) throw Error(ErrorCode::UnknownParameter, "ground-truth mode needs true_param");
  const auto members = labelled_models(*step.true_param);
  const auto d = static_cast<Eigen::Index>(cfg_.d);
  Aggregate agg{cfg_.lambda * Matrix::Identity(d, d), Vector::Zero(d), 0};
  for (const ModelId id : members) {
    const Dataset& data = pool_.model(id).data();
    agg.gram += data.gram();
    agg.moment += data.moment();
    agg.n_obs += data.size();
  }
  return argmax_first(ucb_scores(agg.gram, agg.moment, agg.n_obs, step.candidates, cfg_.ucb()));
}

StepEvent DyCluLearner::observe(const StepContext& step, std::size_t chosen, double reward) {
  if (chosen >= static_cast<std::size_t>(step.candidates.rows())) {
    throw Error(ErrorCode::NoCandidates, "chosen index out of range");
  }
  const Vector context = step.candidates.row(static_cast<Eigen::Index>(chosen)).transpose();
  if (mode_ == Mode::Learned) {
    const StepEvent event = dyclu::observe(pool_, step.user, context, reward, cfg_, step.t);
    if (event.change_detected) ++detections_;
    return event;
  }

  if (!step.true_param) throw Error(ErrorCode::UnknownParameter, "ground-truth mode needs true_param");
  const std::size_t k = *step.true_param;
  StepEvent event;
  const UserModel& own = pool_.current(step.user);
  if (own.label() && *own.label() != k) {
    pool_.retire_and_replace(step.user, step.t, cfg_.max_outdated);
    event.change_detected = true;
    ++detections_;
  }
  UserModel& model = pool_.current_mut(step.user);
  model.set_label(k);
  model.push_indicator(false);
  model.append(context, reward);
  event.model_updated = true;
  auto members = labelled_models(k);
  event.neighborhood_size = members.size();
  pool_.set_neighborhood(step.user, std::move(members));
  return event;
}

}  // namespace dyclu
