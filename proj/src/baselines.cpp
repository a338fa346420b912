#include "dyclu/baselines.hpp"

#include <cmath>
#include <string>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

Vector chosen_row(const StepContext& step, std::size_t chosen) {
  if (chosen >= static_cast<std::size_t>(step.candidates.rows())) {
    throw Error(ErrorCode::NoCandidates, "chosen index out of range");
  }
  return step.candidates.row(static_cast<Eigen::Index>(chosen)).transpose();
}

}  // namespace

// ---------------------------------------------------------------- LinUCB

LinUcbLearner::LinUcbLearner(std::size_t n_users, std::size_t dim, UcbParams params,
                             Sharing sharing)
    : params_(params), sharing_(sharing) {
  const std::size_t count = sharing == Sharing::Shared ? 1 : n_users;
  models_.assign(count, RidgeModel(dim, params.lambda));
}

RidgeModel& LinUcbLearner::slot(UserId user) {
  if (sharing_ == Sharing::Shared) return models_.front();
  if (user.value() == 0 || user.index() >= models_.size()) {
    throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user.value()));
  }
  return models_[user.index()];
}

const RidgeModel& LinUcbLearner::model_for(UserId user) const {
  return const_cast<LinUcbLearner*>(this)->slot(user);
}

std::size_t LinUcbLearner::select(const StepContext& step) {
  return slot(step.user).select(step.candidates, params_);
}

StepEvent LinUcbLearner::observe(const StepContext& step, std::size_t chosen, double reward) {
  slot(step.user).update(chosen_row(step, chosen), reward);
  StepEvent event;
  event.model_updated = true;
  event.neighborhood_size = 1;
  return event;
}

// ---------------------------------------------------------- oracle-LinUCB

OracleLinUcbLearner::OracleLinUcbLearner(std::size_t n_params, std::size_t dim, UcbParams params)
    : params_(params), models_(n_params, RidgeModel(dim, params.lambda)), routed_(n_params) {}

std::size_t OracleLinUcbLearner::route(const StepContext& step) const {
  if (!step.true_param || *step.true_param >= models_.size()) {
    throw Error(ErrorCode::UnknownParameter, "step carries no valid ground-truth parameter");
  }
  return *step.true_param;
}

std::size_t OracleLinUcbLearner::select(const StepContext& step) {
  return models_[route(step)].select(step.candidates, params_);
}

StepEvent OracleLinUcbLearner::observe(const StepContext& step, std::size_t chosen,
                                       double reward) {
  const std::size_t k = route(step);
  models_[k].update(chosen_row(step, chosen), reward);
  routed_[k].push_back(step.t);
  StepEvent event;
  event.model_updated = true;
  event.neighborhood_size = 1;
  return event;
}

const RidgeModel& OracleLinUcbLearner::model(std::size_t k) const {
  if (k >= models_.size()) throw Error(ErrorCode::UnknownParameter, "parameter " + std::to_string(k));
  return models_[k];
}

const std::vector<std::size_t>& OracleLinUcbLearner::routed_steps(std::size_t k) const {
  if (k >= routed_.size()) throw Error(ErrorCode::UnknownParameter, "parameter " + std::to_string(k));
  return routed_[k];
}

// ------------------------------------------------------- restart-LinUCB

RestartLinUcbLearner::RestartLinUcbLearner(std::size_t n_users, std::size_t dim,
                                           RestartConfig cfg)
    : cfg_(cfg) {
  if (cfg.tau == 0) throw Error(ErrorCode::ConfigError, "tau: must be >= 1");
  users_.reserve(n_users);
  for (std::size_t i = 0; i < n_users; ++i) {
    users_.push_back({RidgeModel(dim, cfg.ucb.lambda), Dataset(dim), {}, 0});
  }
}

RestartLinUcbLearner::UserState& RestartLinUcbLearner::state(UserId user) {
  if (user.value() == 0 || user.index() >= users_.size()) {
    throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user.value()));
  }
  return users_[user.index()];
}

const RidgeModel& RestartLinUcbLearner::model_for(UserId user) const {
  return const_cast<RestartLinUcbLearner*>(this)->state(user).ridge;
}

void RestartLinUcbLearner::force_reset(UserId user) {
  UserState& s = state(user);
  s.ridge.reset();
  s.history = Dataset(s.history.dim());
  s.window.clear();
  s.ones = 0;
}

std::size_t RestartLinUcbLearner::select(const StepContext& step) {
  return state(step.user).ridge.select(step.candidates, cfg_.ucb);
}

StepEvent RestartLinUcbLearner::observe(const StepContext& step, std::size_t chosen,
                                        double reward) {
  UserState& s = state(step.user);
  const Vector x = chosen_row(step, chosen);
  bool e = false;
  if (!s.history.empty()) {
    e = one_sample_statistic(s.history, x, reward, NoiseModel(cfg_.sigma2)).statistic >
        cfg_.upsilon_e;
  }
  s.window.push_back(e);
  if (e) ++s.ones;
  if (s.window.size() > cfg_.tau) {
    if (s.window.front()) --s.ones;
    s.window.pop_front();
  }
  const double e_mean = static_cast<double>(s.ones) / static_cast<double>(s.window.size());
  const double threshold =
      1.0 - central_chi2_cdf(cfg_.upsilon_e, 1) + hoeffding_margin(cfg_.delta_e, cfg_.tau);

  StepEvent event;
  event.neighborhood_size = 1;
  if (e_mean > threshold) {
    force_reset(step.user);
    event.change_detected = true;
    ++detections_;
    return event;
  }
  s.ridge.update(x, reward);
  s.history.append(x, reward);
  event.model_updated = true;
  return event;
}

// ------------------------------------------------------------- CLUB-style

ClusterGraph::ClusterGraph(std::size_t n_users, std::size_t dim, double lambda)
    : models_(n_users, RidgeModel(dim, lambda)),
      adjacency_(n_users, std::vector<bool>(n_users, true)) {
  for (std::size_t i = 0; i < n_users; ++i) adjacency_[i][i] = false;
}

void ClusterGraph::check_user(UserId user) const {
  if (user.value() == 0 || user.index() >= models_.size()) {
    throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user.value()));
  }
}

bool ClusterGraph::has_edge(UserId a, UserId b) const {
  check_user(a);
  check_user(b);
  return adjacency_[a.index()][b.index()];
}

void ClusterGraph::delete_edge(UserId a, UserId b) {
  check_user(a);
  check_user(b);
  adjacency_[a.index()][b.index()] = false;
  adjacency_[b.index()][a.index()] = false;
}

std::vector<UserId> ClusterGraph::neighbors(UserId user) const {
  check_user(user);
  std::vector<UserId> out;
  for (std::size_t j = 0; j < models_.size(); ++j) {
    if (adjacency_[user.index()][j]) out.push_back(UserId::from_index(j));
  }
  return out;
}

std::vector<UserId> ClusterGraph::component(UserId user) const {
  check_user(user);
  std::vector<bool> seen(models_.size(), false);
  std::vector<std::size_t> stack{user.index()};
  seen[user.index()] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < models_.size(); ++v) {
      if (adjacency_[u][v] && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  std::vector<UserId> out;
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (seen[j]) out.push_back(UserId::from_index(j));
  }
  return out;
}

std::size_t ClusterGraph::component_count() const {
  std::vector<bool> seen(models_.size(), false);
  std::size_t count = 0;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (seen[i]) continue;
    ++count;
    for (const UserId u : component(UserId::from_index(i))) seen[u.index()] = true;
  }
  return count;
}

const RidgeModel& ClusterGraph::model(UserId user) const {
  check_user(user);
  return models_[user.index()];
}

RidgeModel& ClusterGraph::model_mut(UserId user) {
  check_user(user);
  return models_[user.index()];
}

ClubLearner::ClubLearner(std::size_t n_users, std::size_t dim, UcbParams params, double beta)
    : params_(params), beta_(beta), graph_(n_users, dim, params.lambda) {
  if (!(beta > 0.0)) throw Error(ErrorCode::ConfigError, "beta: must be positive");
}

double ClubLearner::edge_bound(double beta, std::size_t n_obs) {
  const double n = static_cast<double>(n_obs);
  return beta * std::sqrt((1.0 + std::log(1.0 + n)) / (1.0 + n));
}

std::size_t ClubLearner::select(const StepContext& step) {
  const auto members = graph_.component(step.user);
  const RidgeModel& own = graph_.model(step.user);
  const auto d = static_cast<Eigen::Index>(own.dim());
  Matrix gram = params_.lambda * Matrix::Identity(d, d);
  Vector moment = Vector::Zero(d);
  std::size_t n = 0;
  for (const UserId u : members) {
    const RidgeModel& m = graph_.model(u);
    gram += m.gram();
    gram.diagonal().array() -= m.lambda();
    moment += m.moment();
    n += m.n_obs();
  }
  return argmax_first(ucb_scores(gram, moment, n, step.candidates, params_));
}

StepEvent ClubLearner::observe(const StepContext& step, std::size_t chosen, double reward) {
  graph_.model_mut(step.user).update(chosen_row(step, chosen), reward);
  const RidgeModel& own = graph_.model(step.user);
  const Vector theta = own.estimate();
  const double own_bound = edge_bound(beta_, own.n_obs());
  for (const UserId other : graph_.neighbors(step.user)) {
    const RidgeModel& m = graph_.model(other);
    if ((theta - m.estimate()).norm() > own_bound + edge_bound(beta_, m.n_obs())) {
      graph_.delete_edge(step.user, other);
    }
  }
  StepEvent event;
  event.model_updated = true;
  event.neighborhood_size = graph_.component(step.user).size();
  return event;
}

}  // namespace dyclu
