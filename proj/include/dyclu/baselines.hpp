#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "dyclu/dyclu.hpp"
#include "dyclu/homogeneity.hpp"
#include "dyclu/learner.hpp"
#include "dyclu/ridge.hpp"

namespace dyclu {

/// LinUCB with either one shared model ("linucb-one") or one model per
/// user ("linucb-ind").
class LinUcbLearner final : public Learner {
 public:
  enum class Sharing { Shared, PerUser };

  LinUcbLearner(std::size_t n_users, std::size_t dim, UcbParams params, Sharing sharing);

  std::size_t select(const StepContext& step) override;
  StepEvent observe(const StepContext& step, std::size_t chosen, double reward) override;

  const RidgeModel& model_for(UserId user) const;

 private:
  RidgeModel& slot(UserId user);

  UcbParams params_;
  Sharing sharing_;
  std::vector<RidgeModel> models_;
};

/// One LinUCB instance per ground-truth parameter; observations are routed
/// by StepContext::true_param.
class OracleLinUcbLearner final : public Learner {
 public:
  OracleLinUcbLearner(std::size_t n_params, std::size_t dim, UcbParams params);

  std::size_t select(const StepContext& step) override;
  StepEvent observe(const StepContext& step, std::size_t chosen, double reward) override;

  const RidgeModel& model(std::size_t k) const;
  /// Time steps routed to parameter k, in order.
  const std::vector<std::size_t>& routed_steps(std::size_t k) const;

 private:
  std::size_t route(const StepContext& step) const;

  UcbParams params_;
  std::vector<RidgeModel> models_;
  std::vector<std::vector<std::size_t>> routed_;
};

struct RestartConfig {
  UcbParams ucb;
  std::size_t tau = 30;
  double delta_e = 0.01;
  double upsilon_e = 0.0;
  double sigma2 = 0.01;
};

/// Per-user LinUCB that restarts a user's model when the windowed
/// one-sample detector fires. Every observation is used for the update;
/// only a detection (which drops the triggering observation) changes state
/// relative to plain per-user LinUCB.
class RestartLinUcbLearner final : public Learner {
 public:
  RestartLinUcbLearner(std::size_t n_users, std::size_t dim, RestartConfig cfg);

  std::size_t select(const StepContext& step) override;
  StepEvent observe(const StepContext& step, std::size_t chosen, double reward) override;

  const RidgeModel& model_for(UserId user) const;
  std::size_t detections() const noexcept { return detections_; }

  /// Clears the user's ridge statistics, history and window.
  void force_reset(UserId user);

 private:
  struct UserState {
    RidgeModel ridge;
    Dataset history;
    std::deque<bool> window;
    std::size_t ones = 0;
  };

  UserState& state(UserId user);

  RestartConfig cfg_;
  std::vector<UserState> users_;
  std::size_t detections_ = 0;
};

/// Graph over users that starts complete and only deletes edges; a user is
/// served from the pooled statistics of its connected component.
class ClusterGraph {
 public:
  ClusterGraph(std::size_t n_users, std::size_t dim, double lambda);

  std::size_t n_users() const noexcept { return models_.size(); }
  bool has_edge(UserId a, UserId b) const;
  void delete_edge(UserId a, UserId b);
  std::vector<UserId> neighbors(UserId user) const;
  /// Members of the user's connected component, ascending.
  std::vector<UserId> component(UserId user) const;
  std::size_t component_count() const;

  const RidgeModel& model(UserId user) const;
  RidgeModel& model_mut(UserId user);

 private:
  void check_user(UserId user) const;

  std::vector<RidgeModel> models_;
  std::vector<std::vector<bool>> adjacency_;
};

class ClubLearner final : public Learner {
 public:
  ClubLearner(std::size_t n_users, std::size_t dim, UcbParams params, double beta);

  std::size_t select(const StepContext& step) override;
  StepEvent observe(const StepContext& step, std::size_t chosen, double reward) override;

  const ClusterGraph& graph() const noexcept { return graph_; }

  /// β·sqrt((1 + log(1 + n)) / (1 + n))
  static double edge_bound(double beta, std::size_t n_obs);

 private:
  UcbParams params_;
  double beta_;
  ClusterGraph graph_;
};

}  // namespace dyclu
