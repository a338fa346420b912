#pragma once

#include <compare>
#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "dyclu/homogeneity.hpp"
#include "dyclu/learner.hpp"
#include "dyclu/ridge.hpp"

namespace dyclu {

class ModelId {
 public:
  constexpr ModelId() = default;
  constexpr explicit ModelId(std::size_t id) noexcept : id_(id) {}

  constexpr std::size_t value() const noexcept { return id_; }

  friend constexpr auto operator<=>(const ModelId&, const ModelId&) = default;

 private:
  std::size_t id_ = 0;
};

struct DyCluConfig {
  std::size_t d = 0;
  std::size_t tau = 30;
  double delta = 0.1;     // UCB confidence
  double delta_e = 0.01;  // detection confidence
  double upsilon_e = 0.0;
  double upsilon_c = 0.0;
  double lambda = 1.0;
  double sigma2 = 0.01;
  std::optional<std::size_t> max_outdated;  // unlimited when empty

  /// υᵉ = χ²₁ quantile at 0.95, υᶜ = χ²_d quantile at 0.95.
  static DyCluConfig with_defaults(std::size_t d, double sigma2);

  /// Throws ConfigError naming the offending field.
  void validate() const;

  UcbParams ucb() const;
};

/// One stationary-period model of a user: its observations plus the
/// sliding window of admissibility indicators e.
class UserModel {
 public:
  UserModel(ModelId id, UserId owner, std::size_t dim, std::size_t tau, std::size_t created_at);

  ModelId id() const noexcept { return id_; }
  UserId owner() const noexcept { return owner_; }
  const Dataset& data() const noexcept { return data_; }
  std::size_t created_at() const noexcept { return created_at_; }
  std::optional<std::size_t> retired_at() const noexcept { return retired_at_; }
  bool up_to_date() const noexcept { return !retired_at_.has_value(); }

  const std::deque<bool>& window() const noexcept { return window_; }
  std::size_t window_capacity() const noexcept { return capacity_; }
  /// Mean of the window; 0 when the window is empty.
  double e_mean() const noexcept;

  void push_indicator(bool e);
  void append(const Vector& context, double reward) { data_.append(context, reward); }

  /// Ground-truth parameter index, tracked only by the oracle variant.
  std::optional<std::size_t> label() const noexcept { return label_; }
  void set_label(std::size_t k) noexcept { label_ = k; }

 private:
  friend class ModelPool;

  ModelId id_;
  UserId owner_;
  Dataset data_;
  std::deque<bool> window_;
  std::size_t capacity_;
  std::size_t ones_ = 0;
  std::size_t created_at_;
  std::optional<std::size_t> retired_at_;
  std::optional<std::size_t> label_;
};

/// Up-to-date models U (one per user), outdated models O and the stored
/// neighborhoods V̂. Models never move in memory, and retired models are not
/// handed out mutably.
class ModelPool {
 public:
  ModelPool(std::size_t n_users, std::size_t dim, std::size_t tau);

  std::size_t n_users() const noexcept { return current_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t model_count() const noexcept { return models_.size(); }

  const UserModel& model(ModelId id) const;
  const UserModel& current(UserId user) const;
  UserModel& current_mut(UserId user);
  const std::vector<ModelId>& outdated() const noexcept { return outdated_; }
  const std::vector<ModelId>& neighborhood(UserId user) const;

  /// Moves the user's model into O and installs a fresh empty one. When
  /// `max_outdated` is set and exceeded, the oldest outdated model is
  /// dropped and removed from every neighborhood.
  ModelId retire_and_replace(UserId user, std::size_t t,
                             std::optional<std::size_t> max_outdated = std::nullopt);

  void set_neighborhood(UserId user, std::vector<ModelId> members);

  /// Every model currently in U ∪ O, in ascending id order.
  std::vector<ModelId> active_models() const;

 private:
  void check_user(UserId user) const;

  std::size_t dim_;
  std::size_t tau_;
  std::deque<UserModel> models_;
  std::vector<ModelId> current_;
  std::vector<ModelId> outdated_;
  std::vector<bool> dropped_;
  std::vector<std::vector<ModelId>> neighborhoods_;
};

struct Aggregate {
  Matrix gram;    // λI + Σ A_j
  Vector moment;  // Σ b_j
  std::size_t n_obs = 0;
};

/// 1 − F(υᵉ; 1, 0) + sqrt(log(1/δ_e)/(2τ))
double detection_threshold(const DyCluConfig& cfg);

Aggregate aggregate_statistics(const ModelPool& pool, const std::vector<ModelId>& members,
                               const DyCluConfig& cfg);

/// UCB arm choice over the user's stored neighborhood.
std::size_t select_arm(const ModelPool& pool, UserId user, const Matrix& candidates,
                       const DyCluConfig& cfg);

/// Change detection, model update and neighborhood refresh for one
/// observation of `user` at time t.
StepEvent observe(ModelPool& pool, UserId user, const Vector& context, double reward,
                  const DyCluConfig& cfg, std::size_t t);

const std::vector<ModelId>& neighborhood_of(const ModelPool& pool, UserId user);

/// V̂ = own model ∪ {M ∈ U ∪ O, M non-empty : s(H_user, H_M) ≤ υᶜ}.
void recompute_neighborhood(ModelPool& pool, UserId user, const DyCluConfig& cfg);

class DyCluLearner final : public Learner {
 public:
  enum class Mode {
    Learned,
    /// Change detection fires exactly at true change points and neighborhoods
    /// are the models holding the current ground-truth parameter.
    GroundTruth,
  };

  DyCluLearner(std::size_t n_users, DyCluConfig cfg, Mode mode = Mode::Learned);

  std::size_t select(const StepContext& step) override;
  StepEvent observe(const StepContext& step, std::size_t chosen, double reward) override;

  const ModelPool& pool() const noexcept { return pool_; }
  const DyCluConfig& config() const noexcept { return cfg_; }
  std::size_t detections() const noexcept { return detections_; }

 private:
  std::vector<ModelId> labelled_models(std::size_t k) const;

  DyCluConfig cfg_;
  Mode mode_;
  ModelPool pool_;
  std::size_t detections_ = 0;
};

}  // namespace dyclu
