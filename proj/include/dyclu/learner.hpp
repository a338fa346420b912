#pragma once

#include <compare>
#include <cstddef>
#include <optional>

#include "dyclu/numerics.hpp"

namespace dyclu {

/// 1-based user identifier.
class UserId {
 public:
  constexpr UserId() = default;
  constexpr explicit UserId(std::size_t id) noexcept : id_(id) {}

  static constexpr UserId from_index(std::size_t index) noexcept { return UserId(index + 1); }

  constexpr std::size_t value() const noexcept { return id_; }
  constexpr std::size_t index() const noexcept { return id_ - 1; }

  friend constexpr auto operator<=>(const UserId&, const UserId&) = default;

 private:
  std::size_t id_ = 1;
};

/// One round as seen by a learner. `true_param` is ground truth and may
/// only be read by oracle learners.
struct StepContext {
  std::size_t t = 1;
  UserId user;
  std::size_t local_step = 1;
  Matrix candidates;  // one candidate context per row
  std::optional<std::size_t> true_param;
};

struct StepEvent {
  bool observation_discarded = false;
  bool change_detected = false;
  bool model_updated = false;
  std::size_t neighborhood_size = 0;
};

/// select() is always followed by observe() for the same step.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::size_t select(const StepContext& step) = 0;
  virtual StepEvent observe(const StepContext& step, std::size_t chosen, double reward) = 0;
};

}  // namespace dyclu
