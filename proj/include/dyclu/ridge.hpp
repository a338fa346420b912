#pragma once

#include <cstddef>
#include <vector>

#include "dyclu/numerics.hpp"

namespace dyclu {

/// Parameters of the UCB exploration width
///   α = σ·sqrt(d·log(1 + N/(dλ)) + 2·log(1/δ)) + sqrt(λ).
struct UcbParams {
  double lambda = 1.0;
  double sigma = 0.1;
  double delta = 0.1;
};

double exploration_width(std::size_t d, std::size_t n_obs, const UcbParams& params);

/// Scores xᵀθ̂ + α·sqrt(xᵀA⁻¹x) for every row of `candidates`, where θ̂ = A⁻¹b
/// and A is symmetric positive definite.
std::vector<double> ucb_scores(const Matrix& gram, const Vector& moment, std::size_t n_obs,
                               const Matrix& candidates, const UcbParams& params);

/// First index attaining the maximum; throws NoCandidates when empty.
std::size_t argmax_first(const std::vector<double>& scores);

/// Ridge sufficient statistics A = λI + Σ x xᵀ, b = Σ x y.
class RidgeModel {
 public:
  RidgeModel(std::size_t dim, double lambda);

  void update(const Vector& context, double reward);
  void reset();

  std::size_t dim() const noexcept { return static_cast<std::size_t>(moment_.size()); }
  std::size_t n_obs() const noexcept { return n_obs_; }
  double lambda() const noexcept { return lambda_; }
  const Matrix& gram() const noexcept { return gram_; }
  const Vector& moment() const noexcept { return moment_; }
  Vector estimate() const;

  std::size_t select(const Matrix& candidates, const UcbParams& params) const;

 private:
  double lambda_;
  Matrix gram_;
  Vector moment_;
  std::size_t n_obs_ = 0;
};

}  // namespace dyclu
