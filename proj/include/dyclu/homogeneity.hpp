#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dyclu/numerics.hpp"

namespace dyclu {

struct Observation {
  Vector context;
  double reward = 0.0;
};

/// Ordered observations with their sufficient statistics A = Σ x xᵀ and
/// b = Σ x y. The spectrum of A (rank, pseudo-inverse) and the MLE are
/// refreshed on every append so that const access never mutates.
class Dataset {
 public:
  explicit Dataset(std::size_t dim);

  /// Throws DimensionMismatch on wrong length, DegenerateObservation on a
  /// non-finite value or ‖x‖ > 1 + 1e-9.
  void append(const Vector& context, double reward);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  const std::vector<Observation>& observations() const noexcept { return rows_; }
  const Matrix& gram() const noexcept { return gram_; }
  const Vector& moment() const noexcept { return moment_; }
  double response_energy() const noexcept { return yty_; }

  const GramSpectrum& spectrum() const noexcept { return spectrum_; }
  std::size_t rank() const noexcept { return spectrum_.rank(); }

  /// (XᵀX)⁻ Xᵀy; throws EmptyDataset.
  const Vector& mle() const;

  Matrix design() const;
  Vector responses() const;

  /// FNV-1a over the raw bytes of every observation, in order.
  std::uint64_t fingerprint() const noexcept;

 private:
  std::size_t dim_;
  std::vector<Observation> rows_;
  Matrix gram_;
  Vector moment_;
  double yty_ = 0.0;
  GramSpectrum spectrum_;
  Vector mle_;
};

class NoiseModel {
 public:
  explicit NoiseModel(double sigma2);

  double sigma2() const noexcept { return sigma2_; }

 private:
  double sigma2_;
};

struct TestStatistic {
  double statistic = 0.0;
  std::size_t df = 0;
};

struct TestResult {
  double statistic = 0.0;
  std::size_t df = 0;
  double threshold = 0.0;
  bool reject = false;
};

Vector mle(const Dataset& data);

/// s = (‖X₁(ϑ₁−ϑ₁₂)‖² + ‖X₂(ϑ₂−ϑ₁₂)‖²)/σ² with
/// df = rank(X₁) + rank(X₂) − rank([X₁; X₂]), computed from cached
/// sufficient statistics. Exactly symmetric in its two datasets.
TestStatistic homogeneity_statistic(const Dataset& first, const Dataset& second,
                                    NoiseModel noise);

/// Same statistic recomputed from raw rows (design matrices and SVD-based
/// pseudo-inverses). Slow; kept as a reference path for verification.
TestStatistic homogeneity_statistic_from_rows(const Dataset& first, const Dataset& second,
                                              NoiseModel noise);

/// Test of `data` against the singleton {(context, reward)}.
TestStatistic one_sample_statistic(const Dataset& data, const Vector& context, double reward,
                                   NoiseModel noise);

TestResult homogeneity_test(const Dataset& first, const Dataset& second, NoiseModel noise,
                            double threshold);

/// 1 − F(υ; df, 0). df = 0 yields 0: the statistic is then identically 0.
double type1_bound(double upsilon, std::size_t df);

/// F(υ; d, ψ) with ψ = (gap²/σ²) / (1/lmin1 + 1/lmin2) when both minimum
/// eigenvalues are positive, else the vacuous F(υ; d, 0).
double type2_bound(double upsilon, std::size_t d, double lmin1, double lmin2, double gap,
                   NoiseModel noise);

}  // namespace dyclu
