#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace dyclu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative cutoff for numerical rank: singular values at or below
/// rel_tol * sigma_max count as zero.
class RankTolerance {
 public:
  static constexpr double kDefault = 1e-10;

  RankTolerance() = default;
  explicit RankTolerance(double rel_tol);

  double value() const noexcept { return rel_tol_; }

 private:
  double rel_tol_ = kDefault;
};

Matrix pseudo_inverse(const Matrix& m, RankTolerance tol = {});
std::size_t numerical_rank(const Matrix& m, RankTolerance tol = {});

/// Smallest eigenvalue of a symmetric matrix; values in [-1e-9, 0) are
/// reported as 0.
double min_eigenvalue(const Matrix& m);

/// Spectral factorization of a symmetric positive semidefinite matrix
/// (a Gram matrix XᵀX). One eigendecomposition yields the rank, the
/// Moore-Penrose inverse and the smallest eigenvalue.
class GramSpectrum {
 public:
  GramSpectrum() = default;
  explicit GramSpectrum(const Matrix& gram, RankTolerance tol = {});

  std::size_t rank() const noexcept { return rank_; }
  const Matrix& pseudo_inverse() const noexcept { return pinv_; }
  double min_eigenvalue() const noexcept { return min_eig_; }

 private:
  std::size_t rank_ = 0;
  Matrix pinv_;
  double min_eig_ = 0.0;
};

double central_chi2_cdf(double x, std::size_t df);

/// Poisson mixture of central CDFs, truncated once the unvisited Poisson
/// mass drops below 1e-12.
double noncentral_chi2_cdf(double x, std::size_t df, double psi);

double chi2_quantile(double p, std::size_t df);

/// sqrt(log(1/delta_e) / (2 tau))
double hoeffding_margin(double delta_e, std::size_t tau);

/// Lower bound on λ_min(Σ x xᵀ) after n i.i.d. sub-Gaussian contexts whose
/// second-moment matrix has minimum eigenvalue lambda_prime. Negative values
/// mean the bound is vacuous at this n.
double min_eig_lower_bound(std::size_t n_obs, double lambda_prime, std::size_t d,
                           double delta_prime);

}  // namespace dyclu
