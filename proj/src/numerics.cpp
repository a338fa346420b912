#include "dyclu/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

constexpr double kTailMass = 1e-12;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidMatrix, std::string(what) + ": non-finite entry");
  }
}

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::InvalidMatrix, std::string(what) + ": matrix is not square");
  }
  require_finite(m, what);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::InvalidMatrix, std::string(what) + ": matrix is not symmetric");
  }
}

double clip_eigenvalue(double v) { return (v < 0.0 && v >= -1e-9) ? 0.0 : v; }

}  // namespace

RankTolerance::RankTolerance(double rel_tol) : rel_tol_(rel_tol) {
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) {
    throw Error(ErrorCode::InvalidTolerance, "rel_tol must be positive and finite");
  }
}

Matrix pseudo_inverse(const Matrix& m, RankTolerance tol) {
  require_finite(m, "pseudo_inverse");
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = tol.value() * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

std::size_t numerical_rank(const Matrix& m, RankTolerance tol) {
  require_finite(m, "numerical_rank");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double cutoff = tol.value() * sv(0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  }
  return rank;
}

double min_eigenvalue(const Matrix& m) {
  require_symmetric(m, "min_eigenvalue");
  if (m.size() == 0) throw Error(ErrorCode::InvalidMatrix, "min_eigenvalue: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return clip_eigenvalue(eig.eigenvalues()(0));
}

GramSpectrum::GramSpectrum(const Matrix& gram, RankTolerance tol) {
  const auto d = gram.rows();
  pinv_ = Matrix::Zero(d, d);
  if (d == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();  // ascending
  const double top = ev(d - 1);
  min_eig_ = clip_eigenvalue(ev(0));
  if (!(top > 0.0)) {
    min_eig_ = 0.0;
    return;
  }
  const double cutoff = tol.value() * top;
  Vector inv = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (ev(i) > cutoff) {
      inv(i) = 1.0 / ev(i);
      ++rank_;
    }
  }
  if (rank_ < static_cast<std::size_t>(d)) min_eig_ = 0.0;
  const Matrix& v = eig.eigenvectors();
  pinv_ = v * inv.asDiagonal() * v.transpose();
}

double central_chi2_cdf(double x, std::size_t df) {
  if (df == 0) throw Error(ErrorCode::InvalidDegreesOfFreedom, "df must be >= 1");
  if (std::isnan(x)) throw Error(ErrorCode::InvalidProbability, "x is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double v = boost::math::gamma_p(0.5 * static_cast<double>(df), 0.5 * x);
  return std::clamp(v, 0.0, 1.0);
}

double noncentral_chi2_cdf(double x, std::size_t df, double psi) {
  if (df == 0) throw Error(ErrorCode::InvalidDegreesOfFreedom, "df must be >= 1");
  if (!(psi >= 0.0) || !std::isfinite(psi)) {
    throw Error(ErrorCode::InvalidNoncentrality, "psi must be finite and >= 0");
  }
  if (x <= 0.0) return 0.0;
  if (psi == 0.0) return central_chi2_cdf(x, df);

  // Poisson(psi/2) weights; start at the mode so large psi does not underflow.
  const double mean = 0.5 * psi;
  const auto mode = static_cast<long long>(std::floor(mean));
  auto weight = [mean](long long j) {
    const double jd = static_cast<double>(j);
    return std::exp(-mean + jd * std::log(mean) - std::lgamma(jd + 1.0));
  };
  auto term = [&](long long j) {
    return central_chi2_cdf(x, df + 2 * static_cast<std::size_t>(j));
  };

  double mass = 0.0;
  double sum = 0.0;
  long long up = mode;
  long long down = mode - 1;
  bool up_open = true;
  bool down_open = down >= 0;
  // Each side closes once a geometric bound on its unvisited mass falls
  // below half the tail budget.
  while ((up_open || down_open) && 1.0 - mass >= kTailMass) {
    if (up_open) {
      const double w = weight(up);
      mass += w;
      sum += w * term(up);
      ++up;
      const double ratio = mean / static_cast<double>(up);
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) < 0.5 * kTailMass) up_open = false;
    }
    if (down_open) {
      const double w = weight(down);
      mass += w;
      sum += w * term(down);
      const double ratio = static_cast<double>(down) / mean;
      --down;
      if (down < 0 || (ratio < 1.0 && w * ratio / (1.0 - ratio) < 0.5 * kTailMass)) {
        down_open = false;
      }
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

double chi2_quantile(double p, std::size_t df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidProbability, "p must lie in (0, 1)");
  if (df == 0) throw Error(ErrorCode::InvalidDegreesOfFreedom, "df must be >= 1");
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(df));
  while (central_chi2_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (central_chi2_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double hoeffding_margin(double delta_e, std::size_t tau) {
  if (tau == 0) throw Error(ErrorCode::InvalidWindow, "tau must be >= 1");
  if (!(delta_e > 0.0 && delta_e <= 1.0)) {
    throw Error(ErrorCode::InvalidProbability, "delta_e must lie in (0, 1]");
  }
  return std::sqrt(std::log(1.0 / delta_e) / (2.0 * static_cast<double>(tau)));
}

double min_eig_lower_bound(std::size_t n_obs, double lambda_prime, std::size_t d,
                           double delta_prime) {
  if (n_obs == 0 || d == 0) throw Error(ErrorCode::InvalidWindow, "n_obs and d must be >= 1");
  if (!(lambda_prime > 0.0)) throw Error(ErrorCode::InvalidMatrix, "lambda_prime must be > 0");
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    throw Error(ErrorCode::InvalidProbability, "delta_prime must lie in (0, 1)");
  }
  const double n = static_cast<double>(n_obs);
  const double log_term = std::log(static_cast<double>(d) * n / delta_prime);
  return lambda_prime / 4.0 * n - 8.0 * (log_term + std::sqrt(n * log_term));
}

}  // namespace dyclu
