#include "dyclu/homogeneity.hpp"

#include <cmath>
#include <cstring>

#include <Eigen/Cholesky>
#include <string>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

constexpr double kNormSlack = 1e-9;

double clamp_statistic(double s) { return s < 0.0 ? 0.0 : s; }

void require_nonempty(const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no observations");
}

}  // namespace

Dataset::Dataset(std::size_t dim)
    : dim_(dim),
      gram_(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))),
      moment_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      spectrum_(gram_),
      mle_(Vector::Zero(static_cast<Eigen::Index>(dim))) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "dataset dimension must be >= 1");
}

void Dataset::append(const Vector& context, double reward) {
  if (static_cast<std::size_t>(context.size()) != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "context has length " + std::to_string(context.size()) + ", expected " +
                    std::to_string(dim_));
  }
  if (!context.allFinite() || !std::isfinite(reward)) {
    throw Error(ErrorCode::DegenerateObservation, "observation contains a non-finite value");
  }
  if (context.norm() > 1.0 + kNormSlack) {
    throw Error(ErrorCode::DegenerateObservation, "context norm exceeds 1");
  }
  rows_.push_back({context, reward});
  gram_.noalias() += context * context.transpose();
  moment_.noalias() += context * reward;
  yty_ += reward * reward;
  spectrum_ = GramSpectrum(gram_);
  mle_ = spectrum_.pseudo_inverse() * moment_;
}

const Vector& Dataset::mle() const {
  require_nonempty(*this);
  return mle_;
}

Matrix Dataset::design() const {
  Matrix x(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = rows_[i].context.transpose();
  }
  return x;
}

Vector Dataset::responses() const {
  Vector y(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows_[i].reward;
  return y;
}

std::uint64_t Dataset::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& row : rows_) {
    for (Eigen::Index i = 0; i < row.context.size(); ++i) mix(row.context(i));
    mix(row.reward);
  }
  return h;
}

NoiseModel::NoiseModel(double sigma2) : sigma2_(sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorCode::InvalidNoise, "sigma2 must be positive and finite");
  }
}

Vector mle(const Dataset& data) { return data.mle(); }

TestStatistic homogeneity_statistic(const Dataset& first, const Dataset& second,
                                    NoiseModel noise) {
  require_nonempty(first);
  require_nonempty(second);
  if (first.dim() != second.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "datasets have different dimensions");
  }
  const Matrix pooled_gram = first.gram() + second.gram();
  const std::size_t d = first.dim();
  const std::size_t joint = first.rank() + second.rank();

  // Each MLE lies in the range of its own Gram matrix, so the deviations from
  // the pooled MLE are A⁺A₂(θ̂₁ − θ̂₂) and A⁺A₁(θ̂₂ − θ̂₁). Forming them from the
  // difference avoids cancellation and makes identical fits score exactly 0.
  const Vector delta = first.mle() - second.mle();
  const Vector r1 = second.gram() * delta;
  const Vector r2 = first.gram() * delta;
  Vector d1;
  Vector d2;
  std::size_t pooled_rank = 0;
  bool solved = false;
  // When either side already has full rank the pooled Gram matrix is
  // positive definite, so a Cholesky solve replaces the eigendecomposition.
  if (first.rank() == d || second.rank() == d) {
    const Eigen::LLT<Matrix> llt(pooled_gram);
    if (llt.info() == Eigen::Success) {
      d1 = llt.solve(r1);
      d2 = llt.solve(r2);
      pooled_rank = d;
      solved = true;
    }
  }
  if (!solved) {
    const GramSpectrum pooled(pooled_gram);
    d1 = pooled.pseudo_inverse() * r1;
    d2 = pooled.pseudo_inverse() * r2;
    pooled_rank = pooled.rank();
  }
  const double q1 = d1.dot(first.gram() * d1);
  const double q2 = d2.dot(second.gram() * d2);

  TestStatistic out;
  out.statistic = clamp_statistic((q1 + q2) / noise.sigma2());
  out.df = joint > pooled_rank ? joint - pooled_rank : 0;
  return out;
}

TestStatistic homogeneity_statistic_from_rows(const Dataset& first, const Dataset& second,
                                              NoiseModel noise) {
  require_nonempty(first);
  require_nonempty(second);
  const Matrix x1 = first.design();
  const Matrix x2 = second.design();
  const Vector y1 = first.responses();
  const Vector y2 = second.responses();
  Matrix stacked(x1.rows() + x2.rows(), x1.cols());
  stacked << x1, x2;
  Vector y(y1.size() + y2.size());
  y << y1, y2;

  const Vector t1 = pseudo_inverse(x1) * y1;
  const Vector t2 = pseudo_inverse(x2) * y2;
  const Vector t12 = pseudo_inverse(stacked) * y;

  TestStatistic out;
  out.statistic =
      ((x1 * (t1 - t12)).squaredNorm() + (x2 * (t2 - t12)).squaredNorm()) / noise.sigma2();
  const std::size_t joint = numerical_rank(x1) + numerical_rank(x2);
  const std::size_t pooled = numerical_rank(stacked);
  out.df = joint > pooled ? joint - pooled : 0;
  return out;
}

TestStatistic one_sample_statistic(const Dataset& data, const Vector& context, double reward,
                                   NoiseModel noise) {
  require_nonempty(data);
  if (context.size() > 0 && context.norm() == 0.0) {
    throw Error(ErrorCode::DegenerateObservation, "context is the zero vector");
  }
  Dataset single(data.dim());
  single.append(context, reward);
  return homogeneity_statistic(data, single, noise);
}

TestResult homogeneity_test(const Dataset& first, const Dataset& second, NoiseModel noise,
                            double threshold) {
  const TestStatistic s = homogeneity_statistic(first, second, noise);
  return {s.statistic, s.df, threshold, s.statistic > threshold};
}

double type1_bound(double upsilon, std::size_t df) {
  if (df == 0) return 0.0;
  return 1.0 - central_chi2_cdf(upsilon, df);
}

double type2_bound(double upsilon, std::size_t d, double lmin1, double lmin2, double gap,
                   NoiseModel noise) {
  if (!(gap > 0.0)) throw Error(ErrorCode::InvalidGap, "gap must be positive");
  if (d == 0) throw Error(ErrorCode::InvalidDegreesOfFreedom, "d must be >= 1");
  if (lmin1 > 0.0 && lmin2 > 0.0) {
    const double psi = (gap * gap / noise.sigma2()) / (1.0 / lmin1 + 1.0 / lmin2);
    return noncentral_chi2_cdf(upsilon, d, psi);
  }
  return central_chi2_cdf(upsilon, d);
}

}  // namespace dyclu
