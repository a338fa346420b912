#include "dyclu/ridge.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "dyclu/error.hpp"

namespace dyclu {

double exploration_width(std::size_t d, std::size_t n_obs, const UcbParams& params) {
  const double dd = static_cast<double>(d);
  const double n = static_cast<double>(n_obs);
  return params.sigma *
             std::sqrt(dd * std::log(1.0 + n / (dd * params.lambda)) +
                       2.0 * std::log(1.0 / params.delta)) +
         std::sqrt(params.lambda);
}

std::vector<double> ucb_scores(const Matrix& gram, const Vector& moment, std::size_t n_obs,
                               const Matrix& candidates, const UcbParams& params) {
  if (candidates.rows() == 0) throw Error(ErrorCode::NoCandidates, "candidate set is empty");
  if (candidates.cols() != gram.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "candidate dimension does not match the model");
  }
  const Eigen::LLT<Matrix> llt(gram);
  const Vector theta = llt.solve(moment);
  // ‖L⁻¹x‖² = xᵀA⁻¹x for each candidate column.
  const Matrix whitened = llt.matrixL().solve(candidates.transpose());
  const double alpha = exploration_width(static_cast<std::size_t>(gram.rows()), n_obs, params);
  const Vector mean = candidates * theta;

  std::vector<double> scores(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    scores[static_cast<std::size_t>(i)] = mean(i) + alpha * whitened.col(i).norm();
  }
  return scores;
}

std::size_t argmax_first(const std::vector<double>& scores) {
  if (scores.empty()) throw Error(ErrorCode::NoCandidates, "candidate set is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

RidgeModel::RidgeModel(std::size_t dim, double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::ConfigError, "lambda must be positive");
  moment_ = Vector::Zero(static_cast<Eigen::Index>(dim));
  gram_ = lambda_ * Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

void RidgeModel::update(const Vector& context, double reward) {
  gram_.noalias() += context * context.transpose();
  moment_.noalias() += context * reward;
  ++n_obs_;
}

void RidgeModel::reset() {
  const auto d = moment_.size();
  gram_ = lambda_ * Matrix::Identity(d, d);
  moment_ = Vector::Zero(d);
  n_obs_ = 0;
}

Vector RidgeModel::estimate() const { return gram_.llt().solve(moment_); }

std::size_t RidgeModel::select(const Matrix& candidates, const UcbParams& params) const {
  return argmax_first(ucb_scores(gram_, moment_, n_obs_, candidates, params));
}

}  // namespace dyclu
