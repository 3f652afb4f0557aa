#include "ppipw/propensity.hpp"

#include <cmath>

#include "ppipw/errors.hpp"

namespace ppipw {

namespace {
constexpr double kLogClamp = 1e-15;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double sigmoid_score(const PropensityModel& model,
                     const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (model.weights.size() != x.size())
    throw InvalidInputError("sigmoid_score: weight dimension " +
                            std::to_string(model.weights.size()) +
                            " does not match covariate dimension " +
                            std::to_string(x.size()));
  return sigmoid(x * model.weights);
}

Eigen::VectorXd score_rows(const Eigen::VectorXd& weights, const Dataset& data) {
  if (weights.size() != data.dim())
    throw InvalidInputError("score_rows: weight/covariate dimension mismatch");
  Eigen::VectorXd margins = data.covariates() * weights;
  for (Eigen::Index i = 0; i < margins.size(); ++i) margins[i] = sigmoid(margins[i]);
  return margins;
}

double loss(const Eigen::VectorXd& w, const Dataset& data, double lambda) {
  if (data.n_rows() == 0) throw InvalidInputError("loss: dataset has no rows");
  if (!(lambda > 0.0)) throw InvalidInputError("loss: lambda must be > 0");
  if (w.size() != data.dim()) throw InvalidInputError("loss: dimension mismatch");
  const Eigen::Index m = data.n_rows();
  Eigen::VectorXd margins = data.covariates() * w;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double p = std::clamp(sigmoid(margins[i]), kLogClamp, 1.0 - kLogClamp);
    acc += data.treatments()[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  return -acc / static_cast<double>(m) + 0.5 * lambda * w.squaredNorm();
}

Eigen::VectorXd loss_gradient(const Eigen::VectorXd& w, const Dataset& data,
                              double lambda) {
  if (data.n_rows() == 0) throw InvalidInputError("loss_gradient: dataset has no rows");
  if (w.size() != data.dim()) throw InvalidInputError("loss_gradient: dimension mismatch");
  const Eigen::Index m = data.n_rows();
  Eigen::VectorXd residual = data.covariates() * w;
  for (Eigen::Index i = 0; i < m; ++i)
    residual[i] = sigmoid(residual[i]) - static_cast<double>(data.treatments()[i]);
  return data.covariates().transpose() * residual / static_cast<double>(m) + lambda * w;
}

PropensityModel train(const Dataset& data, double lambda, const TrainOptions& opts) {
  if (data.n_rows() == 0) throw InvalidInputError("train: dataset has no rows");
  if (!(lambda > 0.0)) throw InvalidInputError("train: lambda must be > 0");

  Eigen::VectorXd w = Eigen::VectorXd::Zero(data.dim());
  bool converged = false;
  for (long iter = 0; iter < opts.max_iters; ++iter) {
    Eigen::VectorXd grad = loss_gradient(w, data, lambda);
    if (!grad.allFinite())
      throw OptimizationError("train: non-finite gradient at iteration " +
                                  std::to_string(iter),
                              iter);
    if (grad.norm() <= opts.tol) {
      converged = true;
      break;
    }
    w -= opts.step_size * grad;
  }
  double final_loss = loss(w, data, lambda);
  if (!std::isfinite(final_loss))
    throw OptimizationError("train: non-finite loss after optimization", opts.max_iters);
  return PropensityModel{std::move(w), lambda, data.n_rows(), converged, final_loss};
}

Dataset append_intercept(const Dataset& data) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd x(data.n_rows(), data.dim() + 1);
  x.leftCols(data.dim()) = data.covariates() * s;
  x.col(data.dim()).setConstant(s);
  return Dataset(std::move(x), data.treatments(), data.outcomes());
}

double erm_sensitivity(Eigen::Index m, double lambda) {
  if (m < 1) throw InvalidInputError("erm_sensitivity: m must be >= 1");
  if (!(lambda > 0.0)) throw InvalidInputError("erm_sensitivity: lambda must be > 0");
  return 2.0 / (static_cast<double>(m) * lambda);
}

}  // namespace ppipw
