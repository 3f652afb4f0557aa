#pragma once

#include <Eigen/Dense>

#include "ppipw/dataset.hpp"

namespace ppipw {

/// L2-regularized logistic regression for propensity scores.
struct PropensityModel {
  Eigen::VectorXd weights;
  double lambda = 0.1;
  Eigen::Index m_train = 0;
  bool converged = false;
  double final_loss = 0.0;
};

struct TrainOptions {
  // Step 1.0 is valid for the full-batch objective: under ||x|| <= 1 the
  // Hessian spectral norm is at most 1/4 + lambda.
  double step_size = 1.0;
  double tol = 1e-8;  // on the gradient L2 norm
  long max_iters = 100000;
};

/// Numerically stable logistic function.
double sigmoid(double t);

/// pi_w(x) = 1 / (1 + exp(-w'x)). Throws on dimension mismatch.
double sigmoid_score(const PropensityModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Scores for every row of the dataset under an arbitrary weight vector.
Eigen::VectorXd score_rows(const Eigen::VectorXd& weights, const Dataset& data);

/// Regularized cross-entropy loss:
///   -(1/m) sum_i [t_i log p_i + (1-t_i) log(1-p_i)] + (lambda/2) ||w||^2
/// with p_i clamped to [1e-15, 1-1e-15] inside the log only.
double loss(const Eigen::VectorXd& w, const Dataset& data, double lambda);

/// Analytic gradient (1/m) X'(p - t) + lambda w.
Eigen::VectorXd loss_gradient(const Eigen::VectorXd& w, const Dataset& data, double lambda);

/// Full-batch gradient descent from w = 0 until ||grad|| <= tol or max_iters.
/// Deterministic. Throws OptimizationError if the loss becomes non-finite.
PropensityModel train(const Dataset& data, double lambda, const TrainOptions& opts = {});

/// Maps x -> [x, 1] / sqrt(2) so an intercept coordinate fits inside the unit
/// ball. Train on the transformed data and score transformed rows.
Dataset append_intercept(const Dataset& data);

/// Upper bound 2 / (m lambda) on the L2-sensitivity of the regularized
/// logistic ERM minimizer; used directly for noise calibration.
double erm_sensitivity(Eigen::Index m, double lambda);

}  // namespace ppipw
