#pragma once

#include <utility>

#include "ppipw/dataset.hpp"
#include "ppipw/propensity.hpp"
#include "ppipw/rng.hpp"

namespace ppipw {

/// Gaussian mechanism with sigma = sensitivity * sqrt(2 ln(1.25/delta)) / eps,
/// the minimal noise scale satisfying the (eps, delta)-DP condition.
struct GaussianMechanism {
  double sensitivity;
  PrivacyBudget budget;
  double sigma;
};

/// Propensity model with output-perturbed weights. The noise draw is retained
/// for test oracles and diagnostics only; the default export path withholds
/// both it and the base weights.
struct PrivateModel {
  PropensityModel base;
  Eigen::VectorXd noisy_weights;
  GaussianMechanism mechanism;
};

GaussianMechanism calibrate(double sensitivity, const PrivacyBudget& budget);

/// Adds z ~ N(0, sigma_m^2 I_d) to the trained weights, with sigma_m
/// calibrated from the ERM sensitivity 2/(m lambda).
PrivateModel privatize_weights(const PropensityModel& model, const PrivacyBudget& budget,
                               RngStream& stream);

/// Scalar Gaussian mechanism; returns (privatized value, sigma used).
std::pair<double, double> privatize_scalar(double value, double sensitivity,
                                           const PrivacyBudget& budget, RngStream& stream);

}  // namespace ppipw
