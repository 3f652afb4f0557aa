#pragma once

#include "ppipw/dataset.hpp"
#include "ppipw/rng.hpp"

namespace ppipw {

/// Synthetic benchmark generator: Gaussian covariates rescaled by the maximum
/// row norm, logistic treatment assignment, linear outcome with an additive
/// treatment effect.
struct SynthConfig {
  Eigen::Index d = 50;
  Eigen::Index n_units = 2000;
  double tau_true = 2.0;
  double cov_scale = 9.0;    // covariate variance before rescaling
  double noise_var = 0.01;   // outcome noise variance
};

/// Treatment/outcome coefficients; redrawn per trial by default, or drawn
/// once and reused when the experiment config freezes them.
struct SynthCoefficients {
  Eigen::VectorXd a;  // treatment logits
  Eigen::VectorXd b;  // outcome
};

SynthCoefficients draw_coefficients(const SynthConfig& config, RngStream& stream);

struct SynthResult {
  Dataset data;
  double ground_truth;
  SynthCoefficients coefficients;
};

/// x_i ~ N(0, cov_scale I_d), all rows divided by the max row norm;
/// t_i ~ Bernoulli(sigmoid(a'x_i)); y_i = b'x_i + t_i tau + N(0, noise_var).
SynthResult generate(const SynthConfig& config, const SynthCoefficients& coeffs,
                     RngStream& stream);

/// Convenience: draws fresh coefficients from the same stream first.
SynthResult generate(const SynthConfig& config, RngStream& stream);

}  // namespace ppipw
