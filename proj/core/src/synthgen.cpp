#include "ppipw/synthgen.hpp"

#include <cmath>

#include "ppipw/errors.hpp"
#include "ppipw/propensity.hpp"

namespace ppipw {

namespace {
void check_config(const SynthConfig& config) {
  if (config.d < 1) throw InvalidInputError("SynthConfig: d must be >= 1");
  if (config.n_units < 2) throw InvalidInputError("SynthConfig: n_units must be >= 2");
  if (!(config.cov_scale > 0.0))
    throw InvalidInputError("SynthConfig: cov_scale must be > 0");
  if (!(config.noise_var >= 0.0))
    throw InvalidInputError("SynthConfig: noise_var must be >= 0");
}
}  // namespace

SynthCoefficients draw_coefficients(const SynthConfig& config, RngStream& stream) {
  check_config(config);
  return SynthCoefficients{stream.standard_normal_vector(config.d),
                           stream.standard_normal_vector(config.d)};
}

SynthResult generate(const SynthConfig& config, const SynthCoefficients& coeffs,
                     RngStream& stream) {
  check_config(config);
  if (coeffs.a.size() != config.d || coeffs.b.size() != config.d)
    throw InvalidInputError("generate: coefficient dimension does not match config.d");

  const double sd = std::sqrt(config.cov_scale);
  Eigen::MatrixXd x(config.n_units, config.d);
  for (Eigen::Index i = 0; i < config.n_units; ++i)
    x.row(i) = sd * stream.standard_normal_vector(config.d).transpose();

  double max_norm = x.rowwise().norm().maxCoeff();
  if (max_norm > 0.0) x /= max_norm;

  Eigen::VectorXi t(config.n_units);
  Eigen::VectorXd y(config.n_units);
  Eigen::VectorXd logits = x * coeffs.a;
  Eigen::VectorXd outcome_base = x * coeffs.b;
  const double noise_sd = std::sqrt(config.noise_var);
  for (Eigen::Index i = 0; i < config.n_units; ++i) {
    t[i] = stream.bernoulli(sigmoid(logits[i]));
    y[i] = outcome_base[i] + static_cast<double>(t[i]) * config.tau_true +
           noise_sd * stream.standard_normal();
  }
  return SynthResult{Dataset(std::move(x), std::move(t), std::move(y)), config.tau_true,
                     coeffs};
}

SynthResult generate(const SynthConfig& config, RngStream& stream) {
  auto coeffs = draw_coefficients(config, stream);
  return generate(config, coeffs, stream);
}

}  // namespace ppipw
