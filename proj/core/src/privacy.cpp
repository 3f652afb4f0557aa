#include "ppipw/privacy.hpp"

#include <cmath>

#include "ppipw/errors.hpp"

namespace ppipw {

GaussianMechanism calibrate(double sensitivity, const PrivacyBudget& budget) {
  if (!(sensitivity >= 0.0))
    throw InvalidInputError("calibrate: sensitivity must be >= 0");
  double sigma =
      sensitivity * std::sqrt(2.0 * std::log(1.25 / budget.delta())) / budget.epsilon();
  return GaussianMechanism{sensitivity, budget, sigma};
}

PrivateModel privatize_weights(const PropensityModel& model, const PrivacyBudget& budget,
                               RngStream& stream) {
  auto mech = calibrate(erm_sensitivity(model.m_train, model.lambda), budget);
  Eigen::VectorXd noisy = model.weights;
  if (mech.sigma > 0.0)
    noisy += mech.sigma * stream.standard_normal_vector(model.weights.size());
  return PrivateModel{model, std::move(noisy), mech};
}

std::pair<double, double> privatize_scalar(double value, double sensitivity,
                                           const PrivacyBudget& budget,
                                           RngStream& stream) {
  auto mech = calibrate(sensitivity, budget);
  double noisy = value;
  if (mech.sigma > 0.0) noisy += mech.sigma * stream.standard_normal();
  return {noisy, mech.sigma};
}

}  // namespace ppipw
