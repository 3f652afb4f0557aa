#pragma once

#include <optional>

#include "ppipw/dataset.hpp"
#include "ppipw/privacy.hpp"
#include "ppipw/propensity.hpp"

namespace ppipw {

enum class Estimand { ATE, ATT, ATC };
enum class PrivacyStage { non_private, dp_wrt_Dm, dp_wrt_all };

struct EffectEstimate {
  Estimand estimand = Estimand::ATE;
  PrivacyStage stage = PrivacyStage::non_private;
  double value = 0.0;
  std::optional<double> mu1;   // ATE only
  std::optional<double> mu0;   // ATE only
  Eigen::Index n_used = 0;
  std::optional<double> trim_xi;
  std::optional<double> sigma_n;  // set once stage is dp_wrt_all
};

/// Untrimmed IPW ATE:
///   mu1 = (1/n) sum y_i t_i / pi_i,  mu0 = (1/n) sum y_i (1-t_i) / (1-pi_i).
/// Throws PositivityError if any score is exactly 0 or 1.
EffectEstimate ipw_ate(const Dataset& data, const Eigen::VectorXd& scores);

/// Trimmed IPW ATE: denominators floored at xi (0 < xi < 1).
EffectEstimate ipw_ate_trimmed(const Dataset& data, const Eigen::VectorXd& scores,
                               double xi);

/// ATT via the logistic-specific odds form:
///   (1/n) sum (t_i - (1-t_i) exp(w'x_i)) y_i,
/// with exp(w'x_i) capped at xi_exp when a cap is given.
EffectEstimate ipw_att(const Dataset& data, const Eigen::VectorXd& weights,
                       std::optional<double> xi_exp = std::nullopt);

/// ATC mirror: (1/n) sum (t_i exp(-w'x_i) - (1-t_i)) y_i.
EffectEstimate ipw_atc(const Dataset& data, const Eigen::VectorXd& weights,
                       std::optional<double> xi_exp = std::nullopt);

/// ATE through the noisy propensity scores; DP w.r.t. the fit split only.
/// Trimming (when given) removes the positivity failure mode.
EffectEstimate partially_private_ate(const Dataset& d_n, const PrivateModel& pm,
                                     std::optional<double> trim_xi = std::nullopt);

EffectEstimate partially_private_att(const Dataset& d_n, const PrivateModel& pm,
                                     std::optional<double> xi_exp = std::nullopt);

EffectEstimate partially_private_atc(const Dataset& d_n, const PrivateModel& pm,
                                     std::optional<double> xi_exp = std::nullopt);

/// Scalar Gaussian mechanism on a partially private estimate; sensitivity
/// comes from the estimand-specific bound in the theory module. Records the
/// sigma actually used and promotes the stage to dp_wrt_all.
EffectEstimate fully_private_estimate(const EffectEstimate& est, const OutcomeBounds& bounds,
                                      const PrivacyBudget& budget, RngStream& stream);

}  // namespace ppipw
