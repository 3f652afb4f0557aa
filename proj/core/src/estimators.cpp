#include "ppipw/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "ppipw/errors.hpp"
#include "ppipw/theory.hpp"

namespace ppipw {

namespace {

void check_scores(const Dataset& data, const Eigen::VectorXd& scores) {
  if (scores.size() != data.n_rows())
    throw InvalidInputError("ipw: score vector length does not match dataset rows");
}

EffectEstimate ate_from_scores(const Dataset& data, const Eigen::VectorXd& scores,
                               std::optional<double> trim_xi) {
  check_scores(data, scores);
  const Eigen::Index n = data.n_rows();
  if (n == 0) throw InvalidInputError("ipw: empty dataset");
  double mu1 = 0.0, mu0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double pi = scores[i];
    if (!trim_xi && (pi <= 0.0 || pi >= 1.0))
      throw PositivityError("ipw_ate: score at row " + std::to_string(i) +
                            " is outside (0,1); trim or drop the row");
    double denom1 = trim_xi ? std::max(*trim_xi, pi) : pi;
    double denom0 = trim_xi ? std::max(*trim_xi, 1.0 - pi) : 1.0 - pi;
    if (data.treatments()[i] == 1)
      mu1 += data.outcomes()[i] / denom1;
    else
      mu0 += data.outcomes()[i] / denom0;
  }
  mu1 /= static_cast<double>(n);
  mu0 /= static_cast<double>(n);
  EffectEstimate est;
  est.estimand = Estimand::ATE;
  est.value = mu1 - mu0;
  est.mu1 = mu1;
  est.mu0 = mu0;
  est.n_used = n;
  est.trim_xi = trim_xi;
  return est;
}

EffectEstimate att_atc_from_weights(const Dataset& data, const Eigen::VectorXd& weights,
                                    Estimand estimand, std::optional<double> xi_exp) {
  if (weights.size() != data.dim())
    throw InvalidInputError("ipw_att/atc: weight/covariate dimension mismatch");
  const Eigen::Index n = data.n_rows();
  if (n == 0) throw InvalidInputError("ipw_att/atc: empty dataset");
  Eigen::VectorXd margins = data.covariates() * weights;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double y = data.outcomes()[i];
    if (estimand == Estimand::ATT) {
      double odds = std::exp(margins[i]);
      if (xi_exp) odds = std::min(odds, *xi_exp);
      acc += (data.treatments()[i] == 1 ? y : -odds * y);
    } else {
      double inv_odds = std::exp(-margins[i]);
      if (xi_exp) inv_odds = std::min(inv_odds, *xi_exp);
      acc += (data.treatments()[i] == 1 ? inv_odds * y : -y);
    }
  }
  EffectEstimate est;
  est.estimand = estimand;
  est.value = acc / static_cast<double>(n);
  est.n_used = n;
  est.trim_xi = xi_exp;
  return est;
}

}  // namespace

EffectEstimate ipw_ate(const Dataset& data, const Eigen::VectorXd& scores) {
  return ate_from_scores(data, scores, std::nullopt);
}

EffectEstimate ipw_ate_trimmed(const Dataset& data, const Eigen::VectorXd& scores,
                               double xi) {
  if (!(xi > 0.0 && xi < 1.0))
    throw InvalidInputError("ipw_ate_trimmed: xi must lie in (0,1)");
  return ate_from_scores(data, scores, xi);
}

EffectEstimate ipw_att(const Dataset& data, const Eigen::VectorXd& weights,
                       std::optional<double> xi_exp) {
  return att_atc_from_weights(data, weights, Estimand::ATT, xi_exp);
}

EffectEstimate ipw_atc(const Dataset& data, const Eigen::VectorXd& weights,
                       std::optional<double> xi_exp) {
  return att_atc_from_weights(data, weights, Estimand::ATC, xi_exp);
}

EffectEstimate partially_private_ate(const Dataset& d_n, const PrivateModel& pm,
                                     std::optional<double> trim_xi) {
  auto est = ate_from_scores(d_n, score_rows(pm.noisy_weights, d_n), trim_xi);
  est.stage = PrivacyStage::dp_wrt_Dm;
  return est;
}

EffectEstimate partially_private_att(const Dataset& d_n, const PrivateModel& pm,
                                     std::optional<double> xi_exp) {
  auto est = att_atc_from_weights(d_n, pm.noisy_weights, Estimand::ATT, xi_exp);
  est.stage = PrivacyStage::dp_wrt_Dm;
  return est;
}

EffectEstimate partially_private_atc(const Dataset& d_n, const PrivateModel& pm,
                                     std::optional<double> xi_exp) {
  auto est = att_atc_from_weights(d_n, pm.noisy_weights, Estimand::ATC, xi_exp);
  est.stage = PrivacyStage::dp_wrt_Dm;
  return est;
}

EffectEstimate fully_private_estimate(const EffectEstimate& est, const OutcomeBounds& bounds,
                                      const PrivacyBudget& budget, RngStream& stream) {
  if (est.stage != PrivacyStage::dp_wrt_Dm)
    throw InvalidInputError(
        "fully_private_estimate: input must come from the partially private path");
  double sens = sensitivity_tau(bounds, est.n_used, est.estimand);
  auto [value, sigma] = privatize_scalar(est.value, sens, budget, stream);
  EffectEstimate out = est;
  out.value = value;
  out.mu1.reset();
  out.mu0.reset();
  out.sigma_n = sigma;
  out.stage = PrivacyStage::dp_wrt_all;
  return out;
}

}  // namespace ppipw
