#include "ppipw/theory.hpp"

#include <cmath>
#include <functional>

#include "ppipw/errors.hpp"
#include "ppipw/privacy.hpp"

namespace ppipw {

namespace {

double weight_noise_sigma(const PrivacyBudget& budget, Eigen::Index m, double lambda) {
  return calibrate(erm_sensitivity(m, lambda), budget).sigma;
}

// Shared skeleton of the three bias variants; alpha(i, margin_i) supplies the
// estimand-specific constant.
BiasReport bias_from_alpha(const Dataset& d_n, const PropensityModel& model,
                           const PrivacyBudget& budget, Eigen::Index m,
                           SignConvention convention,
                           const std::function<double(Eigen::Index, double)>& alpha) {
  if (model.weights.size() != d_n.dim())
    throw InvalidInputError("bias_g: model/covariate dimension mismatch");
  const double sigma = weight_noise_sigma(budget, m, model.lambda);
  const Eigen::Index n = d_n.n_rows();
  Eigen::VectorXd margins = d_n.covariates() * model.weights;

  BiasReport report;
  report.sign_convention = convention;
  report.per_unit_terms.resize(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double exponent = 0.5 * sigma * sigma * d_n.covariates().row(i).squaredNorm();
    if (convention == SignConvention::main_text && d_n.treatments()[i] == 1)
      exponent = -exponent;
    double term = alpha(i, margins[i]) * std::expm1(exponent) / static_cast<double>(n);
    report.per_unit_terms[static_cast<std::size_t>(i)] = term;
    sum += term;
  }
  report.g_value = sum;
  return report;
}

}  // namespace

BiasReport bias_g(const Dataset& d_n, const PropensityModel& model,
                  const PrivacyBudget& budget, Eigen::Index m, SignConvention convention) {
  return bias_from_alpha(d_n, model, budget, m, convention,
                         [&](Eigen::Index i, double margin) {
                           double y = d_n.outcomes()[i];
                           return d_n.treatments()[i] == 1 ? y * std::exp(-margin)
                                                           : -y * std::exp(margin);
                         });
}

BiasReport bias_g_att(const Dataset& d_n, const PropensityModel& model,
                      const PrivacyBudget& budget, Eigen::Index m,
                      SignConvention convention) {
  return bias_from_alpha(d_n, model, budget, m, convention,
                         [&](Eigen::Index i, double margin) {
                           return d_n.treatments()[i] == 0
                                      ? -d_n.outcomes()[i] * std::exp(margin)
                                      : 0.0;
                         });
}

BiasReport bias_g_atc(const Dataset& d_n, const PropensityModel& model,
                      const PrivacyBudget& budget, Eigen::Index m,
                      SignConvention convention) {
  return bias_from_alpha(d_n, model, budget, m, convention,
                         [&](Eigen::Index i, double margin) {
                           return d_n.treatments()[i] == 1
                                      ? d_n.outcomes()[i] * std::exp(-margin)
                                      : 0.0;
                         });
}

double lemma1_expectation(double tau_hat, const BiasReport& g) {
  return tau_hat + g.g_value;
}

SupportBound eta_deterministic(const OutcomeBounds& bounds, double xi) {
  if (!(xi > 0.0 && xi < 1.0))
    throw InvalidInputError("eta_deterministic: xi must lie in (0,1)");
  return SupportBound{2.0 * bounds.c_y / xi, SupportBoundKind::deterministic_trim, 0.0,
                      std::nullopt};
}

SupportBound eta_probabilistic(const Dataset& d_n, const PropensityModel& model,
                               double sigma_m, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw InvalidInputError("eta_probabilistic: gamma must lie in (0,1)");
  if (model.weights.size() != d_n.dim())
    throw InvalidInputError("eta_probabilistic: model/covariate dimension mismatch");
  const double d = static_cast<double>(d_n.dim());
  const double zeta = sigma_m * std::sqrt(2.0 * d * std::log(2.0 / gamma));
  Eigen::VectorXd margins = d_n.covariates() * model.weights;
  double coeff_sum = 0.0;
  for (Eigen::Index i = 0; i < d_n.n_rows(); ++i) {
    double y = d_n.outcomes()[i];
    coeff_sum += d_n.treatments()[i] == 1 ? y * std::exp(-margins[i])
                                          : y * std::exp(margins[i]);
  }
  double eta =
      2.0 / static_cast<double>(d_n.n_rows()) * std::sinh(zeta) * coeff_sum;
  return SupportBound{eta, SupportBoundKind::probabilistic, gamma, zeta};
}

double sensitivity_tau(const OutcomeBounds& bounds, Eigen::Index n, Estimand estimand) {
  bounds.validate();
  if (n < 1) throw InvalidInputError("sensitivity_tau: n must be >= 1");
  double scale = 2.0 * bounds.c_y / static_cast<double>(n);
  if (estimand == Estimand::ATE)
    return scale * std::max(1.0 / bounds.omega_lo, 1.0 / (1.0 - bounds.omega_hi));
  return scale * std::max(1.0, bounds.xi_exp);
}

double thm1_bound(double tau_hat, double g, double eta) {
  if (!(tau_hat > 0.0))
    throw InvalidInputError("thm1_bound: requires tau_hat > 0");
  if (!(eta > 0.0)) throw InvalidInputError("thm1_bound: requires eta > 0");
  double s = (tau_hat + g) / eta;
  return std::min(1.0, std::exp(-2.0 * s * s));
}

double thm2_bound(double tau_hat, double g, double eta, double tau_n, double sigma_n) {
  if (!(sigma_n > 0.0)) throw InvalidInputError("thm2_bound: requires sigma_n > 0");
  double base = thm1_bound(tau_hat, g, eta);
  double factor = 0.5 * (1.0 + std::erf(std::abs(tau_n) / (sigma_n * std::sqrt(2.0))));
  return std::clamp(base * factor, 0.0, 1.0);
}

double flip_given_negative(double tau_n, double sigma_n) {
  if (!(sigma_n > 0.0))
    throw InvalidInputError("flip_given_negative: requires sigma_n > 0");
  return 0.5 * (1.0 + std::erf(std::abs(tau_n) / (sigma_n * std::sqrt(2.0))));
}

double markov_error_bound(double g, double delta_threshold) {
  if (!(delta_threshold > 0.0))
    throw InvalidInputError("markov_error_bound: threshold must be > 0");
  return std::min(1.0, std::abs(g) / delta_threshold);
}

TheoryReport evaluate_theory(const Dataset& d_n, const PropensityModel& model,
                             const PrivacyBudget& budget, Eigen::Index m,
                             const OutcomeBounds& bounds, Estimand estimand,
                             double tau_hat, double tau_n, const TheoryOptions& opts) {
  TheoryReport report;
  switch (estimand) {
    case Estimand::ATE:
      report.g = bias_g(d_n, model, budget, m, opts.convention);
      break;
    case Estimand::ATT:
      report.g = bias_g_att(d_n, model, budget, m, opts.convention);
      break;
    case Estimand::ATC:
      report.g = bias_g_atc(d_n, model, budget, m, opts.convention);
      break;
  }

  if (opts.trim_xi)
    report.eta = eta_deterministic(bounds, *opts.trim_xi);
  else if (opts.gamma)
    report.eta = eta_probabilistic(d_n, model, weight_noise_sigma(budget, m, model.lambda),
                                   *opts.gamma);
  else
    throw InvalidInputError("evaluate_theory: need trim_xi or gamma for a support bound");

  report.sensitivity_tau = sensitivity_tau(bounds, d_n.n_rows(), estimand);
  report.sigma_n = calibrate(report.sensitivity_tau, budget).sigma;

  if (tau_hat > 0.0 && report.eta.eta > 0.0) {
    double s = (tau_hat + report.g.g_value) / report.eta.eta;
    report.thm1_raw = std::exp(-2.0 * s * s);
    report.thm1_bound = std::min(1.0, report.thm1_raw);
    if (report.sigma_n > 0.0) {
      report.thm2_raw = report.thm1_raw * 0.5 *
                        (1.0 + std::erf(std::abs(tau_n) / (report.sigma_n * std::sqrt(2.0))));
      report.thm2_bound = std::clamp(report.thm2_raw, 0.0, 1.0);
    } else {
      // Zero scalar noise: the second stage cannot flip the sign on its own.
      report.thm2_raw = report.thm1_raw * (tau_n <= 0.0 ? 1.0 : 0.0);
      report.thm2_bound = std::min(1.0, report.thm2_raw);
    }
  }

  report.flip_given_negative =
      report.sigma_n > 0.0 ? flip_given_negative(tau_n, report.sigma_n)
                           : (tau_n == 0.0 ? 0.5 : 1.0);

  for (double threshold : opts.markov_thresholds)
    report.markov_bound.emplace_back(threshold,
                                     markov_error_bound(report.g.g_value, threshold));
  return report;
}

}  // namespace ppipw
