#pragma once

#include <optional>
#include <vector>

#include "ppipw/dataset.hpp"
#include "ppipw/estimators.hpp"
#include "ppipw/propensity.hpp"

namespace ppipw {

/// The weight-noise variance enters the closed-form bias through the Gaussian
/// moment generating function, which is symmetric in the noise sign. The main
/// display of the bias carries an extra treatment-dependent sign inside the
/// exponential; the appendix derivation does not. appendix_proof is the
/// default (it is what the MGF forces); main_text reproduces the printed
/// formula literally.
enum class SignConvention { appendix_proof, main_text };

struct BiasReport {
  double g_value = 0.0;
  std::vector<double> per_unit_terms;  // alpha_i (beta_i - 1) / n
  SignConvention sign_convention = SignConvention::appendix_proof;
};

enum class SupportBoundKind { deterministic_trim, probabilistic };

struct SupportBound {
  double eta = 0.0;
  SupportBoundKind kind = SupportBoundKind::deterministic_trim;
  double gamma = 0.0;  // failure probability; 0 for the deterministic bound
  std::optional<double> zeta;
};

struct TheoryReport {
  BiasReport g;
  SupportBound eta;
  double sensitivity_tau = 0.0;
  double sigma_n = 0.0;
  double thm1_bound = 1.0;
  double thm2_bound = 1.0;
  double thm1_raw = 1.0;  // before clamping to [0,1]
  double thm2_raw = 1.0;
  double flip_given_negative = 0.5;
  std::vector<std::pair<double, double>> markov_bound;  // (threshold, bound)
};

/// Expected offset of the partially private ATE from the non-private one,
/// as a sum of per-unit terms alpha_i (beta_i - 1) / n with
///   alpha_i = (-1)^(1-t_i) y_i exp((-1)^(t_i) w'x_i),
///   beta_i  = exp(sigma_m^2 ||x_i||^2 / 2)   (appendix_proof),
/// where sigma_m = 2 sqrt(2 ln(1.25/delta)) / (eps m lambda).
BiasReport bias_g(const Dataset& d_n, const PropensityModel& model,
                  const PrivacyBudget& budget, Eigen::Index m,
                  SignConvention convention = SignConvention::appendix_proof);

/// ATT variant: alpha_i = -1{t_i=0} y_i exp(w'x_i).
BiasReport bias_g_att(const Dataset& d_n, const PropensityModel& model,
                      const PrivacyBudget& budget, Eigen::Index m,
                      SignConvention convention = SignConvention::appendix_proof);

/// ATC variant: alpha_i = 1{t_i=1} y_i exp(-w'x_i).
BiasReport bias_g_atc(const Dataset& d_n, const PropensityModel& model,
                      const PrivacyBudget& budget, Eigen::Index m,
                      SignConvention convention = SignConvention::appendix_proof);

/// E[tau_n] = tau_hat + g.
double lemma1_expectation(double tau_hat, const BiasReport& g);

/// Support bound 2 c_y / xi from trimming at xi.
SupportBound eta_deterministic(const OutcomeBounds& bounds, double xi);

/// Untrimmed support bound holding with probability 1 - gamma: inverts the
/// sub-Gaussian tail of the summed noise coordinates to
/// zeta = sigma_m sqrt(2 d ln(2/gamma)), then
/// eta = (2/n) sinh(zeta) (sum over treated y_i exp(-w'x_i)
///                         + sum over controls y_i exp(w'x_i)).
SupportBound eta_probabilistic(const Dataset& d_n, const PropensityModel& model,
                               double sigma_m, double gamma);

/// L2-sensitivity upper bound of the partially private estimate:
///   ATE:      (2 c_y / n) max{1/omega_lo, 1/(1 - omega_hi)}
///   ATT/ATC:  (2 c_y / n) max{1, xi_exp}
double sensitivity_tau(const OutcomeBounds& bounds, Eigen::Index n, Estimand estimand);

/// P(tau_n <= 0 | tau_hat > 0) <= exp(-2 (tau_hat + g)^2 / eta^2).
/// Requires tau_hat > 0 and eta > 0; result clamped to [0,1].
double thm1_bound(double tau_hat, double g, double eta);

/// Joint bound: (1/2) exp(-2 (tau_hat + g)^2 / eta^2)
///              [1 + erf(|tau_n| / (sigma_n sqrt(2)))].
double thm2_bound(double tau_hat, double g, double eta, double tau_n, double sigma_n);

/// P(tau_n_eps <= 0 | tau_n <= 0) = Phi(|tau_n| / sigma_n), exact under the
/// conditional Gaussian argument.
double flip_given_negative(double tau_n, double sigma_n);

/// Markov bound P(|tau_n - tau_hat| >= threshold) <= min(1, |g| / threshold).
double markov_error_bound(double g, double delta_threshold);

struct TheoryOptions {
  SignConvention convention = SignConvention::appendix_proof;
  std::optional<double> trim_xi;          // deterministic support bound
  std::optional<double> gamma;            // probabilistic support bound
  std::vector<double> markov_thresholds = {0.01, 0.05, 0.1, 0.5, 1.0};
};

/// Assembles the full report for one configuration. tau_n and sigma_n come
/// from the estimate being analyzed; thm1/thm2 are only meaningful when
/// tau_hat > 0 and are reported as 1 (vacuous) otherwise.
TheoryReport evaluate_theory(const Dataset& d_n, const PropensityModel& model,
                             const PrivacyBudget& budget, Eigen::Index m,
                             const OutcomeBounds& bounds, Estimand estimand,
                             double tau_hat, double tau_n, const TheoryOptions& opts = {});

}  // namespace ppipw
