#include "ppipw/dataset.hpp"

#include <algorithm>
#include <utility>

#include "ppipw/errors.hpp"

namespace ppipw {

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXi treatments,
                 Eigen::VectorXd outcomes)
    : covariates_(std::move(covariates)),
      treatments_(std::move(treatments)),
      outcomes_(std::move(outcomes)) {
  const Eigen::Index n = covariates_.rows();
  if (treatments_.size() != n || outcomes_.size() != n)
    throw InvalidInputError("Dataset: row counts of covariates (" +
                            std::to_string(n) + "), treatments (" +
                            std::to_string(treatments_.size()) + ") and outcomes (" +
                            std::to_string(outcomes_.size()) + ") differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (treatments_[i] != 0 && treatments_[i] != 1)
      throw InvalidInputError("Dataset: treatment at row " + std::to_string(i) +
                              " is " + std::to_string(treatments_[i]) +
                              ", expected 0 or 1");
    double norm = covariates_.row(i).norm();
    if (norm > 1.0 + kUnitBallTol)
      throw InvalidInputError("Dataset: covariate row " + std::to_string(i) +
                              " has L2 norm " + std::to_string(norm) +
                              " outside the unit ball");
  }
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), dim());
  Eigen::VectorXi t(static_cast<Eigen::Index>(indices.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto i = static_cast<Eigen::Index>(indices[k]);
    if (i >= n_rows()) throw InvalidInputError("Dataset::select: index out of range");
    x.row(static_cast<Eigen::Index>(k)) = covariates_.row(i);
    t[static_cast<Eigen::Index>(k)] = treatments_[i];
    y[static_cast<Eigen::Index>(k)] = outcomes_[i];
  }
  return Dataset(std::move(x), std::move(t), std::move(y));
}

PrivacyBudget::PrivacyBudget(double epsilon, double delta)
    : epsilon_(epsilon), delta_(delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw BudgetError("PrivacyBudget: epsilon must lie strictly in (0,1), got " +
                      std::to_string(epsilon));
  if (!(delta > 0.0 && delta < 1.0))
    throw BudgetError("PrivacyBudget: delta must lie strictly in (0,1), got " +
                      std::to_string(delta));
}

void OutcomeBounds::validate() const {
  if (!(c_y >= 0.0)) throw InvalidInputError("OutcomeBounds: c_y must be >= 0");
  if (!(omega_lo > 0.0 && omega_lo < 1.0) || !(omega_hi > 0.0 && omega_hi < 1.0))
    throw InvalidInputError("OutcomeBounds: omega bounds must lie in (0,1)");
  if (!(omega_lo < omega_hi))
    throw InvalidInputError("OutcomeBounds: omega_lo must be < omega_hi");
  if (!(xi_exp >= 1.0)) throw InvalidInputError("OutcomeBounds: xi_exp must be >= 1");
}

SplitResult split_dataset(const Dataset& data, Eigen::Index m, RngStream& stream,
                          bool stratify) {
  const Eigen::Index total = data.n_rows();
  if (m < 1 || m >= total)
    throw InvalidInputError("split_dataset: m must satisfy 1 <= m < n_rows, got m=" +
                            std::to_string(m) + " with n_rows=" + std::to_string(total));

  Split split;
  if (!stratify) {
    auto perm = stream.permutation(static_cast<std::size_t>(total));
    split.fit_indices.assign(perm.begin(), perm.begin() + m);
    split.estimate_indices.assign(perm.begin() + m, perm.end());
  } else {
    // Proportional allocation of m across the two arms, remainder to the
    // larger fractional part.
    std::vector<std::size_t> treated, control;
    for (Eigen::Index i = 0; i < total; ++i)
      (data.treatments()[i] == 1 ? treated : control).push_back(static_cast<std::size_t>(i));
    double frac = static_cast<double>(m) * static_cast<double>(treated.size()) /
                  static_cast<double>(total);
    auto m1 = static_cast<std::size_t>(frac + 0.5);
    m1 = std::min(m1, treated.size());
    std::size_t m0 = static_cast<std::size_t>(m) - m1;
    if (m0 > control.size()) {
      m1 += m0 - control.size();
      m0 = control.size();
    }
    for (auto [arm, take] : {std::pair{&treated, m1}, std::pair{&control, m0}}) {
      auto perm = stream.permutation(arm->size());
      for (std::size_t k = 0; k < arm->size(); ++k) {
        auto idx = (*arm)[perm[k]];
        (k < take ? split.fit_indices : split.estimate_indices).push_back(idx);
      }
    }
  }
  return SplitResult{data.select(split.fit_indices), data.select(split.estimate_indices),
                     std::move(split)};
}

UnitBallCheck validate_unit_ball(const Dataset& data) {
  UnitBallCheck check{true, -1, 0.0};
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    double norm = data.covariates().row(i).norm();
    if (norm > check.worst_norm) {
      check.worst_norm = norm;
      check.worst_row = i;
    }
  }
  check.pass = !(check.worst_norm > 1.0 + kUnitBallTol);
  return check;
}

}  // namespace ppipw
