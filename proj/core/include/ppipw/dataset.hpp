#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ppipw/rng.hpp"

namespace ppipw {

/// Tolerance absorbed by the unit-ball check (ingest normalization rounding).
inline constexpr double kUnitBallTol = 1e-12;

/// Observational dataset: covariate rows in the L2 unit ball, binary
/// treatments, real outcomes. Immutable after construction.
class Dataset {
 public:
  /// Throws InvalidInputError on row-count mismatch, non-binary treatment, or
  /// any covariate row with norm > 1 + 1e-12.
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXi treatments,
          Eigen::VectorXd outcomes);

  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXi& treatments() const { return treatments_; }
  const Eigen::VectorXd& outcomes() const { return outcomes_; }

  Eigen::Index n_rows() const { return covariates_.rows(); }
  Eigen::Index dim() const { return covariates_.cols(); }

  /// Row subset in the given index order.
  Dataset select(const std::vector<std::size_t>& indices) const;

 private:
  Eigen::MatrixXd covariates_;
  Eigen::VectorXi treatments_;
  Eigen::VectorXd outcomes_;
};

/// (epsilon, delta) pair; both strictly inside (0,1) or construction throws
/// BudgetError.
class PrivacyBudget {
 public:
  PrivacyBudget(double epsilon, double delta);
  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

 private:
  double epsilon_;
  double delta_;
};

/// Index bookkeeping for a fit/estimate split of one dataset.
struct Split {
  std::vector<std::size_t> fit_indices;
  std::vector<std::size_t> estimate_indices;
};

/// Constants bounding the data, asserted by the caller: |y_i| <= c_y,
/// propensity scores inside (omega_lo, omega_hi), and exp(±w'x) <= xi_exp
/// for the ATT/ATC sensitivities.
struct OutcomeBounds {
  double c_y;
  double omega_lo;
  double omega_hi;
  double xi_exp = 1.0;

  /// Throws InvalidInputError when the constants are inconsistent.
  void validate() const;
};

struct SplitResult {
  Dataset fit;
  Dataset estimate;
  Split split;
};

/// Uniform random split into m fit rows and n_rows - m estimate rows.
/// Samples a random permutation and takes a prefix; deterministic per stream.
/// With stratify set, each arm contributes proportionally to the fit set.
SplitResult split_dataset(const Dataset& data, Eigen::Index m, RngStream& stream,
                          bool stratify = false);

struct UnitBallCheck {
  bool pass;
  Eigen::Index worst_row;  // -1 when the dataset is empty
  double worst_norm;
};

/// Diagnostic re-check of the construction invariant.
UnitBallCheck validate_unit_ball(const Dataset& data);

}  // namespace ppipw
