#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ppipw/dataset.hpp"
#include "ppipw/rng.hpp"

namespace ppipw {

struct CsvSchema {
  std::string treatment_column;
  std::string outcome_column;
  std::vector<std::string> covariate_columns;

  void validate() const;  // distinct names, at least one covariate
};

/// Parsed rows before unit-ball normalization; covariates still at their
/// original scale.
struct StagedTable {
  Eigen::MatrixXd covariates;
  Eigen::VectorXi treatments;
  Eigen::VectorXd outcomes;
};

/// Reads a comma-separated file with a header row (UTF-8, '.' decimal point).
/// Throws ParseError naming the offending row/column on a missing column,
/// non-binary treatment, non-numeric or non-finite cell, or an empty body.
StagedTable load_csv(const std::string& path, const CsvSchema& schema);

struct NormalizedDataset {
  Dataset data;
  double scale_factor;  // max row norm the covariates were divided by
};

/// Divides every covariate row by the maximum row norm, so the largest row
/// lands exactly on the unit sphere. All-zero covariates pass through with
/// factor 1.
NormalizedDataset normalize_unit_ball(const StagedTable& staged);

enum class ResampleKind { ihdp_balanced, lalonde_balanced };

/// Balanced per-arm resampling into a fit set and an estimate set.
/// ihdp_balanced draws both sets with replacement from the full pool;
/// lalonde_balanced first draws the estimate set without replacement, then
/// the fit set with replacement from the remaining units.
struct ResampleProtocol {
  ResampleKind kind = ResampleKind::ihdp_balanced;
  Eigen::Index fit_per_arm = 250;
  Eigen::Index estimate_per_arm = 100;
};

/// Throws InvalidInputError when an arm is empty or a without-replacement
/// draw exceeds the arm size.
std::pair<Dataset, Dataset> resample(const Dataset& data, const ResampleProtocol& protocol,
                                     RngStream& stream);

}  // namespace ppipw
