#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppipw/dataset.hpp"
#include "ppipw/estimators.hpp"
#include "ppipw/ingest.hpp"
#include "ppipw/propensity.hpp"
#include "ppipw/synthgen.hpp"
#include "ppipw/theory.hpp"

namespace ppipw {

enum class ExperimentSource { synthetic, csv };

/// Full sweep description. The whole report is a pure function of this
/// struct; every stochastic step draws from a stream derived from (seed,
/// cell, trial, purpose).
struct ExperimentConfig {
  ExperimentSource source = ExperimentSource::synthetic;

  // synthetic source
  SynthConfig synth;  // d, cov_scale, noise_var, tau_true; n_units is derived
  bool freeze_coefficients = false;

  // csv source
  std::string csv_path;
  CsvSchema schema;
  ResampleProtocol protocol;
  bool stratified_split = false;

  long trials = 100;
  std::vector<double> epsilon_grid = {0.2, 0.4, 0.6, 0.8, 0.99};
  std::vector<Eigen::Index> m_grid = {500, 1000, 1500, 2000, 2500};
  Eigen::Index n_estimate = 1000;
  double delta = 1e-6;
  double lambda = 0.1;
  std::optional<double> trim_xi = 0.05;
  TrainOptions train_opts;
  SignConvention convention = SignConvention::appendix_proof;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrialRecord {
  long trial_index = 0;
  double epsilon = 0.0;
  Eigen::Index m = 0;
  double tau_hat = 0.0;
  double tau_n = 0.0;
  double tau_n_eps = 0.0;
  bool tau_n_nonpos = false;
  bool tau_n_eps_nonpos = false;
  bool joint_nonpos = false;
  std::optional<TheoryReport> theory;
  std::string error;  // "<stage>: <what>" when the trial failed
};

struct CellAggregate {
  double epsilon = 0.0;
  Eigen::Index m = 0;
  long trials_ok = 0;
  long trials_failed = 0;
  bool degraded = false;  // more than 10% of trials failed

  double mean_tau_hat = 0.0, ci_tau_hat = 0.0;
  double mean_tau_n = 0.0, ci_tau_n = 0.0;
  double mean_tau_n_eps = 0.0, ci_tau_n_eps = 0.0;

  // Unconditional sign-flip frequencies against tau_hat.
  double rho_n = 0.0;
  double rho_n_eps = 0.0;
  double joint_flip = 0.0;

  double mean_g = 0.0;
  double mean_sigma_n = 0.0;
  double mean_thm1 = 0.0;
  double mean_thm2 = 0.0;

  // Frequencies over the tau_hat > 0 subset (the theorems' conditioning).
  long n_tau_pos = 0;
  double cond_tau_n_nonpos = 0.0;
  double cond_joint_nonpos = 0.0;
};

struct SweepReport {
  ExperimentConfig config;
  std::vector<CellAggregate> cells;
};

/// Preloaded state shared by all trials (CSV pool, frozen coefficients).
struct ExperimentContext {
  ExperimentConfig config;
  std::optional<Dataset> pool;
  std::optional<SynthCoefficients> frozen_coefficients;
};

ExperimentContext prepare(const ExperimentConfig& config);

/// One end-to-end pass: data -> split -> train -> weight noise -> partially
/// private estimate -> scalar noise, plus the theory report. Deterministic
/// per (config.seed, cell_index, trial_index). Stage failures are captured
/// in the record, not thrown.
TrialRecord run_trial(const ExperimentContext& ctx, double epsilon, Eigen::Index m,
                      std::size_t cell_index, long trial_index);

/// Runs every (epsilon, m) cell for config.trials trials and aggregates in
/// trial-index order.
SweepReport run_sweep(const ExperimentConfig& config);

/// Aggregation fold, exposed so callers holding raw records can re-aggregate.
CellAggregate aggregate_cell(double epsilon, Eigen::Index m,
                             const std::vector<TrialRecord>& records);

enum class EmitFormat { csv, json };

/// Writes <out_dir>/sweep.csv (one tidy row per cell and metric, 17
/// significant digits, C locale) or <out_dir>/sweep.json (full structure).
/// Returns the path written.
std::string emit(const SweepReport& report, EmitFormat format, const std::string& out_dir);

}  // namespace ppipw
