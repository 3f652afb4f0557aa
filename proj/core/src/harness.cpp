#include "ppipw/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ppipw/errors.hpp"
#include "ppipw/privacy.hpp"
#include "ppipw/serialize.hpp"

namespace ppipw {

namespace {

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

RngStream trial_stream(const ExperimentConfig& config, std::size_t cell_index,
                       long trial_index, std::string_view purpose) {
  std::uint64_t key = (static_cast<std::uint64_t>(cell_index) << 40) ^
                      static_cast<std::uint64_t>(trial_index);
  return RngStream(config.seed, derive_stream_id(key, purpose));
}

std::vector<std::pair<double, Eigen::Index>> cell_grid(const ExperimentConfig& config) {
  std::vector<std::pair<double, Eigen::Index>> cells;
  if (config.source == ExperimentSource::csv) {
    Eigen::Index m = 2 * config.protocol.fit_per_arm;
    for (double eps : config.epsilon_grid) cells.emplace_back(eps, m);
  } else {
    for (double eps : config.epsilon_grid)
      for (Eigen::Index m : config.m_grid) cells.emplace_back(eps, m);
  }
  return cells;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidInputError("ExperimentConfig: trials must be >= 1");
  if (epsilon_grid.empty()) throw InvalidInputError("ExperimentConfig: empty epsilon grid");
  for (double eps : epsilon_grid)
    if (!(eps > 0.0 && eps < 1.0))
      throw InvalidInputError("ExperimentConfig: all epsilon must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidInputError("ExperimentConfig: delta must lie in (0,1)");
  if (!(lambda > 0.0)) throw InvalidInputError("ExperimentConfig: lambda must be > 0");
  if (trim_xi && !(*trim_xi > 0.0 && *trim_xi < 1.0))
    throw InvalidInputError("ExperimentConfig: trim_xi must lie in (0,1)");
  if (source == ExperimentSource::synthetic) {
    if (m_grid.empty()) throw InvalidInputError("ExperimentConfig: empty m grid");
    for (Eigen::Index m : m_grid)
      if (m < 1) throw InvalidInputError("ExperimentConfig: m must be >= 1");
    if (n_estimate < 1) throw InvalidInputError("ExperimentConfig: n_estimate must be >= 1");
  } else if (csv_path.empty()) {
    throw InvalidInputError("ExperimentConfig: csv source needs a path");
  }
}

ExperimentContext prepare(const ExperimentConfig& config) {
  config.validate();
  ExperimentContext ctx{config, std::nullopt, std::nullopt};
  if (config.source == ExperimentSource::csv) {
    auto staged = load_csv(config.csv_path, config.schema);
    ctx.pool = normalize_unit_ball(staged).data;
  } else if (config.freeze_coefficients) {
    RngStream stream(config.seed, derive_stream_id(0, "synth-coefficients"));
    SynthConfig synth = config.synth;
    ctx.frozen_coefficients = draw_coefficients(synth, stream);
  }
  return ctx;
}

TrialRecord run_trial(const ExperimentContext& ctx, double epsilon, Eigen::Index m,
                      std::size_t cell_index, long trial_index) {
  const ExperimentConfig& config = ctx.config;
  TrialRecord record;
  record.trial_index = trial_index;
  record.epsilon = epsilon;
  record.m = m;

  std::string stage = "setup";
  try {
    PrivacyBudget budget(epsilon, config.delta);

    // Stage 1: obtain the fit and estimate sets.
    stage = "data";
    std::optional<Dataset> d_m, d_n;
    if (config.source == ExperimentSource::synthetic) {
      SynthConfig synth = config.synth;
      synth.n_units = m + config.n_estimate;
      auto coeff_stream = trial_stream(config, cell_index, trial_index, "coefficients");
      SynthCoefficients coeffs = ctx.frozen_coefficients
                                     ? *ctx.frozen_coefficients
                                     : draw_coefficients(synth, coeff_stream);
      auto gen_stream = trial_stream(config, cell_index, trial_index, "generate");
      auto synth_result = generate(synth, coeffs, gen_stream);
      auto split_stream = trial_stream(config, cell_index, trial_index, "split");
      auto split = split_dataset(synth_result.data, m, split_stream, config.stratified_split);
      d_m = std::move(split.fit);
      d_n = std::move(split.estimate);
    } else {
      auto resample_stream = trial_stream(config, cell_index, trial_index, "resample");
      auto [fit, estimate] = resample(*ctx.pool, config.protocol, resample_stream);
      d_m = std::move(fit);
      d_n = std::move(estimate);
    }

    // Stage 2: non-private propensity model.
    stage = "train";
    PropensityModel model = train(*d_m, config.lambda, config.train_opts);

    // Stage 3: weight perturbation.
    stage = "privatize_weights";
    auto weight_stream = trial_stream(config, cell_index, trial_index, "weight-noise");
    PrivateModel pm = privatize_weights(model, budget, weight_stream);

    // Stages 4-5: non-private and partially private estimates on D_n.
    stage = "estimate";
    Eigen::VectorXd base_scores = score_rows(model.weights, *d_n);
    EffectEstimate tau_hat_est =
        config.trim_xi ? ipw_ate_trimmed(*d_n, base_scores, *config.trim_xi)
                       : ipw_ate(*d_n, base_scores);
    EffectEstimate tau_n_est = partially_private_ate(*d_n, pm, config.trim_xi);
    record.tau_hat = tau_hat_est.value;
    record.tau_n = tau_n_est.value;

    // Stage 6: scalar mechanism under caller-asserted data bounds.
    stage = "privatize_scalar";
    OutcomeBounds bounds;
    bounds.c_y = d_n->outcomes().size() ? d_n->outcomes().cwiseAbs().maxCoeff() : 0.0;
    if (config.trim_xi) {
      bounds.omega_lo = *config.trim_xi;
      bounds.omega_hi = 1.0 - *config.trim_xi;
    } else {
      // Untrimmed diagnostic mode: bound by the observed noisy score range.
      Eigen::VectorXd noisy_scores = score_rows(pm.noisy_weights, *d_n);
      bounds.omega_lo = std::max(noisy_scores.minCoeff(), 1e-12);
      bounds.omega_hi = std::min(noisy_scores.maxCoeff(), 1.0 - 1e-12);
      if (!(bounds.omega_lo < bounds.omega_hi)) {
        bounds.omega_lo = std::min(bounds.omega_lo, 0.5 - 1e-12);
        bounds.omega_hi = std::max(bounds.omega_hi, 0.5 + 1e-12);
      }
    }
    auto scalar_stream = trial_stream(config, cell_index, trial_index, "scalar-noise");
    EffectEstimate tau_n_eps_est =
        fully_private_estimate(tau_n_est, bounds, budget, scalar_stream);
    record.tau_n_eps = tau_n_eps_est.value;

    // Stage 7: closed-form bounds for this configuration.
    stage = "theory";
    TheoryOptions topts;
    topts.convention = config.convention;
    if (config.trim_xi)
      topts.trim_xi = config.trim_xi;
    else
      topts.gamma = 0.05;
    record.theory = evaluate_theory(*d_n, model, budget, m, bounds, Estimand::ATE,
                                    record.tau_hat, record.tau_n, topts);

    record.tau_n_nonpos = record.tau_n <= 0.0;
    record.tau_n_eps_nonpos = record.tau_n_eps <= 0.0;
    record.joint_nonpos = record.tau_n_nonpos && record.tau_n_eps_nonpos;
  } catch (const std::exception& e) {
    record.error = stage + ": " + e.what();
  }
  return record;
}

CellAggregate aggregate_cell(double epsilon, Eigen::Index m,
                             const std::vector<TrialRecord>& records) {
  CellAggregate cell;
  cell.epsilon = epsilon;
  cell.m = m;

  std::vector<double> tau_hats, tau_ns, tau_n_epss;
  long flips_n = 0, flips_n_eps = 0, joint = 0;
  long cond_n_nonpos = 0, cond_joint = 0;
  double sum_g = 0.0, sum_sigma_n = 0.0, sum_thm1 = 0.0, sum_thm2 = 0.0;
  long theory_count = 0;

  for (const auto& record : records) {
    if (!record.error.empty()) {
      ++cell.trials_failed;
      continue;
    }
    ++cell.trials_ok;
    tau_hats.push_back(record.tau_hat);
    tau_ns.push_back(record.tau_n);
    tau_n_epss.push_back(record.tau_n_eps);
    if (sgn(record.tau_n) != sgn(record.tau_hat)) ++flips_n;
    if (sgn(record.tau_n_eps) != sgn(record.tau_hat)) ++flips_n_eps;
    if (record.joint_nonpos) ++joint;
    if (record.tau_hat > 0.0) {
      ++cell.n_tau_pos;
      if (record.tau_n_nonpos) ++cond_n_nonpos;
      if (record.joint_nonpos) ++cond_joint;
    }
    if (record.theory) {
      ++theory_count;
      sum_g += record.theory->g.g_value;
      sum_sigma_n += record.theory->sigma_n;
      sum_thm1 += record.theory->thm1_bound;
      sum_thm2 += record.theory->thm2_bound;
    }
  }

  auto mean_ci = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return {mean, 1.96 * sd / std::sqrt(static_cast<double>(v.size()))};
  };

  std::tie(cell.mean_tau_hat, cell.ci_tau_hat) = mean_ci(tau_hats);
  std::tie(cell.mean_tau_n, cell.ci_tau_n) = mean_ci(tau_ns);
  std::tie(cell.mean_tau_n_eps, cell.ci_tau_n_eps) = mean_ci(tau_n_epss);
  if (cell.trials_ok > 0) {
    double k = static_cast<double>(cell.trials_ok);
    cell.rho_n = static_cast<double>(flips_n) / k;
    cell.rho_n_eps = static_cast<double>(flips_n_eps) / k;
    cell.joint_flip = static_cast<double>(joint) / k;
  }
  if (theory_count > 0) {
    double k = static_cast<double>(theory_count);
    cell.mean_g = sum_g / k;
    cell.mean_sigma_n = sum_sigma_n / k;
    cell.mean_thm1 = sum_thm1 / k;
    cell.mean_thm2 = sum_thm2 / k;
  }
  if (cell.n_tau_pos > 0) {
    double k = static_cast<double>(cell.n_tau_pos);
    cell.cond_tau_n_nonpos = static_cast<double>(cond_n_nonpos) / k;
    cell.cond_joint_nonpos = static_cast<double>(cond_joint) / k;
  }
  long total = cell.trials_ok + cell.trials_failed;
  cell.degraded = total > 0 && 10 * cell.trials_failed > total;
  return cell;
}

SweepReport run_sweep(const ExperimentConfig& config) {
  auto ctx = prepare(config);
  SweepReport report;
  report.config = config;
  auto cells = cell_grid(config);
  for (std::size_t cell_index = 0; cell_index < cells.size(); ++cell_index) {
    auto [eps, m] = cells[cell_index];
    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(config.trials));
    for (long trial = 0; trial < config.trials; ++trial)
      records.push_back(run_trial(ctx, eps, m, cell_index, trial));
    report.cells.push_back(aggregate_cell(eps, m, records));
  }
  return report;
}

std::string emit(const SweepReport& report, EmitFormat format, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (format == EmitFormat::json) {
    std::string path = out_dir + "/sweep.json";
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << to_json(report).dump(2) << "\n";
    if (!out) throw ParseError("write failed for '" + path + "'");
    return path;
  }

  std::string path = out_dir + "/sweep.csv";
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "epsilon,m,metric,value\n";
  for (const auto& cell : report.cells) {
    auto row = [&](const char* metric, double value) {
      out << format_double(cell.epsilon) << "," << cell.m << "," << metric << ","
          << format_double(value) << "\n";
    };
    row("trials_ok", static_cast<double>(cell.trials_ok));
    row("trials_failed", static_cast<double>(cell.trials_failed));
    row("mean_tau_hat", cell.mean_tau_hat);
    row("ci_tau_hat", cell.ci_tau_hat);
    row("mean_tau_n", cell.mean_tau_n);
    row("ci_tau_n", cell.ci_tau_n);
    row("mean_tau_n_eps", cell.mean_tau_n_eps);
    row("ci_tau_n_eps", cell.ci_tau_n_eps);
    row("rho_n", cell.rho_n);
    row("rho_n_eps", cell.rho_n_eps);
    row("joint_flip", cell.joint_flip);
    row("mean_g", cell.mean_g);
    row("mean_sigma_n", cell.mean_sigma_n);
    row("mean_thm1", cell.mean_thm1);
    row("mean_thm2", cell.mean_thm2);
    row("n_tau_pos", static_cast<double>(cell.n_tau_pos));
    row("cond_tau_n_nonpos", cell.cond_tau_n_nonpos);
    row("cond_joint_nonpos", cell.cond_joint_nonpos);
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
  return path;
}

}  // namespace ppipw
