// dp-ipw: command-line front end for the privacy-preserving IPW pipeline.
//
//   dp-ipw synth       generate a synthetic dataset CSV + ground-truth sidecar
//   dp-ipw fit         train the logistic propensity model
//   dp-ipw privatize   output-perturb a trained model
//   dp-ipw estimate    IPW effect estimate (ATE/ATT/ATC) as JSON
//   dp-ipw bound       closed-form bias/sensitivity/probability bounds as JSON
//   dp-ipw experiment  Monte-Carlo sweep driver, emits CSV + JSON reports

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ppipw/errors.hpp"
#include "ppipw/estimators.hpp"
#include "ppipw/harness.hpp"
#include "ppipw/ingest.hpp"
#include "ppipw/privacy.hpp"
#include "ppipw/propensity.hpp"
#include "ppipw/serialize.hpp"
#include "ppipw/synthgen.hpp"
#include "ppipw/theory.hpp"

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ppipw::ParseError("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ppipw::ParseError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

ppipw::Dataset load_dataset(const std::string& path, const std::string& schema_path,
                            bool normalize) {
  if (schema_path.empty() && !normalize) return ppipw::read_dataset_csv(path);
  ppipw::CsvSchema schema;
  if (schema_path.empty()) {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    Eigen::Index d = -1;
    for (char c : header)
      if (c == ',') ++d;
    schema = ppipw::default_schema(d);
  } else {
    json s = read_json_file(schema_path);
    schema.treatment_column = s.at("treatment_column");
    schema.outcome_column = s.at("outcome_column");
    schema.covariate_columns = s.at("covariate_columns").get<std::vector<std::string>>();
  }
  auto staged = ppipw::load_csv(path, schema);
  if (normalize) {
    auto normalized = ppipw::normalize_unit_ball(staged);
    std::cerr << "normalized covariates by max row norm "
              << ppipw::format_double(normalized.scale_factor) << "\n";
    return normalized.data;
  }
  return ppipw::Dataset(std::move(staged.covariates), std::move(staged.treatments),
                        std::move(staged.outcomes));
}

// Loads either a plain or a privatized model file; scoring uses the noisy
// weights when present.
struct LoadedModel {
  ppipw::PropensityModel model;
  bool is_private = false;
};

LoadedModel load_model(const std::string& path) {
  json j = read_json_file(path);
  if (j.contains("noisy_weights")) {
    auto pm = ppipw::private_model_from_json(j);
    ppipw::PropensityModel scored = pm.base;
    scored.weights = pm.noisy_weights;
    return {std::move(scored), true};
  }
  return {ppipw::propensity_model_from_json(j), false};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving inverse-probability-weighted treatment effects"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  ppipw::SynthConfig synth;
  std::uint64_t seed = 1;
  std::string out_path = "synth.csv";
  synth_cmd->add_option("--n", synth.n_units, "Number of units");
  synth_cmd->add_option("--d", synth.d, "Covariate dimension");
  synth_cmd->add_option("--tau", synth.tau_true, "True treatment effect");
  synth_cmd->add_option("--cov-scale", synth.cov_scale, "Covariate variance");
  synth_cmd->add_option("--noise-var", synth.noise_var, "Outcome noise variance");
  synth_cmd->add_option("--seed", seed, "Master seed");
  synth_cmd->add_option("--out", out_path, "Output CSV path");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Train the logistic propensity model");
  std::string data_path, schema_path, model_out = "model.json";
  double lambda = 0.1;
  bool normalize = false, intercept = false;
  ppipw::TrainOptions train_opts;
  fit_cmd->add_option("--data", data_path, "Dataset CSV")->required();
  fit_cmd->add_option("--schema", schema_path, "Schema JSON (column names)");
  fit_cmd->add_flag("--normalize", normalize, "Rescale covariates to the unit ball");
  fit_cmd->add_flag("--intercept", intercept, "Append an intercept coordinate");
  fit_cmd->add_option("--lambda", lambda, "L2 regularization constant");
  fit_cmd->add_option("--lr", train_opts.step_size, "Gradient step size");
  fit_cmd->add_option("--tol", train_opts.tol, "Gradient-norm stopping tolerance");
  fit_cmd->add_option("--max-iters", train_opts.max_iters, "Iteration cap");
  fit_cmd->add_option("--out", model_out, "Model JSON output path");

  // privatize
  auto* priv_cmd = app.add_subcommand("privatize", "Output-perturb a trained model");
  std::string model_path, priv_out = "private_model.json";
  double epsilon = 0.5, delta = 1e-6;
  bool diagnostics = false;
  priv_cmd->add_option("--model", model_path, "Trained model JSON")->required();
  priv_cmd->add_option("--epsilon", epsilon, "Privacy loss, in (0,1)");
  priv_cmd->add_option("--delta", delta, "Failure probability, in (0,1)");
  priv_cmd->add_option("--seed", seed, "Master seed");
  priv_cmd->add_flag("--diagnostics", diagnostics,
                     "Embed the base weights in the output (breaks privacy)");
  priv_cmd->add_option("--out", priv_out, "Privatized model output path");

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "IPW effect estimate as JSON");
  std::string estimand = "ate", est_out;
  std::optional<double> trim_xi;
  est_cmd->add_option("--data", data_path, "Dataset CSV")->required();
  est_cmd->add_option("--model", model_path, "Model JSON (plain or privatized)")->required();
  est_cmd->add_option("--schema", schema_path, "Schema JSON");
  est_cmd->add_flag("--normalize", normalize, "Rescale covariates to the unit ball");
  est_cmd->add_option("--estimand", estimand, "ate|att|atc");
  est_cmd->add_option("--trim", trim_xi, "Trim threshold xi in (0,1)");
  est_cmd->add_option("--out", est_out, "Write JSON here instead of stdout");

  // bound
  auto* bound_cmd = app.add_subcommand("bound", "Closed-form theory report as JSON");
  double c_y = 1.0, tau_hat_in = 0.0, tau_n_in = 0.0;
  Eigen::Index m_param = 0;
  std::string convention = "appendix_proof", bound_out;
  std::optional<double> gamma;
  bound_cmd->add_option("--data", data_path, "Estimation-set CSV")->required();
  bound_cmd->add_option("--model", model_path, "Trained model JSON")->required();
  bound_cmd->add_option("--schema", schema_path, "Schema JSON");
  bound_cmd->add_flag("--normalize", normalize, "Rescale covariates to the unit ball");
  bound_cmd->add_option("--epsilon", epsilon, "Privacy loss, in (0,1)");
  bound_cmd->add_option("--delta", delta, "Failure probability, in (0,1)");
  bound_cmd->add_option("--m", m_param, "Fit-set size used by the weight mechanism");
  bound_cmd->add_option("--c-y", c_y, "Outcome magnitude bound");
  bound_cmd->add_option("--trim", trim_xi, "Deterministic support bound from trimming");
  bound_cmd->add_option("--gamma", gamma, "Probabilistic support bound failure mass");
  bound_cmd->add_option("--tau-hat", tau_hat_in, "Non-private estimate");
  bound_cmd->add_option("--tau-n", tau_n_in, "Partially private estimate");
  bound_cmd->add_option("--convention", convention, "appendix_proof|main_text");
  bound_cmd->add_option("--out", bound_out, "Write JSON here instead of stdout");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Monte-Carlo sweep driver");
  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  exp_cmd->add_option("--config", config_path, "Experiment config JSON");
  exp_cmd->add_option("--seed", seed_override, "Override the config seed");
  exp_cmd->add_option("--out-dir", out_dir, "Report output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      ppipw::RngStream stream(seed, ppipw::derive_stream_id(0, "synth-cli"));
      auto result = ppipw::generate(synth, stream);
      ppipw::write_dataset_csv(result.data, out_path);
      json sidecar{{"ground_truth", result.ground_truth},
                   {"d", synth.d},
                   {"n_units", synth.n_units},
                   {"cov_scale", synth.cov_scale},
                   {"noise_var", synth.noise_var},
                   {"seed", seed}};
      write_json_file(sidecar, out_path + ".json");
      std::cout << "wrote " << out_path << " and " << out_path << ".json\n";
    } else if (*fit_cmd) {
      auto data = load_dataset(data_path, schema_path, normalize);
      if (intercept) data = ppipw::append_intercept(data);
      auto model = ppipw::train(data, lambda, train_opts);
      write_json_file(ppipw::to_json(model), model_out);
      std::cout << "wrote " << model_out << " (converged=" << model.converged
                << ", loss=" << ppipw::format_double(model.final_loss) << ")\n";
    } else if (*priv_cmd) {
      auto model = ppipw::propensity_model_from_json(read_json_file(model_path));
      ppipw::PrivacyBudget budget(epsilon, delta);
      ppipw::RngStream stream(seed, ppipw::derive_stream_id(0, "privatize-cli"));
      auto pm = ppipw::privatize_weights(model, budget, stream);
      write_json_file(ppipw::to_json(pm, diagnostics), priv_out);
      std::cout << "wrote " << priv_out
                << " (sigma=" << ppipw::format_double(pm.mechanism.sigma) << ")\n";
    } else if (*est_cmd) {
      auto data = load_dataset(data_path, schema_path, normalize);
      auto loaded = load_model(model_path);
      ppipw::EffectEstimate est;
      if (estimand == "ate") {
        auto scores = ppipw::score_rows(loaded.model.weights, data);
        est = trim_xi ? ppipw::ipw_ate_trimmed(data, scores, *trim_xi)
                      : ppipw::ipw_ate(data, scores);
      } else if (estimand == "att") {
        est = ppipw::ipw_att(data, loaded.model.weights, trim_xi);
      } else if (estimand == "atc") {
        est = ppipw::ipw_atc(data, loaded.model.weights, trim_xi);
      } else {
        throw ppipw::InvalidInputError("--estimand must be ate, att or atc");
      }
      if (loaded.is_private) est.stage = ppipw::PrivacyStage::dp_wrt_Dm;
      json j = ppipw::to_json(est);
      if (est_out.empty())
        std::cout << j.dump(2) << "\n";
      else
        write_json_file(j, est_out);
    } else if (*bound_cmd) {
      auto data = load_dataset(data_path, schema_path, normalize);
      auto model = ppipw::propensity_model_from_json(read_json_file(model_path));
      ppipw::PrivacyBudget budget(epsilon, delta);
      if (m_param < 1) m_param = model.m_train;
      ppipw::OutcomeBounds bounds{c_y, trim_xi.value_or(0.05),
                                  1.0 - trim_xi.value_or(0.05), 1.0};
      ppipw::TheoryOptions topts;
      topts.convention = convention == "main_text" ? ppipw::SignConvention::main_text
                                                   : ppipw::SignConvention::appendix_proof;
      topts.trim_xi = trim_xi;
      topts.gamma = gamma;
      if (!topts.trim_xi && !topts.gamma) topts.trim_xi = 0.05;
      auto report = ppipw::evaluate_theory(data, model, budget, m_param, bounds,
                                           ppipw::Estimand::ATE, tau_hat_in, tau_n_in,
                                           topts);
      json j = ppipw::to_json(report);
      if (bound_out.empty())
        std::cout << j.dump(2) << "\n";
      else
        write_json_file(j, bound_out);
    } else if (*exp_cmd) {
      ppipw::ExperimentConfig config;
      if (!config_path.empty())
        config = ppipw::experiment_config_from_json(read_json_file(config_path));
      if (seed_override) config.seed = *seed_override;
      auto report = ppipw::run_sweep(config);
      auto csv_path = ppipw::emit(report, ppipw::EmitFormat::csv, out_dir);
      auto json_path = ppipw::emit(report, ppipw::EmitFormat::json, out_dir);
      std::cout << "wrote " << csv_path << " and " << json_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
