#include "ppipw/serialize.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ppipw/errors.hpp"

namespace ppipw {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
  return v;
}

std::string estimand_name(Estimand e) {
  switch (e) {
    case Estimand::ATE: return "ate";
    case Estimand::ATT: return "att";
    case Estimand::ATC: return "atc";
  }
  return "ate";
}

Estimand estimand_from_name(const std::string& s) {
  if (s == "ate") return Estimand::ATE;
  if (s == "att") return Estimand::ATT;
  if (s == "atc") return Estimand::ATC;
  throw InvalidInputError("unknown estimand '" + s + "'");
}

std::string stage_name(PrivacyStage s) {
  switch (s) {
    case PrivacyStage::non_private: return "non_private";
    case PrivacyStage::dp_wrt_Dm: return "dp_wrt_Dm";
    case PrivacyStage::dp_wrt_all: return "dp_wrt_all";
  }
  return "non_private";
}

PrivacyStage stage_from_name(const std::string& s) {
  if (s == "non_private") return PrivacyStage::non_private;
  if (s == "dp_wrt_Dm") return PrivacyStage::dp_wrt_Dm;
  if (s == "dp_wrt_all") return PrivacyStage::dp_wrt_all;
  throw InvalidInputError("unknown privacy stage '" + s + "'");
}

template <typename T>
void set_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (j.contains(key) && !j[key].is_null()) return j[key].get<T>();
  return std::nullopt;
}

}  // namespace

json to_json(const PropensityModel& model) {
  return json{{"weights", vec_to_json(model.weights)},
              {"lambda", model.lambda},
              {"m_train", model.m_train},
              {"converged", model.converged},
              {"final_loss", model.final_loss}};
}

PropensityModel propensity_model_from_json(const json& j) {
  return PropensityModel{vec_from_json(j.at("weights")), j.at("lambda"),
                         j.at("m_train").get<Eigen::Index>(), j.at("converged"),
                         j.at("final_loss")};
}

json to_json(const PrivateModel& model, bool include_diagnostics) {
  json j{{"noisy_weights", vec_to_json(model.noisy_weights)},
         {"mechanism",
          {{"sensitivity", model.mechanism.sensitivity},
           {"epsilon", model.mechanism.budget.epsilon()},
           {"delta", model.mechanism.budget.delta()},
           {"sigma", model.mechanism.sigma}}},
         {"lambda", model.base.lambda},
         {"m_train", model.base.m_train}};
  if (include_diagnostics) j["base"] = to_json(model.base);
  return j;
}

PrivateModel private_model_from_json(const json& j) {
  const json& mech = j.at("mechanism");
  PrivacyBudget budget(mech.at("epsilon"), mech.at("delta"));
  Eigen::VectorXd noisy = vec_from_json(j.at("noisy_weights"));
  PropensityModel base;
  if (j.contains("base")) {
    base = propensity_model_from_json(j["base"]);
  } else {
    // Privacy-safe files carry no base weights; keep the metadata.
    base.weights = Eigen::VectorXd::Zero(noisy.size());
    base.lambda = j.at("lambda");
    base.m_train = j.at("m_train").get<Eigen::Index>();
  }
  return PrivateModel{std::move(base), std::move(noisy),
                      GaussianMechanism{mech.at("sensitivity"), budget, mech.at("sigma")}};
}

json to_json(const EffectEstimate& est) {
  json j{{"estimand", estimand_name(est.estimand)},
         {"stage", stage_name(est.stage)},
         {"value", est.value},
         {"n_used", est.n_used}};
  set_optional(j, "mu1", est.mu1);
  set_optional(j, "mu0", est.mu0);
  set_optional(j, "trim_xi", est.trim_xi);
  set_optional(j, "sigma_n", est.sigma_n);
  return j;
}

EffectEstimate effect_estimate_from_json(const json& j) {
  EffectEstimate est;
  est.estimand = estimand_from_name(j.at("estimand"));
  est.stage = stage_from_name(j.at("stage"));
  est.value = j.at("value");
  est.n_used = j.at("n_used").get<Eigen::Index>();
  est.mu1 = get_optional<double>(j, "mu1");
  est.mu0 = get_optional<double>(j, "mu0");
  est.trim_xi = get_optional<double>(j, "trim_xi");
  est.sigma_n = get_optional<double>(j, "sigma_n");
  return est;
}

json to_json(const TheoryReport& report) {
  json g{{"g_value", report.g.g_value},
         {"per_unit_terms", report.g.per_unit_terms},
         {"sign_convention", report.g.sign_convention == SignConvention::appendix_proof
                                 ? "appendix_proof"
                                 : "main_text"}};
  json eta{{"eta", report.eta.eta},
           {"kind", report.eta.kind == SupportBoundKind::deterministic_trim
                        ? "deterministic_trim"
                        : "probabilistic"},
           {"gamma", report.eta.gamma}};
  set_optional(eta, "zeta", report.eta.zeta);
  json markov = json::array();
  for (const auto& [threshold, bound] : report.markov_bound)
    markov.push_back({{"threshold", threshold}, {"bound", bound}});
  return json{{"g", g},
              {"eta", eta},
              {"sensitivity_tau", report.sensitivity_tau},
              {"sigma_n", report.sigma_n},
              {"thm1_bound", report.thm1_bound},
              {"thm2_bound", report.thm2_bound},
              {"thm1_raw", report.thm1_raw},
              {"thm2_raw", report.thm2_raw},
              {"flip_given_negative", report.flip_given_negative},
              {"markov_bound", markov}};
}

TheoryReport theory_report_from_json(const json& j) {
  TheoryReport report;
  const json& g = j.at("g");
  report.g.g_value = g.at("g_value");
  report.g.per_unit_terms = g.at("per_unit_terms").get<std::vector<double>>();
  report.g.sign_convention = g.at("sign_convention") == "appendix_proof"
                                 ? SignConvention::appendix_proof
                                 : SignConvention::main_text;
  const json& eta = j.at("eta");
  report.eta.eta = eta.at("eta");
  report.eta.kind = eta.at("kind") == "deterministic_trim"
                        ? SupportBoundKind::deterministic_trim
                        : SupportBoundKind::probabilistic;
  report.eta.gamma = eta.at("gamma");
  report.eta.zeta = get_optional<double>(eta, "zeta");
  report.sensitivity_tau = j.at("sensitivity_tau");
  report.sigma_n = j.at("sigma_n");
  report.thm1_bound = j.at("thm1_bound");
  report.thm2_bound = j.at("thm2_bound");
  report.thm1_raw = j.at("thm1_raw");
  report.thm2_raw = j.at("thm2_raw");
  report.flip_given_negative = j.at("flip_given_negative");
  for (const auto& entry : j.at("markov_bound"))
    report.markov_bound.emplace_back(entry.at("threshold"), entry.at("bound"));
  return report;
}

json to_json(const ExperimentConfig& config) {
  json j{{"source", config.source == ExperimentSource::synthetic ? "synthetic" : "csv"},
         {"trials", config.trials},
         {"epsilon_grid", config.epsilon_grid},
         {"m_grid", config.m_grid},
         {"n_estimate", config.n_estimate},
         {"delta", config.delta},
         {"lambda", config.lambda},
         {"seed", config.seed},
         {"stratified_split", config.stratified_split},
         {"sign_convention", config.convention == SignConvention::appendix_proof
                                 ? "appendix_proof"
                                 : "main_text"},
         {"train",
          {{"step_size", config.train_opts.step_size},
           {"tol", config.train_opts.tol},
           {"max_iters", config.train_opts.max_iters}}}};
  set_optional(j, "trim_xi", config.trim_xi);
  if (config.source == ExperimentSource::synthetic) {
    j["synth"] = {{"d", config.synth.d},
                  {"tau_true", config.synth.tau_true},
                  {"cov_scale", config.synth.cov_scale},
                  {"noise_var", config.synth.noise_var},
                  {"freeze_coefficients", config.freeze_coefficients}};
  } else {
    j["csv"] = {{"path", config.csv_path},
                {"schema",
                 {{"treatment_column", config.schema.treatment_column},
                  {"outcome_column", config.schema.outcome_column},
                  {"covariate_columns", config.schema.covariate_columns}}},
                {"protocol",
                 {{"kind", config.protocol.kind == ResampleKind::ihdp_balanced
                               ? "ihdp_balanced"
                               : "lalonde_balanced"},
                  {"fit_per_arm", config.protocol.fit_per_arm},
                  {"estimate_per_arm", config.protocol.estimate_per_arm}}}};
  }
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig config;
  config.source = j.value("source", std::string("synthetic")) == "csv"
                      ? ExperimentSource::csv
                      : ExperimentSource::synthetic;
  config.trials = j.value("trials", config.trials);
  if (j.contains("epsilon_grid"))
    config.epsilon_grid = j["epsilon_grid"].get<std::vector<double>>();
  if (j.contains("m_grid")) config.m_grid = j["m_grid"].get<std::vector<Eigen::Index>>();
  config.n_estimate = j.value("n_estimate", config.n_estimate);
  config.delta = j.value("delta", config.delta);
  config.lambda = j.value("lambda", config.lambda);
  config.seed = j.value("seed", config.seed);
  config.stratified_split = j.value("stratified_split", config.stratified_split);
  config.convention = j.value("sign_convention", std::string("appendix_proof")) ==
                              "main_text"
                          ? SignConvention::main_text
                          : SignConvention::appendix_proof;
  config.trim_xi = get_optional<double>(j, "trim_xi");
  if (j.contains("train")) {
    const json& t = j["train"];
    config.train_opts.step_size = t.value("step_size", config.train_opts.step_size);
    config.train_opts.tol = t.value("tol", config.train_opts.tol);
    config.train_opts.max_iters = t.value("max_iters", config.train_opts.max_iters);
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    config.synth.d = s.value("d", config.synth.d);
    config.synth.tau_true = s.value("tau_true", config.synth.tau_true);
    config.synth.cov_scale = s.value("cov_scale", config.synth.cov_scale);
    config.synth.noise_var = s.value("noise_var", config.synth.noise_var);
    config.freeze_coefficients = s.value("freeze_coefficients", false);
  }
  if (j.contains("csv")) {
    const json& c = j["csv"];
    config.csv_path = c.value("path", std::string());
    if (c.contains("schema")) {
      const json& s = c["schema"];
      config.schema.treatment_column = s.value("treatment_column", std::string("t"));
      config.schema.outcome_column = s.value("outcome_column", std::string("y"));
      if (s.contains("covariate_columns"))
        config.schema.covariate_columns =
            s["covariate_columns"].get<std::vector<std::string>>();
    }
    if (c.contains("protocol")) {
      const json& p = c["protocol"];
      config.protocol.kind = p.value("kind", std::string("ihdp_balanced")) ==
                                     "lalonde_balanced"
                                 ? ResampleKind::lalonde_balanced
                                 : ResampleKind::ihdp_balanced;
      config.protocol.fit_per_arm = p.value("fit_per_arm", config.protocol.fit_per_arm);
      config.protocol.estimate_per_arm =
          p.value("estimate_per_arm", config.protocol.estimate_per_arm);
    }
  }
  return config;
}

namespace {

json cell_to_json(const CellAggregate& c) {
  return json{{"epsilon", c.epsilon},
              {"m", c.m},
              {"trials_ok", c.trials_ok},
              {"trials_failed", c.trials_failed},
              {"degraded", c.degraded},
              {"mean_tau_hat", c.mean_tau_hat},
              {"ci_tau_hat", c.ci_tau_hat},
              {"mean_tau_n", c.mean_tau_n},
              {"ci_tau_n", c.ci_tau_n},
              {"mean_tau_n_eps", c.mean_tau_n_eps},
              {"ci_tau_n_eps", c.ci_tau_n_eps},
              {"rho_n", c.rho_n},
              {"rho_n_eps", c.rho_n_eps},
              {"joint_flip", c.joint_flip},
              {"mean_g", c.mean_g},
              {"mean_sigma_n", c.mean_sigma_n},
              {"mean_thm1", c.mean_thm1},
              {"mean_thm2", c.mean_thm2},
              {"n_tau_pos", c.n_tau_pos},
              {"cond_tau_n_nonpos", c.cond_tau_n_nonpos},
              {"cond_joint_nonpos", c.cond_joint_nonpos}};
}

CellAggregate cell_from_json(const json& j) {
  CellAggregate c;
  c.epsilon = j.at("epsilon");
  c.m = j.at("m").get<Eigen::Index>();
  c.trials_ok = j.at("trials_ok");
  c.trials_failed = j.at("trials_failed");
  c.degraded = j.at("degraded");
  c.mean_tau_hat = j.at("mean_tau_hat");
  c.ci_tau_hat = j.at("ci_tau_hat");
  c.mean_tau_n = j.at("mean_tau_n");
  c.ci_tau_n = j.at("ci_tau_n");
  c.mean_tau_n_eps = j.at("mean_tau_n_eps");
  c.ci_tau_n_eps = j.at("ci_tau_n_eps");
  c.rho_n = j.at("rho_n");
  c.rho_n_eps = j.at("rho_n_eps");
  c.joint_flip = j.at("joint_flip");
  c.mean_g = j.at("mean_g");
  c.mean_sigma_n = j.at("mean_sigma_n");
  c.mean_thm1 = j.at("mean_thm1");
  c.mean_thm2 = j.at("mean_thm2");
  c.n_tau_pos = j.at("n_tau_pos");
  c.cond_tau_n_nonpos = j.at("cond_tau_n_nonpos");
  c.cond_joint_nonpos = j.at("cond_joint_nonpos");
  return c;
}

}  // namespace

json to_json(const SweepReport& report) {
  json cells = json::array();
  for (const auto& cell : report.cells) cells.push_back(cell_to_json(cell));
  return json{{"config", to_json(report.config)}, {"cells", cells}};
}

SweepReport sweep_report_from_json(const json& j) {
  SweepReport report;
  report.config = experiment_config_from_json(j.at("config"));
  for (const auto& cell : j.at("cells")) report.cells.push_back(cell_from_json(cell));
  return report;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "t,y";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << ",x" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    out << data.treatments()[i] << "," << format_double(data.outcomes()[i]);
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      out << "," << format_double(data.covariates()(i, j));
    out << "\n";
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
}

CsvSchema default_schema(Eigen::Index d) {
  CsvSchema schema;
  schema.treatment_column = "t";
  schema.outcome_column = "y";
  for (Eigen::Index j = 0; j < d; ++j) schema.covariate_columns.push_back("x" + std::to_string(j));
  return schema;
}

Dataset read_dataset_csv(const std::string& path) {
  // Peek at the header to size the default schema.
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw ParseError("'" + path + "': empty file");
  Eigen::Index d = 0;
  for (char c : header)
    if (c == ',') ++d;
  d -= 1;  // t and y take the first two columns
  if (d < 1) throw ParseError("'" + path + "': expected header t,y,x0,...");
  in.close();
  auto staged = load_csv(path, default_schema(d));
  return Dataset(std::move(staged.covariates), std::move(staged.treatments),
                 std::move(staged.outcomes));
}

}  // namespace ppipw
