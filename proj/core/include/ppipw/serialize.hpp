#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "ppipw/estimators.hpp"
#include "ppipw/harness.hpp"
#include "ppipw/privacy.hpp"
#include "ppipw/propensity.hpp"
#include "ppipw/theory.hpp"

// JSON wire formats for the CLI and the sweep reports. Double round trips are
// exact (17 significant digits).

namespace ppipw {

nlohmann::json to_json(const PropensityModel& model);
PropensityModel propensity_model_from_json(const nlohmann::json& j);

/// By default the export carries only the noisy weights and the mechanism
/// parameters. include_diagnostics additionally embeds the base weights
/// (which would defeat the privatization if released).
nlohmann::json to_json(const PrivateModel& model, bool include_diagnostics = false);
PrivateModel private_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EffectEstimate& est);
EffectEstimate effect_estimate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TheoryReport& report);
TheoryReport theory_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SweepReport& report);
SweepReport sweep_report_from_json(const nlohmann::json& j);

/// Dataset CSV with header "t,y,x0,...,x{d-1}", 17 significant digits.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

/// Default schema for the CSV layout written by write_dataset_csv.
CsvSchema default_schema(Eigen::Index d);

std::string format_double(double value);  // %.17g, locale-independent

}  // namespace ppipw
