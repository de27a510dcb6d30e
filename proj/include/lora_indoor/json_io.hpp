#pragma once

// JSON schemas for model, parameter, config and report files.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "lora_indoor/adr.hpp"
#include "lora_indoor/fitting.hpp"
#include "lora_indoor/link_budget.hpp"
#include "lora_indoor/lora_phy.hpp"
#include "lora_indoor/metrics.hpp"
#include "lora_indoor/propagation.hpp"

namespace lora_indoor::io {

using Json = nlohmann::ordered_json;

// Reads and parses a JSON file; kUnreadableSource / kInvalidConfig on failure.
Json read_json_file(const std::filesystem::path& path);

/// Serialised with `dump(2)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& value);

Json to_json(const propagation::PathLossModel& model);
propagation::PathLossModel model_from_json(const Json& j);

Json to_json(const link::LinkBudgetParams& params);
link::LinkBudgetParams link_budget_from_json(const Json& j);

/// {"thresholds": [{"sf": 7, "snr_req_db": -7.5, "sensitivity_dbm": -123}, ...]};
/// rows not listed keep their built-in value.
link::SfThresholdTable thresholds_from_json(const Json& j);

phy::RadioConfig radio_config_from_json(const Json& j);
Json to_json(const phy::DutyCycleReport& report);

fitting::FitConfig fit_config_from_json(const Json& j);
Json to_json(const fitting::FitReport& report);

Json to_json(const metrics::EvalReport& report);
Json to_json(const metrics::CvReport& report);

/// 64-bit FNV-1a of a file's bytes as 16 hex digits ("" if unreadable).
std::string file_digest(const std::filesystem::path& path);

}  // namespace lora_indoor::io
