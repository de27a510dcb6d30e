#include "lora_indoor/json_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>

#include "lora_indoor/error.hpp"

namespace lora_indoor::io {

namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must be a JSON object");
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUnreadableSource, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kUnreadableSource, "cannot write '" + path.string() + "'");
  out << value.dump(2) << '\n';
}

Json to_json(const propagation::PathLossModel& m) {
  Json j;
  j["variant"] = std::string(propagation::to_string(m.variant));
  j["intercept_db"] = m.intercept_db;
  j["path_loss_exponent"] = m.path_loss_exponent;
  j["wall_loss_db"] = Json::object();
  for (const auto& [k, v] : m.wall_loss_db) j["wall_loss_db"][k] = v;
  if (m.variant == propagation::ModelVariant::kMultiWallEnv) {
    j["env_coeffs"] = Json::object();
    for (const auto& [k, v] : m.env_coeffs) j["env_coeffs"][k] = v;
    j["snr_coeff"] = m.snr_coeff.value_or(0.0);
  }
  j["shadowing_sigma_db"] = m.shadowing_sigma_db;
  j["reference_distance_m"] = m.reference_distance_m;
  return j;
}

propagation::PathLossModel model_from_json(const Json& j) {
  require_object(j, "model");
  try {
    propagation::PathLossModel m;
    m.variant = propagation::parse_variant(j.at("variant").get<std::string>());
    m.intercept_db = j.at("intercept_db").get<double>();
    m.path_loss_exponent = j.at("path_loss_exponent").get<double>();
    for (const auto& [k, v] : j.at("wall_loss_db").items()) m.wall_loss_db[k] = v.get<double>();
    if (auto it = j.find("env_coeffs"); it != j.end()) {
      for (const auto& [k, v] : it->items()) m.env_coeffs[k] = v.get<double>();
    }
    if (auto it = j.find("snr_coeff"); it != j.end() && !it->is_null()) {
      m.snr_coeff = it->get<double>();
    }
    read_opt(j, "shadowing_sigma_db", m.shadowing_sigma_db);
    read_opt(j, "reference_distance_m", m.reference_distance_m);
    propagation::validate(m);
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidModel, std::string("bad model JSON: ") + e.what());
  }
}

Json to_json(const link::LinkBudgetParams& p) {
  return Json{{"tx_power_dbm", p.tx_power_dbm},
              {"tx_cable_loss_db", p.tx_cable_loss_db},
              {"tx_antenna_gain_dbi", p.tx_antenna_gain_dbi},
              {"rx_antenna_gain_dbi", p.rx_antenna_gain_dbi},
              {"rx_cable_loss_db", p.rx_cable_loss_db},
              {"tx_antenna_height_m", p.tx_antenna_height_m},
              {"rx_antenna_height_m", p.rx_antenna_height_m}};
}

link::LinkBudgetParams link_budget_from_json(const Json& j) {
  require_object(j, "link-budget parameters");
  link::LinkBudgetParams p;
  try {
    read_opt(j, "tx_power_dbm", p.tx_power_dbm);
    read_opt(j, "tx_cable_loss_db", p.tx_cable_loss_db);
    read_opt(j, "tx_antenna_gain_dbi", p.tx_antenna_gain_dbi);
    read_opt(j, "rx_antenna_gain_dbi", p.rx_antenna_gain_dbi);
    read_opt(j, "rx_cable_loss_db", p.rx_cable_loss_db);
    read_opt(j, "tx_antenna_height_m", p.tx_antenna_height_m);
    read_opt(j, "rx_antenna_height_m", p.rx_antenna_height_m);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad link-budget JSON: ") + e.what());
  }
  link::validate(p);
  return p;
}

link::SfThresholdTable thresholds_from_json(const Json& j) {
  require_object(j, "threshold table");
  auto table = link::default_thresholds();
  try {
    for (const auto& row : j.at("thresholds")) {
      const int sf = row.at("sf").get<int>();
      if (sf < 7 || sf > 12) {
        throw Error(ErrorCode::kUnknownSf, "threshold row for SF" + std::to_string(sf));
      }
      auto& slot = table[static_cast<std::size_t>(sf - 7)];
      read_opt(row, "snr_req_db", slot.snr_req_db);
      read_opt(row, "sensitivity_dbm", slot.sensitivity_dbm);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad threshold JSON: ") + e.what());
  }
  return table;
}

phy::RadioConfig radio_config_from_json(const Json& j) {
  require_object(j, "radio config");
  phy::RadioConfig c;
  try {
    read_opt(j, "sf", c.sf);
    read_opt(j, "bw_hz", c.bw_hz);
    read_opt(j, "cr_index", c.cr_index);
    read_opt(j, "preamble_symbols", c.preamble_symbols);
    read_opt(j, "payload_bytes", c.payload_bytes);
    read_opt(j, "crc_on", c.crc_on);
    read_opt(j, "implicit_header", c.implicit_header);
    read_opt(j, "low_dr_opt", c.low_dr_opt);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad radio config JSON: ") + e.what());
  }
  phy::validate(c);
  return c;
}

Json to_json(const phy::DutyCycleReport& r) {
  Json per_sf = Json::object();
  for (const auto& [sf, ms] : r.per_sf_airtime_ms) per_sf[std::to_string(sf)] = ms;
  Json exceeds = Json::array();
  for (bool b : r.entry_exceeds_limit) exceeds.push_back(b);
  return Json{{"total_airtime_ms_per_hour", r.total_airtime_ms_per_hour},
              {"duty_cycle_fraction", r.duty_cycle_fraction},
              {"per_sf_airtime_ms", per_sf},
              {"limit", r.limit},
              {"compliant", r.compliant},
              {"entry_exceeds_limit", exceeds}};
}

fitting::FitConfig fit_config_from_json(const Json& j) {
  require_object(j, "fit config");
  fitting::FitConfig c;
  try {
    read_opt(j, "initial_params", c.initial_params);
    read_opt(j, "max_iterations", c.max_iterations);
    read_opt(j, "rss_tolerance", c.rss_tolerance);
    read_opt(j, "damping_initial", c.damping_initial);
    read_opt(j, "damping_up", c.damping_up);
    read_opt(j, "damping_down", c.damping_down);
    read_opt(j, "reference_distance_m", c.reference_distance_m);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad fit config JSON: ") + e.what());
  }
  fitting::validate(c);
  return c;
}

Json to_json(const fitting::FitReport& r) {
  Json coeffs = Json::object();
  Json errors = Json::object();
  for (std::size_t k = 0; k < r.parameter_names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    coeffs[r.parameter_names[k]] = r.params[i];
    errors[r.parameter_names[k]] = r.standard_errors[i];
  }
  return Json{{"variant", std::string(propagation::to_string(r.variant))},
              {"coefficients", coeffs},
              {"standard_errors", errors},
              {"rss", r.rss},
              {"shadowing_sigma_db", r.shadowing_sigma_db},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"n_observations", static_cast<std::size_t>(r.residuals.size())}};
}

Json to_json(const metrics::EvalReport& r) {
  return Json{{"rmse_db", r.rmse_db},
              {"r2", r.r2},
              {"residual_mean_db", r.residual_mean_db},
              {"residual_skewness", r.residual_skewness},
              {"shadowing_sigma_db", r.shadowing_sigma_db},
              {"n_observations", r.n_observations}};
}

Json to_json(const metrics::CvReport& r) {
  auto ms = [](const metrics::MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}}; };
  Json folds = Json::array();
  for (std::size_t k = 0; k < r.folds.size(); ++k) {
    const auto& f = r.folds[k];
    folds.push_back(Json{{"fold", k + 1},
                         {"train_rmse_db", f.train_rmse_db},
                         {"validation_rmse_db", f.validation_rmse_db},
                         {"train_r2", f.train_r2},
                         {"validation_r2", f.validation_r2},
                         {"train_size", f.train_size},
                         {"validation_size", f.validation_size}});
  }
  return Json{{"folds", folds},
              {"train_rmse_db", ms(r.train_rmse_db)},
              {"validation_rmse_db", ms(r.validation_rmse_db)},
              {"train_r2", ms(r.train_r2)},
              {"validation_r2", ms(r.validation_r2)}};
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace lora_indoor::io
