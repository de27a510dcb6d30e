#include "lora_indoor/link_budget.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lora_indoor/error.hpp"

namespace lora_indoor::link {

namespace {

// 10 log10(1 + 10^(snr/10)), the share of RSSI split between signal and noise.
double noise_split_db(double snr_db) noexcept {
  return 10.0 / std::numbers::ln10 * std::log1p(std::pow(10.0, 0.1 * snr_db));
}

}  // namespace

void validate(const LinkBudgetParams& params) {
  if (params.tx_cable_loss_db < 0.0 || params.rx_cable_loss_db < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "cable losses must be non-negative");
  }
  if (!(params.tx_antenna_height_m > 0.0) || !(params.rx_antenna_height_m > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "antenna heights must be positive");
  }
}

double link_budget_offset_db(const LinkBudgetParams& p) {
  return p.tx_power_dbm - p.tx_cable_loss_db + p.tx_antenna_gain_dbi + p.rx_antenna_gain_dbi -
         p.rx_cable_loss_db;
}

const SfThresholdTable& default_thresholds() noexcept {
  static const SfThresholdTable table{{
      {7, -7.5, -123.0},
      {8, -10.0, -126.0},
      {9, -12.5, -129.0},
      {10, -15.0, -132.0},
      {11, -17.5, -134.5},
      {12, -20.0, -137.0},
  }};
  return table;
}

const SfThreshold& threshold_for(int sf, const SfThresholdTable& table) {
  if (sf >= 7 && sf <= 12) {
    for (const auto& row : table) {
      if (row.sf == sf) return row;
    }
  }
  throw Error(ErrorCode::kUnknownSf, "no reception threshold for SF" + std::to_string(sf));
}

double esp(double rssi_dbm, double snr_db) noexcept {
  return rssi_dbm + snr_db - noise_split_db(snr_db);
}

double noise_power(double rssi_dbm, double snr_db) noexcept {
  return rssi_dbm - noise_split_db(snr_db);
}

double experimental_path_loss(const LinkBudgetParams& params, double rssi_dbm) noexcept {
  return link_budget_offset_db(params) - rssi_dbm;
}

bool receivable(double esp_dbm, double snr_db, int sf, const SfThresholdTable& table) {
  const auto& row = threshold_for(sf, table);
  return esp_dbm >= row.sensitivity_dbm && snr_db >= row.snr_req_db;
}

}  // namespace lora_indoor::link
