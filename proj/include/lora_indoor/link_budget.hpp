#pragma once

#include <array>

namespace lora_indoor::link {

/// Transmitter/receiver constants of the indoor deployment. Defaults are the
/// campaign's allocation: 14 dBm, 0.14 dB and 0.4 dBi at the end device,
/// 3 dBi and no cable loss at the gateway.
struct LinkBudgetParams {
  double tx_power_dbm = 14.0;
  double tx_cable_loss_db = 0.14;
  double tx_antenna_gain_dbi = 0.4;
  double rx_antenna_gain_dbi = 3.0;
  double rx_cable_loss_db = 0.0;
  double tx_antenna_height_m = 0.8;
  double rx_antenna_height_m = 1.0;
};

// Throws Error(kInvalidConfig) on negative cable loss or non-positive height.
void validate(const LinkBudgetParams& params);

/// Sum of the constant gain/loss terms, 17.26 dB for the defaults.
double link_budget_offset_db(const LinkBudgetParams& params);

struct SfThreshold {
  int sf = 0;
  double snr_req_db = 0.0;
  double sensitivity_dbm = 0.0;
};

using SfThresholdTable = std::array<SfThreshold, 6>;

/// Built-in SX127x-class thresholds for SF7..SF12 at 125 kHz.
const SfThresholdTable& default_thresholds() noexcept;

// Row for `sf`; throws Error(kUnknownSf) outside 7..12 or if the table lacks it.
const SfThreshold& threshold_for(int sf, const SfThresholdTable& table = default_thresholds());

/// Effective signal power: RSSI + SNR - 10 log10(1 + 10^(SNR/10)).
double esp(double rssi_dbm, double snr_db) noexcept;

/// Noise power: RSSI - 10 log10(1 + 10^(SNR/10)).
double noise_power(double rssi_dbm, double snr_db) noexcept;

/// TP - CL_tx + G_tx + G_rx - CL_rx - RSSI.
double experimental_path_loss(const LinkBudgetParams& params, double rssi_dbm) noexcept;

/// True when ESP clears the SF's sensitivity and SNR clears its demodulation floor.
bool receivable(double esp_dbm, double snr_db, int sf,
                const SfThresholdTable& table = default_thresholds());

}  // namespace lora_indoor::link
