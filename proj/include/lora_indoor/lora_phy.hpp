#pragma once

#include <map>
#include <span>
#include <vector>

namespace lora_indoor::phy {

/// PHY parameters of one LoRa transmission.
///
/// `implicit_header` follows the airtime formula's H flag literally: true means
/// an implicit header, which removes the 20-bit header term from the payload
/// symbol count. Note that this is the opposite of the "explicit header on"
/// switch exposed by most radio drivers.
struct RadioConfig {
  int sf = 7;
  double bw_hz = 125'000.0;
  int cr_index = 1;  // coding rate 4/(4+cr_index)
  int preamble_symbols = 8;
  int payload_bytes = 18;
  bool crc_on = true;
  bool implicit_header = false;
  bool low_dr_opt = false;
};

// Throws Error(kInvalidConfig) unless 7<=sf<=12, bw>0, 1<=cr<=4,
// 0<=payload<=255 and preamble>=0.
void validate(const RadioConfig& cfg);

/// Symbol time 2^SF / BW in seconds.
double symbol_duration(const RadioConfig& cfg);

/// Raw bit rate SF * BW / 2^SF * 4/(4+CR) in bit/s.
double bit_rate(const RadioConfig& cfg);

/// Payload symbol count including the fixed 8-symbol floor. The ceiling is
/// taken on the exact integer ratio.
int payload_symbols(const RadioConfig& cfg);

/// (preamble + 4.25 + payload symbols) * symbol time, in seconds.
double time_on_air(const RadioConfig& cfg);

inline constexpr double kMillisecondsPerHour = 3'600'000.0;
inline constexpr double kDefaultDutyCycleLimit = 0.01;

struct ScheduleEntry {
  RadioConfig config;
  double transmissions_per_hour = 0.0;
};

struct DutyCycleReport {
  double total_airtime_ms_per_hour = 0.0;
  double duty_cycle_fraction = 0.0;
  std::map<int, double> per_sf_airtime_ms;
  // Per schedule entry: its own hourly fraction exceeds the limit.
  std::vector<bool> entry_exceeds_limit;
  double limit = kDefaultDutyCycleLimit;
  bool compliant = true;
};

DutyCycleReport duty_cycle(std::span<const ScheduleEntry> schedule,
                           double limit = kDefaultDutyCycleLimit);

}  // namespace lora_indoor::phy
