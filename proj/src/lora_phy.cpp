#include "lora_indoor/lora_phy.hpp"

#include <cmath>
#include <string>

#include "lora_indoor/error.hpp"

namespace lora_indoor::phy {

namespace {

// ceil(num / den) for den > 0 on integers.
long long ceil_div(long long num, long long den) {
  long long q = num / den;
  if (num % den != 0 && num > 0) ++q;
  return q;
}

}  // namespace

void validate(const RadioConfig& cfg) {
  if (cfg.sf < 7 || cfg.sf > 12) {
    throw Error(ErrorCode::kInvalidConfig,
                "spreading factor must be in [7, 12], got " + std::to_string(cfg.sf));
  }
  if (!(cfg.bw_hz > 0.0) || !std::isfinite(cfg.bw_hz)) {
    throw Error(ErrorCode::kInvalidConfig, "bandwidth must be a positive number of Hz");
  }
  if (cfg.cr_index < 1 || cfg.cr_index > 4) {
    throw Error(ErrorCode::kInvalidConfig,
                "coding-rate index must be in [1, 4], got " + std::to_string(cfg.cr_index));
  }
  if (cfg.payload_bytes < 0 || cfg.payload_bytes > 255) {
    throw Error(ErrorCode::kInvalidConfig,
                "payload must be in [0, 255] bytes, got " + std::to_string(cfg.payload_bytes));
  }
  if (cfg.preamble_symbols < 0) {
    throw Error(ErrorCode::kInvalidConfig, "preamble length must be non-negative");
  }
}

double symbol_duration(const RadioConfig& cfg) {
  validate(cfg);
  return std::ldexp(1.0, cfg.sf) / cfg.bw_hz;
}

double bit_rate(const RadioConfig& cfg) {
  validate(cfg);
  return cfg.sf * cfg.bw_hz / std::ldexp(1.0, cfg.sf) * (4.0 / (4.0 + cfg.cr_index));
}

int payload_symbols(const RadioConfig& cfg) {
  validate(cfg);
  const long long den = 4LL * (cfg.sf - 2 * (cfg.low_dr_opt ? 1 : 0));
  if (den <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "SF - 2*DE must be positive");
  }
  const long long num = 8LL * cfg.payload_bytes - 4LL * cfg.sf + 28 +
                        16LL * (cfg.crc_on ? 1 : 0) -
                        20LL * (cfg.implicit_header ? 1 : 0);
  const long long blocks = ceil_div(num, den) * (cfg.cr_index + 4);
  return static_cast<int>(8 + (blocks > 0 ? blocks : 0));
}

double time_on_air(const RadioConfig& cfg) {
  const double t_sym = symbol_duration(cfg);
  return (cfg.preamble_symbols + 4.25 + payload_symbols(cfg)) * t_sym;
}

DutyCycleReport duty_cycle(std::span<const ScheduleEntry> schedule, double limit) {
  if (!(limit > 0.0) || limit > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "duty-cycle limit must be in (0, 1]");
  }
  DutyCycleReport report;
  report.limit = limit;
  report.entry_exceeds_limit.reserve(schedule.size());
  for (const auto& entry : schedule) {
    if (!(entry.transmissions_per_hour >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "transmission count must be non-negative");
    }
    const double airtime_ms = time_on_air(entry.config) * 1e3 * entry.transmissions_per_hour;
    report.total_airtime_ms_per_hour += airtime_ms;
    report.per_sf_airtime_ms[entry.config.sf] += airtime_ms;
    report.entry_exceeds_limit.push_back(airtime_ms / kMillisecondsPerHour > limit);
  }
  report.duty_cycle_fraction = report.total_airtime_ms_per_hour / kMillisecondsPerHour;
  report.compliant = report.duty_cycle_fraction <= limit;
  return report;
}

}  // namespace lora_indoor::phy
