#include "lora_indoor/adr.hpp"

#include <algorithm>

#include "lora_indoor/error.hpp"

namespace lora_indoor::adr {

std::string_view to_string(Decision decision) noexcept {
  switch (decision) {
    case Decision::kLowerSf: return "LOWER_SF";
    case Decision::kRaisePower: return "RAISE_POWER";
    case Decision::kNoChange: return "NO_CHANGE";
  }
  return "NO_CHANGE";
}

void validate(const AdrState& s) {
  if (s.min_sf < 7 || s.min_sf > 12 || s.current_sf < s.min_sf || s.current_sf > 12) {
    throw Error(ErrorCode::kInvalidConfig, "ADR state needs 7 <= min_sf <= current_sf <= 12");
  }
  if (s.current_power_dbm > s.max_power_dbm) {
    throw Error(ErrorCode::kInvalidConfig, "current power exceeds maximum power");
  }
  if (s.history_capacity == 0 || s.snr_history.size() > s.history_capacity) {
    throw Error(ErrorCode::kInvalidConfig, "SNR history exceeds its capacity");
  }
  if (s.power_step_db < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "power step must be non-negative");
  }
}

AdrState record_snr(AdrState state, double snr_db) {
  state.snr_history.push_back(snr_db);
  while (state.snr_history.size() > state.history_capacity) state.snr_history.pop_front();
  return state;
}

double snr_margin(const AdrState& state, const link::SfThresholdTable& table) {
  if (state.snr_history.empty()) {
    throw Error(ErrorCode::kEmptyHistory, "SNR margin needs at least one uplink");
  }
  const double best = *std::max_element(state.snr_history.begin(), state.snr_history.end());
  return best - link::threshold_for(state.current_sf, table).snr_req_db - state.fade_margin_db;
}

StepResult adr_step(const AdrState& state, const link::SfThresholdTable& table) {
  validate(state);
  StepResult result{state, Decision::kNoChange, snr_margin(state, table), false};
  auto& next = result.state;
  if (result.margin_db > 0.0) {
    if (next.current_sf > next.min_sf) {
      --next.current_sf;
      result.decision = Decision::kLowerSf;
    }
  } else if (next.current_sf == next.min_sf) {
    const double raised = std::min(next.current_power_dbm + next.power_step_db, next.max_power_dbm);
    if (raised > next.current_power_dbm) {
      next.current_power_dbm = raised;
      result.decision = Decision::kRaisePower;
    }
  } else {
    result.unspecified_case = true;
  }
  return result;
}

}  // namespace lora_indoor::adr
