#pragma once

#include <cstddef>
#include <deque>
#include <string_view>

#include "lora_indoor/link_budget.hpp"

namespace lora_indoor::adr {

/// Network-side view of one end device for the adaptive data rate decision.
/// A value type: every operation returns a new state.
struct AdrState {
  int current_sf = 12;
  double current_power_dbm = 14.0;
  std::deque<double> snr_history;  // oldest first
  std::size_t history_capacity = 20;
  double fade_margin_db = 10.0;
  double power_step_db = 2.0;
  double max_power_dbm = 14.0;
  int min_sf = 7;
};

enum class Decision { kLowerSf, kRaisePower, kNoChange };

std::string_view to_string(Decision decision) noexcept;

// Throws Error(kInvalidConfig) when the state breaks its own bounds.
void validate(const AdrState& state);

/// Appends one uplink SNR, evicting the oldest sample once the window is full.
AdrState record_snr(AdrState state, double snr_db);

/// max(history) - SNR_req(current SF) - fade margin. Throws kEmptyHistory.
double snr_margin(const AdrState& state,
                  const link::SfThresholdTable& table = link::default_thresholds());

struct StepResult {
  AdrState state;
  Decision decision = Decision::kNoChange;
  double margin_db = 0.0;
  // Margin <= 0 while SF could still be raised: the procedure defines no
  // action for this case, so the step holds and reports it here.
  bool unspecified_case = false;
};

/// One ADR decision: lower SF by one step on positive margin, otherwise raise
/// power by the step (clamped to max) once SF sits at its minimum.
StepResult adr_step(const AdrState& state,
                    const link::SfThresholdTable& table = link::default_thresholds());

}  // namespace lora_indoor::adr
