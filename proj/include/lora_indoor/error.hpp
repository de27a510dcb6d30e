#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lora_indoor {

enum class ErrorCode {
  kInvalidConfig,
  kUnknownSf,
  kEmptyHistory,
  kDistanceBelowReference,
  kNonPositiveFrequency,
  kNonPositiveArgument,
  kInvalidScene,
  kDimensionMismatch,
  kSingularNormalEquations,
  kUnderdetermined,
  kUnreadableSource,
  kMalformedHeader,
  kZeroVarianceFeature,
  kTooFewRecords,
  kLengthMismatch,
  kEmpty,
  kConstantActual,
  kTooFew,
  kInvalidModel,
};

// Stable kebab-case name, used in CLI error output and JSON reports.
std::string_view to_string(ErrorCode code) noexcept;

// Domain error raised by every module. Precondition breaches that callers
// can trigger with bad data end up here; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lora_indoor
