#include "lora_indoor/error.hpp"

namespace lora_indoor {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kUnknownSf: return "unknown-sf";
    case ErrorCode::kEmptyHistory: return "empty-history";
    case ErrorCode::kDistanceBelowReference: return "distance-below-reference";
    case ErrorCode::kNonPositiveFrequency: return "non-positive-frequency";
    case ErrorCode::kNonPositiveArgument: return "non-positive-argument";
    case ErrorCode::kInvalidScene: return "invalid-scene";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kSingularNormalEquations: return "singular-normal-equations";
    case ErrorCode::kUnderdetermined: return "underdetermined";
    case ErrorCode::kUnreadableSource: return "unreadable-source";
    case ErrorCode::kMalformedHeader: return "malformed-header";
    case ErrorCode::kZeroVarianceFeature: return "zero-variance-feature";
    case ErrorCode::kTooFewRecords: return "too-few-records";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kEmpty: return "empty";
    case ErrorCode::kConstantActual: return "constant-actual";
    case ErrorCode::kTooFew: return "too-few";
    case ErrorCode::kInvalidModel: return "invalid-model";
  }
  return "unknown";
}

}  // namespace lora_indoor
