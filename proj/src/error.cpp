#include "engage_mil/error.hpp"

namespace engage {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kTooShortVideo: return "too-short-video";
    case ErrorCode::kDegenerateWindow: return "degenerate-window";
    case ErrorCode::kEmptyVideo: return "empty-video";
    case ErrorCode::kCannotSplit: return "cannot-split";
    case ErrorCode::kInvalidK: return "invalid-k";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kInvalidFolds: return "invalid-folds";
    case ErrorCode::kDegenerateMarginals: return "degenerate-marginals";
    case ErrorCode::kNoReliableRaters: return "no-reliable-raters";
    case ErrorCode::kUndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kIncompatibleArtifacts: return "incompatible-artifacts";
    case ErrorCode::kInvalidSplit: return "invalid-split";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown-error";
}

}  // namespace engage
