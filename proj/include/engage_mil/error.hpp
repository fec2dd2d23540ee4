#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace engage {

enum class ErrorCode {
  kInvalidArgument,
  kTooShortVideo,
  kDegenerateWindow,
  kEmptyVideo,
  kCannotSplit,
  kInvalidK,
  kInvalidInput,
  kDimensionMismatch,
  kInvalidFolds,
  kDegenerateMarginals,
  kNoReliableRaters,
  kUndefinedCorrelation,
  kTrainingDiverged,
  kParseError,
  kIncompatibleArtifacts,
  kInvalidSplit,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace engage
