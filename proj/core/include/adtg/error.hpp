#pragma once

#include <stdexcept>
#include <string>

namespace adtg {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kIoFailure,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kNonFinite,
  kEmptyDataset,
  kDimensionMismatch,
  kInvalidConfig,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a code so callers (and the
// CLI) can distinguish error classes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace adtg
