#pragma once

#include <stdexcept>
#include <string>

namespace usaug {

// Failure categories shared across the library. The CLI derives its exit
// codes from these: file-level failures map to exit 1, everything else
// (input validation) to exit 2.
enum class ErrorCode {
  EmptyRegion,
  BorderViolation,
  DimensionMismatch,
  MissingNeighborValue,
  EmptyMask,
  DegenerateTransform,
  PatchTooLarge,
  NoValidPlacement,
  PlacementOutOfBounds,
  OverlapViolation,
  NoDonorInstances,
  UnsupportedFormat,
  DecodeError,
  SchemaViolation,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace usaug
