#pragma once

#include <stdexcept>
#include <string>

namespace fptune {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownBenchmark,
  kInvalidShape,
  kConfigLengthMismatch,
  kInvalidRange,
  kLengthMismatch,
  kIo,
  kParse,
  kInsufficientData,
  kWidthMismatch,
  kNonpositiveTarget,
  kArityMismatch,
  kCapExceeded,
  kEmptyDataset,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fptune
