#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace citygen {

enum class ErrorCode {
  InvalidConfig,
  DimensionMismatch,
  InvalidRate,
  IndexOutOfRange,
  EqualParents,
  MisalignedInput,
  SingleClassTrainingSet,
  WrongMode,
  WrongState,
  InvalidSelection,
  ParseError,
  EncodingFailure,
  NotFound,
};

std::string_view errorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace citygen
