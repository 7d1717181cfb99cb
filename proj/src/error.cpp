#include "citygen/error.hpp"

namespace citygen {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EqualParents: return "EqualParents";
    case ErrorCode::MisalignedInput: return "MisalignedInput";
    case ErrorCode::SingleClassTrainingSet: return "SingleClassTrainingSet";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::WrongState: return "WrongState";
    case ErrorCode::InvalidSelection: return "InvalidSelection";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EncodingFailure: return "EncodingFailure";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace citygen
