#include "pirt/error.hpp"

namespace pirt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyPositiveSet: return "EmptyPositiveSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BatchTooLarge: return "BatchTooLarge";
    case ErrorCode::NoEligibleReference: return "NoEligibleReference";
    case ErrorCode::NoRelevantReference: return "NoRelevantReference";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::CSVParse: return "CSVParse";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::SplitOverlap: return "SplitOverlap";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace pirt
