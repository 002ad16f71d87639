#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pirt {

enum class ErrorCode {
  ZeroVector,
  LabelOutOfRange,
  EmptyPositiveSet,
  DimensionMismatch,
  ShapeMismatch,
  NotDivisible,
  InvalidArgument,
  BatchTooLarge,
  NoEligibleReference,
  NoRelevantReference,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  MalformedFile,
  NonFiniteValue,
  CSVParse,
  CorruptCheckpoint,
  ConfigMismatch,
  SplitOverlap,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception; callers that
// need to branch on the failure kind inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pirt
