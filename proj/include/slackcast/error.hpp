#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slackcast {

enum class ErrorCode {
  SyntaxError,
  WidthMismatch,
  MultipleDrivers,
  UndrivenNet,
  CombinationalLoop,
  InvalidNetlist,
  InvalidLibrary,
  UnknownCorner,
  NonFiniteFeature,
  DuplicateId,
  DimensionMismatch,
  NonUnitNorm,
  EmptyBank,
  DisjointnessViolation,
  ChecksumMismatch,
  NonFiniteActivation,
  BadConfig,
  Divergence,
  InfeasibleSpec,
  DegenerateK,
  EmptyPool,
  CollisionAfterDedup,
  DegenerateVariance,
  AllExcluded,
  AdaptationViolation,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a stable code name. The CLI maps every Error to
/// exit status 1 and prints `code_name: message` on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace slackcast
