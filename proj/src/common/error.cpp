#include "slackcast/error.hpp"

namespace slackcast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::MultipleDrivers: return "MultipleDrivers";
    case ErrorCode::UndrivenNet: return "UndrivenNet";
    case ErrorCode::CombinationalLoop: return "CombinationalLoop";
    case ErrorCode::InvalidNetlist: return "InvalidNetlist";
    case ErrorCode::InvalidLibrary: return "InvalidLibrary";
    case ErrorCode::UnknownCorner: return "UnknownCorner";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonUnitNorm: return "NonUnitNorm";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::DisjointnessViolation: return "DisjointnessViolation";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::DegenerateK: return "DegenerateK";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::CollisionAfterDedup: return "CollisionAfterDedup";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::AllExcluded: return "AllExcluded";
    case ErrorCode::AdaptationViolation: return "AdaptationViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace slackcast
