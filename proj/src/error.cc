#include "fairpost/error.h"

namespace fairpost {

std::string_view ErrcName(Errc code) {
  switch (code) {
    case Errc::kEmptyDataset: return "EmptyDataset";
    case Errc::kEmptyCommunity: return "EmptyCommunity";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kDegenerateGroup: return "DegenerateGroup";
    case Errc::kZeroCommunityWeight: return "ZeroCommunityWeight";
    case Errc::kParseError: return "ParseError";
    case Errc::kSchemaViolation: return "SchemaViolation";
    case Errc::kUnknownCategory: return "UnknownCategory";
    case Errc::kUncoveredRecord: return "UncoveredRecord";
    case Errc::kOverlappingRules: return "OverlappingRules";
    case Errc::kInsufficientPool: return "InsufficientPool";
    case Errc::kEmptyShard: return "EmptyShard";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kArchitectureMismatch: return "ArchitectureMismatch";
    case Errc::kCommunityOutOfRange: return "CommunityOutOfRange";
    case Errc::kMissingArtifact: return "MissingArtifact";
    case Errc::kNegativeRelaxation: return "NegativeRelaxation";
    case Errc::kRelaxedInputUnsupported: return "RelaxedInputUnsupported";
    case Errc::kInfeasible: return "Infeasible";
    case Errc::kNumericalFailure: return "NumericalFailure";
    case Errc::kSingularityFailure: return "SingularityFailure";
    case Errc::kUnpackDimensionMismatch: return "UnpackDimensionMismatch";
    case Errc::kNonStochasticColumn: return "NonStochasticColumn";
    case Errc::kNotOptimal: return "NotOptimal";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int ExitCodeFor(Errc code) {
  switch (code) {
    case Errc::kInvalidConfig:
    case Errc::kInvalidArgument:
    case Errc::kNegativeRelaxation:
    case Errc::kRelaxedInputUnsupported:
      return 2;
    case Errc::kInfeasible:
    case Errc::kNumericalFailure:
    case Errc::kSingularityFailure:
    case Errc::kUnpackDimensionMismatch:
    case Errc::kNonStochasticColumn:
    case Errc::kNotOptimal:
      return 4;
    default:
      return 3;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(ErrcName(code)) + ": " + message),
      code_(code) {}

void Fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace fairpost
