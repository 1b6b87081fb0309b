#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairpost {

enum class Errc {
  // data / statistics
  kEmptyDataset,
  kEmptyCommunity,
  kLengthMismatch,
  kDegenerateGroup,
  kZeroCommunityWeight,
  kParseError,
  kSchemaViolation,
  kUnknownCategory,
  kUncoveredRecord,
  kOverlappingRules,
  kInsufficientPool,
  kEmptyShard,
  kDimensionMismatch,
  kArchitectureMismatch,
  kCommunityOutOfRange,
  kMissingArtifact,
  // lp / solver / policy
  kNegativeRelaxation,
  kRelaxedInputUnsupported,
  kInfeasible,
  kNumericalFailure,
  kSingularityFailure,
  kUnpackDimensionMismatch,
  kNonStochasticColumn,
  kNotOptimal,
  // configuration
  kInvalidConfig,
  kInvalidArgument,
};

std::string_view ErrcName(Errc code);

// Process exit code for the CLI: 2 config, 3 data, 4 solver.
int ExitCodeFor(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void Fail(Errc code, const std::string& message);

}  // namespace fairpost
