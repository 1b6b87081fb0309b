#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "fairpost/lp.h"

namespace fairpost {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

std::string_view SolveStatusName(SolveStatus status);

struct SolverOptions {
  double pivot_tolerance = 1e-11;
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-9;
  // 0 selects a bound proportional to the problem size.
  std::size_t max_iterations = 0;
  // Rebuild the tableau from the original data every this many pivots.
  std::size_t refactor_interval = 64;
};

struct LpSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> z;
  double objective = 0.0;
  double max_constraint_residual = 0.0;
  double phase1_objective = 0.0;
  std::size_t iterations = 0;
  // Basic variable per row. Indices < cols() are structural, then one row
  // slack per row, then one artificial per row.
  std::vector<std::size_t> basis;

  bool optimal() const noexcept { return status == SolveStatus::kOptimal; }
};

struct FeasibilityResult {
  bool feasible = false;
  double phase1_objective = 0.0;
};

// Two-phase bounded-variable primal simplex on a dense tableau with Bland's
// rule for both entering and leaving choices. Deterministic: identical input
// gives a bit-identical solution. Returned z is clamped into its box.
LpSolution Solve(const LinearProgram& lp, const SolverOptions& options = {});
LpSolution Solve(const LpProblem& lp, const SolverOptions& options = {});
LpSolution Solve(const StandardLp& lp, const SolverOptions& options = {});
LpSolution Solve(const MulticlassLp& lp, const SolverOptions& options = {});

// Phase one only. Throws NumericalFailure when phase one does not terminate.
FeasibilityResult CheckFeasibility(const LinearProgram& lp, const SolverOptions& options = {});
FeasibilityResult CheckFeasibility(const LpProblem& lp, const SolverOptions& options = {});

// Largest distance of any row activity from its [rhs - range, rhs + range]
// interval.
double MaxConstraintResidual(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace fairpost
