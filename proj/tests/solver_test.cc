#include "fairpost/solver.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "fairpost/error.h"
#include "fairpost/lp.h"
#include "fairpost/rng.h"
#include "test_support.h"

namespace fairpost {
namespace {

using testing::RandomStats;
using testing::VertexMinimum;

LinearProgram Small(std::vector<double> objective, Matrix a, std::vector<double> rhs,
                    std::vector<double> range) {
  LinearProgram lp;
  lp.objective = std::move(objective);
  lp.matrix = std::move(a);
  lp.rhs = std::move(rhs);
  lp.range = std::move(range);
  lp.col_lower.assign(lp.objective.size(), 0.0);
  lp.col_upper.assign(lp.objective.size(), 1.0);
  return lp;
}

TEST(Solver, RangedRowHandInstance) {
  Matrix a(1, 2, 1.0);
  const LpSolution s = Solve(Small({-1.0, -1.0}, a, {1.0}, {0.25}));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, -1.25, 1e-12);
  EXPECT_NEAR(s.z[0] + s.z[1], 1.25, 1e-12);
}

TEST(Solver, EqualityAndMaximize) {
  // maximize x + 2y subject to x + y = 1, x - y in [-0.5, 0.5].
  Matrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 1;
  a(1, 0) = 1; a(1, 1) = -1;
  LinearProgram lp = Small({1.0, 2.0}, a, {1.0, 0.0}, {0.0, 0.5});
  lp.sense = Sense::kMaximize;
  const LpSolution s = Solve(lp);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.z[0], 0.25, 1e-12);
  EXPECT_NEAR(s.z[1], 0.75, 1e-12);
  EXPECT_NEAR(s.objective, 1.75, 1e-12);
}

TEST(Solver, ContradictoryRowIsInfeasible) {
  Matrix a(1, 3, 0.0);
  const LinearProgram lp = Small({1.0, 1.0, 1.0}, a, {1.0}, {0.0});
  EXPECT_EQ(Solve(lp).status, SolveStatus::kInfeasible);
  const FeasibilityResult f = CheckFeasibility(lp);
  EXPECT_FALSE(f.feasible);
  EXPECT_NEAR(f.phase1_objective, 1.0, 1e-12);
}

TEST(Solver, UnboundedBelow) {
  LinearProgram lp;
  lp.objective = {-1.0, 0.0};
  lp.matrix = Matrix(1, 2);
  lp.matrix(0, 0) = 1.0;
  lp.matrix(0, 1) = -1.0;
  lp.rhs = {0.0};
  lp.range = {0.0};
  lp.col_lower = {0.0, 0.0};
  lp.col_upper = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  EXPECT_EQ(Solve(lp).status, SolveStatus::kUnbounded);
}

TEST(Solver, AlreadyFairBasePredictorKeepsIdentity) {
  SequentialRng rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + trial % 4;
    GroupStatistics s = RandomStats(rng, k);
    // Identical cells across (a, c) make the base predictor fair on both
    // criteria; force the correct mass to dominate so c < 0 everywhere.
    const ConfusionCell base{.fn = 0.05, .tn = 0.45, .fp = 0.1, .tp = 0.4};
    const double share = 1.0 / (2.0 * static_cast<double>(k));
    for (int a = 0; a < 2; ++a)
      for (auto& q : s.cell[a]) q = {base.fn * share, base.tn * share, base.fp * share, base.tp * share};
    for (double& p : s.p) p = 2 * share;
    s.alpha = s.beta = 0.45 * 0.5;
    const LpProblem lp = BuildStrictLp(s);
    const LpSolution sol = Solve(lp);
    ASSERT_TRUE(sol.optimal());
    for (double z : sol.z) EXPECT_EQ(z, 1.0);
    double ones = 0.0;
    for (double c : lp.objective) ones += c;
    EXPECT_NEAR(sol.objective, ones, 1e-12);
  }
}

TEST(Solver, FullyRelaxedIsBoxMinimum) {
  SequentialRng rng(22, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + trial % 7;
    const LpProblem lp = BuildRelaxedLp(RandomStats(rng, k, true), 1.0, 1.0);
    const LpSolution sol = Solve(lp);
    ASSERT_TRUE(sol.optimal());
    for (std::size_t j = 0; j < lp.objective.size(); ++j) {
      EXPECT_EQ(sol.z[j], lp.objective[j] < 0 ? 1.0 : 0.0) << j;
    }
  }
}

TEST(Solver, MatchesVertexEnumerationOnTwoCommunityPrograms) {
  SequentialRng rng(23, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const LpProblem lp = BuildStrictLp(RandomStats(rng, 2, trial % 2 == 1));
    const LpSolution sol = Solve(lp);
    ASSERT_TRUE(sol.optimal());
    const auto exact = VertexMinimum(lp.objective, lp.matrix, lp.rhs, lp.rhs);
    ASSERT_TRUE(exact.has_value());
    EXPECT_NEAR(sol.objective, *exact, 1e-7);
  }
}

TEST(Solver, RelaxedProgramsMatchVertexEnumeration) {
  SequentialRng rng(24, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const GroupStatistics s = RandomStats(rng, 2, true);
    const double eps = 0.05 * rng.NextUniform();
    const double delta = 0.05 * rng.NextUniform();
    const LpProblem lp = BuildRelaxedLp(s, eps, delta);
    const LpSolution sol = Solve(lp);
    ASSERT_TRUE(sol.optimal());
    std::vector<double> lo(3), hi(3);
    for (std::size_t i = 0; i < 3; ++i) {
      lo[i] = lp.rhs[i] - lp.relax[i];
      hi[i] = lp.rhs[i] + lp.relax[i];
    }
    const auto exact = VertexMinimum(lp.objective, lp.matrix, lo, hi);
    ASSERT_TRUE(exact.has_value());
    EXPECT_NEAR(sol.objective, *exact, 1e-7);
  }
}

TEST(Solver, StrictProgramsAreAlwaysFeasible) {
  SequentialRng rng(25, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + trial % 7;
    const LpProblem lp = BuildStrictLp(RandomStats(rng, k, trial % 3 == 0));
    const FeasibilityResult f = CheckFeasibility(lp);
    ASSERT_TRUE(f.feasible) << "trial " << trial << " phase1 " << f.phase1_objective;
  }
}

TEST(Solver, StandardFormAgreesWithBoxForm) {
  SequentialRng rng(26, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + trial % 5;
    const LpProblem lp = BuildStrictLp(RandomStats(rng, k, trial % 2 == 0));
    const LpSolution box = Solve(lp);
    const LpSolution standard = Solve(ToStandardForm(lp));
    ASSERT_TRUE(box.optimal());
    ASSERT_TRUE(standard.optimal());
    EXPECT_NEAR(box.objective, standard.objective, 1e-7);
    for (std::size_t j = 0; j < 4 * k; ++j) {
      EXPECT_NEAR(standard.z[j] + standard.z[4 * k + j], 1.0, 1e-7);
    }
  }
}

TEST(Solver, DeterministicAcrossSerialization) {
  SequentialRng rng(27, 0);
  const LinearProgram lp = BuildRelaxedLp(RandomStats(rng, 5, true), 0.01, 0.02).ToLinearProgram();
  const LpSolution first = Solve(lp);
  std::stringstream buf;
  WriteLinearProgram(buf, lp);
  const LpSolution second = Solve(ReadLinearProgram(buf));
  ASSERT_EQ(first.z.size(), second.z.size());
  EXPECT_EQ(std::memcmp(first.z.data(), second.z.data(), first.z.size() * sizeof(double)), 0);
  EXPECT_EQ(first.basis, second.basis);
  EXPECT_EQ(first.iterations, second.iterations);
}

TEST(Solver, NeverWorseThanFeasibleIdentity) {
  SequentialRng rng(28, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + trial % 6;
    const LpProblem lp = BuildRelaxedLp(RandomStats(rng, k), 0.5, 0.5);
    const std::vector<double> ones(4 * k, 1.0);
    if (MaxConstraintResidual(lp.ToLinearProgram(), ones) > 0.0) continue;
    const LpSolution sol = Solve(lp);
    ASSERT_TRUE(sol.optimal());
    EXPECT_LE(sol.objective, Dot(lp.objective, ones) + 1e-12);
  }
}

TEST(Solver, SolutionsRespectBoundsAndResiduals) {
  SequentialRng rng(29, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + trial % 7;
    const LpProblem lp = BuildStrictLp(RandomStats(rng, k, trial % 2 == 0));
    const LpSolution sol = Solve(lp);
    ASSERT_TRUE(sol.optimal()) << SolveStatusName(sol.status);
    EXPECT_LE(sol.max_constraint_residual, 1e-7);
    for (double z : sol.z) {
      EXPECT_GE(z, 0.0);
      EXPECT_LE(z, 1.0);
    }
  }
}

TEST(Solver, MulticlassTwoClassMatchesBinary) {
  SequentialRng rng(30, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const GroupStatistics s = RandomStats(rng, k, trial % 2 == 0);
    const LpSolution binary = Solve(BuildStrictLp(s));
    const LpSolution multi = Solve(BuildMulticlassLp(ToMulticlass(s)));
    ASSERT_TRUE(binary.optimal());
    ASSERT_TRUE(multi.optimal());
    EXPECT_NEAR(multi.objective, 1.0 - (binary.objective + s.correct_mass()), 1e-7);
  }
}

}  // namespace
}  // namespace fairpost
