#include "fairpost/lp.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fairpost/error.h"
#include "fairpost/rng.h"
#include "test_support.h"

namespace fairpost {
namespace {

using testing::EvaluatePost;
using testing::RandomStats;

// Two communities with round numbers (each entry is a multiple of 1/100).
GroupStatistics HandStats() {
  GroupStatistics s;
  s.cell[0] = {{.fn = 0.05, .tn = 0.20, .fp = 0.03, .tp = 0.12},
               {.fn = 0.02, .tn = 0.06, .fp = 0.01, .tp = 0.01}};
  s.cell[1] = {{.fn = 0.04, .tn = 0.15, .fp = 0.02, .tp = 0.09},
               {.fn = 0.01, .tn = 0.10, .fp = 0.02, .tp = 0.07}};
  s.p = {0.70, 0.30};
  s.alpha = 0.05 + 0.12 + 0.02 + 0.01;
  s.beta = 0.04 + 0.09 + 0.01 + 0.07;
  return s;
}

TEST(StrictLp, HandExpansionTwoCommunities) {
  const GroupStatistics s = HandStats();
  const LpProblem lp = BuildStrictLp(s);
  ASSERT_EQ(lp.matrix.rows(), 3u);
  ASSERT_EQ(lp.matrix.cols(), 8u);
  const double a = s.alpha, b = s.beta;

  // c = (FN0-TN0, FP0-TP0, FN1-TN1, FP1-TP1) per community.
  const double c[8] = {0.05 - 0.20, 0.03 - 0.12, 0.04 - 0.15, 0.02 - 0.09,
                       0.02 - 0.06, 0.01 - 0.01, 0.01 - 0.10, 0.02 - 0.07};
  for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(lp.objective[j], c[j]) << j;

  const double row0[8] = {-0.05 / a, 0.12 / a, 0.04 / b, -0.09 / b,
                          -0.02 / a, 0.01 / a, 0.01 / b, -0.07 / b};
  for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(lp.matrix(0, j), row0[j]) << j;
  EXPECT_DOUBLE_EQ(lp.rhs[0], (0.04 / b - 0.05 / a) + (0.01 / b - 0.02 / a));

  // K=2: row for community 0 is (-1/2 n_0, +1/2 n_1), row 1 the negation.
  for (int j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(lp.matrix(1, j), -0.5 * c[j] / 0.70);
    EXPECT_DOUBLE_EQ(lp.matrix(1, 4 + j), 0.5 * c[4 + j] / 0.30);
    EXPECT_DOUBLE_EQ(lp.matrix(2, j), 0.5 * c[j] / 0.70);
    EXPECT_DOUBLE_EQ(lp.matrix(2, 4 + j), -0.5 * c[4 + j] / 0.30);
  }
  const double b0 = (0.20 + 0.12 + 0.15 + 0.09) / 0.70;
  const double b1 = (0.06 + 0.01 + 0.10 + 0.07) / 0.30;
  EXPECT_DOUBLE_EQ(lp.rhs[1], 0.5 * (b0 - b1));
  EXPECT_DOUBLE_EQ(lp.rhs[2], 0.5 * (b1 - b0));
  EXPECT_TRUE(lp.is_strict());
}

TEST(StrictLp, SingleCommunityRowIsVacuous) {
  SequentialRng rng(1, 1);
  const LpProblem lp = BuildStrictLp(RandomStats(rng, 1));
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(lp.matrix(1, j), 0.0);
  EXPECT_EQ(lp.rhs[1], 0.0);
}

TEST(StrictLp, SymmetricStatisticsAcceptIdentity) {
  SequentialRng rng(2, 2);
  GroupStatistics s = RandomStats(rng, 3);
  for (std::size_t c = 0; c < 3; ++c) s.cell[1][c] = s.cell[0][c];
  s.alpha = s.beta = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    s.p[c] = 2 * s.cell[0][c].mass();
    s.alpha += s.cell[0][c].qualified();
  }
  s.beta = s.alpha;
  const double total = s.total_mass();
  for (int a = 0; a < 2; ++a)
    for (auto& q : s.cell[a]) q = {q.fn / total, q.tn / total, q.fp / total, q.tp / total};
  for (double& p : s.p) p /= total;
  s.alpha /= total;
  s.beta /= total;

  const LpProblem lp = BuildStrictLp(s);
  EXPECT_NEAR(lp.rhs[0], 0.0, 1e-15);
  const std::vector<double> ones(12, 1.0);
  const auto act = lp.matrix.Multiply(ones);
  EXPECT_NEAR(act[0], lp.rhs[0], 1e-12);
}

TEST(StrictLp, StructuralInvariants) {
  SequentialRng rng(3, 3);
  for (std::size_t k = 1; k <= 7; ++k) {
    const LpProblem lp = BuildStrictLp(RandomStats(rng, k, /*weak=*/true));
    for (std::size_t j = 0; j < 4 * k; ++j) {
      double col = 0.0;
      for (std::size_t r = 1; r <= k; ++r) col += lp.matrix(r, j);
      EXPECT_NEAR(col, 0.0, 1e-9);
    }
    double rhs = 0.0;
    for (std::size_t r = 1; r <= k; ++r) rhs += lp.rhs[r];
    EXPECT_NEAR(rhs, 0.0, 1e-9);
  }
}

// Row semantics against the first-principles evaluator, at random z.
TEST(StrictLp, RowsMeasureFairnessGaps) {
  SequentialRng rng(4, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + trial % 6;
    const GroupStatistics s = RandomStats(rng, k, trial % 2 == 0);
    const LpProblem lp = BuildStrictLp(s);
    std::vector<double> z(4 * k);
    for (double& v : z) v = rng.NextUniform();
    const auto m = EvaluatePost(s, z);
    const auto act = lp.matrix.Multiply(z);
    EXPECT_NEAR(act[0] - lp.rhs[0], m.eod, 1e-12);
    double mean = 0.0;
    for (double e : m.community_error) mean += e;
    mean /= static_cast<double>(k);
    for (std::size_t c = 0; c < k; ++c) {
      EXPECT_NEAR(act[1 + c] - lp.rhs[1 + c], mean - m.community_error[c], 1e-12);
    }
    // Reconstruction: c.z + sum of correct mass is the error rate.
    EXPECT_NEAR(Dot(lp.objective, z) + s.correct_mass(), m.error, 1e-12);
  }
}

TEST(RelaxedLp, SharesStrictDataAndSetsRanges) {
  SequentialRng rng(5, 5);
  const GroupStatistics s = RandomStats(rng, 4);
  const LpProblem strict = BuildStrictLp(s);
  const LpProblem relaxed = BuildRelaxedLp(s, 0.02, 0.04);
  EXPECT_EQ(relaxed.matrix, strict.matrix);
  EXPECT_EQ(relaxed.rhs, strict.rhs);
  EXPECT_EQ(relaxed.objective, strict.objective);
  EXPECT_EQ(relaxed.relax, (std::vector<double>{0.02, 0.04, 0.04, 0.04, 0.04}));
  EXPECT_FALSE(relaxed.is_strict());
  EXPECT_TRUE(BuildRelaxedLp(s, 0.0, 0.0).is_strict());
  const LinearProgram lp = relaxed.ToLinearProgram();
  EXPECT_EQ(lp.range, relaxed.relax);
  EXPECT_EQ(lp.col_upper, std::vector<double>(16, 1.0));
}

TEST(RelaxedLp, RejectsNegativeRelaxation) {
  SequentialRng rng(6, 6);
  const GroupStatistics s = RandomStats(rng, 2);
  try {
    BuildRelaxedLp(s, -0.1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNegativeRelaxation);
  }
}

TEST(StrictLp, DegenerateInputs) {
  SequentialRng rng(7, 7);
  GroupStatistics s = RandomStats(rng, 2);
  GroupStatistics no_beta = s;
  no_beta.beta = 0.0;
  EXPECT_THROW(BuildStrictLp(no_beta), Error);
  GroupStatistics zero_weight = s;
  zero_weight.p[1] = 0.0;
  try {
    BuildStrictLp(zero_weight);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kZeroCommunityWeight);
  }
}

TEST(StandardForm, BlockLayout) {
  SequentialRng rng(8, 8);
  const LpProblem lp = BuildStrictLp(RandomStats(rng, 1));
  const StandardLp st = ToStandardForm(lp);
  ASSERT_EQ(st.matrix.rows(), 6u);
  ASSERT_EQ(st.matrix.cols(), 8u);

  const std::size_t k = 3;
  const LpProblem lp3 = BuildStrictLp(RandomStats(rng, k));
  const StandardLp st3 = ToStandardForm(lp3);
  const std::size_t n = 4 * k;
  ASSERT_EQ(st3.matrix.rows(), 5 * k + 1);
  ASSERT_EQ(st3.matrix.cols(), 8 * k);
  for (std::size_t i = 0; i <= k; ++i) {
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(st3.matrix(i, j), lp3.matrix(i, j));
    for (std::size_t j = n; j < 2 * n; ++j) EXPECT_EQ(st3.matrix(i, j), 0.0);
    EXPECT_EQ(st3.rhs[i], lp3.rhs[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(st3.matrix(k + 1 + i, j), i == j ? 1.0 : 0.0);
      EXPECT_EQ(st3.matrix(k + 1 + i, n + j), i == j ? 1.0 : 0.0);
    }
    EXPECT_EQ(st3.rhs[k + 1 + i], 1.0);
  }
  for (std::size_t j = 0; j < 2 * n; ++j)
    EXPECT_EQ(st3.objective[j], j < n ? lp3.objective[j] : 0.0);
}

TEST(StandardForm, SlackIdentityRecoversBox) {
  SequentialRng rng(9, 9);
  const LpProblem lp = BuildStrictLp(RandomStats(rng, 2));
  const StandardLp st = ToStandardForm(lp);
  std::vector<double> zbar(16);
  for (std::size_t j = 0; j < 8; ++j) {
    zbar[j] = rng.NextUniform();
    zbar[8 + j] = 1.0 - zbar[j];
  }
  const auto act = st.matrix.Multiply(zbar);
  const auto box = lp.matrix.Multiply(std::vector<double>(zbar.begin(), zbar.begin() + 8));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(act[i], box[i]);
  for (std::size_t i = 3; i < act.size(); ++i) EXPECT_NEAR(act[i], 1.0, 1e-15);
}

TEST(StandardForm, RejectsRelaxed) {
  SequentialRng rng(10, 10);
  try {
    ToStandardForm(BuildRelaxedLp(RandomStats(rng, 2), 0.01, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRelaxedInputUnsupported);
  }
}

TEST(MulticlassLp, IdentityIsFeasibleForFairBasePredictor) {
  // Three classes, two communities. Every (a, c) cell has the same
  // conditional confusion matrix and the same mass, so the base predictor is
  // already fair and the identity columns satisfy every row.
  MulticlassStats s;
  s.classes = 3;
  s.p = {0.5, 0.5};
  s.joint.assign(3 * 3 * 2 * 2, 0.0);
  const double conf[3][3] = {{0.30, 0.03, 0.02}, {0.04, 0.25, 0.01}, {0.02, 0.03, 0.30}};
  for (std::size_t c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < 3; ++j) s.joint[s.Index(k, j, a, c)] = conf[k][j] / 4.0;
  s.alpha = s.beta = (0.04 + 0.25 + 0.01) / 2.0;

  const MulticlassLp lp = BuildMulticlassLp(s);
  ASSERT_EQ(lp.program.rows(), 1 + 2 + 2 * 2 * 3u);
  ASSERT_EQ(lp.program.cols(), 36u);
  EXPECT_EQ(lp.program.sense, Sense::kMaximize);
  std::vector<double> z(36, 0.0);
  for (std::size_t c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (std::size_t j = 0; j < 3; ++j) z[lp.Index(j, j, a, c)] = 1.0;
  const auto act = lp.program.matrix.Multiply(z);
  for (std::size_t r = 0; r < act.size(); ++r) EXPECT_NEAR(act[r], lp.program.rhs[r], 1e-15) << r;
  EXPECT_NEAR(Dot(lp.program.objective, z), 0.30 + 0.25 + 0.30, 1e-15);
}

TEST(LpFormat, RoundTripIsExact) {
  SequentialRng rng(11, 11);
  const LinearProgram lp = BuildRelaxedLp(RandomStats(rng, 3, true), 0.013, 0.021).ToLinearProgram();
  std::stringstream buf;
  WriteLinearProgram(buf, lp, {"random instance"});
  const LinearProgram back = ReadLinearProgram(buf);
  EXPECT_EQ(back.objective, lp.objective);
  EXPECT_EQ(back.matrix, lp.matrix);
  EXPECT_EQ(back.rhs, lp.rhs);
  EXPECT_EQ(back.range, lp.range);
  EXPECT_EQ(back.col_lower, lp.col_lower);
  EXPECT_EQ(back.col_upper, lp.col_upper);

  const LinearProgram st = ToStandardForm(BuildStrictLp(RandomStats(rng, 1))).ToLinearProgram();
  std::stringstream buf2;
  WriteLinearProgram(buf2, st);
  EXPECT_EQ(ReadLinearProgram(buf2).col_upper, st.col_upper);
}

TEST(LpFormat, MatchesGoldenFile) {
  const LinearProgram lp = BuildStrictLp(HandStats()).ToLinearProgram();
  std::stringstream written;
  WriteLinearProgram(written, lp, {"two-community hand instance"});
  std::ifstream golden(std::string(FAIRPOST_TEST_DATA_DIR) + "/hand_strict.lp");
  ASSERT_TRUE(golden) << "missing golden file";
  std::stringstream expected;
  expected << golden.rdbuf();
  EXPECT_EQ(written.str(), expected.str());
}

TEST(LpFormat, RejectsMalformedInput) {
  const char* cases[] = {
      "fairpost-lp 2\n",
      "fairpost-lp 1\nsense sideways\n",
      "fairpost-lp 1\nsense minimize\ndims 1 1\nobjective\nx\n",
      "fairpost-lp 1\nsense minimize\ndims 1 1\nobjective\n1\nrows\n1\nrhs\n1\n",
  };
  for (const char* text : cases) {
    std::istringstream in(text);
    try {
      ReadLinearProgram(in);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kParseError) << text;
    }
  }
}

}  // namespace
}  // namespace fairpost
