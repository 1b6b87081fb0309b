#include "fairpost/stats.h"

#include <gtest/gtest.h>

#include <array>
#include <map>
#include <tuple>
#include <vector>

#include "fairpost/error.h"
#include "fairpost/rng.h"
#include "test_support.h"

namespace fairpost {
namespace {

Record Make(int a, int c, int y) {
  Record r;
  r.sensitive = a;
  r.community = c;
  r.label = y;
  return r;
}

template <typename F>
void ExpectErrc(Errc code, F&& f) {
  try {
    f();
    FAIL() << "expected " << ErrcName(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(CommunityWeights, RatioOfCounts) {
  std::vector<Record> data;
  for (int i = 0; i < 30; ++i) data.push_back(Make(0, 0, 0));
  for (int i = 0; i < 10; ++i) data.push_back(Make(1, 1, 1));
  const auto p = EstimateCommunityWeights(data, 2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
}

TEST(CommunityWeights, SingleCommunity) {
  std::vector<Record> data(7, Make(0, 0, 1));
  EXPECT_EQ(EstimateCommunityWeights(data, 1), std::vector<double>{1.0});
}

TEST(CommunityWeights, Errors) {
  ExpectErrc(Errc::kEmptyDataset, [] { EstimateCommunityWeights({}, 2); });
  std::vector<Record> data(3, Make(0, 0, 1));
  ExpectErrc(Errc::kEmptyCommunity, [&] { EstimateCommunityWeights(data, 2); });
  data.push_back(Make(0, 5, 1));
  ExpectErrc(Errc::kCommunityOutOfRange, [&] { EstimateCommunityWeights(data, 2); });
}

// Eight samples tallied by hand:
//   c0: TP(a0) FP(a0) FN(a1) TN(a1)
//   c1: FN(a0) TN(a0) TP(a1) TP(a1)
TEST(JointStatistics, HandTally) {
  const std::vector<Record> data = {Make(0, 0, 1), Make(0, 0, 0), Make(1, 0, 1), Make(1, 0, 0),
                                    Make(0, 1, 1), Make(0, 1, 0), Make(1, 1, 1), Make(1, 1, 1)};
  const std::vector<int> pred = {1, 1, 0, 0, 0, 0, 1, 1};
  const GroupStatistics s = EstimateJointStatistics(pred, data, 2);
  EXPECT_EQ(s.p, (std::vector<double>{0.5, 0.5}));
  const double e = 1.0 / 8.0;
  EXPECT_EQ(s.cell[0][0].tp, e);
  EXPECT_EQ(s.cell[0][0].fp, e);
  EXPECT_EQ(s.cell[0][0].fn, 0.0);
  EXPECT_EQ(s.cell[0][0].tn, 0.0);
  EXPECT_EQ(s.cell[1][0].fn, e);
  EXPECT_EQ(s.cell[1][0].tn, e);
  EXPECT_EQ(s.cell[0][1].fn, e);
  EXPECT_EQ(s.cell[0][1].tn, e);
  EXPECT_EQ(s.cell[1][1].tp, 2 * e);
  EXPECT_EQ(s.cell[1][1].fn + s.cell[1][1].fp + s.cell[1][1].tn, 0.0);
  EXPECT_DOUBLE_EQ(s.alpha, 0.25);
  EXPECT_DOUBLE_EQ(s.beta, 0.375);
  EXPECT_TRUE(SatisfiesInvariants(s));
}

std::vector<Record> MixedData(std::size_t n, std::size_t k, std::uint64_t seed) {
  SequentialRng rng(seed, 1);
  std::vector<Record> data;
  for (std::size_t i = 0; i < n; ++i) {
    data.push_back(Make(static_cast<int>(rng.NextIndex(2)),
                        static_cast<int>(i % k), static_cast<int>(rng.NextIndex(2))));
  }
  return data;
}

TEST(JointStatistics, PerfectPredictor) {
  const auto data = MixedData(500, 3, 7);
  std::vector<int> pred;
  for (const Record& r : data) pred.push_back(r.label);
  const GroupStatistics s = EstimateJointStatistics(pred, data, 3);
  for (int a = 0; a < 2; ++a) {
    for (const ConfusionCell& q : s.cell[a]) {
      EXPECT_EQ(q.fn, 0.0);
      EXPECT_EQ(q.fp, 0.0);
      EXPECT_EQ(q.tp + q.tn, q.mass());
    }
  }
  EXPECT_DOUBLE_EQ(s.correct_mass(), 1.0);
  EXPECT_TRUE(SatisfiesInvariants(s));
}

TEST(JointStatistics, ConstantZeroPredictor) {
  const auto data = MixedData(400, 2, 8);
  const std::vector<int> pred(data.size(), 0);
  const GroupStatistics s = EstimateJointStatistics(pred, data, 2);
  std::array<std::array<int, 2>, 2> positives{};
  for (const Record& r : data) positives[r.sensitive][r.community] += r.label;
  for (int a = 0; a < 2; ++a) {
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_EQ(s.cell[a][c].tp, 0.0);
      EXPECT_EQ(s.cell[a][c].fp, 0.0);
      EXPECT_DOUBLE_EQ(s.cell[a][c].fn, positives[a][c] / 400.0);
    }
  }
}

TEST(JointStatistics, MarginalsAreExact) {
  const auto data = MixedData(997, 5, 9);
  std::vector<int> pred;
  SequentialRng rng(3, 3);
  for (std::size_t i = 0; i < data.size(); ++i) pred.push_back(static_cast<int>(rng.NextIndex(2)));
  const GroupStatistics s = EstimateJointStatistics(pred, data, 5);
  EXPECT_TRUE(SatisfiesInvariants(s, 1e-12));
  EXPECT_NEAR(s.total_mass(), 1.0, 1e-12);
}

TEST(JointStatistics, Errors) {
  const auto data = MixedData(20, 2, 1);
  ExpectErrc(Errc::kLengthMismatch, [&] { EstimateJointStatistics(std::vector<int>(3, 0), data, 2); });
  std::vector<Record> no_qualified_a1 = {Make(0, 0, 1), Make(1, 0, 0), Make(0, 1, 0), Make(1, 1, 0)};
  ExpectErrc(Errc::kDegenerateGroup,
             [&] { EstimateJointStatistics(std::vector<int>(4, 1), no_qualified_a1, 2); });
}

// Twelve samples, N=3, K=2, labels and predictions zero-based.
TEST(MulticlassStatistics, HandTally) {
  struct Row { int y, yhat, a, c; };
  const std::vector<Row> rows = {{0, 0, 0, 0}, {1, 1, 0, 0}, {2, 1, 0, 0}, {1, 0, 1, 0},
                                 {1, 1, 1, 0}, {2, 2, 1, 0}, {0, 2, 0, 1}, {1, 1, 0, 1},
                                 {1, 1, 0, 1}, {2, 0, 1, 1}, {0, 0, 1, 1}, {1, 2, 1, 1}};
  std::vector<Record> data;
  std::vector<int> pred;
  std::map<std::tuple<int, int, int, int>, int> tally;
  for (const Row& r : rows) {
    data.push_back(Make(r.a, r.c, r.y));
    pred.push_back(r.yhat);
    ++tally[{r.y, r.yhat, r.a, r.c}];
  }
  const MulticlassStats s = EstimateMulticlassStatistics(pred, data, 2, 3);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
          const auto it = tally.find({k, j, a, c});
          const double expected = it == tally.end() ? 0.0 : it->second / 12.0;
          EXPECT_DOUBLE_EQ(s.at(k, j, a, c), expected) << k << j << a << c;
        }
  EXPECT_DOUBLE_EQ(s.alpha, 3.0 / 12.0);
  EXPECT_DOUBLE_EQ(s.beta, 3.0 / 12.0);
  EXPECT_EQ(s.p, (std::vector<double>{0.5, 0.5}));
  EXPECT_NEAR(s.total_mass(), 1.0, 1e-12);
}

TEST(MulticlassStatistics, PerfectPredictorIsDiagonal) {
  std::vector<Record> data;
  SequentialRng rng(4, 4);
  for (int i = 0; i < 300; ++i)
    data.push_back(Make(i % 2, i % 3, static_cast<int>(rng.NextIndex(3))));
  std::vector<int> pred;
  for (const Record& r : data) pred.push_back(r.label);
  const MulticlassStats s = EstimateMulticlassStatistics(pred, data, 3, 3);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 3; ++j)
      for (int a = 0; a < 2; ++a)
        for (std::size_t c = 0; c < 3; ++c)
          if (k != j) EXPECT_EQ(s.at(k, j, a, c), 0.0);
}

TEST(MulticlassStatistics, TwoClassAgreesWithBinary) {
  const auto data = MixedData(600, 3, 11);
  std::vector<int> pred;
  SequentialRng rng(5, 5);
  for (std::size_t i = 0; i < data.size(); ++i) pred.push_back(static_cast<int>(rng.NextIndex(2)));
  const GroupStatistics binary = EstimateJointStatistics(pred, data, 3);
  const MulticlassStats multi = EstimateMulticlassStatistics(pred, data, 3, 2);
  for (int a = 0; a < 2; ++a) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(binary.cell[a][c].tp, multi.at(1, 1, a, c));
      EXPECT_EQ(binary.cell[a][c].fn, multi.at(1, 0, a, c));
      EXPECT_EQ(binary.cell[a][c].fp, multi.at(0, 1, a, c));
      EXPECT_EQ(binary.cell[a][c].tn, multi.at(0, 0, a, c));
    }
  }
  EXPECT_EQ(ToMulticlass(binary).joint, multi.joint);
  const GroupStatistics back = ToBinary(ToMulticlass(binary));
  for (int a = 0; a < 2; ++a) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(back.cell[a][c].tp, binary.cell[a][c].tp);
      EXPECT_EQ(back.cell[a][c].tn, binary.cell[a][c].tn);
    }
  }
  EXPECT_EQ(ToMulticlass(ToBinary(multi)).joint, multi.joint);
}

TEST(Invariants, RandomGeneratorProducesValidStatistics) {
  SequentialRng rng(99, 0);
  for (int i = 0; i < 50; ++i) {
    EXPECT_TRUE(SatisfiesInvariants(testing::RandomStats(rng, 1 + i % 7)));
  }
}

TEST(Json, RoundTripsBothEncodings) {
  SequentialRng rng(5, 0);
  const GroupStatistics stats = testing::RandomStats(rng, 3);
  const GroupStatistics back = GroupStatisticsFromJson(nlohmann::json::parse(ToJson(stats).dump()));
  EXPECT_EQ(back.p, stats.p);
  EXPECT_EQ(back.alpha, stats.alpha);
  for (int a = 0; a < 2; ++a) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(back.cell[a][c].fn, stats.cell[a][c].fn);
      EXPECT_EQ(back.cell[a][c].tp, stats.cell[a][c].tp);
    }
  }
  const MulticlassStats multi = ToMulticlass(stats);
  EXPECT_EQ(MulticlassStatsFromJson(ToJson(multi)).joint, multi.joint);

  nlohmann::json broken = ToJson(stats);
  broken["cells"].erase(1);
  EXPECT_THROW(GroupStatisticsFromJson(broken), Error);
  EXPECT_THROW(MulticlassStatsFromJson(ToJson(stats)), Error);
}

}  // namespace
}  // namespace fairpost
