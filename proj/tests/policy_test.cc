#include "fairpost/policy.h"

#include <gtest/gtest.h>

#include <cmath>

#include "fairpost/error.h"
#include "fairpost/lp.h"

namespace fairpost {
namespace {

TEST(FairDecide, IdentityPolicyKeepsBase) {
  const FairPolicy p = FairPolicy::Identity(3);
  const RngStream rng(1, 2);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const int base = static_cast<int>(i % 2);
    EXPECT_EQ(FairDecide(base, static_cast<int>(i / 2 % 2), static_cast<int>(i % 3), p, rng, i), base);
  }
}

TEST(FairDecide, ZeroAcceptanceFlipsEveryBaseZero) {
  FairPolicy p = FairPolicy::Identity(2);
  p.z[VariableIndex(1, 0, 0)] = 0.0;
  const RngStream rng(3, 4);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(FairDecide(0, 0, 1, p, rng, i), 1);
    EXPECT_EQ(FairDecide(0, 1, 1, p, rng, i), 0);
    EXPECT_EQ(FairDecide(1, 0, 1, p, rng, i), 1);
  }
}

TEST(FairDecide, AcceptanceFrequencyMatchesProbability) {
  FairPolicy p = FairPolicy::Identity(2);
  p.z[VariableIndex(0, 0, 1)] = 0.3;
  const RngStream rng(2024, 7);
  const int n = 1'000'000;
  int kept = 0;
  for (int i = 0; i < n; ++i) kept += FairDecide(1, 0, 0, p, rng, static_cast<std::uint64_t>(i)) == 1;
  EXPECT_NEAR(static_cast<double>(kept) / n, 0.3, 0.0014);
}

TEST(FairDecide, RejectsUnknownCommunity) {
  const FairPolicy p = FairPolicy::Identity(2);
  try {
    FairDecide(0, 0, 2, p, RngStream(0, 0), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCommunityOutOfRange);
  }
}

TEST(FairDecide, DrawsAreIndependentOfOrder) {
  FairPolicy p = FairPolicy::Identity(1);
  p.z = {0.5, 0.5, 0.5, 0.5};
  const RngStream rng(9, 9);
  std::vector<int> forward, backward(500);
  for (std::uint64_t i = 0; i < 500; ++i) forward.push_back(FairDecide(1, 0, 0, p, rng, i));
  for (std::uint64_t i = 500; i-- > 0;) backward[i] = FairDecide(1, 0, 0, p, rng, i);
  EXPECT_EQ(forward, backward);
}

TEST(FairDecideMulticlass, IdentityAndDeterministicColumn) {
  MulticlassPolicy p = MulticlassPolicy::Identity(2, 3);
  const RngStream rng(5, 5);
  for (std::uint64_t i = 0; i < 300; ++i) {
    const int base = static_cast<int>(i % 3);
    EXPECT_EQ(FairDecideMulticlass(base, 1, 1, p, rng, i), base);
  }
  p.m[p.Index(0, 0, 0, 0)] = 0.0;
  p.m[p.Index(1, 0, 0, 0)] = 1.0;
  for (std::uint64_t i = 0; i < 300; ++i) EXPECT_EQ(FairDecideMulticlass(0, 0, 0, p, rng, i), 1);
}

TEST(FairDecideMulticlass, FrequenciesMatchColumn) {
  MulticlassPolicy p = MulticlassPolicy::Identity(1, 3);
  const double col[3] = {0.2, 0.5, 0.3};
  for (std::size_t k = 0; k < 3; ++k) p.m[p.Index(k, 1, 1, 0)] = col[k];
  const RngStream rng(77, 1);
  const int n = 1'000'000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[FairDecideMulticlass(1, 1, 0, p, rng, static_cast<std::uint64_t>(i))];
  for (int k = 0; k < 3; ++k) {
    const double sigma = std::sqrt(col[k] * (1 - col[k]) / n);
    EXPECT_NEAR(static_cast<double>(counts[k]) / n, col[k], 3 * sigma) << k;
  }
}

TEST(FairDecideMulticlass, RejectsNonStochasticColumn) {
  MulticlassPolicy p = MulticlassPolicy::Identity(1, 3);
  p.m[p.Index(2, 0, 0, 0)] = 0.5;
  try {
    FairDecideMulticlass(0, 0, 0, p, RngStream(0, 0), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonStochasticColumn);
  }
}

LpSolution Optimal(std::vector<double> z) {
  LpSolution s;
  s.status = SolveStatus::kOptimal;
  s.z = std::move(z);
  return s;
}

TEST(PolicyFromSolution, UnpacksAndClamps) {
  const FairPolicy identity = PolicyFromSolution(Optimal(std::vector<double>(8, 1.0)), 2);
  EXPECT_EQ(identity.z, FairPolicy::Identity(2).z);
  const FairPolicy clamped =
      PolicyFromSolution(Optimal({-1e-12, 1 + 1e-12, 0.25, 0.5}), 1);
  EXPECT_EQ(clamped.z, (std::vector<double>{0.0, 1.0, 0.25, 0.5}));
  EXPECT_EQ(clamped.accept(0, 1, 0), 0.25);
  EXPECT_EQ(clamped.accept(1, 1, 0), 0.5);
}

TEST(PolicyFromSolution, Errors) {
  try {
    PolicyFromSolution(Optimal(std::vector<double>(7, 1.0)), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnpackDimensionMismatch);
  }
  LpSolution bad = Optimal(std::vector<double>(4, 1.0));
  bad.status = SolveStatus::kInfeasible;
  try {
    PolicyFromSolution(bad, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotOptimal);
  }
}

TEST(MulticlassPolicyFromSolution, RenormalizesSmallDeviations) {
  std::vector<double> z = MulticlassPolicy::Identity(1, 2).m;
  z[0] = 1.0 - 5e-7;
  const MulticlassPolicy p = MulticlassPolicyFromSolution(Optimal(z), 1, 2);
  EXPECT_NO_THROW(CheckStochastic(p, 1e-12));
  z[0] = 0.99;
  try {
    MulticlassPolicyFromSolution(Optimal(z), 1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonStochasticColumn);
  }
}

TEST(PolicyJson, RoundTripIsExact) {
  FairPolicy p = FairPolicy::Identity(3);
  for (std::size_t i = 0; i < p.z.size(); ++i) p.z[i] = 1.0 / static_cast<double>(i + 3);
  const nlohmann::json doc = nlohmann::json::parse(ToJson(p).dump());
  EXPECT_EQ(FairPolicyFromJson(doc).z, p.z);

  MulticlassPolicy m = MulticlassPolicy::Identity(2, 3);
  m.m[m.Index(0, 2, 1, 1)] = 0.1 / 3.0;
  m.m[m.Index(2, 2, 1, 1)] = 1.0 - 0.1 / 3.0;
  const MulticlassPolicy back = MulticlassPolicyFromJson(nlohmann::json::parse(ToJson(m).dump()));
  EXPECT_EQ(back.m, m.m);
  EXPECT_THROW(FairPolicyFromJson(nlohmann::json{{"kind", "binary"}}), Error);
}

}  // namespace
}  // namespace fairpost
