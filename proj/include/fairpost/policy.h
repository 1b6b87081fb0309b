#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairpost/record.h"
#include "fairpost/rng.h"
#include "fairpost/solver.h"
#include "json.hpp"

namespace fairpost {

// Binary randomized post-processor. z[VariableIndex(c, a, j)] is the
// probability of keeping base prediction j for a sample with sensitive value a
// in community c.
struct FairPolicy {
  std::size_t communities = 0;
  std::vector<double> z;

  static FairPolicy Identity(std::size_t communities);
  double accept(int base, int a, std::size_t c) const;
};

// Multi-class post-processor: m[Index(k, j, a, c)] = Pr(out = k | base = j, a, c).
struct MulticlassPolicy {
  std::size_t communities = 0;
  std::size_t classes = 0;
  std::vector<double> m;

  std::size_t Index(std::size_t k, std::size_t j, int a, std::size_t c) const noexcept {
    return ((c * 2 + static_cast<std::size_t>(a)) * classes + j) * classes + k;
  }
  double at(std::size_t k, std::size_t j, int a, std::size_t c) const { return m[Index(k, j, a, c)]; }

  static MulticlassPolicy Identity(std::size_t communities, std::size_t classes);
};

// One draw s = rng.Uniform(draw). For base 0: keep 0 if s <= z0, otherwise
// output 1. For base 1: keep 1 if s <= z1, otherwise output 0.
int FairDecide(int base, int a, int community, const FairPolicy& policy, const RngStream& rng,
               std::uint64_t draw);

// Inverse CDF over column `base` in ascending class order.
int FairDecideMulticlass(int base, int a, int community, const MulticlassPolicy& policy,
                         const RngStream& rng, std::uint64_t draw);

// Applies the policy to aligned predictions; sample i uses draw i.
std::vector<int> ApplyPolicy(std::span<const int> predictions, std::span<const Record> records,
                             const FairPolicy& policy, const RngStream& rng);
std::vector<int> ApplyPolicy(std::span<const int> predictions, std::span<const Record> records,
                             const MulticlassPolicy& policy, const RngStream& rng);

// Unpacks an optimal solution (variable order of the lp module), clamping
// into [0, 1]. Multi-class columns within 1e-6 of stochastic are
// renormalized; larger deviations throw NonStochasticColumn.
FairPolicy PolicyFromSolution(const LpSolution& solution, std::size_t communities);
MulticlassPolicy MulticlassPolicyFromSolution(const LpSolution& solution,
                                              std::size_t communities, std::size_t classes);

// Throws NonStochasticColumn when some column is off by more than `tolerance`.
void CheckStochastic(const MulticlassPolicy& policy, double tolerance = 1e-9);

nlohmann::json ToJson(const FairPolicy& policy);
nlohmann::json ToJson(const MulticlassPolicy& policy);
FairPolicy FairPolicyFromJson(const nlohmann::json& doc);
MulticlassPolicy MulticlassPolicyFromJson(const nlohmann::json& doc);

}  // namespace fairpost
