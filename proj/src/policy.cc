#include "fairpost/policy.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairpost/error.h"
#include "fairpost/lp.h"

namespace fairpost {
namespace {

void CheckCell(int a, int community, std::size_t communities) {
  if (community < 0 || static_cast<std::size_t>(community) >= communities) {
    Fail(Errc::kCommunityOutOfRange, "community " + std::to_string(community) + " outside [0, " +
                                         std::to_string(communities) + ")");
  }
  if (a != 0 && a != 1) Fail(Errc::kInvalidArgument, "sensitive value must be 0 or 1");
}

void RequireOptimal(const LpSolution& solution) {
  if (!solution.optimal()) {
    Fail(Errc::kNotOptimal,
         "cannot build a policy from a " + std::string(SolveStatusName(solution.status)) + " solution");
  }
}

std::vector<double> Clamped(const std::vector<double>& z) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::clamp(z[i], 0.0, 1.0);
  return out;
}

}  // namespace

FairPolicy FairPolicy::Identity(std::size_t communities) {
  return {communities, std::vector<double>(4 * communities, 1.0)};
}

double FairPolicy::accept(int base, int a, std::size_t c) const {
  return z[VariableIndex(c, a, base)];
}

MulticlassPolicy MulticlassPolicy::Identity(std::size_t communities, std::size_t classes) {
  MulticlassPolicy p{communities, classes, std::vector<double>(classes * classes * 2 * communities, 0.0)};
  for (std::size_t c = 0; c < communities; ++c)
    for (int a = 0; a < 2; ++a)
      for (std::size_t j = 0; j < classes; ++j) p.m[p.Index(j, j, a, c)] = 1.0;
  return p;
}

int FairDecide(int base, int a, int community, const FairPolicy& policy, const RngStream& rng,
               std::uint64_t draw) {
  CheckCell(a, community, policy.communities);
  const double s = rng.Uniform(draw);
  const auto c = static_cast<std::size_t>(community);
  if (base == 0) {
    return s <= policy.accept(0, a, c) ? 0 : 1;
  }
  if (base == 1) {
    return s <= policy.accept(1, a, c) ? 1 : 0;
  }
  Fail(Errc::kInvalidArgument, "binary base prediction must be 0 or 1");
}

int FairDecideMulticlass(int base, int a, int community, const MulticlassPolicy& policy,
                         const RngStream& rng, std::uint64_t draw) {
  CheckCell(a, community, policy.communities);
  if (base < 0 || static_cast<std::size_t>(base) >= policy.classes) {
    Fail(Errc::kInvalidArgument, "base prediction " + std::to_string(base) + " out of range");
  }
  const auto c = static_cast<std::size_t>(community);
  const auto j = static_cast<std::size_t>(base);
  double sum = 0.0;
  for (std::size_t k = 0; k < policy.classes; ++k) sum += policy.at(k, j, a, c);
  if (std::abs(sum - 1.0) > 1e-9) {
    Fail(Errc::kNonStochasticColumn, "column sums to " + std::to_string(sum));
  }
  const double s = rng.Uniform(draw);
  double cumulative = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < policy.classes; ++k) {
    const double w = policy.at(k, j, a, c);
    if (w <= 0.0) continue;
    last = k;
    cumulative += w;
    if (s <= cumulative) return static_cast<int>(k);
  }
  // s landed above a column sum that is 1 only up to rounding.
  return static_cast<int>(last);
}

std::vector<int> ApplyPolicy(std::span<const int> predictions, std::span<const Record> records,
                             const FairPolicy& policy, const RngStream& rng) {
  if (predictions.size() != records.size()) Fail(Errc::kLengthMismatch, "predictions vs records");
  std::vector<int> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i] = FairDecide(predictions[i], records[i].sensitive, records[i].community, policy, rng, i);
  }
  return out;
}

std::vector<int> ApplyPolicy(std::span<const int> predictions, std::span<const Record> records,
                             const MulticlassPolicy& policy, const RngStream& rng) {
  if (predictions.size() != records.size()) Fail(Errc::kLengthMismatch, "predictions vs records");
  std::vector<int> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i] = FairDecideMulticlass(predictions[i], records[i].sensitive, records[i].community,
                                  policy, rng, i);
  }
  return out;
}

FairPolicy PolicyFromSolution(const LpSolution& solution, std::size_t communities) {
  RequireOptimal(solution);
  if (solution.z.size() != 4 * communities) {
    Fail(Errc::kUnpackDimensionMismatch, "expected " + std::to_string(4 * communities) +
                                             " variables, got " + std::to_string(solution.z.size()));
  }
  return {communities, Clamped(solution.z)};
}

MulticlassPolicy MulticlassPolicyFromSolution(const LpSolution& solution, std::size_t communities,
                                              std::size_t classes) {
  RequireOptimal(solution);
  const std::size_t expected = classes * classes * 2 * communities;
  if (solution.z.size() != expected) {
    Fail(Errc::kUnpackDimensionMismatch, "expected " + std::to_string(expected) +
                                             " variables, got " + std::to_string(solution.z.size()));
  }
  MulticlassPolicy p{communities, classes, Clamped(solution.z)};
  for (std::size_t c = 0; c < communities; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < classes; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < classes; ++k) sum += p.at(k, j, a, c);
        if (std::abs(sum - 1.0) > 1e-6 || sum <= 0.0) {
          Fail(Errc::kNonStochasticColumn, "column sums to " + std::to_string(sum));
        }
        for (std::size_t k = 0; k < classes; ++k) p.m[p.Index(k, j, a, c)] /= sum;
      }
    }
  }
  return p;
}

void CheckStochastic(const MulticlassPolicy& policy, double tolerance) {
  for (std::size_t c = 0; c < policy.communities; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < policy.classes; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < policy.classes; ++k) {
          const double v = policy.at(k, j, a, c);
          if (v < 0.0 || v > 1.0) Fail(Errc::kNonStochasticColumn, "entry outside [0, 1]");
          sum += v;
        }
        if (std::abs(sum - 1.0) > tolerance) {
          Fail(Errc::kNonStochasticColumn, "column sums to " + std::to_string(sum));
        }
      }
    }
  }
}

nlohmann::json ToJson(const FairPolicy& policy) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t c = 0; c < policy.communities; ++c) {
    for (int a = 0; a < 2; ++a) {
      cells.push_back({{"community", c},
                       {"sensitive", a},
                       {"accept_when_0", policy.accept(0, a, c)},
                       {"accept_when_1", policy.accept(1, a, c)}});
    }
  }
  return {{"kind", "binary"}, {"communities", policy.communities}, {"cells", cells}};
}

nlohmann::json ToJson(const MulticlassPolicy& policy) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t c = 0; c < policy.communities; ++c) {
    for (int a = 0; a < 2; ++a) {
      nlohmann::json matrix = nlohmann::json::array();
      for (std::size_t k = 0; k < policy.classes; ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < policy.classes; ++j) row.push_back(policy.at(k, j, a, c));
        matrix.push_back(row);
      }
      cells.push_back({{"community", c}, {"sensitive", a}, {"matrix", matrix}});
    }
  }
  return {{"kind", "multiclass"},
          {"communities", policy.communities},
          {"classes", policy.classes},
          {"cells", cells}};
}

FairPolicy FairPolicyFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "binary") Fail(Errc::kSchemaViolation, "not a binary policy");
    FairPolicy p = FairPolicy::Identity(doc.at("communities").get<std::size_t>());
    for (const auto& cell : doc.at("cells")) {
      const auto c = cell.at("community").get<std::size_t>();
      const int a = cell.at("sensitive").get<int>();
      if (c >= p.communities || (a != 0 && a != 1)) Fail(Errc::kSchemaViolation, "bad policy cell");
      p.z[VariableIndex(c, a, 0)] = cell.at("accept_when_0").get<double>();
      p.z[VariableIndex(c, a, 1)] = cell.at("accept_when_1").get<double>();
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, std::string("policy: ") + e.what());
  }
}

MulticlassPolicy MulticlassPolicyFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "multiclass") Fail(Errc::kSchemaViolation, "not a multi-class policy");
    MulticlassPolicy p = MulticlassPolicy::Identity(doc.at("communities").get<std::size_t>(),
                                                    doc.at("classes").get<std::size_t>());
    for (const auto& cell : doc.at("cells")) {
      const auto c = cell.at("community").get<std::size_t>();
      const int a = cell.at("sensitive").get<int>();
      if (c >= p.communities || (a != 0 && a != 1)) Fail(Errc::kSchemaViolation, "bad policy cell");
      const auto& matrix = cell.at("matrix");
      for (std::size_t k = 0; k < p.classes; ++k)
        for (std::size_t j = 0; j < p.classes; ++j)
          p.m[p.Index(k, j, a, c)] = matrix.at(k).at(j).get<double>();
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, std::string("policy: ") + e.what());
  }
}

}  // namespace fairpost
