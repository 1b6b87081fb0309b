#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fairpost/record.h"
#include "json.hpp"

namespace fairpost {

// Joint probabilities Pr(Yhat, Y, A=a, C=c) for one (a, c) cell.
struct ConfusionCell {
  double fn = 0.0;  // Yhat=0, Y=1
  double tn = 0.0;  // Yhat=0, Y=0
  double fp = 0.0;  // Yhat=1, Y=0
  double tp = 0.0;  // Yhat=1, Y=1

  double mass() const noexcept { return fn + tn + fp + tp; }
  double correct() const noexcept { return tn + tp; }
  double qualified() const noexcept { return fn + tp; }
};

// Population statistics of a binary base predictor over a community group.
// cell[a][c] holds the joint quadruple; p[c] = Pr(C=c); alpha = Pr(Y=1, A=0);
// beta = Pr(Y=1, A=1).
struct GroupStatistics {
  std::vector<double> p;
  std::array<std::vector<ConfusionCell>, 2> cell;
  double alpha = 0.0;
  double beta = 0.0;

  std::size_t communities() const noexcept { return p.size(); }
  double total_mass() const noexcept;
  double correct_mass() const noexcept;
};

// Joint statistics p_{kj}^{ac} = Pr(Y=k, Yhat=j, A=a, C=c) for N classes.
struct MulticlassStats {
  std::size_t classes = 0;
  std::vector<double> p;
  std::vector<double> joint;  // indexed by Index(k, j, a, c)
  double alpha = 0.0;
  double beta = 0.0;

  std::size_t communities() const noexcept { return p.size(); }
  std::size_t Index(std::size_t k, std::size_t j, int a, std::size_t c) const noexcept {
    return ((c * 2 + static_cast<std::size_t>(a)) * classes + j) * classes + k;
  }
  double at(std::size_t k, std::size_t j, int a, std::size_t c) const noexcept {
    return joint[Index(k, j, a, c)];
  }
  double total_mass() const noexcept;
};

// p_c = (records in community c) / (total records). Throws EmptyDataset or
// EmptyCommunity(c) for any c in [0, communities) with no records.
std::vector<double> EstimateCommunityWeights(std::span<const Record> dataset,
                                             std::size_t communities);

// Binary confusion statistics. predictions[i] is the base prediction for
// dataset[i]. Throws LengthMismatch, EmptyDataset, EmptyCommunity and
// DegenerateGroup (alpha or beta is zero).
GroupStatistics EstimateJointStatistics(std::span<const int> predictions,
                                        std::span<const Record> dataset,
                                        std::size_t communities);

MulticlassStats EstimateMulticlassStatistics(std::span<const int> predictions,
                                             std::span<const Record> dataset,
                                             std::size_t communities,
                                             std::size_t classes);

// Encodings of the same binary statistics: TP = joint[1][1], FN = joint[1][0],
// FP = joint[0][1], TN = joint[0][0].
MulticlassStats ToMulticlass(const GroupStatistics& stats);
GroupStatistics ToBinary(const MulticlassStats& stats);

// Checks mass, marginal and alpha/beta invariants to `tolerance`.
bool SatisfiesInvariants(const GroupStatistics& stats, double tolerance = 1e-9);

// JSON documents tagged "kind": "binary" or "multiclass". Readers throw
// SchemaViolation.
nlohmann::json ToJson(const GroupStatistics& stats);
nlohmann::json ToJson(const MulticlassStats& stats);
GroupStatistics GroupStatisticsFromJson(const nlohmann::json& doc);
MulticlassStats MulticlassStatsFromJson(const nlohmann::json& doc);

}  // namespace fairpost
