#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fairpost/lp.h"
#include "fairpost/matrix.h"
#include "fairpost/policy.h"
#include "fairpost/record.h"
#include "fairpost/solver.h"
#include "fairpost/stats.h"
#include "json.hpp"

namespace fairpost {

// Metrics of one predictor. Per-community EOD entries are empty when a
// community lacks qualified samples for some sensitive value. The loss
// fields are filled in only for post-processed predictors.
struct FairnessReport {
  double avg_acc = 0.0;
  double eod = 0.0;
  std::vector<double> per_community_acc;
  double accuracy_disparity = 0.0;
  // Largest |community error - mean community error|: the quantity the
  // relaxed program bounds by delta.
  double max_error_deviation = 0.0;
  std::vector<std::optional<double>> per_community_eod;
  std::optional<double> estimated_accuracy_loss;
  std::optional<double> empirical_accuracy_loss;
};

// Empirical path: counts over a finite sample. Binary labels.
FairnessReport EvaluatePredictions(std::span<const int> predictions,
                                   std::span<const Record> records, std::size_t communities);
// Multi-class: EOD is the class-1 true-positive-rate gap between A=0 and A=1.
FairnessReport EvaluateMulticlassPredictions(std::span<const int> predictions,
                                             std::span<const Record> records,
                                             std::size_t communities, std::size_t classes);

// Analytic path: exact population metrics from statistics.
FairnessReport EvaluateStatistics(const GroupStatistics& stats);
FairnessReport EvaluateStatistics(const MulticlassStats& stats);

// Expected confusion statistics after applying a policy to the base
// predictor described by `stats`.
GroupStatistics PostProcessedStatistics(const GroupStatistics& stats, const FairPolicy& policy);
MulticlassStats PostProcessedStatistics(const MulticlassStats& stats, const MulticlassPolicy& policy);

inline FairnessReport EvaluatePolicy(const GroupStatistics& stats, const FairPolicy& policy) {
  return EvaluateStatistics(PostProcessedStatistics(stats, policy));
}
inline FairnessReport EvaluatePolicy(const MulticlassStats& stats, const MulticlassPolicy& policy) {
  return EvaluateStatistics(PostProcessedStatistics(stats, policy));
}

// c.(z - 1): the accuracy given up by the post-processor (negative of the
// change in error). Throws NotOptimal for non-optimal solutions.
double AccuracyLoss(const LpProblem& lp, const LpSolution& solution);

struct EqualizabilityBound {
  double bound = 0.0;
  double sigma_min = 0.0;
  double c_inf_norm = 0.0;
  double atb_norm = 0.0;  // ||Abar^T bbar||_2
  double base_correct_mass = 0.0;
  bool vacuous = false;  // bound <= 0 (no error rate is excluded)
};

// Necessary condition on the error of any strictly fair predictor:
//   bound = -||cbar||_inf ||Abar^T bbar||_2 / sigma_min^2 + sum(TN + TP)
// with Abar, bbar, cbar the slack-augmented program. A rank-deficient Abar
// has sigma_min = 0 and gives bound = -infinity.
EqualizabilityBound ComputeEqualizabilityBound(const GroupStatistics& stats);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Throws SingularityFailure if the off-diagonal norm does not drop below
// `tolerance` within the sweep limit.
std::vector<double> SymmetricEigenvalues(Matrix a, double tolerance = 1e-12);

// sqrt(lambda_min(M M^T)) for rows <= cols. Eigenvalues below the numerical
// rank threshold rows * eps * lambda_max are treated as exactly zero.
double SmallestSingularValue(const Matrix& m);

struct LocalFairnessGap {
  double global_eod = 0.0;
  std::vector<std::optional<double>> community_eod;
};

LocalFairnessGap ComputeLocalFairnessGap(std::span<const int> predictions,
                                         std::span<const Record> records,
                                         std::size_t communities);

nlohmann::json ToJson(const FairnessReport& report);
FairnessReport FairnessReportFromJson(const nlohmann::json& doc);
nlohmann::json ToJson(const EqualizabilityBound& bound);

}  // namespace fairpost
