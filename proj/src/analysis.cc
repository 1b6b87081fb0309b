#include "fairpost/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "fairpost/error.h"

namespace fairpost {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<double> Rate(double num, double den) {
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

void FinishDisparity(FairnessReport& r, const std::vector<double>& weights) {
  double avg = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) avg += weights[c] * r.per_community_acc[c];
  r.avg_acc = avg;
  const auto [lo, hi] = std::minmax_element(r.per_community_acc.begin(), r.per_community_acc.end());
  r.accuracy_disparity = *hi - *lo;
  double mean = 0.0;
  for (double acc : r.per_community_acc) mean += acc;
  mean /= static_cast<double>(r.per_community_acc.size());
  r.max_error_deviation = 0.0;
  for (double acc : r.per_community_acc) {
    r.max_error_deviation = std::max(r.max_error_deviation, std::abs(acc - mean));
  }
}

// Per-(a, c) tallies shared by the binary and multi-class empirical paths.
struct Tally {
  std::vector<std::uint64_t> total;        // per community
  std::vector<std::uint64_t> correct;      // per community
  std::vector<std::uint64_t> qualified;    // [c * 2 + a]
  std::vector<std::uint64_t> hit;          // [c * 2 + a], predicted 1 among qualified
};

Tally Count(std::span<const int> predictions, std::span<const Record> records,
            std::size_t communities) {
  if (predictions.size() != records.size()) {
    Fail(Errc::kLengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(records.size()) + " records");
  }
  if (records.empty()) Fail(Errc::kEmptyDataset, "no records to evaluate");
  Tally t{std::vector<std::uint64_t>(communities, 0), std::vector<std::uint64_t>(communities, 0),
          std::vector<std::uint64_t>(2 * communities, 0), std::vector<std::uint64_t>(2 * communities, 0)};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    if (r.community < 0 || static_cast<std::size_t>(r.community) >= communities) {
      Fail(Errc::kCommunityOutOfRange, "community " + std::to_string(r.community));
    }
    const auto c = static_cast<std::size_t>(r.community);
    ++t.total[c];
    if (predictions[i] == r.label) ++t.correct[c];
    if (r.label == 1) {
      ++t.qualified[c * 2 + r.sensitive];
      if (predictions[i] == 1) ++t.hit[c * 2 + r.sensitive];
    }
  }
  for (std::size_t c = 0; c < communities; ++c) {
    if (t.total[c] == 0) Fail(Errc::kEmptyCommunity, "community " + std::to_string(c) + " has no samples");
  }
  return t;
}

FairnessReport FromTally(const Tally& t, std::size_t communities) {
  FairnessReport r;
  std::uint64_t total = 0;
  std::uint64_t qualified[2] = {0, 0};
  std::uint64_t hit[2] = {0, 0};
  r.per_community_acc.resize(communities);
  r.per_community_eod.resize(communities);
  for (std::size_t c = 0; c < communities; ++c) {
    total += t.total[c];
    r.per_community_acc[c] = static_cast<double>(t.correct[c]) / static_cast<double>(t.total[c]);
    const auto tpr0 = Rate(static_cast<double>(t.hit[c * 2]), static_cast<double>(t.qualified[c * 2]));
    const auto tpr1 =
        Rate(static_cast<double>(t.hit[c * 2 + 1]), static_cast<double>(t.qualified[c * 2 + 1]));
    if (tpr0 && tpr1) r.per_community_eod[c] = *tpr0 - *tpr1;
    for (int a = 0; a < 2; ++a) {
      qualified[a] += t.qualified[c * 2 + a];
      hit[a] += t.hit[c * 2 + a];
    }
  }
  if (qualified[0] == 0 || qualified[1] == 0) {
    Fail(Errc::kDegenerateGroup, "no qualified samples for one sensitive value");
  }
  r.eod = static_cast<double>(hit[0]) / static_cast<double>(qualified[0]) -
          static_cast<double>(hit[1]) / static_cast<double>(qualified[1]);
  std::vector<double> weights(communities);
  for (std::size_t c = 0; c < communities; ++c) {
    weights[c] = static_cast<double>(t.total[c]) / static_cast<double>(total);
  }
  FinishDisparity(r, weights);
  return r;
}

}  // namespace

FairnessReport EvaluatePredictions(std::span<const int> predictions,
                                   std::span<const Record> records, std::size_t communities) {
  for (std::size_t i = 0; i < predictions.size() && i < records.size(); ++i) {
    if ((predictions[i] != 0 && predictions[i] != 1) || (records[i].label != 0 && records[i].label != 1)) {
      Fail(Errc::kInvalidArgument, "binary evaluation needs 0/1 labels and predictions");
    }
  }
  return FromTally(Count(predictions, records, communities), communities);
}

FairnessReport EvaluateMulticlassPredictions(std::span<const int> predictions,
                                             std::span<const Record> records,
                                             std::size_t communities, std::size_t classes) {
  for (std::size_t i = 0; i < predictions.size() && i < records.size(); ++i) {
    if (predictions[i] < 0 || static_cast<std::size_t>(predictions[i]) >= classes) {
      Fail(Errc::kInvalidArgument, "prediction out of class range");
    }
  }
  return FromTally(Count(predictions, records, communities), communities);
}

FairnessReport EvaluateStatistics(const GroupStatistics& stats) {
  const std::size_t k = stats.communities();
  FairnessReport r;
  r.per_community_acc.resize(k);
  r.per_community_eod.resize(k);
  double tp[2] = {0.0, 0.0};
  double qualified[2] = {0.0, 0.0};
  for (std::size_t c = 0; c < k; ++c) {
    const ConfusionCell& s0 = stats.cell[0][c];
    const ConfusionCell& s1 = stats.cell[1][c];
    r.per_community_acc[c] = (s0.correct() + s1.correct()) / stats.p[c];
    const auto tpr0 = Rate(s0.tp, s0.qualified());
    const auto tpr1 = Rate(s1.tp, s1.qualified());
    if (tpr0 && tpr1) r.per_community_eod[c] = *tpr0 - *tpr1;
    for (int a = 0; a < 2; ++a) {
      tp[a] += stats.cell[a][c].tp;
      qualified[a] += stats.cell[a][c].qualified();
    }
  }
  if (!(stats.alpha > 0.0) || !(stats.beta > 0.0)) {
    Fail(Errc::kDegenerateGroup, "alpha and beta must be positive");
  }
  r.eod = tp[0] / stats.alpha - tp[1] / stats.beta;
  FinishDisparity(r, stats.p);
  return r;
}

FairnessReport EvaluateStatistics(const MulticlassStats& stats) {
  const std::size_t k = stats.communities();
  const std::size_t n = stats.classes;
  FairnessReport r;
  r.per_community_acc.assign(k, 0.0);
  r.per_community_eod.resize(k);
  double hit[2] = {0.0, 0.0};
  for (std::size_t c = 0; c < k; ++c) {
    double correct = 0.0;
    double cell_hit[2] = {0.0, 0.0};
    double cell_qualified[2] = {0.0, 0.0};
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < n; ++j) {
        correct += stats.at(j, j, a, c);
        cell_qualified[a] += stats.at(1, j, a, c);
      }
      cell_hit[a] = stats.at(1, 1, a, c);
      hit[a] += cell_hit[a];
    }
    r.per_community_acc[c] = correct / stats.p[c];
    const auto tpr0 = Rate(cell_hit[0], cell_qualified[0]);
    const auto tpr1 = Rate(cell_hit[1], cell_qualified[1]);
    if (tpr0 && tpr1) r.per_community_eod[c] = *tpr0 - *tpr1;
  }
  if (!(stats.alpha > 0.0) || !(stats.beta > 0.0)) {
    Fail(Errc::kDegenerateGroup, "alpha and beta must be positive");
  }
  r.eod = hit[0] / stats.alpha - hit[1] / stats.beta;
  FinishDisparity(r, stats.p);
  return r;
}

GroupStatistics PostProcessedStatistics(const GroupStatistics& stats, const FairPolicy& policy) {
  const std::size_t k = stats.communities();
  if (policy.communities != k) Fail(Errc::kDimensionMismatch, "policy and statistics disagree on K");
  GroupStatistics out = stats;
  for (std::size_t c = 0; c < k; ++c) {
    for (int a = 0; a < 2; ++a) {
      const ConfusionCell& q = stats.cell[a][c];
      const double z0 = policy.accept(0, a, c);
      const double z1 = policy.accept(1, a, c);
      ConfusionCell& o = out.cell[a][c];
      o.tp = q.tp * z1 + q.fn * (1.0 - z0);
      o.fn = q.fn * z0 + q.tp * (1.0 - z1);
      o.tn = q.tn * z0 + q.fp * (1.0 - z1);
      o.fp = q.fp * z1 + q.tn * (1.0 - z0);
    }
  }
  return out;
}

MulticlassStats PostProcessedStatistics(const MulticlassStats& stats, const MulticlassPolicy& policy) {
  const std::size_t k = stats.communities();
  const std::size_t n = stats.classes;
  if (policy.communities != k || policy.classes != n) {
    Fail(Errc::kDimensionMismatch, "policy and statistics disagree on K or N");
  }
  MulticlassStats out = stats;
  std::fill(out.joint.begin(), out.joint.end(), 0.0);
  // Pr(Y=y, out=k) = sum_j Pr(Y=y, base=j) M[k][j].
  for (std::size_t c = 0; c < k; ++c)
    for (int a = 0; a < 2; ++a)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t j = 0; j < n; ++j) {
          const double mass = stats.at(y, j, a, c);
          if (mass == 0.0) continue;
          for (std::size_t kk = 0; kk < n; ++kk) {
            out.joint[out.Index(y, kk, a, c)] += mass * policy.at(kk, j, a, c);
          }
        }
  return out;
}

double AccuracyLoss(const LpProblem& lp, const LpSolution& solution) {
  if (!solution.optimal()) {
    Fail(Errc::kNotOptimal, "accuracy loss needs an optimal solution, got " +
                                std::string(SolveStatusName(solution.status)));
  }
  if (solution.z.size() != lp.objective.size()) {
    Fail(Errc::kDimensionMismatch, "solution does not match the program");
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < lp.objective.size(); ++j) {
    loss += lp.objective[j] * (solution.z[j] - 1.0);
  }
  return loss;
}

std::vector<double> SymmetricEigenvalues(Matrix a, double tolerance) {
  const std::size_t n = a.rows();
  if (a.cols() != n) Fail(Errc::kInvalidArgument, "eigenvalues need a square matrix");
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  const double target = tolerance * std::max(1.0, scale);
  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > kMaxSweeps) {
      Fail(Errc::kSingularityFailure, "Jacobi iteration did not converge");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = cs * arp - sn * arq;
          a(r, q) = sn * arp + cs * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = cs * apr - sn * aqr;
          a(q, r) = sn * apr + cs * aqr;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double SmallestSingularValue(const Matrix& m) {
  const std::size_t rows = m.rows();
  if (rows == 0 || rows > m.cols()) {
    Fail(Errc::kInvalidArgument, "smallest singular value needs 0 < rows <= cols");
  }
  for (double v : m.data())
    if (!std::isfinite(v)) Fail(Errc::kInvalidArgument, "non-finite matrix entry");
  Matrix gram(rows, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = i; j < rows; ++j) gram(i, j) = gram(j, i) = Dot(m.row(i), m.row(j));
  const std::vector<double> eig = SymmetricEigenvalues(gram);
  const double threshold =
      static_cast<double>(rows) * std::numeric_limits<double>::epsilon() * std::max(eig.back(), 0.0);
  if (eig.front() <= threshold) return 0.0;
  return std::sqrt(eig.front());
}

EqualizabilityBound ComputeEqualizabilityBound(const GroupStatistics& stats) {
  const StandardLp st = ToStandardForm(BuildStrictLp(stats));
  EqualizabilityBound b;
  for (double c : st.objective) b.c_inf_norm = std::max(b.c_inf_norm, std::abs(c));
  const std::vector<double> atb = st.matrix.Transpose().Multiply(st.rhs);
  b.atb_norm = std::sqrt(Dot(atb, atb));
  b.sigma_min = SmallestSingularValue(st.matrix);
  b.base_correct_mass = stats.correct_mass();
  const double ratio = b.sigma_min > 0.0 ? b.c_inf_norm * b.atb_norm / (b.sigma_min * b.sigma_min)
                                         : (b.c_inf_norm * b.atb_norm > 0.0 ? kInf : 0.0);
  b.bound = -ratio + b.base_correct_mass;
  b.vacuous = !(b.bound > 0.0);
  return b;
}

LocalFairnessGap ComputeLocalFairnessGap(std::span<const int> predictions,
                                         std::span<const Record> records,
                                         std::size_t communities) {
  const FairnessReport r = EvaluatePredictions(predictions, records, communities);
  return {r.eod, r.per_community_eod};
}

namespace {

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> OptionalFromJson(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

// JSON has no infinities; they are written as strings.
nlohmann::json FiniteOrString(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json ToJson(const FairnessReport& report) {
  nlohmann::json eod = nlohmann::json::array();
  for (const auto& e : report.per_community_eod) eod.push_back(OptionalJson(e));
  return {{"avg_acc", report.avg_acc},
          {"eod", report.eod},
          {"per_community_acc", report.per_community_acc},
          {"accuracy_disparity", report.accuracy_disparity},
          {"max_error_deviation", report.max_error_deviation},
          {"per_community_eod", eod},
          {"estimated_accuracy_loss", OptionalJson(report.estimated_accuracy_loss)},
          {"empirical_accuracy_loss", OptionalJson(report.empirical_accuracy_loss)}};
}

FairnessReport FairnessReportFromJson(const nlohmann::json& doc) {
  try {
    FairnessReport r;
    r.avg_acc = doc.at("avg_acc").get<double>();
    r.eod = doc.at("eod").get<double>();
    r.per_community_acc = doc.at("per_community_acc").get<std::vector<double>>();
    r.accuracy_disparity = doc.at("accuracy_disparity").get<double>();
    r.max_error_deviation = doc.at("max_error_deviation").get<double>();
    for (const auto& e : doc.at("per_community_eod")) r.per_community_eod.push_back(OptionalFromJson(e));
    r.estimated_accuracy_loss = OptionalFromJson(doc.at("estimated_accuracy_loss"));
    r.empirical_accuracy_loss = OptionalFromJson(doc.at("empirical_accuracy_loss"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, std::string("fairness report: ") + e.what());
  }
}

nlohmann::json ToJson(const EqualizabilityBound& bound) {
  return {{"bound", FiniteOrString(bound.bound)},
          {"sigma_min", bound.sigma_min},
          {"c_inf_norm", bound.c_inf_norm},
          {"atb_norm", bound.atb_norm},
          {"base_correct_mass", bound.base_correct_mass},
          {"vacuous", bound.vacuous}};
}

}  // namespace fairpost
