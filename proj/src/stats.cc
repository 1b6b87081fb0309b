#include "fairpost/stats.h"

#include <cmath>
#include <cstdint>
#include <string>

#include "fairpost/error.h"

namespace fairpost {
namespace {

void CheckCommunities(std::span<const Record> dataset, std::size_t communities) {
  if (dataset.empty()) Fail(Errc::kEmptyDataset, "no records");
  for (const Record& r : dataset) {
    if (r.community < 0 || static_cast<std::size_t>(r.community) >= communities) {
      Fail(Errc::kCommunityOutOfRange,
           "community " + std::to_string(r.community) + " outside [0, " +
               std::to_string(communities) + ")");
    }
  }
}

std::vector<std::uint64_t> CommunityCounts(std::span<const Record> dataset,
                                           std::size_t communities) {
  std::vector<std::uint64_t> counts(communities, 0);
  for (const Record& r : dataset) ++counts[static_cast<std::size_t>(r.community)];
  for (std::size_t c = 0; c < communities; ++c) {
    if (counts[c] == 0) {
      Fail(Errc::kEmptyCommunity, "community " + std::to_string(c) + " has no samples");
    }
  }
  return counts;
}

}  // namespace

double GroupStatistics::total_mass() const noexcept {
  double s = 0.0;
  for (int a = 0; a < 2; ++a)
    for (const ConfusionCell& c : cell[a]) s += c.mass();
  return s;
}

double GroupStatistics::correct_mass() const noexcept {
  double s = 0.0;
  for (int a = 0; a < 2; ++a)
    for (const ConfusionCell& c : cell[a]) s += c.correct();
  return s;
}

double MulticlassStats::total_mass() const noexcept {
  double s = 0.0;
  for (double v : joint) s += v;
  return s;
}

std::vector<double> EstimateCommunityWeights(std::span<const Record> dataset,
                                             std::size_t communities) {
  CheckCommunities(dataset, communities);
  const auto counts = CommunityCounts(dataset, communities);
  const double total = static_cast<double>(dataset.size());
  std::vector<double> p(communities);
  for (std::size_t c = 0; c < communities; ++c) p[c] = static_cast<double>(counts[c]) / total;
  return p;
}

GroupStatistics EstimateJointStatistics(std::span<const int> predictions,
                                        std::span<const Record> dataset,
                                        std::size_t communities) {
  if (predictions.size() != dataset.size()) {
    Fail(Errc::kLengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(dataset.size()) + " records");
  }
  CheckCommunities(dataset, communities);
  const auto community_counts = CommunityCounts(dataset, communities);

  // counts[a][c][yhat * 2 + y]
  std::array<std::vector<std::array<std::uint64_t, 4>>, 2> counts;
  for (auto& v : counts) v.assign(communities, {0, 0, 0, 0});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Record& r = dataset[i];
    const int yhat = predictions[i];
    if ((yhat != 0 && yhat != 1) || (r.label != 0 && r.label != 1) ||
        (r.sensitive != 0 && r.sensitive != 1)) {
      Fail(Errc::kInvalidArgument, "binary statistics need 0/1 labels, predictions "
                                   "and sensitive values (record " + std::to_string(i) + ")");
    }
    ++counts[r.sensitive][r.community][yhat * 2 + r.label];
  }

  const double total = static_cast<double>(dataset.size());
  GroupStatistics stats;
  stats.p.resize(communities);
  for (std::size_t c = 0; c < communities; ++c) {
    stats.p[c] = static_cast<double>(community_counts[c]) / total;
  }
  std::array<std::uint64_t, 2> qualified = {0, 0};
  for (int a = 0; a < 2; ++a) {
    stats.cell[a].resize(communities);
    for (std::size_t c = 0; c < communities; ++c) {
      const auto& k = counts[a][c];
      ConfusionCell& cell = stats.cell[a][c];
      cell.tn = static_cast<double>(k[0]) / total;
      cell.fn = static_cast<double>(k[1]) / total;
      cell.fp = static_cast<double>(k[2]) / total;
      cell.tp = static_cast<double>(k[3]) / total;
      qualified[a] += k[1] + k[3];
    }
  }
  stats.alpha = static_cast<double>(qualified[0]) / total;
  stats.beta = static_cast<double>(qualified[1]) / total;
  if (qualified[0] == 0 || qualified[1] == 0) {
    Fail(Errc::kDegenerateGroup, "no qualified (Y=1) samples with A=" +
                                     std::string(qualified[0] == 0 ? "0" : "1"));
  }
  return stats;
}

MulticlassStats EstimateMulticlassStatistics(std::span<const int> predictions,
                                             std::span<const Record> dataset,
                                             std::size_t communities,
                                             std::size_t classes) {
  if (predictions.size() != dataset.size()) {
    Fail(Errc::kLengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(dataset.size()) + " records");
  }
  if (classes < 2) Fail(Errc::kInvalidArgument, "need at least two classes");
  CheckCommunities(dataset, communities);
  const auto community_counts = CommunityCounts(dataset, communities);

  MulticlassStats stats;
  stats.classes = classes;
  std::vector<std::uint64_t> counts(classes * classes * 2 * communities, 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Record& r = dataset[i];
    const int j = predictions[i];
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= classes || j < 0 ||
        static_cast<std::size_t>(j) >= classes || (r.sensitive != 0 && r.sensitive != 1)) {
      Fail(Errc::kInvalidArgument, "label, prediction or sensitive value out of range "
                                   "(record " + std::to_string(i) + ")");
    }
    ++counts[stats.Index(static_cast<std::size_t>(r.label), static_cast<std::size_t>(j),
                         r.sensitive, static_cast<std::size_t>(r.community))];
  }
  const double total = static_cast<double>(dataset.size());
  stats.p.resize(communities);
  for (std::size_t c = 0; c < communities; ++c) {
    stats.p[c] = static_cast<double>(community_counts[c]) / total;
  }
  stats.joint.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    stats.joint[i] = static_cast<double>(counts[i]) / total;
  }
  std::array<std::uint64_t, 2> qualified = {0, 0};
  for (int a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < communities; ++c)
      for (std::size_t j = 0; j < classes; ++j) qualified[a] += counts[stats.Index(1, j, a, c)];
  stats.alpha = static_cast<double>(qualified[0]) / total;
  stats.beta = static_cast<double>(qualified[1]) / total;
  if (qualified[0] == 0 || qualified[1] == 0) {
    Fail(Errc::kDegenerateGroup, "no class-1 samples with A=" +
                                     std::string(qualified[0] == 0 ? "0" : "1"));
  }
  return stats;
}

MulticlassStats ToMulticlass(const GroupStatistics& stats) {
  MulticlassStats out;
  out.classes = 2;
  out.p = stats.p;
  out.alpha = stats.alpha;
  out.beta = stats.beta;
  const std::size_t k = stats.communities();
  out.joint.assign(4 * 2 * k, 0.0);
  for (int a = 0; a < 2; ++a) {
    for (std::size_t c = 0; c < k; ++c) {
      const ConfusionCell& cell = stats.cell[a][c];
      out.joint[out.Index(0, 0, a, c)] = cell.tn;
      out.joint[out.Index(1, 0, a, c)] = cell.fn;
      out.joint[out.Index(0, 1, a, c)] = cell.fp;
      out.joint[out.Index(1, 1, a, c)] = cell.tp;
    }
  }
  return out;
}

GroupStatistics ToBinary(const MulticlassStats& stats) {
  if (stats.classes != 2) {
    Fail(Errc::kInvalidArgument, "only two-class statistics have a binary encoding");
  }
  GroupStatistics out;
  out.p = stats.p;
  out.alpha = stats.alpha;
  out.beta = stats.beta;
  const std::size_t k = stats.communities();
  for (int a = 0; a < 2; ++a) {
    out.cell[a].resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      ConfusionCell& cell = out.cell[a][c];
      cell.tn = stats.at(0, 0, a, c);
      cell.fn = stats.at(1, 0, a, c);
      cell.fp = stats.at(0, 1, a, c);
      cell.tp = stats.at(1, 1, a, c);
    }
  }
  return out;
}

bool SatisfiesInvariants(const GroupStatistics& stats, double tolerance) {
  const std::size_t k = stats.communities();
  if (stats.cell[0].size() != k || stats.cell[1].size() != k) return false;
  double alpha = 0.0;
  double beta = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double community = 0.0;
    for (int a = 0; a < 2; ++a) {
      const ConfusionCell& cell = stats.cell[a][c];
      if (cell.fn < 0 || cell.tn < 0 || cell.fp < 0 || cell.tp < 0) return false;
      community += cell.mass();
    }
    if (std::abs(community - stats.p[c]) > tolerance) return false;
    alpha += stats.cell[0][c].qualified();
    beta += stats.cell[1][c].qualified();
  }
  return std::abs(stats.total_mass() - 1.0) <= tolerance &&
         std::abs(alpha - stats.alpha) <= tolerance && std::abs(beta - stats.beta) <= tolerance;
}

nlohmann::json ToJson(const GroupStatistics& stats) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t c = 0; c < stats.communities(); ++c) {
    for (int a = 0; a < 2; ++a) {
      const ConfusionCell& cell = stats.cell[a][c];
      cells.push_back({{"community", c}, {"sensitive", a}, {"fn", cell.fn}, {"tn", cell.tn},
                       {"fp", cell.fp}, {"tp", cell.tp}});
    }
  }
  return {{"kind", "binary"}, {"communities", stats.communities()}, {"p", stats.p},
          {"alpha", stats.alpha}, {"beta", stats.beta}, {"cells", cells}};
}

nlohmann::json ToJson(const MulticlassStats& stats) {
  nlohmann::json cells = nlohmann::json::array();
  const std::size_t n = stats.classes;
  for (std::size_t c = 0; c < stats.communities(); ++c) {
    for (int a = 0; a < 2; ++a) {
      nlohmann::json matrix = nlohmann::json::array();
      for (std::size_t k = 0; k < n; ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < n; ++j) row.push_back(stats.at(k, j, a, c));
        matrix.push_back(row);
      }
      cells.push_back({{"community", c}, {"sensitive", a}, {"joint", matrix}});
    }
  }
  return {{"kind", "multiclass"}, {"communities", stats.communities()}, {"classes", n},
          {"p", stats.p}, {"alpha", stats.alpha}, {"beta", stats.beta}, {"cells", cells}};
}

GroupStatistics GroupStatisticsFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "binary") Fail(Errc::kSchemaViolation, "not binary statistics");
    GroupStatistics stats;
    stats.p = doc.at("p").get<std::vector<double>>();
    const std::size_t k = stats.p.size();
    if (k == 0 || doc.at("communities").get<std::size_t>() != k) {
      Fail(Errc::kSchemaViolation, "statistics: community count disagrees with p");
    }
    stats.alpha = doc.at("alpha").get<double>();
    stats.beta = doc.at("beta").get<double>();
    stats.cell[0].resize(k);
    stats.cell[1].resize(k);
    std::vector<int> seen(2 * k, 0);
    for (const auto& cell : doc.at("cells")) {
      const auto c = cell.at("community").get<std::size_t>();
      const int a = cell.at("sensitive").get<int>();
      if (c >= k || (a != 0 && a != 1)) Fail(Errc::kSchemaViolation, "statistics: bad cell index");
      ++seen[c * 2 + static_cast<std::size_t>(a)];
      ConfusionCell& out = stats.cell[a][c];
      out.fn = cell.at("fn").get<double>();
      out.tn = cell.at("tn").get<double>();
      out.fp = cell.at("fp").get<double>();
      out.tp = cell.at("tp").get<double>();
    }
    for (int count : seen) {
      if (count != 1) Fail(Errc::kSchemaViolation, "statistics: each (community, sensitive) cell must appear once");
    }
    return stats;
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, std::string("statistics: ") + e.what());
  }
}

MulticlassStats MulticlassStatsFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("kind") != "multiclass") Fail(Errc::kSchemaViolation, "not multiclass statistics");
    MulticlassStats stats;
    stats.classes = doc.at("classes").get<std::size_t>();
    stats.p = doc.at("p").get<std::vector<double>>();
    const std::size_t k = stats.p.size();
    const std::size_t n = stats.classes;
    if (k == 0 || n < 2 || doc.at("communities").get<std::size_t>() != k) {
      Fail(Errc::kSchemaViolation, "statistics: bad community or class count");
    }
    stats.alpha = doc.at("alpha").get<double>();
    stats.beta = doc.at("beta").get<double>();
    stats.joint.assign(n * n * 2 * k, 0.0);
    std::vector<int> seen(2 * k, 0);
    for (const auto& cell : doc.at("cells")) {
      const auto c = cell.at("community").get<std::size_t>();
      const int a = cell.at("sensitive").get<int>();
      if (c >= k || (a != 0 && a != 1)) Fail(Errc::kSchemaViolation, "statistics: bad cell index");
      ++seen[c * 2 + static_cast<std::size_t>(a)];
      const auto matrix = cell.at("joint").get<std::vector<std::vector<double>>>();
      if (matrix.size() != n) Fail(Errc::kSchemaViolation, "statistics: joint matrix has wrong size");
      for (std::size_t y = 0; y < n; ++y) {
        if (matrix[y].size() != n) Fail(Errc::kSchemaViolation, "statistics: joint matrix has wrong size");
        for (std::size_t j = 0; j < n; ++j) stats.joint[stats.Index(y, j, a, c)] = matrix[y][j];
      }
    }
    for (int count : seen) {
      if (count != 1) Fail(Errc::kSchemaViolation, "statistics: each (community, sensitive) cell must appear once");
    }
    return stats;
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, std::string("statistics: ") + e.what());
  }
}

}  // namespace fairpost
