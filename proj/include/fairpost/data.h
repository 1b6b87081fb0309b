#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairpost/record.h"

namespace fairpost {

// Header plus string cells; line[i] is the 1-based source line of rows[i].
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;

  // Throws SchemaViolation for an unknown column.
  std::size_t Column(const std::string& name) const;
};

// Comma-separated values with a header row. Quoted fields may contain
// commas and doubled quotes; unquoted fields are trimmed. Throws
// ParseError(line, column) and SchemaViolation on duplicate header names.
RawTable ParseCsv(std::istream& in);
RawTable ReadCsvFile(const std::string& path);

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
};

struct DatasetSchema {
  std::vector<FeatureColumn> features;
  std::string sensitive_column;
  // Cell values mapped to a = 1; everything else is a = 0.
  std::vector<std::string> sensitive_positive;
  std::string label_column;
  // Class values in class-index order; for binary tasks {negative, positive}.
  std::vector<std::string> label_values;
  // Community column with values remapped to 0..K-1 in sorted order. Left
  // empty when a partition rule assigns communities instead.
  std::string community_column;
  bool include_sensitive = false;
  bool include_community = false;

  std::size_t classes() const noexcept { return label_values.size(); }
};

enum class RuleOp { kEq, kNe, kIn, kLt, kLe, kGt, kGe };

struct Condition {
  std::string column;
  RuleOp op = RuleOp::kEq;
  std::vector<std::string> values;  // one value except for kIn
};

// Community i collects the rows matching every condition of rules[i].
struct PartitionRule {
  struct Community {
    std::string name;
    std::vector<Condition> conditions;
  };
  std::vector<Community> communities;
};

RuleOp ParseRuleOp(const std::string& text);

// Community index per row. Throws UncoveredRecord or OverlappingRules.
std::vector<int> AssignCommunities(const RawTable& table, const PartitionRule& rule);

// Shards by Record::community; shard c holds every record of community c.
std::vector<std::vector<Record>> PartitionByCommunity(std::span<const Record> records,
                                                      std::size_t communities);

// Feature encoder fitted on training rows only: numeric columns are
// standardized, categorical ones one-hot encoded with a trailing "other"
// slot for levels unseen during fitting.
class Encoder {
 public:
  Encoder() = default;
  static Encoder Fit(const RawTable& table, std::span<const std::size_t> rows,
                     const DatasetSchema& schema, std::size_t communities);

  std::vector<double> Encode(const RawTable& table, std::size_t row, int sensitive,
                             int community) const;
  std::size_t dimension() const noexcept { return dimension_; }
  std::vector<std::string> FeatureNames() const;
  // Count of categorical cells routed to the "other" slot so far.
  std::size_t unknown_categories() const noexcept { return unknown_; }

 private:
  struct Column {
    std::size_t index = 0;
    std::string name;
    FeatureKind kind = FeatureKind::kNumeric;
    double mean = 0.0;
    double scale = 1.0;
    std::map<std::string, std::size_t> levels;
    std::size_t offset = 0;
  };
  std::vector<Column> columns_;
  bool include_sensitive_ = false;
  bool include_community_ = false;
  std::size_t communities_ = 0;
  std::size_t dimension_ = 0;
  mutable std::size_t unknown_ = 0;
};

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
};

struct Dataset {
  std::size_t communities = 0;
  std::size_t classes = 0;
  std::vector<std::string> community_names;
  std::vector<std::string> feature_names;
  std::vector<Record> train;
  std::vector<Record> validation;
  std::vector<Record> test;
  std::size_t unknown_categories = 0;  // test/validation cells mapped to "other"

  std::vector<std::vector<Record>> TrainShards() const {
    return PartitionByCommunity(train, communities);
  }
};

// Builds a dataset from selected table rows with known communities: seeded
// per-community split, encoder fitted on the training split, encoding of all
// three splits. `rows[i]` belongs to community `community[i]`.
Dataset BuildDataset(const RawTable& table, std::span<const std::size_t> rows,
                     std::span<const int> community, std::size_t communities,
                     std::vector<std::string> community_names, const DatasetSchema& schema,
                     std::uint64_t seed, SplitFractions fractions = {});

// Reads and validates the CSV, assigns communities from the schema's
// community column or from `rule`, then calls BuildDataset.
Dataset LoadCsv(const std::string& path, const DatasetSchema& schema,
                const std::optional<PartitionRule>& rule, std::uint64_t seed,
                SplitFractions fractions = {});
Dataset LoadTable(const RawTable& table, const DatasetSchema& schema,
                  const std::optional<PartitionRule>& rule, std::uint64_t seed,
                  SplitFractions fractions = {});

// Four (label, sensitive) cells in the order (y=1,a=1), (y=1,a=0),
// (y=0,a=1), (y=0,a=0).
inline constexpr std::size_t CellIndex(int y, int a) noexcept {
  return static_cast<std::size_t>((1 - y) * 2 + (1 - a));
}

struct ScenarioSpec {
  struct Community {
    std::size_t samples = 0;
    std::array<double, 4> mix{};  // proportions over CellIndex order
  };
  std::vector<Community> communities;

  void Validate() const;
};

// Cell counts for one community: largest-remainder rounding of
// samples * mix, so each count is within one sample of its target.
std::array<std::size_t, 4> ScenarioCellCounts(const ScenarioSpec::Community& community);

// Draws, without replacement, pool indices for every community so the cell
// counts follow ScenarioCellCounts. pool_cells[i] is CellIndex of pool item
// i. Throws InsufficientPool.
std::vector<std::vector<std::size_t>> SampleScenario(std::span<const std::size_t> pool_cells,
                                                     const ScenarioSpec& spec, std::uint64_t seed);

// Scenario dataset resampled from the rows of a labeled base table.
Dataset SynthesizeScenario(const RawTable& pool, const DatasetSchema& schema,
                           const ScenarioSpec& spec, std::uint64_t seed,
                           SplitFractions fractions = {});

// Multi-class toy data: class-conditional isotropic Gaussians with
// community- and sensitive-dependent class priors.
struct GaussianToySpec {
  std::size_t classes = 3;
  std::size_t communities = 3;
  std::size_t dimension = 4;
  std::size_t samples_per_community = 1000;
  double separation = 2.0;  // distance scale of class centroids
  double noise = 1.0;
};

struct ToyData {
  std::vector<std::vector<double>> centroids;
  std::vector<Record> records;
};

ToyData GenerateGaussianToy(const GaussianToySpec& spec, std::uint64_t seed);

// Seeded per-community split of ready-made records.
Dataset SplitRecords(std::vector<Record> records, std::size_t communities, std::size_t classes,
                     std::uint64_t seed, SplitFractions fractions = {});

}  // namespace fairpost
