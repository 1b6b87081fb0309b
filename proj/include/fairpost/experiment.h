#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairpost/analysis.h"
#include "fairpost/data.h"
#include "fairpost/fl.h"
#include "fairpost/lp.h"
#include "fairpost/policy.h"
#include "fairpost/solver.h"
#include "fairpost/stats.h"
#include "json.hpp"

namespace fairpost {

// Where records come from: a CSV file (communities from the schema's
// community column, a partition rule, or a scenario resampling of the file)
// or the Gaussian toy generator.
struct DataSource {
  std::string csv;  // path as written in the config
  DatasetSchema schema;
  std::optional<PartitionRule> partition;
  std::optional<ScenarioSpec> scenario;
  std::optional<GaussianToySpec> toy;
  SplitFractions split;
};

struct FairnessKnobs {
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<std::pair<double, double>> grid;  // (epsilon, delta) pairs
  // Split whose base-predictor statistics build the program: "train",
  // "validation" or "test". Metrics are always reported on the test split.
  std::string statistics_split = "train";
  bool parallel_grid = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  DataSource data;
  std::vector<std::size_t> hidden = {64, 32};
  FlConfig fl;
  FairnessKnobs fairness;
  std::vector<std::uint64_t> seeds = {0};
  // Where results go; like base_dir it does not enter the canonical form.
  std::string output_dir = "runs";
  // Directory that relative csv and output paths resolve against.
  std::string base_dir = ".";

  // Throws InvalidConfig.
  void Validate() const;
  std::string ResolvePath(const std::string& path) const;
};

// Parses a config document, filling defaults. Throws InvalidConfig.
ExperimentConfig ParseConfig(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig LoadConfig(const std::string& path);

// Fully defaulted config; dump() of this document is the canonical form.
nlohmann::json CanonicalJson(const ExperimentConfig& config);
// First 16 hex digits of SHA-256 over the canonical form.
std::string ConfigHash(const ExperimentConfig& config);

Dataset LoadExperimentData(const ExperimentConfig& config, std::uint64_t seed);

struct GridPoint {
  double epsilon = 0.0;
  double delta = 0.0;
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::optional<FairPolicy> policy;
  FairnessReport post;     // expected metrics on the test statistics
  FairnessReport sampled;  // one seeded realization on the test records
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::size_t communities = 0;
  std::size_t classes = 2;
  FedAvgResult training;
  // Binary runs fill stats/test_stats/policy/bound/grid, multi-class runs
  // the multiclass_* members.
  std::optional<GroupStatistics> stats;
  std::optional<GroupStatistics> test_stats;
  std::optional<MulticlassStats> multiclass_stats;
  std::optional<MulticlassStats> multiclass_test_stats;
  LinearProgram program;
  LpSolution solution;
  std::optional<FairPolicy> policy;
  std::optional<MulticlassPolicy> multiclass_policy;
  FairnessReport baseline;
  FairnessReport post;
  FairnessReport post_sampled;
  std::optional<EqualizabilityBound> bound;
  std::optional<LocalFairnessGap> baseline_gap;
  std::optional<LocalFairnessGap> post_gap;
  std::vector<GridPoint> grid;
};

// The full pipeline for one seed: load and split, FedAvg, statistics,
// program, policy, reports and grid. Errors keep their code and gain the
// stage name in the message.
SeedResult RunSeed(const ExperimentConfig& config, std::uint64_t seed);

// Writes the artifact files of one seed into `dir` (created if needed).
void WriteBundle(const ExperimentConfig& config, const SeedResult& result, const std::string& dir);

struct RunResult {
  std::string config_hash;
  std::string directory;  // empty when nothing was written
  std::vector<SeedResult> seeds;
};

// Runs every seed. With write = true each seed's bundle goes to
// <output_dir>/<name>-<hash>/seed-<seed>/ next to a summary over seeds.
RunResult RunExperiment(const ExperimentConfig& config, bool write = true);

// Reloads a seed bundle, recomputes the analytic reports from the stored
// statistics and policies and checks them against the stored values to
// 1e-9, writes plot data (loss_curve.csv, grid_plot.csv) into the bundle and
// returns the rendered tables. A run directory renders every seed it holds.
// Throws MissingArtifact naming an absent file.
std::string RenderReport(const std::string& path);

}  // namespace fairpost
