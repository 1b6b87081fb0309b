#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fairpost/analysis.h"
#include "fairpost/data.h"
#include "fairpost/error.h"
#include "fairpost/experiment.h"
#include "fairpost/lp.h"
#include "fairpost/solver.h"
#include "fairpost/stats.h"
#include "json.hpp"

namespace {

using namespace fairpost;

int Run(const std::string& config_path, const std::optional<std::string>& output_dir,
        const std::optional<std::uint64_t>& seed, bool print_config) {
  ExperimentConfig config = LoadConfig(config_path);
  if (output_dir) config.output_dir = *output_dir;
  if (seed) config.seeds = {*seed};
  config.Validate();
  if (print_config) {
    std::cout << CanonicalJson(config).dump() << "\n";
    return 0;
  }
  std::cerr << "config " << ConfigHash(config) << ", " << config.seeds.size() << " seed(s)\n";
  const RunResult run = RunExperiment(config);
  std::cout << "wrote " << run.directory << "\n";
  std::ifstream summary(run.directory + "/summary.txt");
  std::cout << summary.rdbuf();
  return 0;
}

int SynthData(const std::string& config_path, const std::string& out_path, std::uint64_t seed) {
  const ExperimentConfig config = LoadConfig(config_path);
  const Dataset d = LoadExperimentData(config, seed);
  std::ofstream out(out_path);
  if (!out) Fail(Errc::kInvalidArgument, "cannot write '" + out_path + "'");
  out.precision(17);
  for (const std::string& name : d.feature_names) out << '"' << name << "\",";
  out << "sensitive,community,label,split\n";
  auto emit = [&](const std::vector<Record>& part, const char* split) {
    for (const Record& r : part) {
      for (double x : r.features) out << x << ',';
      out << r.sensitive << ',' << r.community << ',' << r.label << ',' << split << '\n';
    }
  };
  emit(d.train, "train");
  emit(d.validation, "validation");
  emit(d.test, "test");
  std::cout << "wrote " << d.train.size() + d.validation.size() + d.test.size() << " records in "
            << d.communities << " communities to " << out_path << "\n";
  return 0;
}

int SolveLp(const std::string& path, bool dump_basis, const std::optional<std::string>& json_path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kMissingArtifact, "cannot open '" + path + "'");
  const LinearProgram lp = ReadLinearProgram(in);
  const LpSolution s = Solve(lp);
  std::cout << "status " << SolveStatusName(s.status) << "\n";
  if (s.optimal()) {
    std::printf("objective %.17g\niterations %zu\nmax residual %.3g\n", s.objective, s.iterations,
                s.max_constraint_residual);
    for (std::size_t i = 0; i < s.z.size(); ++i) std::printf("x[%zu] = %.17g\n", i, s.z[i]);
  }
  if (dump_basis) {
    std::cout << "basis";
    for (std::size_t b : s.basis) std::cout << ' ' << b;
    std::cout << "\n";
  }
  if (json_path) {
    std::ofstream out(*json_path);
    out << nlohmann::json{{"status", SolveStatusName(s.status)}, {"objective", s.objective}, {"z", s.z},
                          {"basis", s.basis}, {"iterations", s.iterations}}
               .dump(2)
        << "\n";
  }
  return s.optimal() ? 0 : ExitCodeFor(s.status == SolveStatus::kInfeasible ? Errc::kInfeasible : Errc::kNumericalFailure);
}

int Bound(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kMissingArtifact, "cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, path + ": " + e.what());
  }
  if (doc.contains("statistics")) doc = doc.at("statistics");
  const EqualizabilityBound bound = ComputeEqualizabilityBound(GroupStatisticsFromJson(doc));
  std::cout << ToJson(bound).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated training with fairness post-processing"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Train, build and solve the fairness program, write a result bundle");
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
  run->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");
  run->add_option("-s,--seed", seed, "Run this single seed instead of the config's seeds");
  run->add_flag("--print-config", print_config, "Print the canonical config and exit");

  auto* report = app.add_subcommand("report", "Verify a bundle and render its tables and plot data");
  std::string bundle;
  report->add_option("bundle", bundle, "Seed bundle or run directory")->required();

  auto* synth = app.add_subcommand("synth-data", "Write the encoded dataset a config produces");
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--out", synth_out, "Output CSV")->required();
  synth->add_option("-s,--seed", synth_seed, "Seed for sampling and splitting")->capture_default_str();

  auto* solve = app.add_subcommand("solve-lp", "Solve a serialized linear program");
  std::string lp_path;
  bool dump_basis = false;
  std::optional<std::string> json_out;
  solve->add_option("lp", lp_path, "Program in the text format")->required();
  solve->add_flag("--dump-basis", dump_basis, "Print the final basis");
  solve->add_option("--json", json_out, "Also write the solution as JSON");

  auto* bound = app.add_subcommand("bound", "Print the equalizability bound for a statistics file");
  std::string stats_path;
  bound->add_option("stats", stats_path, "Binary statistics JSON (bare or a bundle's stats.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return Run(config_path, output_dir, seed, print_config);
    if (*report) {
      std::cout << RenderReport(bundle);
      return 0;
    }
    if (*synth) return SynthData(config_path, synth_out, synth_seed);
    if (*solve) return SolveLp(lp_path, dump_basis, json_out);
    if (*bound) return Bound(stats_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
