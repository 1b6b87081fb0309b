#include "fairpost/experiment.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <sstream>

#include "fairpost/error.h"
#include "fairpost/rng.h"

namespace fairpost {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

constexpr double kReportTolerance = 1e-9;

const char* const kBundleFiles[] = {"config.json",     "model.json", "trace.csv",
                                    "stats.json",      "test_stats.json", "lp.txt",
                                    "solution.json",   "policy.json", "report.json",
                                    "grid.json",       "grid.csv"};

[[noreturn]] void ConfigFail(const std::string& where, const std::string& what) {
  Fail(Errc::kInvalidConfig, where + ": " + what);
}

void CheckKeys(const json& doc, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!doc.is_object()) ConfigFail(where, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }) == allowed.end()) {
      ConfigFail(where, "unknown key '" + key + "'");
    }
  }
}

template <typename T>
T Get(const json& doc, const char* key, T fallback, const std::string& where) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    ConfigFail(where + "." + key, "wrong type");
  }
}

std::string ScalarText(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  ConfigFail(where, "expected a string or number");
}

FeatureKind ParseKind(const std::string& text, const std::string& where) {
  if (text == "numeric") return FeatureKind::kNumeric;
  if (text == "categorical") return FeatureKind::kCategorical;
  ConfigFail(where, "kind must be numeric or categorical");
}

const char* KindName(FeatureKind kind) { return kind == FeatureKind::kNumeric ? "numeric" : "categorical"; }

const char* OpName(RuleOp op) {
  switch (op) {
    case RuleOp::kEq: return "==";
    case RuleOp::kNe: return "!=";
    case RuleOp::kIn: return "in";
    case RuleOp::kLt: return "<";
    case RuleOp::kLe: return "<=";
    case RuleOp::kGt: return ">";
    case RuleOp::kGe: return ">=";
  }
  return "?";
}

DatasetSchema ParseSchema(const json& doc) {
  const std::string where = "data.schema";
  CheckKeys(doc, where, {"features", "sensitive", "label", "community_column", "include_sensitive",
                         "include_community"});
  DatasetSchema s;
  for (const json& f : doc.value("features", json::array())) {
    CheckKeys(f, where + ".features", {"name", "kind"});
    s.features.push_back({Get<std::string>(f, "name", "", where), ParseKind(Get<std::string>(f, "kind", "numeric", where), where)});
  }
  const json sensitive = doc.value("sensitive", json::object());
  CheckKeys(sensitive, where + ".sensitive", {"column", "positive"});
  s.sensitive_column = Get<std::string>(sensitive, "column", "", where + ".sensitive");
  for (const json& v : sensitive.value("positive", json::array())) s.sensitive_positive.push_back(ScalarText(v, where));
  const json label = doc.value("label", json::object());
  CheckKeys(label, where + ".label", {"column", "values"});
  s.label_column = Get<std::string>(label, "column", "", where + ".label");
  for (const json& v : label.value("values", json::array())) s.label_values.push_back(ScalarText(v, where));
  s.community_column = Get<std::string>(doc, "community_column", "", where);
  s.include_sensitive = Get<bool>(doc, "include_sensitive", false, where);
  s.include_community = Get<bool>(doc, "include_community", false, where);
  return s;
}

PartitionRule ParsePartition(const json& doc) {
  const std::string where = "data.partition";
  if (!doc.is_array()) ConfigFail(where, "expected a list of communities");
  PartitionRule rule;
  for (const json& c : doc) {
    CheckKeys(c, where, {"name", "where"});
    PartitionRule::Community community;
    community.name = Get<std::string>(c, "name", "community-" + std::to_string(rule.communities.size()), where);
    for (const json& cond : c.value("where", json::array())) {
      CheckKeys(cond, where + ".where", {"column", "op", "value", "values"});
      Condition out;
      out.column = Get<std::string>(cond, "column", "", where);
      out.op = ParseRuleOp(Get<std::string>(cond, "op", "==", where));
      if (cond.contains("value")) out.values.push_back(ScalarText(cond.at("value"), where));
      for (const json& v : cond.value("values", json::array())) out.values.push_back(ScalarText(v, where));
      community.conditions.push_back(std::move(out));
    }
    if (community.conditions.empty()) ConfigFail(where, "community '" + community.name + "' has no conditions");
    rule.communities.push_back(std::move(community));
  }
  return rule;
}

ScenarioSpec ParseScenario(const json& doc) {
  const std::string where = "data.scenario";
  if (!doc.is_array()) ConfigFail(where, "expected a list of communities");
  ScenarioSpec spec;
  for (const json& c : doc) {
    CheckKeys(c, where, {"samples", "mix"});
    ScenarioSpec::Community community;
    community.samples = Get<std::size_t>(c, "samples", 0, where);
    const auto mix = Get<std::vector<double>>(c, "mix", {}, where);
    if (mix.size() != 4) ConfigFail(where, "mix needs four proportions");
    std::copy(mix.begin(), mix.end(), community.mix.begin());
    spec.communities.push_back(community);
  }
  return spec;
}

GaussianToySpec ParseToy(const json& doc) {
  const std::string where = "data.toy";
  CheckKeys(doc, where, {"classes", "communities", "dimension", "samples_per_community", "separation", "noise"});
  GaussianToySpec t;
  t.classes = Get(doc, "classes", t.classes, where);
  t.communities = Get(doc, "communities", t.communities, where);
  t.dimension = Get(doc, "dimension", t.dimension, where);
  t.samples_per_community = Get(doc, "samples_per_community", t.samples_per_community, where);
  t.separation = Get(doc, "separation", t.separation, where);
  t.noise = Get(doc, "noise", t.noise, where);
  return t;
}

FlConfig ParseFl(const json& doc) {
  const std::string where = "fl";
  CheckKeys(doc, where, {"rounds", "local_epochs", "batch_fraction", "batch_size", "learning_rate", "optimizer",
                         "adam_beta1", "adam_beta2", "adam_epsilon", "participating_clients", "parallel_clients"});
  FlConfig f;
  f.rounds = Get(doc, "rounds", f.rounds, where);
  f.local_epochs = Get(doc, "local_epochs", f.local_epochs, where);
  f.batch_fraction = Get(doc, "batch_fraction", f.batch_fraction, where);
  f.batch_size = Get(doc, "batch_size", f.batch_size, where);
  f.learning_rate = Get(doc, "learning_rate", f.learning_rate, where);
  const std::string opt = Get<std::string>(doc, "optimizer", "adam", where);
  if (opt == "adam") {
    f.optimizer = Optimizer::kAdam;
  } else if (opt == "sgd") {
    f.optimizer = Optimizer::kSgd;
  } else {
    ConfigFail(where + ".optimizer", "expected adam or sgd");
  }
  f.adam_beta1 = Get(doc, "adam_beta1", f.adam_beta1, where);
  f.adam_beta2 = Get(doc, "adam_beta2", f.adam_beta2, where);
  f.adam_epsilon = Get(doc, "adam_epsilon", f.adam_epsilon, where);
  f.participating_clients = Get(doc, "participating_clients", f.participating_clients, where);
  f.parallel_clients = Get(doc, "parallel_clients", f.parallel_clients, where);
  return f;
}

FairnessKnobs ParseFairness(const json& doc) {
  const std::string where = "fairness";
  CheckKeys(doc, where, {"epsilon", "delta", "grid", "statistics_split", "parallel_grid"});
  FairnessKnobs k;
  k.epsilon = Get(doc, "epsilon", k.epsilon, where);
  k.delta = Get(doc, "delta", k.delta, where);
  for (const json& pair : doc.value("grid", json::array())) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      ConfigFail(where + ".grid", "entries must be [epsilon, delta] pairs");
    }
    k.grid.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  k.statistics_split = Get(doc, "statistics_split", k.statistics_split, where);
  k.parallel_grid = Get(doc, "parallel_grid", k.parallel_grid, where);
  return k;
}

// Runs `body`, prefixing any library error with the stage name.
template <typename F>
auto Stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

std::vector<Record> const& SplitRecordsByName(const Dataset& d, const std::string& name) {
  if (name == "train") return d.train;
  if (name == "validation") return d.validation;
  return d.test;
}

Errc SolverErrc(SolveStatus status) {
  return status == SolveStatus::kInfeasible ? Errc::kInfeasible : Errc::kNumericalFailure;
}

GridPoint SolveGridPoint(const GroupStatistics& stats, const GroupStatistics& test_stats,
                         const FairnessReport& baseline, std::span<const int> test_predictions,
                         std::span<const Record> test, double eps, double delta, std::uint64_t seed,
                         std::size_t index) {
  GridPoint point;
  point.epsilon = eps;
  point.delta = delta;
  const LpProblem lp = BuildRelaxedLp(stats, eps, delta);
  const LpSolution solution = Solve(lp);
  point.status = solution.status;
  if (!solution.optimal()) return point;
  point.policy = PolicyFromSolution(solution, stats.communities());
  const double estimated = AccuracyLoss(lp, solution);
  point.post = EvaluatePolicy(test_stats, *point.policy);
  point.post.estimated_accuracy_loss = estimated;
  point.post.empirical_accuracy_loss = baseline.avg_acc - point.post.avg_acc;
  const RngStream rng(seed, DeriveStream(DeriveStream(0, "sampling"), static_cast<std::uint64_t>(index + 1)));
  point.sampled = EvaluatePredictions(ApplyPolicy(test_predictions, test, *point.policy, rng), test,
                                      stats.communities());
  point.sampled.estimated_accuracy_loss = estimated;
  point.sampled.empirical_accuracy_loss = baseline.avg_acc - point.sampled.avg_acc;
  return point;
}

std::string Sha256Hex16(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    Fail(Errc::kInvalidArgument, "SHA-256 digest failed");
  }
  static const char* const kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(Errc::kInvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

void WriteJson(const fs::path& path, const json& doc) { WriteText(path, doc.dump(2) + "\n"); }

json Stamp(const std::string& hash, std::uint64_t seed) { return {{"config_hash", hash}, {"seed", seed}}; }

std::string Num(double v, int precision = 4) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string CsvNum(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Left-aligned first column, right-aligned others.
std::string RenderTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(width[i] - row[i].size(), ' ');
      line += i == 0 ? row[i] + pad : "  " + pad + row[i];
    }
    out += line + "\n";
  }
  return out;
}

std::string TraceCsv(const FedAvgResult& training, const std::string& hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << hash << " seed=" << seed << " best_round=" << training.best_round << "\n";
  out << "round,validation_loss,validation_accuracy";
  const std::size_t clients = training.trace.empty() ? 0 : training.trace[0].client_loss.size();
  for (std::size_t c = 0; c < clients; ++c) out << ",client_" << c << "_loss";
  out << "\n";
  for (const RoundTrace& t : training.trace) {
    out << t.round << ',' << CsvNum(t.validation_loss) << ',' << CsvNum(t.validation_accuracy);
    for (double loss : t.client_loss) out << ',' << CsvNum(loss);
    out << "\n";
  }
  return out.str();
}

std::string GridCsv(const std::vector<GridPoint>& grid, const std::string& hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << hash << " seed=" << seed << "\n";
  out << "epsilon,delta,status,avg_acc,eod,accuracy_disparity,max_error_deviation,estimated_loss,"
         "empirical_loss,sampled_avg_acc,sampled_eod,sampled_accuracy_disparity\n";
  for (const GridPoint& p : grid) {
    out << CsvNum(p.epsilon) << ',' << CsvNum(p.delta) << ',' << SolveStatusName(p.status);
    if (p.policy) {
      out << ',' << CsvNum(p.post.avg_acc) << ',' << CsvNum(p.post.eod) << ',' << CsvNum(p.post.accuracy_disparity)
          << ',' << CsvNum(p.post.max_error_deviation) << ',' << CsvNum(*p.post.estimated_accuracy_loss) << ','
          << CsvNum(*p.post.empirical_accuracy_loss) << ',' << CsvNum(p.sampled.avg_acc) << ','
          << CsvNum(p.sampled.eod) << ',' << CsvNum(p.sampled.accuracy_disparity);
    } else {
      out << ",,,,,,,,,";
    }
    out << "\n";
  }
  return out.str();
}

json GapJson(const std::optional<LocalFairnessGap>& gap) {
  if (!gap) return nullptr;
  json eod = json::array();
  for (const auto& e : gap->community_eod) eod.push_back(e ? json(*e) : json(nullptr));
  return {{"global_eod", gap->global_eod}, {"community_eod", eod}};
}

json LoadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kMissingArtifact, "missing artifact '" + path.filename().string() + "' in " + path.parent_path().string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(Errc::kSchemaViolation, path.filename().string() + ": " + e.what());
  }
}

void ExpectClose(double stored, double recomputed, const std::string& what) {
  if (!(std::abs(stored - recomputed) <= kReportTolerance)) {
    Fail(Errc::kSchemaViolation, "stored " + what + " " + CsvNum(stored) + " differs from recomputed " +
                                     CsvNum(recomputed));
  }
}

void ExpectSameReport(const FairnessReport& stored, const FairnessReport& recomputed, const std::string& what) {
  ExpectClose(stored.avg_acc, recomputed.avg_acc, what + " avg_acc");
  ExpectClose(stored.eod, recomputed.eod, what + " eod");
  ExpectClose(stored.accuracy_disparity, recomputed.accuracy_disparity, what + " accuracy_disparity");
  ExpectClose(stored.max_error_deviation, recomputed.max_error_deviation, what + " max_error_deviation");
  if (stored.per_community_acc.size() != recomputed.per_community_acc.size()) {
    Fail(Errc::kSchemaViolation, what + ": community count differs");
  }
  for (std::size_t c = 0; c < stored.per_community_acc.size(); ++c) {
    ExpectClose(stored.per_community_acc[c], recomputed.per_community_acc[c], what + " community accuracy");
  }
}

std::vector<std::string> MetricRow(const std::string& label, const FairnessReport& r) {
  std::vector<std::string> row = {label, Num(r.avg_acc), Num(r.eod), Num(r.accuracy_disparity)};
  row.push_back(r.estimated_accuracy_loss ? Num(*r.estimated_accuracy_loss) : "-");
  row.push_back(r.empirical_accuracy_loss ? Num(*r.empirical_accuracy_loss) : "-");
  return row;
}

// Verifies one seed bundle and returns its rendering plus the stored reports
// (baseline, post, sampled) for cross-seed summaries.
struct SeedReport {
  std::string text;
  FairnessReport baseline, post, sampled;
  std::vector<std::pair<std::pair<double, double>, FairnessReport>> grid;
};

SeedReport RenderSeedBundle(const fs::path& dir) {
  for (const char* name : kBundleFiles) {
    if (!fs::exists(dir / name)) {
      Fail(Errc::kMissingArtifact, "missing artifact '" + std::string(name) + "' in " + dir.string());
    }
  }
  const json config = LoadJsonFile(dir / "config.json");
  const json test_stats_doc = LoadJsonFile(dir / "test_stats.json");
  const json policy_doc = LoadJsonFile(dir / "policy.json");
  const json report_doc = LoadJsonFile(dir / "report.json");
  const json grid_doc = LoadJsonFile(dir / "grid.json");
  const json solution_doc = LoadJsonFile(dir / "solution.json");
  const std::string hash = config.at("config_hash");
  const auto seed = config.at("seed").get<std::uint64_t>();
  for (const json* doc : {&test_stats_doc, &policy_doc, &report_doc, &grid_doc, &solution_doc}) {
    if (doc->value("config_hash", "") != hash || doc->value("seed", std::uint64_t{0}) != seed) {
      Fail(Errc::kSchemaViolation, "bundle files carry different config hashes or seeds");
    }
  }

  SeedReport out;
  out.baseline = FairnessReportFromJson(report_doc.at("baseline"));
  out.post = FairnessReportFromJson(report_doc.at("post"));
  out.sampled = FairnessReportFromJson(report_doc.at("post_sampled"));

  LinearProgram program;
  {
    std::ifstream in(dir / "lp.txt");
    program = ReadLinearProgram(in);
  }
  const auto z = solution_doc.at("z").get<std::vector<double>>();
  if (z.size() != program.cols()) Fail(Errc::kSchemaViolation, "solution length differs from the program");
  double objective = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) objective += program.objective[i] * z[i];

  const bool binary = test_stats_doc.at("statistics").at("kind") == "binary";
  if (binary) {
    const GroupStatistics test_stats = GroupStatisticsFromJson(test_stats_doc.at("statistics"));
    const FairPolicy policy = FairPolicyFromJson(policy_doc.at("policy"));
    const FairnessReport baseline = EvaluateStatistics(test_stats);
    ExpectSameReport(out.baseline, baseline, "baseline");
    ExpectSameReport(out.post, EvaluatePolicy(test_stats, policy), "post");
    double estimated = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) estimated += program.objective[i] * (z[i] - 1.0);
    ExpectClose(*out.post.estimated_accuracy_loss, estimated, "estimated accuracy loss");
    ExpectClose(*out.post.empirical_accuracy_loss, baseline.avg_acc - out.post.avg_acc, "empirical accuracy loss");
    for (const json& point : grid_doc.at("points")) {
      if (point.at("policy").is_null()) continue;
      const FairnessReport stored = FairnessReportFromJson(point.at("post"));
      const FairPolicy p = FairPolicyFromJson(point.at("policy"));
      ExpectSameReport(stored, EvaluatePolicy(test_stats, p), "grid post");
    }
  } else {
    const MulticlassStats test_stats = MulticlassStatsFromJson(test_stats_doc.at("statistics"));
    const MulticlassPolicy policy = MulticlassPolicyFromJson(policy_doc.at("policy"));
    ExpectSameReport(out.baseline, EvaluateStatistics(test_stats), "baseline");
    ExpectSameReport(out.post, EvaluatePolicy(test_stats, policy), "post");
  }
  ExpectClose(solution_doc.at("objective").get<double>(), objective, "objective");

  std::ostringstream text;
  text << "bundle " << dir.string() << "\nconfig " << hash << "  seed " << seed << "\n\n";
  text << RenderTable({{"predictor", "Avg-Acc", "EOD", "AD", "est-loss", "emp-loss"},
                       MetricRow("FedAvg", out.baseline),
                       MetricRow("post-FFL (expected)", out.post),
                       MetricRow("post-FFL (sampled)", out.sampled)});
  if (binary && report_doc.contains("bound") && !report_doc.at("bound").is_null()) {
    const json& b = report_doc.at("bound");
    text << "\nequalizability bound " << (b.at("bound").is_string() ? b.at("bound").get<std::string>() : Num(b.at("bound").get<double>()))
         << "  (smallest singular value " << Num(b.at("sigma_min").get<double>(), 6) << ")\n";
  }

  std::vector<std::vector<std::string>> grid_rows = {
      {"epsilon", "delta", "status", "Avg-Acc", "EOD", "AD", "est-loss", "emp-loss", "|est-emp|"}};
  std::ostringstream plot;
  plot << "epsilon,delta,avg_acc,eod,accuracy_disparity,estimated_loss,empirical_loss\n";
  for (const json& point : grid_doc.at("points")) {
    const double eps = point.at("epsilon");
    const double delta = point.at("delta");
    std::vector<std::string> row = {Num(eps, 3), Num(delta, 3), point.at("status").get<std::string>()};
    if (!point.at("policy").is_null()) {
      const FairnessReport r = FairnessReportFromJson(point.at("post"));
      out.grid.push_back({{eps, delta}, r});
      const double est = *r.estimated_accuracy_loss;
      const double emp = *r.empirical_accuracy_loss;
      for (const std::string& s : {Num(r.avg_acc), Num(r.eod), Num(r.accuracy_disparity), Num(est), Num(emp),
                                   Num(std::abs(est - emp))}) {
        row.push_back(s);
      }
      plot << CsvNum(eps) << ',' << CsvNum(delta) << ',' << CsvNum(r.avg_acc) << ',' << CsvNum(r.eod) << ','
           << CsvNum(r.accuracy_disparity) << ',' << CsvNum(est) << ',' << CsvNum(emp) << "\n";
    }
    grid_rows.push_back(std::move(row));
  }
  if (grid_rows.size() > 1) text << "\n" << RenderTable(grid_rows);
  WriteText(dir / "grid_plot.csv", plot.str());

  std::ifstream trace_in(dir / "trace.csv");
  std::string line, filtered;
  while (std::getline(trace_in, line)) {
    if (!line.empty() && line[0] != '#') filtered += line + "\n";
  }
  std::istringstream trace_csv(filtered);
  const RawTable trace = ParseCsv(trace_csv);
  std::ostringstream curve;
  curve << "round,validation_loss,validation_accuracy,mean_client_loss\n";
  for (const auto& row : trace.rows) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 3; i < row.size(); ++i) {
      if (!row[i].empty()) sum += std::stod(row[i]), ++count;
    }
    curve << row[0] << ',' << row[1] << ',' << row[2] << ',' << (count ? CsvNum(sum / count) : "") << "\n";
  }
  WriteText(dir / "loss_curve.csv", curve.str());
  text << "\ntraining rounds " << trace.rows.size() << ", plot data in loss_curve.csv and grid_plot.csv\n";
  out.text = text.str();
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

double SampleSd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

json SummaryStats(const std::vector<FairnessReport>& reports) {
  std::vector<double> acc, eod, abs_eod, ad;
  for (const auto& r : reports) {
    acc.push_back(r.avg_acc);
    eod.push_back(r.eod);
    abs_eod.push_back(std::abs(r.eod));
    ad.push_back(r.accuracy_disparity);
  }
  return {{"avg_acc", {{"mean", Mean(acc)}, {"sd", SampleSd(acc)}}},
          {"eod", {{"mean", Mean(eod)}, {"sd", SampleSd(eod)}}},
          {"abs_eod", {{"mean", Mean(abs_eod)}, {"sd", SampleSd(abs_eod)}}},
          {"accuracy_disparity", {{"mean", Mean(ad)}, {"sd", SampleSd(ad)}}}};
}

std::vector<std::string> SummaryRow(const std::string& label, const std::vector<FairnessReport>& reports) {
  const json s = SummaryStats(reports);
  auto cell = [&](const char* key) {
    return Num(s[key]["mean"].get<double>()) + " +- " + Num(s[key]["sd"].get<double>());
  };
  return {label, cell("avg_acc"), cell("eod"), cell("abs_eod"), cell("accuracy_disparity")};
}

std::string RenderSummary(const std::vector<SeedReport>& seeds) {
  std::vector<FairnessReport> base, post, sampled;
  for (const auto& s : seeds) {
    base.push_back(s.baseline);
    post.push_back(s.post);
    sampled.push_back(s.sampled);
  }
  std::ostringstream text;
  text << "mean +- sd over " << seeds.size() << " seed(s)\n";
  text << RenderTable({{"predictor", "Avg-Acc", "EOD", "|EOD|", "AD"},
                       SummaryRow("FedAvg", base),
                       SummaryRow("post-FFL (expected)", post),
                       SummaryRow("post-FFL (sampled)", sampled)});
  return text.str();
}

}  // namespace

void ExperimentConfig::Validate() const {
  const DataSource& d = data;
  if (d.toy) {
    if (!d.csv.empty() || d.partition || d.scenario) {
      Fail(Errc::kInvalidConfig, "data: toy data excludes csv, partition and scenario");
    }
  } else {
    if (d.csv.empty()) Fail(Errc::kInvalidConfig, "data: need a csv path or a toy block");
    if (d.partition && d.scenario) Fail(Errc::kInvalidConfig, "data: give a partition rule or a scenario, not both");
    if (!d.partition && !d.scenario && d.schema.community_column.empty()) {
      Fail(Errc::kInvalidConfig, "data: need a partition rule, a scenario or schema.community_column");
    }
    if (d.schema.label_values.size() < 2) Fail(Errc::kInvalidConfig, "data.schema.label: need at least two values");
    if (d.schema.sensitive_column.empty() || d.schema.label_column.empty() || d.schema.features.empty()) {
      Fail(Errc::kInvalidConfig, "data.schema: sensitive column, label column and features are required");
    }
    if (d.scenario) d.scenario->Validate();
  }
  if (!(d.split.train > 0.0) || !(d.split.validation >= 0.0) || d.split.train + d.split.validation >= 1.0) {
    Fail(Errc::kInvalidConfig, "data.split: need train > 0, validation >= 0 and a non-empty test share");
  }
  fl.Validate();
  for (std::size_t h : hidden) {
    if (h == 0) Fail(Errc::kInvalidConfig, "model.hidden: layer widths must be positive");
  }
  auto check_knob = [](double eps, double delta) {
    if (!(eps >= 0.0) || !(delta >= 0.0) || !std::isfinite(eps) || !std::isfinite(delta)) {
      Fail(Errc::kInvalidConfig, "fairness: epsilon and delta must be finite and non-negative");
    }
  };
  check_knob(fairness.epsilon, fairness.delta);
  for (const auto& [e, dl] : fairness.grid) check_knob(e, dl);
  const std::size_t classes = d.toy ? d.toy->classes : d.schema.classes();
  if (classes > 2 && (fairness.epsilon != 0.0 || fairness.delta != 0.0 || !fairness.grid.empty())) {
    Fail(Errc::kInvalidConfig, "fairness: relaxation and grids are defined for binary tasks only");
  }
  const auto& split = fairness.statistics_split;
  if (split != "train" && split != "validation" && split != "test") {
    Fail(Errc::kInvalidConfig, "fairness.statistics_split: expected train, validation or test");
  }
  if (seeds.empty()) Fail(Errc::kInvalidConfig, "seeds: at least one seed required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    Fail(Errc::kInvalidConfig, "seeds: duplicate seed");
  }
}

std::string ExperimentConfig::ResolvePath(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).lexically_normal().string();
}

ExperimentConfig ParseConfig(const json& doc, const std::string& base_dir) {
  CheckKeys(doc, "config", {"name", "data", "model", "fl", "fairness", "seeds", "output_dir"});
  ExperimentConfig config;
  config.base_dir = base_dir;
  config.name = Get<std::string>(doc, "name", config.name, "config");
  const json data = doc.value("data", json::object());
  CheckKeys(data, "data", {"csv", "schema", "partition", "scenario", "toy", "split"});
  config.data.csv = Get<std::string>(data, "csv", "", "data");
  if (data.contains("schema")) config.data.schema = ParseSchema(data.at("schema"));
  if (data.contains("partition")) config.data.partition = ParsePartition(data.at("partition"));
  if (data.contains("scenario")) config.data.scenario = ParseScenario(data.at("scenario"));
  if (data.contains("toy")) config.data.toy = ParseToy(data.at("toy"));
  if (data.contains("split")) {
    const json& split = data.at("split");
    CheckKeys(split, "data.split", {"train", "validation"});
    config.data.split.train = Get(split, "train", config.data.split.train, "data.split");
    config.data.split.validation = Get(split, "validation", config.data.split.validation, "data.split");
  }
  const json model = doc.value("model", json::object());
  CheckKeys(model, "model", {"hidden"});
  config.hidden = Get(model, "hidden", config.hidden, "model");
  config.fl = ParseFl(doc.value("fl", json::object()));
  config.fairness = ParseFairness(doc.value("fairness", json::object()));
  config.seeds = Get(doc, "seeds", config.seeds, "config");
  config.output_dir = Get(doc, "output_dir", config.output_dir, "config");
  config.Validate();
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kInvalidConfig, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    Fail(Errc::kInvalidConfig, path + ": " + e.what());
  }
  const fs::path parent = fs::path(path).parent_path();
  return ParseConfig(doc, parent.empty() ? "." : parent.string());
}

json CanonicalJson(const ExperimentConfig& config) {
  json data = json::object();
  const DataSource& d = config.data;
  if (d.toy) {
    data["toy"] = {{"classes", d.toy->classes},
                   {"communities", d.toy->communities},
                   {"dimension", d.toy->dimension},
                   {"samples_per_community", d.toy->samples_per_community},
                   {"separation", d.toy->separation},
                   {"noise", d.toy->noise}};
  } else {
    data["csv"] = d.csv;
    json features = json::array();
    for (const auto& f : d.schema.features) features.push_back({{"name", f.name}, {"kind", KindName(f.kind)}});
    data["schema"] = {{"features", features},
                      {"sensitive", {{"column", d.schema.sensitive_column}, {"positive", d.schema.sensitive_positive}}},
                      {"label", {{"column", d.schema.label_column}, {"values", d.schema.label_values}}},
                      {"community_column", d.schema.community_column},
                      {"include_sensitive", d.schema.include_sensitive},
                      {"include_community", d.schema.include_community}};
  }
  if (d.partition) {
    json rule = json::array();
    for (const auto& c : d.partition->communities) {
      json where = json::array();
      for (const auto& cond : c.conditions) {
        where.push_back({{"column", cond.column}, {"op", OpName(cond.op)}, {"values", cond.values}});
      }
      rule.push_back({{"name", c.name}, {"where", where}});
    }
    data["partition"] = rule;
  }
  if (d.scenario) {
    json scenario = json::array();
    for (const auto& c : d.scenario->communities) scenario.push_back({{"samples", c.samples}, {"mix", c.mix}});
    data["scenario"] = scenario;
  }
  data["split"] = {{"train", d.split.train}, {"validation", d.split.validation}};
  const FlConfig& f = config.fl;
  json grid = json::array();
  for (const auto& [e, dl] : config.fairness.grid) grid.push_back({e, dl});
  return {{"name", config.name},
          {"data", data},
          {"model", {{"hidden", config.hidden}}},
          {"fl",
           {{"rounds", f.rounds},
            {"local_epochs", f.local_epochs},
            {"batch_fraction", f.batch_fraction},
            {"batch_size", f.batch_size},
            {"learning_rate", f.learning_rate},
            {"optimizer", f.optimizer == Optimizer::kAdam ? "adam" : "sgd"},
            {"adam_beta1", f.adam_beta1},
            {"adam_beta2", f.adam_beta2},
            {"adam_epsilon", f.adam_epsilon},
            {"participating_clients", f.participating_clients},
            {"parallel_clients", f.parallel_clients}}},
          {"fairness",
           {{"epsilon", config.fairness.epsilon},
            {"delta", config.fairness.delta},
            {"grid", grid},
            {"statistics_split", config.fairness.statistics_split},
            {"parallel_grid", config.fairness.parallel_grid}}},
          {"seeds", config.seeds}};
}

std::string ConfigHash(const ExperimentConfig& config) { return Sha256Hex16(CanonicalJson(config).dump()); }

Dataset LoadExperimentData(const ExperimentConfig& config, std::uint64_t seed) {
  const DataSource& d = config.data;
  if (d.toy) {
    ToyData toy = GenerateGaussianToy(*d.toy, seed);
    return SplitRecords(std::move(toy.records), d.toy->communities, d.toy->classes, seed, d.split);
  }
  const RawTable table = ReadCsvFile(config.ResolvePath(d.csv));
  if (d.scenario) return SynthesizeScenario(table, d.schema, *d.scenario, seed, d.split);
  return LoadTable(table, d.schema, d.partition, seed, d.split);
}

SeedResult RunSeed(const ExperimentConfig& config, std::uint64_t seed) {
  config.Validate();
  SeedResult result;
  result.seed = seed;
  const Dataset data = Stage("data", [&] { return LoadExperimentData(config, seed); });
  result.communities = data.communities;
  result.classes = data.classes;
  const std::size_t k = data.communities;

  const ModelSpec spec{.input_dim = data.train.at(0).features.size(), .hidden = config.hidden, .classes = data.classes};
  FlConfig fl = config.fl;
  fl.seed = seed;
  result.training = Stage("training", [&] {
    const auto shards = data.TrainShards();
    return FedAvg(shards, data.validation, spec, fl);
  });

  const std::vector<Record>& source = SplitRecordsByName(data, config.fairness.statistics_split);
  const std::vector<int> source_pred = Predict(result.training.model, source);
  const std::vector<int> test_pred = Predict(result.training.model, data.test);
  const RngStream sampling(seed, DeriveStream(0, "sampling"));

  if (data.classes == 2) {
    const GroupStatistics stats = Stage("statistics", [&] { return EstimateJointStatistics(source_pred, source, k); });
    const GroupStatistics test_stats =
        Stage("statistics", [&] { return EstimateJointStatistics(test_pred, data.test, k); });
    const double eps = config.fairness.epsilon;
    const double delta = config.fairness.delta;
    const LpProblem lp = Stage("program", [&] {
      return eps == 0.0 && delta == 0.0 ? BuildStrictLp(stats) : BuildRelaxedLp(stats, eps, delta);
    });
    result.program = lp.ToLinearProgram();
    result.solution = Solve(lp);
    if (!result.solution.optimal()) {
      Fail(SolverErrc(result.solution.status),
           std::string("solve: ") + std::string(SolveStatusName(result.solution.status)));
    }
    const FairPolicy policy = PolicyFromSolution(result.solution, k);
    const double estimated = AccuracyLoss(lp, result.solution);

    result.baseline = EvaluateStatistics(test_stats);
    result.post = EvaluatePolicy(test_stats, policy);
    result.post.estimated_accuracy_loss = estimated;
    result.post.empirical_accuracy_loss = result.baseline.avg_acc - result.post.avg_acc;
    const std::vector<int> fair_pred = ApplyPolicy(test_pred, data.test, policy, sampling);
    result.post_sampled = EvaluatePredictions(fair_pred, data.test, k);
    result.post_sampled.estimated_accuracy_loss = estimated;
    result.post_sampled.empirical_accuracy_loss = result.baseline.avg_acc - result.post_sampled.avg_acc;
    result.bound = Stage("bound", [&] { return ComputeEqualizabilityBound(stats); });
    result.baseline_gap = ComputeLocalFairnessGap(test_pred, data.test, k);
    result.post_gap = ComputeLocalFairnessGap(fair_pred, data.test, k);

    const auto& grid = config.fairness.grid;
    result.grid.resize(grid.size());
    auto solve_point = [&](std::size_t i) {
      return Stage("grid", [&] {
        return SolveGridPoint(stats, test_stats, result.baseline, test_pred, data.test, grid[i].first,
                              grid[i].second, seed, i);
      });
    };
    if (config.fairness.parallel_grid) {
      std::vector<std::future<GridPoint>> pending;
      for (std::size_t i = 0; i < grid.size(); ++i) pending.push_back(std::async(std::launch::async, solve_point, i));
      for (std::size_t i = 0; i < grid.size(); ++i) result.grid[i] = pending[i].get();
    } else {
      for (std::size_t i = 0; i < grid.size(); ++i) result.grid[i] = solve_point(i);
    }
    result.stats = stats;
    result.test_stats = test_stats;
    result.policy = policy;
  } else {
    const std::size_t n = data.classes;
    const MulticlassStats stats =
        Stage("statistics", [&] { return EstimateMulticlassStatistics(source_pred, source, k, n); });
    const MulticlassStats test_stats =
        Stage("statistics", [&] { return EstimateMulticlassStatistics(test_pred, data.test, k, n); });
    const MulticlassLp lp = Stage("program", [&] { return BuildMulticlassLp(stats); });
    result.program = lp.program;
    result.solution = Solve(lp);
    if (!result.solution.optimal()) {
      Fail(SolverErrc(result.solution.status),
           std::string("solve: ") + std::string(SolveStatusName(result.solution.status)));
    }
    const MulticlassPolicy policy = Stage("policy", [&] { return MulticlassPolicyFromSolution(result.solution, k, n); });
    const double estimated = EvaluateStatistics(stats).avg_acc - result.solution.objective;
    result.baseline = EvaluateStatistics(test_stats);
    result.post = EvaluatePolicy(test_stats, policy);
    result.post.estimated_accuracy_loss = estimated;
    result.post.empirical_accuracy_loss = result.baseline.avg_acc - result.post.avg_acc;
    const std::vector<int> fair_pred = ApplyPolicy(test_pred, data.test, policy, sampling);
    result.post_sampled = EvaluateMulticlassPredictions(fair_pred, data.test, k, n);
    result.post_sampled.estimated_accuracy_loss = estimated;
    result.post_sampled.empirical_accuracy_loss = result.baseline.avg_acc - result.post_sampled.avg_acc;
    result.multiclass_stats = stats;
    result.multiclass_test_stats = test_stats;
    result.multiclass_policy = policy;
  }
  return result;
}

void WriteBundle(const ExperimentConfig& config, const SeedResult& r, const std::string& dir_name) {
  const fs::path dir(dir_name);
  fs::create_directories(dir);
  const std::string hash = ConfigHash(config);
  const json stamp = Stamp(hash, r.seed);
  auto stamped = [&](json extra) {
    json doc = stamp;
    doc.update(extra);
    return doc;
  };

  WriteJson(dir / "config.json", stamped({{"config", CanonicalJson(config)}}));
  WriteJson(dir / "model.json", stamped({{"best_round", r.training.best_round}, {"model", ToJson(r.training.model)}}));
  WriteText(dir / "trace.csv", TraceCsv(r.training, hash, r.seed));
  const json stats = r.stats ? ToJson(*r.stats) : ToJson(*r.multiclass_stats);
  const json test_stats = r.test_stats ? ToJson(*r.test_stats) : ToJson(*r.multiclass_test_stats);
  WriteJson(dir / "stats.json", stamped({{"split", config.fairness.statistics_split}, {"statistics", stats}}));
  WriteJson(dir / "test_stats.json", stamped({{"split", "test"}, {"statistics", test_stats}}));
  {
    std::ostringstream lp;
    WriteLinearProgram(lp, r.program, {"config_hash=" + hash, "seed=" + std::to_string(r.seed)});
    WriteText(dir / "lp.txt", lp.str());
  }
  WriteJson(dir / "solution.json", stamped({{"status", SolveStatusName(r.solution.status)},
                                            {"objective", r.solution.objective},
                                            {"z", r.solution.z},
                                            {"iterations", r.solution.iterations},
                                            {"max_constraint_residual", r.solution.max_constraint_residual},
                                            {"basis", r.solution.basis}}));
  WriteJson(dir / "policy.json",
            stamped({{"policy", r.policy ? ToJson(*r.policy) : ToJson(*r.multiclass_policy)}}));
  WriteJson(dir / "report.json", stamped({{"epsilon", config.fairness.epsilon},
                                          {"delta", config.fairness.delta},
                                          {"baseline", ToJson(r.baseline)},
                                          {"post", ToJson(r.post)},
                                          {"post_sampled", ToJson(r.post_sampled)},
                                          {"bound", r.bound ? ToJson(*r.bound) : json(nullptr)},
                                          {"baseline_local_gap", GapJson(r.baseline_gap)},
                                          {"post_local_gap", GapJson(r.post_gap)}}));
  json points = json::array();
  for (const GridPoint& p : r.grid) {
    points.push_back({{"epsilon", p.epsilon},
                      {"delta", p.delta},
                      {"status", SolveStatusName(p.status)},
                      {"policy", p.policy ? ToJson(*p.policy) : json(nullptr)},
                      {"post", p.policy ? ToJson(p.post) : json(nullptr)},
                      {"sampled", p.policy ? ToJson(p.sampled) : json(nullptr)}});
  }
  WriteJson(dir / "grid.json", stamped({{"points", points}}));
  WriteText(dir / "grid.csv", GridCsv(r.grid, hash, r.seed));
}

RunResult RunExperiment(const ExperimentConfig& config, bool write) {
  RunResult run;
  run.config_hash = ConfigHash(config);
  for (std::uint64_t seed : config.seeds) run.seeds.push_back(RunSeed(config, seed));
  if (!write) return run;
  const fs::path root = fs::path(config.ResolvePath(config.output_dir)) / (config.name + "-" + run.config_hash);
  run.directory = root.string();
  std::vector<SeedReport> reports;
  for (const SeedResult& r : run.seeds) {
    const fs::path dir = root / ("seed-" + std::to_string(r.seed));
    WriteBundle(config, r, dir.string());
    reports.push_back(RenderSeedBundle(dir));
  }
  std::vector<FairnessReport> base, post, sampled;
  for (const SeedResult& r : run.seeds) {
    base.push_back(r.baseline);
    post.push_back(r.post);
    sampled.push_back(r.post_sampled);
  }
  WriteJson(root / "summary.json", {{"config_hash", run.config_hash},
                                    {"seeds", config.seeds},
                                    {"baseline", SummaryStats(base)},
                                    {"post", SummaryStats(post)},
                                    {"post_sampled", SummaryStats(sampled)}});
  WriteText(root / "summary.txt", RenderSummary(reports));
  return run;
}

std::string RenderReport(const std::string& path) {
  const fs::path root(path);
  if (!fs::exists(root)) Fail(Errc::kMissingArtifact, "missing artifact '" + path + "'");
  if (fs::exists(root / "config.json") || !fs::is_directory(root)) return RenderSeedBundle(root).text;
  std::vector<fs::path> seeds;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("seed-", 0) == 0) seeds.push_back(entry.path());
  }
  if (seeds.empty()) Fail(Errc::kMissingArtifact, "missing artifact 'config.json' in " + path);
  std::sort(seeds.begin(), seeds.end());
  std::vector<SeedReport> reports;
  std::string text;
  for (const fs::path& dir : seeds) {
    reports.push_back(RenderSeedBundle(dir));
    text += reports.back().text + "\n";
  }
  return text + RenderSummary(reports);
}

}  // namespace fairpost
