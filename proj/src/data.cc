#include "fairpost/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <string_view>

#include "fairpost/error.h"
#include "fairpost/rng.h"

namespace fairpost {
namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void ParseFail(std::size_t line, std::size_t column, const std::string& what) {
  Fail(Errc::kParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

std::vector<std::string> SplitLine(const std::string& text, std::size_t line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      if (!Trim(field).empty()) ParseFail(line, fields.size() + 1, "quote inside unquoted field");
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(was_quoted ? field : Trim(field));
      field.clear();
      was_quoted = false;
    } else if (was_quoted) {
      if (ch != ' ' && ch != '\t' && ch != '\r') {
        ParseFail(line, fields.size() + 1, "text after closing quote");
      }
    } else {
      field += ch;
    }
  }
  if (quoted) ParseFail(line, fields.size() + 1, "unterminated quote");
  fields.push_back(was_quoted ? field : Trim(field));
  return fields;
}

double ParseCell(const RawTable& table, std::size_t row, std::size_t column) {
  const std::string& text = table.rows[row][column];
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    ParseFail(table.line[row], column + 1, "expected a number in '" + table.header[column] +
                                               "', got '" + text + "'");
  }
}

bool Matches(const RawTable& table, std::size_t row, std::size_t column, const Condition& cond) {
  const std::string& cell = table.rows[row][column];
  switch (cond.op) {
    case RuleOp::kEq: return cell == cond.values.at(0);
    case RuleOp::kNe: return cell != cond.values.at(0);
    case RuleOp::kIn: return std::find(cond.values.begin(), cond.values.end(), cell) != cond.values.end();
    default: break;
  }
  const double lhs = ParseCell(table, row, column);
  const double rhs = std::stod(cond.values.at(0));
  switch (cond.op) {
    case RuleOp::kLt: return lhs < rhs;
    case RuleOp::kLe: return lhs <= rhs;
    case RuleOp::kGt: return lhs > rhs;
    case RuleOp::kGe: return lhs >= rhs;
    default: return false;
  }
}

std::uint64_t SplitStream(std::size_t community) {
  return DeriveStream(DeriveStream(0, "split"), static_cast<std::uint64_t>(community));
}

// Shuffled per-community split; each part is returned in ascending order of
// the input positions.
struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

SplitIndices SplitByCommunity(std::span<const int> community, std::size_t communities,
                              std::uint64_t seed, SplitFractions fractions) {
  if (!(fractions.train > 0.0) || !(fractions.validation >= 0.0) ||
      fractions.train + fractions.validation > 1.0) {
    Fail(Errc::kInvalidConfig, "split fractions must be positive and sum to at most 1");
  }
  std::vector<std::vector<std::size_t>> members(communities);
  for (std::size_t i = 0; i < community.size(); ++i) {
    members[static_cast<std::size_t>(community[i])].push_back(i);
  }
  SplitIndices out;
  for (std::size_t c = 0; c < communities; ++c) {
    std::vector<std::size_t>& idx = members[c];
    if (idx.empty()) Fail(Errc::kEmptyCommunity, "community " + std::to_string(c) + " has no records");
    SequentialRng rng(seed, SplitStream(c));
    rng.Shuffle(idx);
    const double n = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * n));
    const auto n_val = std::min(idx.size() - n_train,
                                static_cast<std::size_t>(std::llround(fractions.validation * n)));
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
    out.validation.insert(out.validation.end(), idx.begin() + static_cast<long>(n_train),
                          idx.begin() + static_cast<long>(n_train + n_val));
    out.test.insert(out.test.end(), idx.begin() + static_cast<long>(n_train + n_val), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void ValidateSchema(const RawTable& table, const DatasetSchema& schema) {
  if (schema.label_values.size() < 2) {
    Fail(Errc::kSchemaViolation, "label needs at least two declared values");
  }
  std::set<std::string> labels(schema.label_values.begin(), schema.label_values.end());
  if (labels.size() != schema.label_values.size()) Fail(Errc::kSchemaViolation, "duplicate label value");
  table.Column(schema.label_column);
  table.Column(schema.sensitive_column);
  if (!schema.community_column.empty()) table.Column(schema.community_column);
  std::set<std::string> seen;
  for (const FeatureColumn& f : schema.features) {
    table.Column(f.name);
    if (!seen.insert(f.name).second) Fail(Errc::kSchemaViolation, "feature '" + f.name + "' listed twice");
    if (f.name == schema.label_column || f.name == schema.sensitive_column ||
        f.name == schema.community_column) {
      Fail(Errc::kSchemaViolation, "feature '" + f.name + "' is also the label, sensitive or community column");
    }
  }
}

}  // namespace

std::size_t RawTable::Column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) Fail(Errc::kSchemaViolation, "no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

RawTable ParseCsv(std::istream& in) {
  RawTable table;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (Trim(text).empty()) continue;
    std::vector<std::string> fields = SplitLine(text, line);
    if (!have_header) {
      std::set<std::string> names;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].empty()) ParseFail(line, i + 1, "empty column name");
        if (!names.insert(fields[i]).second) {
          Fail(Errc::kSchemaViolation, "duplicate header column '" + fields[i] + "'");
        }
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      ParseFail(line, std::min(fields.size(), table.header.size()) + 1,
                "expected " + std::to_string(table.header.size()) + " fields, found " +
                    std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line.push_back(line);
  }
  if (!have_header) Fail(Errc::kParseError, "missing header row");
  return table;
}

RawTable ReadCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kParseError, "cannot open '" + path + "'");
  return ParseCsv(in);
}

RuleOp ParseRuleOp(const std::string& text) {
  if (text == "==") return RuleOp::kEq;
  if (text == "!=") return RuleOp::kNe;
  if (text == "in") return RuleOp::kIn;
  if (text == "<") return RuleOp::kLt;
  if (text == "<=") return RuleOp::kLe;
  if (text == ">") return RuleOp::kGt;
  if (text == ">=") return RuleOp::kGe;
  Fail(Errc::kInvalidConfig, "unknown rule operator '" + text + "'");
}

std::vector<int> AssignCommunities(const RawTable& table, const PartitionRule& rule) {
  if (rule.communities.empty()) Fail(Errc::kInvalidConfig, "partition rule has no communities");
  std::vector<std::vector<std::size_t>> columns(rule.communities.size());
  for (std::size_t c = 0; c < rule.communities.size(); ++c) {
    for (const Condition& cond : rule.communities[c].conditions) {
      if (cond.values.empty() || (cond.op != RuleOp::kIn && cond.values.size() != 1)) {
        Fail(Errc::kInvalidConfig, "condition on '" + cond.column + "' has the wrong number of values");
      }
      if (cond.op >= RuleOp::kLt) {
        try {
          (void)std::stod(cond.values[0]);
        } catch (const std::exception&) {
          Fail(Errc::kInvalidConfig, "comparison value '" + cond.values[0] + "' is not a number");
        }
      }
      columns[c].push_back(table.Column(cond.column));
    }
  }
  std::vector<int> out(table.rows.size(), -1);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < rule.communities.size(); ++c) {
      const auto& conds = rule.communities[c].conditions;
      bool all = true;
      for (std::size_t i = 0; i < conds.size() && all; ++i) all = Matches(table, r, columns[c][i], conds[i]);
      if (!all) continue;
      if (out[r] >= 0) {
        Fail(Errc::kOverlappingRules, "line " + std::to_string(table.line[r]) + " matches communities '" +
                                          rule.communities[static_cast<std::size_t>(out[r])].name +
                                          "' and '" + rule.communities[c].name + "'");
      }
      out[r] = static_cast<int>(c);
    }
    if (out[r] < 0) {
      Fail(Errc::kUncoveredRecord, "line " + std::to_string(table.line[r]) + " matches no community");
    }
  }
  return out;
}

std::vector<std::vector<Record>> PartitionByCommunity(std::span<const Record> records,
                                                      std::size_t communities) {
  std::vector<std::vector<Record>> shards(communities);
  for (const Record& r : records) {
    if (r.community < 0 || static_cast<std::size_t>(r.community) >= communities) {
      Fail(Errc::kCommunityOutOfRange, "community " + std::to_string(r.community));
    }
    shards[static_cast<std::size_t>(r.community)].push_back(r);
  }
  return shards;
}

Encoder Encoder::Fit(const RawTable& table, std::span<const std::size_t> rows,
                     const DatasetSchema& schema, std::size_t communities) {
  if (rows.empty()) Fail(Errc::kEmptyDataset, "no training rows to fit the encoder");
  Encoder enc;
  enc.include_sensitive_ = schema.include_sensitive;
  enc.include_community_ = schema.include_community;
  enc.communities_ = communities;
  std::size_t offset = 0;
  for (const FeatureColumn& f : schema.features) {
    Column col;
    col.index = table.Column(f.name);
    col.name = f.name;
    col.kind = f.kind;
    col.offset = offset;
    if (f.kind == FeatureKind::kNumeric) {
      double sum = 0.0;
      for (std::size_t r : rows) sum += ParseCell(table, r, col.index);
      col.mean = sum / static_cast<double>(rows.size());
      double sq = 0.0;
      for (std::size_t r : rows) {
        const double d = ParseCell(table, r, col.index) - col.mean;
        sq += d * d;
      }
      const double sd = std::sqrt(sq / static_cast<double>(rows.size()));
      col.scale = sd > 1e-12 ? sd : 1.0;
      offset += 1;
    } else {
      std::set<std::string> levels;
      for (std::size_t r : rows) levels.insert(table.rows[r][col.index]);
      std::size_t slot = 0;
      for (const std::string& level : levels) col.levels[level] = slot++;
      offset += slot + 1;  // trailing "other" slot
    }
    enc.columns_.push_back(std::move(col));
  }
  if (enc.include_sensitive_) offset += 1;
  if (enc.include_community_) offset += communities;
  enc.dimension_ = offset;
  return enc;
}

std::vector<double> Encoder::Encode(const RawTable& table, std::size_t row, int sensitive,
                                    int community) const {
  std::vector<double> x(dimension_, 0.0);
  std::size_t tail = 0;
  for (const Column& col : columns_) {
    if (col.kind == FeatureKind::kNumeric) {
      x[col.offset] = (ParseCell(table, row, col.index) - col.mean) / col.scale;
      tail = col.offset + 1;
    } else {
      const auto it = col.levels.find(table.rows[row][col.index]);
      if (it == col.levels.end()) {
        x[col.offset + col.levels.size()] = 1.0;
        ++unknown_;
      } else {
        x[col.offset + it->second] = 1.0;
      }
      tail = col.offset + col.levels.size() + 1;
    }
  }
  if (include_sensitive_) x[tail++] = static_cast<double>(sensitive);
  if (include_community_) x[tail + static_cast<std::size_t>(community)] = 1.0;
  return x;
}

std::vector<std::string> Encoder::FeatureNames() const {
  std::vector<std::string> names;
  for (const Column& col : columns_) {
    if (col.kind == FeatureKind::kNumeric) {
      names.push_back(col.name);
      continue;
    }
    std::vector<std::string> levels(col.levels.size());
    for (const auto& [level, slot] : col.levels) levels[slot] = level;
    for (const std::string& level : levels) names.push_back(col.name + "=" + level);
    names.push_back(col.name + "=<other>");
  }
  if (include_sensitive_) names.push_back("<sensitive>");
  if (include_community_)
    for (std::size_t c = 0; c < communities_; ++c) names.push_back("<community=" + std::to_string(c) + ">");
  return names;
}

Dataset BuildDataset(const RawTable& table, std::span<const std::size_t> rows,
                     std::span<const int> community, std::size_t communities,
                     std::vector<std::string> community_names, const DatasetSchema& schema,
                     std::uint64_t seed, SplitFractions fractions) {
  ValidateSchema(table, schema);
  if (rows.size() != community.size()) Fail(Errc::kLengthMismatch, "one community per row required");
  if (rows.empty()) Fail(Errc::kEmptyDataset, "dataset has no rows");
  const std::size_t label_col = table.Column(schema.label_column);
  const std::size_t sensitive_col = table.Column(schema.sensitive_column);

  std::vector<int> labels(rows.size());
  std::vector<int> sensitive(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& cells = table.rows[rows[i]];
    const auto it = std::find(schema.label_values.begin(), schema.label_values.end(), cells[label_col]);
    if (it == schema.label_values.end()) {
      Fail(Errc::kSchemaViolation, "line " + std::to_string(table.line[rows[i]]) + ": label '" +
                                       cells[label_col] + "' is not a declared value");
    }
    labels[i] = static_cast<int>(it - schema.label_values.begin());
    sensitive[i] = std::find(schema.sensitive_positive.begin(), schema.sensitive_positive.end(),
                             cells[sensitive_col]) != schema.sensitive_positive.end();
  }

  const SplitIndices split = SplitByCommunity(community, communities, seed, fractions);
  std::vector<std::size_t> train_rows;
  for (std::size_t i : split.train) train_rows.push_back(rows[i]);
  Encoder encoder = Encoder::Fit(table, train_rows, schema, communities);

  Dataset out;
  out.communities = communities;
  out.classes = schema.classes();
  out.community_names = std::move(community_names);
  out.feature_names = encoder.FeatureNames();
  auto encode = [&](const std::vector<std::size_t>& part, std::vector<Record>& dest) {
    dest.reserve(part.size());
    for (std::size_t i : part) {
      Record r;
      r.sensitive = sensitive[i];
      r.community = community[i];
      r.label = labels[i];
      r.features = encoder.Encode(table, rows[i], r.sensitive, r.community);
      dest.push_back(std::move(r));
    }
  };
  encode(split.train, out.train);
  const std::size_t unknown_in_train = encoder.unknown_categories();
  encode(split.validation, out.validation);
  encode(split.test, out.test);
  out.unknown_categories = encoder.unknown_categories() - unknown_in_train;
  return out;
}

Dataset LoadTable(const RawTable& table, const DatasetSchema& schema,
                  const std::optional<PartitionRule>& rule, std::uint64_t seed,
                  SplitFractions fractions) {
  ValidateSchema(table, schema);
  std::vector<int> community;
  std::vector<std::string> names;
  if (rule) {
    community = AssignCommunities(table, *rule);
    for (const auto& c : rule->communities) names.push_back(c.name);
  } else {
    if (schema.community_column.empty()) {
      Fail(Errc::kInvalidConfig, "need a community column or a partition rule");
    }
    const std::size_t col = table.Column(schema.community_column);
    std::set<std::string> values;
    for (const auto& row : table.rows) values.insert(row[col]);
    names.assign(values.begin(), values.end());
    for (const auto& row : table.rows) {
      community.push_back(static_cast<int>(std::lower_bound(names.begin(), names.end(), row[col]) - names.begin()));
    }
  }
  std::vector<std::size_t> rows(table.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  const std::size_t k = names.size();
  return BuildDataset(table, rows, community, k, std::move(names), schema, seed, fractions);
}

Dataset LoadCsv(const std::string& path, const DatasetSchema& schema,
                const std::optional<PartitionRule>& rule, std::uint64_t seed,
                SplitFractions fractions) {
  return LoadTable(ReadCsvFile(path), schema, rule, seed, fractions);
}

void ScenarioSpec::Validate() const {
  if (communities.empty()) Fail(Errc::kInvalidConfig, "scenario has no communities");
  for (std::size_t c = 0; c < communities.size(); ++c) {
    double sum = 0.0;
    for (double v : communities[c].mix) {
      if (!(v >= 0.0)) Fail(Errc::kInvalidConfig, "scenario proportions must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      Fail(Errc::kInvalidConfig, "scenario community " + std::to_string(c) + " proportions sum to " +
                                     std::to_string(sum));
    }
    if (communities[c].samples == 0) Fail(Errc::kInvalidConfig, "scenario community with no samples");
  }
}

std::array<std::size_t, 4> ScenarioCellCounts(const ScenarioSpec::Community& community) {
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double target = community.mix[i] * static_cast<double>(community.samples);
    counts[i] = static_cast<std::size_t>(std::floor(target));
    remainder[i] = target - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < community.samples && i < 4; ++i, ++assigned) ++counts[order[i]];
  return counts;
}

std::vector<std::vector<std::size_t>> SampleScenario(std::span<const std::size_t> pool_cells,
                                                     const ScenarioSpec& spec, std::uint64_t seed) {
  spec.Validate();
  std::array<std::vector<std::size_t>, 4> by_cell;
  for (std::size_t i = 0; i < pool_cells.size(); ++i) {
    if (pool_cells[i] >= 4) Fail(Errc::kInvalidArgument, "pool cell index out of range");
    by_cell[pool_cells[i]].push_back(i);
  }
  SequentialRng rng(seed, DeriveStream(0, "scenario"));
  for (auto& cell : by_cell) rng.Shuffle(cell);
  std::array<std::size_t, 4> next{};
  std::vector<std::vector<std::size_t>> out(spec.communities.size());
  for (std::size_t c = 0; c < spec.communities.size(); ++c) {
    const auto counts = ScenarioCellCounts(spec.communities[c]);
    for (std::size_t cell = 0; cell < 4; ++cell) {
      if (next[cell] + counts[cell] > by_cell[cell].size()) {
        Fail(Errc::kInsufficientPool, "cell " + std::to_string(cell) + " needs " +
                                          std::to_string(next[cell] + counts[cell]) + " samples, pool has " +
                                          std::to_string(by_cell[cell].size()));
      }
      for (std::size_t t = 0; t < counts[cell]; ++t) out[c].push_back(by_cell[cell][next[cell]++]);
    }
    std::sort(out[c].begin(), out[c].end());
  }
  return out;
}

Dataset SynthesizeScenario(const RawTable& pool, const DatasetSchema& schema,
                           const ScenarioSpec& spec, std::uint64_t seed, SplitFractions fractions) {
  ValidateSchema(pool, schema);
  if (schema.classes() != 2) Fail(Errc::kInvalidConfig, "scenarios are defined for binary labels");
  const std::size_t label_col = pool.Column(schema.label_column);
  const std::size_t sensitive_col = pool.Column(schema.sensitive_column);
  std::vector<std::size_t> cells(pool.rows.size());
  for (std::size_t r = 0; r < pool.rows.size(); ++r) {
    const auto& row = pool.rows[r];
    const auto it = std::find(schema.label_values.begin(), schema.label_values.end(), row[label_col]);
    if (it == schema.label_values.end()) {
      Fail(Errc::kSchemaViolation, "line " + std::to_string(pool.line[r]) + ": undeclared label '" +
                                       row[label_col] + "'");
    }
    const int y = static_cast<int>(it - schema.label_values.begin());
    const int a = std::find(schema.sensitive_positive.begin(), schema.sensitive_positive.end(),
                            row[sensitive_col]) != schema.sensitive_positive.end();
    cells[r] = CellIndex(y, a);
  }
  const auto picks = SampleScenario(cells, spec, seed);
  std::vector<std::size_t> rows;
  std::vector<int> community;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < picks.size(); ++c) {
    names.push_back("community-" + std::to_string(c));
    for (std::size_t r : picks[c]) {
      rows.push_back(r);
      community.push_back(static_cast<int>(c));
    }
  }
  return BuildDataset(pool, rows, community, picks.size(), std::move(names), schema, seed, fractions);
}

ToyData GenerateGaussianToy(const GaussianToySpec& spec, std::uint64_t seed) {
  if (spec.classes < 2 || spec.communities == 0 || spec.dimension == 0 || spec.samples_per_community == 0) {
    Fail(Errc::kInvalidConfig, "toy generator needs classes >= 2 and non-empty communities");
  }
  SequentialRng rng(seed, DeriveStream(0, "toy"));
  ToyData out;
  out.centroids.assign(spec.classes, std::vector<double>(spec.dimension));
  for (auto& centroid : out.centroids)
    for (double& v : centroid) v = spec.separation * rng.NextGaussian();
  for (std::size_t c = 0; c < spec.communities; ++c) {
    const double share_a1 = rng.NextUniform(0.25, 0.75);
    std::array<std::vector<double>, 2> prior;
    for (auto& p : prior) {
      p.resize(spec.classes);
      double sum = 0.0;
      for (double& v : p) sum += (v = rng.NextUniform(0.5, 1.5));
      for (double& v : p) v /= sum;
    }
    for (std::size_t i = 0; i < spec.samples_per_community; ++i) {
      Record r;
      r.community = static_cast<int>(c);
      r.sensitive = rng.NextUniform() < share_a1 ? 1 : 0;
      const double u = rng.NextUniform();
      double cumulative = 0.0;
      r.label = static_cast<int>(spec.classes - 1);
      for (std::size_t k = 0; k < spec.classes; ++k) {
        cumulative += prior[r.sensitive][k];
        if (u <= cumulative) {
          r.label = static_cast<int>(k);
          break;
        }
      }
      r.features.resize(spec.dimension);
      for (std::size_t d = 0; d < spec.dimension; ++d) {
        r.features[d] = out.centroids[static_cast<std::size_t>(r.label)][d] + spec.noise * rng.NextGaussian();
      }
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

Dataset SplitRecords(std::vector<Record> records, std::size_t communities, std::size_t classes,
                     std::uint64_t seed, SplitFractions fractions) {
  std::vector<int> community;
  for (const Record& r : records) {
    if (r.community < 0 || static_cast<std::size_t>(r.community) >= communities) {
      Fail(Errc::kCommunityOutOfRange, "community " + std::to_string(r.community));
    }
    community.push_back(r.community);
  }
  const SplitIndices split = SplitByCommunity(community, communities, seed, fractions);
  Dataset out;
  out.communities = communities;
  out.classes = classes;
  for (std::size_t c = 0; c < communities; ++c) out.community_names.push_back("community-" + std::to_string(c));
  if (!records.empty()) {
    for (std::size_t d = 0; d < records[0].features.size(); ++d) out.feature_names.push_back("x" + std::to_string(d));
  }
  for (std::size_t i : split.train) out.train.push_back(records[i]);
  for (std::size_t i : split.validation) out.validation.push_back(records[i]);
  for (std::size_t i : split.test) out.test.push_back(records[i]);
  return out;
}

}  // namespace fairpost
