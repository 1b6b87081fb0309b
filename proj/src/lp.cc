#include "fairpost/lp.h"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "fairpost/error.h"

namespace fairpost {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void RequireValid(const GroupStatistics& stats) {
  const std::size_t k = stats.communities();
  if (k == 0) Fail(Errc::kInvalidArgument, "statistics have no communities");
  if (stats.cell[0].size() != k || stats.cell[1].size() != k) {
    Fail(Errc::kInvalidArgument, "cell table does not match community count");
  }
  if (!(stats.alpha > 0.0) || !(stats.beta > 0.0)) {
    Fail(Errc::kDegenerateGroup, "alpha and beta must be positive");
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!(stats.p[c] > 0.0)) {
      Fail(Errc::kZeroCommunityWeight, "community " + std::to_string(c) + " has zero weight");
    }
  }
}

std::string FormatNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double ParseNumber(const std::string& token, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    Fail(Errc::kParseError, "bad number '" + token + "' in " + what);
  }
}

// Tokenizer that skips '#' comment lines.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string Next(const std::string& what) {
    while (true) {
      std::string tok;
      if (line_ >> tok) return tok;
      std::string text;
      if (!std::getline(in_, text)) Fail(Errc::kParseError, "unexpected end of input in " + what);
      if (!text.empty() && text[0] == '#') continue;
      line_.clear();
      line_.str(text);
    }
  }

  void Expect(const std::string& keyword) {
    const std::string tok = Next(keyword);
    if (tok != keyword) Fail(Errc::kParseError, "expected '" + keyword + "', got '" + tok + "'");
  }

  double Number(const std::string& what) { return ParseNumber(Next(what), what); }

  std::size_t Count(const std::string& what) {
    const std::string tok = Next(what);
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      Fail(Errc::kParseError, "bad count '" + tok + "' in " + what);
    }
  }

 private:
  std::istream& in_;
  std::istringstream line_;
};

}  // namespace

void LinearProgram::Validate() const {
  const std::size_t m = rows();
  const std::size_t n = cols();
  if (objective.size() != n || rhs.size() != m || range.size() != m ||
      col_lower.size() != n || col_upper.size() != n) {
    Fail(Errc::kInvalidArgument, "linear program dimensions are inconsistent");
  }
  for (double v : matrix.data())
    if (!std::isfinite(v)) Fail(Errc::kInvalidArgument, "non-finite matrix coefficient");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) Fail(Errc::kInvalidArgument, "non-finite objective");
    if (!std::isfinite(col_lower[j])) Fail(Errc::kInvalidArgument, "column lower bound must be finite");
    if (std::isnan(col_upper[j]) || col_upper[j] < col_lower[j]) {
      Fail(Errc::kInvalidArgument, "column " + std::to_string(j) + " has empty bounds");
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(rhs[i]) || !std::isfinite(range[i]) || range[i] < 0.0) {
      Fail(Errc::kInvalidArgument, "row " + std::to_string(i) + " has invalid rhs or range");
    }
  }
}

bool LpProblem::is_strict() const noexcept {
  for (double r : relax)
    if (r != 0.0) return false;
  return true;
}

LinearProgram LpProblem::ToLinearProgram() const {
  LinearProgram lp;
  lp.sense = Sense::kMinimize;
  lp.objective = objective;
  lp.matrix = matrix;
  lp.rhs = rhs;
  lp.range = relax;
  lp.col_lower.assign(objective.size(), 0.0);
  lp.col_upper.assign(objective.size(), 1.0);
  return lp;
}

LinearProgram StandardLp::ToLinearProgram() const {
  LinearProgram lp;
  lp.sense = Sense::kMinimize;
  lp.objective = objective;
  lp.matrix = matrix;
  lp.rhs = rhs;
  lp.range.assign(rhs.size(), 0.0);
  lp.col_lower.assign(objective.size(), 0.0);
  lp.col_upper.assign(objective.size(), kInf);
  return lp;
}

LpProblem BuildStrictLp(const GroupStatistics& stats) {
  RequireValid(stats);
  const std::size_t k = stats.communities();
  const double kd = static_cast<double>(k);
  const double alpha = stats.alpha;
  const double beta = stats.beta;

  LpProblem lp;
  lp.communities = k;
  lp.objective.assign(4 * k, 0.0);
  lp.matrix = Matrix(k + 1, 4 * k);
  lp.rhs.assign(k + 1, 0.0);
  lp.relax.assign(k + 1, 0.0);

  // Per-community error coefficients c_i and accuracy offsets b_i.
  std::vector<double> base_accuracy(k);
  for (std::size_t c = 0; c < k; ++c) {
    const ConfusionCell& s0 = stats.cell[0][c];
    const ConfusionCell& s1 = stats.cell[1][c];
    const double block[4] = {s0.fn - s0.tn, s0.fp - s0.tp, s1.fn - s1.tn, s1.fp - s1.tp};
    for (int v = 0; v < 4; ++v) lp.objective[4 * c + v] = block[v];

    // Equal-opportunity row, m_c.
    lp.matrix(0, VariableIndex(c, 0, 0)) = -s0.fn / alpha;
    lp.matrix(0, VariableIndex(c, 0, 1)) = s0.tp / alpha;
    lp.matrix(0, VariableIndex(c, 1, 0)) = s1.fn / beta;
    lp.matrix(0, VariableIndex(c, 1, 1)) = -s1.tp / beta;
    lp.rhs[0] += s1.fn / beta - s0.fn / alpha;

    base_accuracy[c] = (s0.tn + s0.tp + s1.tn + s1.tp) / stats.p[c];
  }

  // Community rows: -(K-1)/K n_j on the diagonal block, 1/K n_i elsewhere,
  // with n_i = c_i / p_i.
  for (std::size_t row = 0; row < k; ++row) {
    for (std::size_t c = 0; c < k; ++c) {
      const double scale = (c == row ? -(kd - 1.0) / kd : 1.0 / kd) / stats.p[c];
      for (int v = 0; v < 4; ++v) lp.matrix(row + 1, 4 * c + v) = scale * lp.objective[4 * c + v];
    }
    double deviation = 0.0;
    for (std::size_t c = 0; c < k; ++c) deviation += base_accuracy[row] - base_accuracy[c];
    lp.rhs[row + 1] = deviation / kd;
  }
  return lp;
}

LpProblem BuildRelaxedLp(const GroupStatistics& stats, double eps, double delta) {
  if (!(eps >= 0.0) || !(delta >= 0.0)) {
    Fail(Errc::kNegativeRelaxation, "eps and delta must be non-negative");
  }
  LpProblem lp = BuildStrictLp(stats);
  lp.relax[0] = eps;
  for (std::size_t i = 1; i < lp.relax.size(); ++i) lp.relax[i] = delta;
  return lp;
}

StandardLp ToStandardForm(const LpProblem& lp) {
  if (!lp.is_strict()) {
    Fail(Errc::kRelaxedInputUnsupported, "standard form is defined for the strict program");
  }
  const std::size_t k = lp.communities;
  const std::size_t n = 4 * k;
  StandardLp out;
  out.communities = k;
  out.objective.assign(2 * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) out.objective[j] = lp.objective[j];
  out.matrix = Matrix(k + 1 + n, 2 * n);
  for (std::size_t i = 0; i <= k; ++i)
    for (std::size_t j = 0; j < n; ++j) out.matrix(i, j) = lp.matrix(i, j);
  for (std::size_t j = 0; j < n; ++j) {
    out.matrix(k + 1 + j, j) = 1.0;
    out.matrix(k + 1 + j, n + j) = 1.0;
  }
  out.rhs.assign(k + 1 + n, 1.0);
  for (std::size_t i = 0; i <= k; ++i) out.rhs[i] = lp.rhs[i];
  return out;
}

MulticlassLp BuildMulticlassLp(const MulticlassStats& stats) {
  const std::size_t k = stats.communities();
  const std::size_t n = stats.classes;
  if (k == 0 || n < 2) Fail(Errc::kInvalidArgument, "multi-class statistics are empty");
  if (!(stats.alpha > 0.0) || !(stats.beta > 0.0)) {
    Fail(Errc::kDegenerateGroup, "alpha and beta must be positive");
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!(stats.p[c] > 0.0)) {
      Fail(Errc::kZeroCommunityWeight, "community " + std::to_string(c) + " has zero weight");
    }
  }
  const double kd = static_cast<double>(k);

  MulticlassLp out;
  out.communities = k;
  out.classes = n;
  const std::size_t vars = n * n * 2 * k;
  const std::size_t rows = 1 + k + 2 * k * n;
  LinearProgram& lp = out.program;
  lp.sense = Sense::kMaximize;
  lp.objective.assign(vars, 0.0);
  lp.matrix = Matrix(rows, vars);
  lp.rhs.assign(rows, 0.0);
  lp.range.assign(rows, 0.0);
  lp.col_lower.assign(vars, 0.0);
  lp.col_upper.assign(vars, 1.0);

  for (std::size_t c = 0; c < k; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t kk = 0; kk < n; ++kk) {
          const std::size_t var = out.Index(kk, j, a, c);
          const double mass = stats.at(kk, j, a, c);
          lp.objective[var] = mass;
          // Community accuracy rows: own community minus the mean.
          for (std::size_t row = 0; row < k; ++row) {
            const double w = (row == c ? 1.0 - 1.0 / kd : -1.0 / kd);
            lp.matrix(1 + row, var) = w * mass / stats.p[c];
          }
          lp.matrix(1 + k + (c * 2 + static_cast<std::size_t>(a)) * n + j, var) = 1.0;
        }
        // Class-1 equal-opportunity row.
        const double qualified = stats.at(1, j, a, c);
        lp.matrix(0, out.Index(1, j, a, c)) = a == 0 ? qualified / stats.alpha : -qualified / stats.beta;
      }
    }
  }
  for (std::size_t r = 1 + k; r < rows; ++r) lp.rhs[r] = 1.0;
  return out;
}

void WriteLinearProgram(std::ostream& out, const LinearProgram& lp,
                        const std::vector<std::string>& comments) {
  lp.Validate();
  out << "fairpost-lp 1\n";
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << "sense " << (lp.sense == Sense::kMinimize ? "minimize" : "maximize") << "\n";
  out << "dims " << lp.rows() << " " << lp.cols() << "\n";
  auto write_row = [&out](std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out << ' ';
      out << FormatNumber(values[i]);
    }
    out << "\n";
  };
  out << "objective\n";
  write_row(lp.objective);
  out << "rows\n";
  for (std::size_t i = 0; i < lp.rows(); ++i) write_row(lp.matrix.row(i));
  out << "rhs\n";
  write_row(lp.rhs);
  out << "ranges\n";
  write_row(lp.range);
  out << "bounds\n";
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    out << FormatNumber(lp.col_lower[j]) << ' ' << FormatNumber(lp.col_upper[j]) << "\n";
  }
  out << "end\n";
}

LinearProgram ReadLinearProgram(std::istream& in) {
  TokenReader reader(in);
  reader.Expect("fairpost-lp");
  if (reader.Count("version") != 1) Fail(Errc::kParseError, "unsupported LP format version");
  LinearProgram lp;
  reader.Expect("sense");
  const std::string sense = reader.Next("sense");
  if (sense == "minimize") {
    lp.sense = Sense::kMinimize;
  } else if (sense == "maximize") {
    lp.sense = Sense::kMaximize;
  } else {
    Fail(Errc::kParseError, "unknown sense '" + sense + "'");
  }
  reader.Expect("dims");
  const std::size_t m = reader.Count("rows");
  const std::size_t n = reader.Count("cols");
  reader.Expect("objective");
  lp.objective.resize(n);
  for (double& v : lp.objective) v = reader.Number("objective");
  reader.Expect("rows");
  lp.matrix = Matrix(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) lp.matrix(i, j) = reader.Number("rows");
  reader.Expect("rhs");
  lp.rhs.resize(m);
  for (double& v : lp.rhs) v = reader.Number("rhs");
  reader.Expect("ranges");
  lp.range.resize(m);
  for (double& v : lp.range) v = reader.Number("ranges");
  reader.Expect("bounds");
  lp.col_lower.resize(n);
  lp.col_upper.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    lp.col_lower[j] = reader.Number("bounds");
    lp.col_upper[j] = reader.Number("bounds");
  }
  reader.Expect("end");
  lp.Validate();
  return lp;
}

}  // namespace fairpost
