#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairpost/matrix.h"
#include "fairpost/stats.h"

namespace fairpost {

enum class Sense { kMinimize, kMaximize };

// Solver-facing linear program:
//   optimize objective . x
//   subject to rhs - range <= matrix x <= rhs + range   (range >= 0)
//              col_lower <= x <= col_upper
// col_upper may be +infinity; col_lower must be finite.
struct LinearProgram {
  Sense sense = Sense::kMinimize;
  std::vector<double> objective;
  Matrix matrix;
  std::vector<double> rhs;
  std::vector<double> range;
  std::vector<double> col_lower;
  std::vector<double> col_upper;

  std::size_t rows() const noexcept { return matrix.rows(); }
  std::size_t cols() const noexcept { return matrix.cols(); }

  // Throws InvalidArgument on inconsistent dimensions or non-finite data.
  void Validate() const;
};

// Binary fair-predictor program over z in [0,1]^{4K}. Variables are ordered
// (z0^{0c}, z1^{0c}, z0^{1c}, z1^{1c}) per community, communities ascending.
// Row 0 is the equal-opportunity row; row 1 + c the community-c row.
struct LpProblem {
  std::size_t communities = 0;
  std::vector<double> objective;  // 4K
  Matrix matrix;                  // (K+1) x 4K
  std::vector<double> rhs;        // K+1
  std::vector<double> relax;      // K+1: (eps, delta, ..., delta)

  bool is_strict() const noexcept;
  LinearProgram ToLinearProgram() const;
};

// Slack-augmented form [[A, 0], [I, I]] zbar = [b; 1], zbar >= 0.
struct StandardLp {
  std::size_t communities = 0;
  std::vector<double> objective;  // 8K
  Matrix matrix;                  // (5K+1) x 8K
  std::vector<double> rhs;        // 5K+1

  LinearProgram ToLinearProgram() const;
};

// Multi-class program: maximize global accuracy over z_{kj}^{ac} in [0,1]
// with the class-1 equal-opportunity row, K community rows and 2KN column
// simplex rows. Variable order matches MulticlassStats::Index.
struct MulticlassLp {
  std::size_t communities = 0;
  std::size_t classes = 0;
  LinearProgram program;

  std::size_t Index(std::size_t k, std::size_t j, int a, std::size_t c) const noexcept {
    return ((c * 2 + static_cast<std::size_t>(a)) * classes + j) * classes + k;
  }
};

inline constexpr std::size_t VariableIndex(std::size_t community, int a, int j) noexcept {
  return community * 4 + static_cast<std::size_t>(a) * 2 + static_cast<std::size_t>(j);
}

LpProblem BuildStrictLp(const GroupStatistics& stats);
LpProblem BuildRelaxedLp(const GroupStatistics& stats, double eps, double delta);
StandardLp ToStandardForm(const LpProblem& lp);
MulticlassLp BuildMulticlassLp(const MulticlassStats& stats);

// Plain-text format (see docs/formats.md). Numbers are written with 17
// significant digits so a write/read cycle is exact.
void WriteLinearProgram(std::ostream& out, const LinearProgram& lp,
                        const std::vector<std::string>& comments = {});
LinearProgram ReadLinearProgram(std::istream& in);

}  // namespace fairpost
