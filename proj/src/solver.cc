#include "fairpost/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairpost/error.h"

namespace fairpost {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState { kBasic, kAtLower, kAtUpper };

class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const SolverOptions& options)
      : lp_(lp),
        options_(options),
        m_(lp.rows()),
        n_(lp.cols()),
        total_(n_ + 2 * m_),
        tableau_(m_, total_),
        x_(total_, 0.0),
        lower_(total_, 0.0),
        upper_(total_, 0.0),
        state_(total_, VarState::kAtLower),
        sigma_(m_, 1.0),
        basis_(m_, 0) {
    max_iterations_ = options.max_iterations != 0 ? options.max_iterations
                                                  : 50 * (m_ + total_) + 1000;
    Initialize();
  }

  LpSolution Run(bool phase_one_only) {
    LpSolution out;
    bool ok = Iterate(/*phase=*/1);
    out.phase1_objective = ArtificialSum();
    if (!ok) {
      out.status = SolveStatus::kNumericalFailure;
      return Finish(out);
    }
    if (out.phase1_objective > options_.feasibility_tolerance) {
      out.status = SolveStatus::kInfeasible;
      return Finish(out);
    }
    if (phase_one_only) {
      out.status = SolveStatus::kOptimal;
      return Finish(out);
    }
    DriveOutArtificials();
    for (std::size_t i = 0; i < m_; ++i) upper_[n_ + m_ + i] = 0.0;
    if (!Refactor()) {
      out.status = SolveStatus::kNumericalFailure;
      return Finish(out);
    }
    ok = Iterate(/*phase=*/2);
    if (unbounded_) {
      out.status = SolveStatus::kUnbounded;
    } else if (!ok || !Refactor()) {
      out.status = SolveStatus::kNumericalFailure;
    } else {
      out.status = SolveStatus::kOptimal;
    }
    return Finish(out);
  }

 private:
  std::size_t Artificial(std::size_t row) const { return n_ + m_ + row; }
  bool IsArtificial(std::size_t var) const { return var >= n_ + m_; }

  double Cost(std::size_t var, int phase) const {
    if (phase == 1) return IsArtificial(var) ? 1.0 : 0.0;
    if (var >= n_) return 0.0;
    return lp_.sense == Sense::kMinimize ? lp_.objective[var] : -lp_.objective[var];
  }

  double OriginalEntry(std::size_t row, std::size_t var) const {
    if (var < n_) return lp_.matrix(row, var);
    if (var < n_ + m_) return var - n_ == row ? 1.0 : 0.0;
    return var - n_ - m_ == row ? sigma_[row] : 0.0;
  }

  void Initialize() {
    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = lp_.col_lower[j];
      upper_[j] = lp_.col_upper[j];
      // Start at the upper bound when it is finite; for the fairness programs
      // this is the identity policy z = 1.
      if (std::isfinite(upper_[j])) {
        x_[j] = upper_[j];
        state_[j] = VarState::kAtUpper;
      } else {
        x_[j] = lower_[j];
        state_[j] = VarState::kAtLower;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t slack = n_ + i;
      const std::size_t art = Artificial(i);
      lower_[slack] = -lp_.range[i];
      upper_[slack] = lp_.range[i];
      lower_[art] = 0.0;
      upper_[art] = kInf;

      double activity = 0.0;
      for (std::size_t j = 0; j < n_; ++j) activity += lp_.matrix(i, j) * x_[j];
      const double residual = lp_.rhs[i] - activity;
      // Rounding-level residuals at the starting point count as satisfied so
      // an already-feasible start stays exactly where it is.
      if (std::abs(residual) <= lp_.range[i] + kStartTolerance) {
        x_[slack] = residual;
        state_[slack] = VarState::kBasic;
        basis_[i] = slack;
        x_[art] = 0.0;
        upper_[art] = 0.0;
        state_[art] = VarState::kAtLower;
      } else {
        const bool high = residual > lp_.range[i];
        x_[slack] = high ? upper_[slack] : lower_[slack];
        state_[slack] = high ? VarState::kAtUpper : VarState::kAtLower;
        const double gap = residual - x_[slack];
        sigma_[i] = gap >= 0.0 ? 1.0 : -1.0;
        x_[art] = std::abs(gap);
        state_[art] = VarState::kBasic;
        basis_[i] = art;
      }
    }
    Refactor();
  }

  // Rebuilds tableau = B^{-1} [A | I | diag(sigma)] and the basic values
  // from the original data by Gaussian elimination with partial pivoting.
  bool Refactor() {
    if (m_ == 0) return true;
    const std::size_t width = total_ + 1;
    Matrix work(m_, m_ + width);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t r = 0; r < m_; ++r) work(i, r) = OriginalEntry(i, basis_[r]);
      for (std::size_t v = 0; v < total_; ++v) work(i, m_ + v) = OriginalEntry(i, v);
      double rhs = lp_.rhs[i];
      for (std::size_t v = 0; v < total_; ++v) {
        if (state_[v] != VarState::kBasic) rhs -= OriginalEntry(i, v) * x_[v];
      }
      work(i, m_ + total_) = rhs;
    }
    std::vector<std::size_t> perm(m_);
    for (std::size_t i = 0; i < m_; ++i) perm[i] = i;
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t best = col;
      for (std::size_t i = col + 1; i < m_; ++i)
        if (std::abs(work(i, col)) > std::abs(work(best, col))) best = i;
      if (std::abs(work(best, col)) < 1e-14) return false;
      if (best != col)
        for (std::size_t c = 0; c < work.cols(); ++c) std::swap(work(best, c), work(col, c));
      const double inv = 1.0 / work(col, col);
      for (std::size_t c = col; c < work.cols(); ++c) work(col, c) *= inv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == col) continue;
        const double f = work(i, col);
        if (f == 0.0) continue;
        for (std::size_t c = col; c < work.cols(); ++c) work(i, c) -= f * work(col, c);
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t v = 0; v < total_; ++v) tableau_(r, v) = work(r, m_ + v);
      x_[basis_[r]] = work(r, m_ + total_);
    }
    return true;
  }

  double ArtificialSum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += std::max(0.0, x_[Artificial(i)]);
    return s;
  }

  void Pivot(std::size_t row, std::size_t entering) {
    const double inv = 1.0 / tableau_(row, entering);
    auto pivot_row = tableau_.row(row);
    for (double& v : pivot_row) v *= inv;
    pivot_row[entering] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = tableau_(i, entering);
      if (f == 0.0) continue;
      auto r = tableau_.row(i);
      for (std::size_t v = 0; v < total_; ++v) r[v] -= f * pivot_row[v];
      r[entering] = 0.0;
    }
    basis_[row] = entering;
    state_[entering] = VarState::kBasic;
  }

  // Returns false on iteration-limit or factorization failure.
  bool Iterate(int phase) {
    std::size_t since_refactor = 0;
    while (true) {
      if (iterations_ >= max_iterations_) return false;
      // Bland: lowest-index improving variable.
      std::size_t entering = total_;
      double direction = 0.0;
      for (std::size_t v = 0; v < total_; ++v) {
        if (state_[v] == VarState::kBasic) continue;
        if (!(upper_[v] > lower_[v])) continue;
        double reduced = Cost(v, phase);
        for (std::size_t i = 0; i < m_; ++i) {
          const double t = tableau_(i, v);
          if (t != 0.0) reduced -= Cost(basis_[i], phase) * t;
        }
        if (state_[v] == VarState::kAtLower && reduced < -options_.optimality_tolerance) {
          entering = v;
          direction = 1.0;
          break;
        }
        if (state_[v] == VarState::kAtUpper && reduced > options_.optimality_tolerance) {
          entering = v;
          direction = -1.0;
          break;
        }
      }
      if (entering == total_) return true;

      // Ratio test; ties go to the lowest basic variable index.
      double step = upper_[entering] - lower_[entering];
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = tableau_(i, entering);
        if (std::abs(alpha) <= options_.pivot_tolerance) continue;
        const double rate = -direction * alpha;
        const std::size_t b = basis_[i];
        double limit;
        bool to_upper;
        if (rate < 0.0) {
          limit = (x_[b] - lower_[b]) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(upper_[b])) continue;
          limit = (upper_[b] - x_[b]) / rate;
          to_upper = true;
        }
        limit = std::max(limit, 0.0);
        if (leave_row == m_ || limit < best_limit_ - kTieTolerance ||
            (limit <= best_limit_ + kTieTolerance && b < basis_[leave_row])) {
          leave_row = i;
          best_limit_ = limit;
          leave_to_upper = to_upper;
        }
      }
      const bool bound_flip = leave_row == m_ || step <= best_limit_;
      if (!bound_flip) step = best_limit_;
      if (!std::isfinite(step)) {
        unbounded_ = true;
        return false;
      }

      x_[entering] += direction * step;
      for (std::size_t i = 0; i < m_; ++i) {
        x_[basis_[i]] -= direction * step * tableau_(i, entering);
      }
      ++iterations_;
      if (bound_flip) {
        state_[entering] =
            direction > 0 ? VarState::kAtUpper : VarState::kAtLower;
        x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
        continue;
      }
      const std::size_t leaving = basis_[leave_row];
      x_[leaving] = leave_to_upper ? upper_[leaving] : lower_[leaving];
      state_[leaving] = leave_to_upper ? VarState::kAtUpper : VarState::kAtLower;
      Pivot(leave_row, entering);
      if (++since_refactor >= options_.refactor_interval) {
        since_refactor = 0;
        if (!Refactor()) return false;
      }
    }
  }

  // Replaces basic artificials (all at ~0 after a feasible phase one) by
  // structural or slack columns where the row allows it. Rows where no such
  // column exists are redundant; their artificial stays basic, pinned at 0.
  void DriveOutArtificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!IsArtificial(basis_[r])) continue;
      for (std::size_t v = 0; v < n_ + m_; ++v) {
        if (state_[v] == VarState::kBasic) continue;
        if (std::abs(tableau_(r, v)) > 1e-9) {
          const std::size_t art = basis_[r];
          Pivot(r, v);
          state_[art] = VarState::kAtLower;
          x_[art] = 0.0;
          break;
        }
      }
    }
  }

  LpSolution Finish(LpSolution out) {
    out.iterations = iterations_;
    out.basis = basis_;
    out.z.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      out.z[j] = std::clamp(x_[j], lp_.col_lower[j], lp_.col_upper[j]);
    }
    out.objective = Dot(lp_.objective, out.z);
    out.max_constraint_residual = MaxConstraintResidual(lp_, out.z);
    if (out.status == SolveStatus::kOptimal &&
        out.max_constraint_residual > options_.feasibility_tolerance) {
      out.status = SolveStatus::kNumericalFailure;
    }
    return out;
  }

  static constexpr double kTieTolerance = 1e-12;
  static constexpr double kStartTolerance = 1e-12;

  const LinearProgram& lp_;
  SolverOptions options_;
  std::size_t m_;
  std::size_t n_;
  std::size_t total_;
  Matrix tableau_;
  std::vector<double> x_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<VarState> state_;
  std::vector<double> sigma_;
  std::vector<std::size_t> basis_;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
  double best_limit_ = 0.0;
  bool unbounded_ = false;
};

}  // namespace

std::string_view SolveStatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kNumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

double MaxConstraintResidual(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    const double activity = Dot(lp.matrix.row(i), x);
    const double lo = lp.rhs[i] - lp.range[i];
    const double hi = lp.rhs[i] + lp.range[i];
    worst = std::max({worst, lo - activity, activity - hi});
  }
  return worst;
}

LpSolution Solve(const LinearProgram& lp, const SolverOptions& options) {
  lp.Validate();
  return BoundedSimplex(lp, options).Run(/*phase_one_only=*/false);
}

LpSolution Solve(const LpProblem& lp, const SolverOptions& options) {
  return Solve(lp.ToLinearProgram(), options);
}

LpSolution Solve(const StandardLp& lp, const SolverOptions& options) {
  return Solve(lp.ToLinearProgram(), options);
}

LpSolution Solve(const MulticlassLp& lp, const SolverOptions& options) {
  return Solve(lp.program, options);
}

FeasibilityResult CheckFeasibility(const LinearProgram& lp, const SolverOptions& options) {
  lp.Validate();
  const LpSolution phase1 = BoundedSimplex(lp, options).Run(/*phase_one_only=*/true);
  if (phase1.status == SolveStatus::kNumericalFailure) {
    Fail(Errc::kNumericalFailure, "phase one did not terminate");
  }
  return {phase1.status != SolveStatus::kInfeasible, phase1.phase1_objective};
}

FeasibilityResult CheckFeasibility(const LpProblem& lp, const SolverOptions& options) {
  return CheckFeasibility(lp.ToLinearProgram(), options);
}

}  // namespace fairpost
