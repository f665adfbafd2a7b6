#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gridxpand/milp.hpp"
#include "gridxpand/solver.hpp"

namespace gridxpand::detail {

// min c'x  s.t.  row_lo <= A x <= row_hi,  lo <= x <= hi.
// Columns keep the indices of the originating MilpModel; presolve only
// removes rows.
struct LpProblem {
  int n = 0;  // structural columns
  int m = 0;  // rows
  std::vector<double> cost, lo, hi;
  std::vector<double> row_lo, row_hi;
  std::vector<int> col_start, col_row;  // CSC
  std::vector<double> col_val;
  std::vector<int> row_start, row_col;  // CSR
  std::vector<double> row_val;
  bool infeasible = false;  // detected by presolve
};

// Converts a model, folding single-variable rows into column bounds and
// dropping empty rows.
LpProblem make_lp(const MilpModel& model, double tolerance = 1e-9);

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree, kFixed };

struct Basis {
  std::vector<int> basic;          // m entries, variable index in [0, n + m)
  std::vector<VarStatus> status;   // n + m entries

  bool empty() const { return basic.empty(); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kCutoff, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = kInf;
  std::vector<double> x;  // structural values
  Basis basis;
  long iterations = 0;
};

// Bounded dual simplex on [A  -I] with row activities as logical variables,
// LU-factored basis with product-form updates, Harris ratio test and cost
// shifting; a primal phase removes residual dual infeasibility.
class SimplexSolver {
 public:
  SimplexSolver(const LpProblem& lp, const LpOptions& options);
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  // Column bounds override the problem bounds (used by branch-and-bound).
  // `cutoff` stops the dual phase once its objective provably exceeds it.
  LpResult solve(const std::vector<double>& lo, const std::vector<double>& hi,
                 const Basis* warm = nullptr, double cutoff = kInf);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridxpand::detail
