#include <chrono>
#include <cmath>

#include "solver/simplex.hpp"

namespace gridxpand {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kGapLimit: return "gap_limit";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "?";
}

namespace detail {

LpProblem make_lp(const MilpModel& model, double tolerance) {
  LpProblem lp;
  lp.n = model.num_variables();
  lp.cost = model.objective();
  for (const auto& v : model.variables()) {
    lp.lo.push_back(v.lo);
    lp.hi.push_back(v.hi);
  }

  std::vector<const LinConstraint*> kept;
  for (const auto& c : model.constraints()) {
    if (c.terms.empty()) {
      if (c.lower > tolerance || c.upper < -tolerance) lp.infeasible = true;
      continue;
    }
    if (c.terms.size() == 1) {
      const auto& t = c.terms.front();
      double a = c.lower / t.coef, b = c.upper / t.coef;
      if (t.coef < 0) std::swap(a, b);
      lp.lo[t.var] = std::max(lp.lo[t.var], a);
      lp.hi[t.var] = std::min(lp.hi[t.var], b);
      continue;
    }
    kept.push_back(&c);
  }
  for (int j = 0; j < lp.n; ++j) {
    if (lp.lo[j] > lp.hi[j]) {
      if (lp.lo[j] - lp.hi[j] <= tolerance * (1 + std::abs(lp.hi[j]))) {
        lp.lo[j] = lp.hi[j];
      } else {
        lp.infeasible = true;
      }
    }
  }

  lp.m = static_cast<int>(kept.size());
  lp.row_start.push_back(0);
  std::vector<int> col_count(lp.n + 1, 0);
  for (const auto* c : kept) {
    lp.row_lo.push_back(c->lower);
    lp.row_hi.push_back(c->upper);
    for (const auto& t : c->terms) {
      lp.row_col.push_back(t.var);
      lp.row_val.push_back(t.coef);
      ++col_count[t.var + 1];
    }
    lp.row_start.push_back(static_cast<int>(lp.row_col.size()));
  }
  lp.col_start.assign(lp.n + 1, 0);
  for (int j = 0; j < lp.n; ++j) lp.col_start[j + 1] = lp.col_start[j] + col_count[j + 1];
  lp.col_row.resize(lp.row_col.size());
  lp.col_val.resize(lp.row_col.size());
  std::vector<int> fill(lp.col_start.begin(), lp.col_start.end() - 1);
  for (int i = 0; i < lp.m; ++i) {
    for (int e = lp.row_start[i]; e < lp.row_start[i + 1]; ++e) {
      const int j = lp.row_col[e];
      lp.col_row[fill[j]] = i;
      lp.col_val[fill[j]] = lp.row_val[e];
      ++fill[j];
    }
  }
  return lp;
}

}  // namespace detail

Solution solve_lp(const MilpModel& model, const LpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  model.validate();
  const auto lp = detail::make_lp(model, options.primal_tolerance);
  Solution sol;
  if (!lp.infeasible) {
    detail::SimplexSolver simplex(lp, options);
    const auto res = simplex.solve(lp.lo, lp.hi);
    sol.lp_iterations = res.iterations;
    switch (res.status) {
      case detail::LpStatus::kOptimal:
        sol.status = SolveStatus::kOptimal;
        sol.values = res.x;
        sol.objective = res.objective;
        sol.mip_gap = 0;
        break;
      case detail::LpStatus::kUnbounded: sol.status = SolveStatus::kUnbounded; break;
      case detail::LpStatus::kIterationLimit: sol.status = SolveStatus::kIterationLimit; break;
      default: sol.status = SolveStatus::kInfeasible; break;
    }
  }
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace gridxpand
