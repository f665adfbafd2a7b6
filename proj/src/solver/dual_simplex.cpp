#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "solver/simplex.hpp"

namespace gridxpand::detail {

namespace {

constexpr double kArtificialBound = 1e7;
constexpr double kPivotTolerance = 1e-9;
constexpr double kDropTolerance = 1e-14;
constexpr double kPerturbation = 5e-7;  // relative cost perturbation of the dual phase

// Column alpha of a basis change at row r; the new inverse is E * old.
struct Eta {
  int row = 0;
  double pivot = 0;
  std::vector<int> index;  // rows != row with nonzero alpha
  std::vector<double> value;
};

}  // namespace

struct SimplexSolver::Impl {
  using SparseMatrix = Eigen::SparseMatrix<double>;

  const LpProblem& lp;
  LpOptions opt;
  int n, m, nt;

  std::vector<double> cost, true_cost;
  std::vector<double> lo, hi;  // working bounds, possibly artificial
  std::vector<double> given_lo, given_hi;
  std::vector<char> artificial;
  std::vector<double> x, d;
  std::vector<int> basic, row_of;
  std::vector<VarStatus> status;

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eta> etas;
  double cost_scale = 1, tol_d = 0, tol_final = 0, tol_p = 0;
  long iterations = 0;

  std::vector<double> work_row, work_col, alpha_row;

  Impl(const LpProblem& p, const LpOptions& o) : lp(p), opt(o), n(p.n), m(p.m), nt(p.n + p.m) {
    true_cost.assign(nt, 0.0);
    std::copy(lp.cost.begin(), lp.cost.end(), true_cost.begin());
    for (double c : lp.cost) cost_scale = std::max(cost_scale, std::abs(c));
    tol_d = opt.dual_tolerance * cost_scale;
    tol_final = 1e-2 * tol_d;
    tol_p = opt.primal_tolerance;
    work_row.assign(m, 0.0);
    work_col.assign(m, 0.0);
    alpha_row.assign(nt, 0.0);
  }

  // ---- linear algebra -------------------------------------------------

  bool refactor() {
    etas.clear();
    if (m == 0) return true;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 3);
    for (int r = 0; r < m; ++r) {
      const int k = basic[r];
      if (k < n) {
        for (int e = lp.col_start[k]; e < lp.col_start[k + 1]; ++e) {
          trip.emplace_back(lp.col_row[e], r, lp.col_val[e]);
        }
      } else {
        trip.emplace_back(k - n, r, -1.0);
      }
    }
    SparseMatrix B(m, m);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu.analyzePattern(B);
    lu.factorize(B);
    etas.clear();
    return lu.info() == Eigen::Success;
  }

  void ftran(std::vector<double>& v) {
    if (m == 0) return;
    Eigen::Map<Eigen::VectorXd> vec(v.data(), m);
    Eigen::VectorXd sol = lu.solve(vec);
    vec = sol;
    for (const auto& eta : etas) {
      const double xr = v[eta.row] / eta.pivot;
      if (xr != 0.0) {
        for (std::size_t i = 0; i < eta.index.size(); ++i) v[eta.index[i]] -= eta.value[i] * xr;
      }
      v[eta.row] = xr;
    }
  }

  void btran(std::vector<double>& v) {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double sum = v[it->row];
      for (std::size_t i = 0; i < it->index.size(); ++i) sum -= it->value[i] * v[it->index[i]];
      v[it->row] = sum / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> vec(v.data(), m);
    Eigen::VectorXd sol = lu.transpose().solve(vec);
    vec = sol;
  }

  void load_column(int k, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (k < n) {
      for (int e = lp.col_start[k]; e < lp.col_start[k + 1]; ++e) out[lp.col_row[e]] = lp.col_val[e];
    } else {
      out[k - n] = -1.0;
    }
  }

  void push_eta(int r, const std::vector<double>& col) {
    Eta eta;
    eta.row = r;
    eta.pivot = col[r];
    for (int i = 0; i < m; ++i) {
      if (i != r && std::abs(col[i]) > kDropTolerance) {
        eta.index.push_back(i);
        eta.value.push_back(col[i]);
      }
    }
    etas.push_back(std::move(eta));
  }

  // ---- primal and dual values ----------------------------------------

  void compute_primal() {
    std::fill(work_col.begin(), work_col.end(), 0.0);
    for (int k = 0; k < nt; ++k) {
      if (status[k] == VarStatus::kBasic || x[k] == 0.0) continue;
      if (k < n) {
        for (int e = lp.col_start[k]; e < lp.col_start[k + 1]; ++e) {
          work_col[lp.col_row[e]] -= lp.col_val[e] * x[k];
        }
      } else {
        work_col[k - n] += x[k];
      }
    }
    ftran(work_col);
    for (int r = 0; r < m; ++r) x[basic[r]] = work_col[r];
  }

  void compute_dual() {
    for (int r = 0; r < m; ++r) work_row[r] = cost[basic[r]];
    btran(work_row);
    for (int k = 0; k < nt; ++k) {
      if (status[k] == VarStatus::kBasic) {
        d[k] = 0.0;
      } else if (k < n) {
        double s = cost[k];
        for (int e = lp.col_start[k]; e < lp.col_start[k + 1]; ++e) {
          s -= lp.col_val[e] * work_row[lp.col_row[e]];
        }
        d[k] = s;
      } else {
        d[k] = cost[k] + work_row[k - n];
      }
    }
  }

  double objective() const {
    double s = 0;
    for (int k = 0; k < n; ++k) s += true_cost[k] * x[k];
    return s;
  }

  // Dual degeneracy stalls the dual simplex on models where most columns have
  // zero cost. Each cost is nudged toward the bound its column can rest on by
  // a deterministic pseudo-random amount; the primal cleanup runs with the
  // true costs, so the perturbation never reaches a reported solution.
  void perturb_costs() {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (int k = 0; k < nt; ++k) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      const double u = static_cast<double>(state >> 11) * 0x1.0p-53;
      const double delta = kPerturbation * (1.0 + u) * (std::abs(true_cost[k]) + 1e-3 * cost_scale);
      const bool has_lo = std::isfinite(given_lo[k]), has_hi = std::isfinite(given_hi[k]);
      if (given_lo[k] == given_hi[k] || (!has_lo && !has_hi)) continue;
      if (has_lo && (!has_hi || true_cost[k] >= 0)) {
        cost[k] = true_cost[k] + delta;
      } else {
        cost[k] = true_cost[k] - delta;
      }
    }
  }

  // ---- bounds and statuses --------------------------------------------

  void place_at_lower(int k) {
    if (!std::isfinite(lo[k])) {
      lo[k] = std::isfinite(hi[k]) ? hi[k] - kArtificialBound : -kArtificialBound;
      artificial[k] = 1;
    }
    status[k] = VarStatus::kAtLower;
    x[k] = lo[k];
  }

  void place_at_upper(int k) {
    if (!std::isfinite(hi[k])) {
      hi[k] = std::isfinite(lo[k]) ? lo[k] + kArtificialBound : kArtificialBound;
      artificial[k] = 1;
    }
    status[k] = VarStatus::kAtUpper;
    x[k] = hi[k];
  }

  // Moves every nonbasic variable to the bound its reduced cost asks for.
  void make_dual_feasible() {
    for (int k = 0; k < nt; ++k) {
      if (status[k] == VarStatus::kBasic) continue;
      if (lo[k] == hi[k]) {
        status[k] = VarStatus::kFixed;
        x[k] = lo[k];
      } else if (d[k] > tol_d) {
        place_at_lower(k);
      } else if (d[k] < -tol_d) {
        place_at_upper(k);
      } else if (status[k] == VarStatus::kAtLower && std::isfinite(lo[k])) {
        x[k] = lo[k];
      } else if (status[k] == VarStatus::kAtUpper && std::isfinite(hi[k])) {
        x[k] = hi[k];
      } else if (std::isfinite(lo[k])) {
        status[k] = VarStatus::kAtLower;
        x[k] = lo[k];
      } else if (std::isfinite(hi[k])) {
        status[k] = VarStatus::kAtUpper;
        x[k] = hi[k];
      } else {
        status[k] = VarStatus::kFree;
        x[k] = 0.0;
      }
    }
  }

  void slack_basis() {
    basic.resize(m);
    status.assign(nt, VarStatus::kAtLower);
    for (int r = 0; r < m; ++r) {
      basic[r] = n + r;
      status[n + r] = VarStatus::kBasic;
    }
  }

  void rebuild_row_of() {
    row_of.assign(nt, -1);
    for (int r = 0; r < m; ++r) row_of[basic[r]] = r;
  }

  bool load_warm(const Basis& warm) {
    if (static_cast<int>(warm.basic.size()) != m || static_cast<int>(warm.status.size()) != nt) {
      return false;
    }
    basic = warm.basic;
    status = warm.status;
    int count = 0;
    for (int k = 0; k < nt; ++k) count += status[k] == VarStatus::kBasic;
    if (count != m) return false;
    for (int k : basic) {
      if (k < 0 || k >= nt || status[k] != VarStatus::kBasic) return false;
    }
    return true;
  }

  // ---- dual simplex phase ----------------------------------------------

  // Returns the row of the most infeasible basic variable, or -1.
  int choose_leaving() const {
    int best = -1;
    double best_inf = tol_p;
    for (int r = 0; r < m; ++r) {
      const int k = basic[r];
      double inf = 0;
      if (x[k] < lo[k] - tol_p) {
        inf = lo[k] - x[k];
      } else if (x[k] > hi[k] + tol_p) {
        inf = x[k] - hi[k];
      }
      if (inf > best_inf) {
        best_inf = inf;
        best = r;
      }
    }
    return best;
  }

  void compute_pivot_row(int r) {
    std::fill(work_row.begin(), work_row.end(), 0.0);
    work_row[r] = 1.0;
    btran(work_row);
    std::fill(alpha_row.begin(), alpha_row.end(), 0.0);
    for (int i = 0; i < m; ++i) {
      const double rho = work_row[i];
      if (std::abs(rho) <= kDropTolerance) continue;
      for (int e = lp.row_start[i]; e < lp.row_start[i + 1]; ++e) {
        alpha_row[lp.row_col[e]] += rho * lp.row_val[e];
      }
      alpha_row[n + i] = -rho;
    }
  }

  // Harris two-pass ratio test; `s` is +1 when the leaving variable moves
  // down to its upper bound, -1 when it moves up to its lower bound.
  int dual_ratio_test(double s) const {
    double theta_max = kInf;
    for (int k = 0; k < nt; ++k) {
      const VarStatus st = status[k];
      if (st == VarStatus::kBasic || st == VarStatus::kFixed) continue;
      const double a = alpha_row[k];
      if (std::abs(a) < kPivotTolerance) continue;
      const double sa = s * a;
      if (st == VarStatus::kAtLower && sa > 0) {
        theta_max = std::min(theta_max, (d[k] + tol_d) / sa);
      } else if (st == VarStatus::kAtUpper && sa < 0) {
        theta_max = std::min(theta_max, (d[k] - tol_d) / sa);
      } else if (st == VarStatus::kFree) {
        theta_max = std::min(theta_max, (std::abs(d[k]) + tol_d) / std::abs(a));
      }
    }
    if (theta_max == kInf) return -1;
    int q = -1;
    double best = 0;
    for (int k = 0; k < nt; ++k) {
      const VarStatus st = status[k];
      if (st == VarStatus::kBasic || st == VarStatus::kFixed) continue;
      const double a = alpha_row[k];
      if (std::abs(a) < kPivotTolerance) continue;
      const double sa = s * a;
      double ratio;
      if (st == VarStatus::kAtLower && sa > 0) {
        ratio = d[k] / sa;
      } else if (st == VarStatus::kAtUpper && sa < 0) {
        ratio = d[k] / sa;
      } else if (st == VarStatus::kFree) {
        ratio = std::abs(d[k]) / std::abs(a);
      } else {
        continue;
      }
      if (ratio <= theta_max && std::abs(a) > best) {
        best = std::abs(a);
        q = k;
      }
    }
    return q;
  }

  void pivot(int r, int q, const std::vector<double>& col, double leaving_value,
             VarStatus leaving_status) {
    const int p = basic[r];
    x[p] = leaving_value;
    status[p] = lo[p] == hi[p] ? VarStatus::kFixed : leaving_status;
    basic[r] = q;
    status[q] = VarStatus::kBasic;
    row_of[p] = -1;
    row_of[q] = r;
    push_eta(r, col);
  }

  LpStatus dual_phase(double cutoff) {
    int mismatches = 0;
    while (true) {
      if (iterations >= opt.iteration_limit) return LpStatus::kIterationLimit;
      if (static_cast<int>(etas.size()) >= opt.refactor_interval) {
        if (!refactor()) throw NumericalError("basis became singular during the dual simplex");
        compute_primal();
        compute_dual();
      }
      if (cutoff < kInf && objective() > cutoff) return LpStatus::kCutoff;

      const int r = choose_leaving();
      if (r < 0) return LpStatus::kOptimal;
      const int p = basic[r];
      const bool to_lower = x[p] < lo[p];
      const double s = to_lower ? -1.0 : 1.0;

      compute_pivot_row(r);
      const int q = dual_ratio_test(s);
      if (q < 0) {
        if (!etas.empty()) {
          // Confirm with a fresh factorization before declaring infeasibility.
          if (!refactor()) throw NumericalError("basis became singular during the dual simplex");
          compute_primal();
          compute_dual();
          continue;
        }
        return LpStatus::kInfeasible;
      }

      load_column(q, work_col);
      ftran(work_col);
      const double a_rq = work_col[r];
      if (std::abs(a_rq - alpha_row[q]) > 1e-7 * (1.0 + std::abs(a_rq)) ||
          std::abs(a_rq) < kPivotTolerance) {
        if (++mismatches > 3 || etas.empty()) {
          throw NumericalError("unstable pivot in the dual simplex (row " + std::to_string(r) +
                               ", column " + std::to_string(q) + ")");
        }
        if (!refactor()) throw NumericalError("basis became singular during the dual simplex");
        compute_primal();
        compute_dual();
        continue;
      }
      mismatches = 0;

      // A wrong-signed reduced cost is shifted to zero so the step stays
      // dual feasible.
      if (s * a_rq * d[q] < 0) {
        cost[q] -= d[q];
        d[q] = 0.0;
      }
      const double theta_d = d[q] / a_rq;
      for (int k = 0; k < nt; ++k) {
        if (status[k] != VarStatus::kBasic && alpha_row[k] != 0.0) d[k] -= theta_d * alpha_row[k];
      }
      d[q] = 0.0;
      d[p] = -theta_d;

      const double bound = to_lower ? lo[p] : hi[p];
      const double t = (x[p] - bound) / a_rq;
      x[q] += t;
      for (int i = 0; i < m; ++i) {
        if (work_col[i] != 0.0) x[basic[i]] -= t * work_col[i];
      }
      pivot(r, q, work_col, bound, to_lower ? VarStatus::kAtLower : VarStatus::kAtUpper);
      ++iterations;
    }
  }

  // ---- primal simplex phase ----------------------------------------------

  LpStatus primal_phase() {
    int degenerate = 0;
    while (true) {
      if (iterations >= opt.iteration_limit) return LpStatus::kIterationLimit;
      if (static_cast<int>(etas.size()) >= opt.refactor_interval) {
        if (!refactor()) throw NumericalError("basis became singular during the primal simplex");
        compute_primal();
      }
      compute_dual();
      const bool bland = degenerate > 50;
      int q = -1;
      double best = 0, dir = 0;
      for (int k = 0; k < nt; ++k) {
        const VarStatus st = status[k];
        if (st == VarStatus::kBasic || st == VarStatus::kFixed) continue;
        double inf = 0, kdir = 0;
        if (d[k] < -tol_final && x[k] < hi[k]) {
          inf = -d[k];
          kdir = 1;
        } else if (d[k] > tol_final && x[k] > lo[k]) {
          inf = d[k];
          kdir = -1;
        }
        if (inf <= 0) continue;
        if (bland) {
          q = k;
          dir = kdir;
          break;
        }
        if (inf > best) {
          best = inf;
          q = k;
          dir = kdir;
        }
      }
      if (q < 0) return LpStatus::kOptimal;

      load_column(q, work_col);
      ftran(work_col);
      double t_max = dir > 0 ? hi[q] - x[q] : x[q] - lo[q];
      int r = -1;
      double r_alpha = 0;
      for (int i = 0; i < m; ++i) {
        const double a = dir * work_col[i];
        if (std::abs(a) < kPivotTolerance) continue;
        const int k = basic[i];
        double lim;
        if (a > 0) {
          if (!std::isfinite(lo[k])) continue;
          lim = std::max(0.0, (x[k] - lo[k]) / a);
        } else {
          if (!std::isfinite(hi[k])) continue;
          lim = std::max(0.0, (hi[k] - x[k]) / -a);
        }
        const bool better = lim < t_max - 1e-12 ||
                            (lim <= t_max + 1e-12 && r >= 0 &&
                             (bland ? basic[i] < basic[r] : std::abs(a) > r_alpha));
        if (better || (r < 0 && lim <= t_max)) {
          t_max = std::min(t_max, lim);
          r = i;
          r_alpha = std::abs(a);
        }
      }
      if (!std::isfinite(t_max)) return LpStatus::kUnbounded;
      degenerate = t_max <= 1e-12 ? degenerate + 1 : 0;

      x[q] += dir * t_max;
      for (int i = 0; i < m; ++i) {
        if (work_col[i] != 0.0) x[basic[i]] -= dir * t_max * work_col[i];
      }
      if (r < 0) {
        status[q] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x[q] = dir > 0 ? hi[q] : lo[q];
      } else {
        const int p = basic[r];
        const bool down = dir * work_col[r] > 0;
        pivot(r, q, work_col, down ? lo[p] : hi[p], down ? VarStatus::kAtLower : VarStatus::kAtUpper);
      }
      ++iterations;
    }
  }

  // Nonbasic variables resting on an artificial bound get their true bound
  // back and become superbasic.
  void release_artificial_bounds() {
    for (int k = 0; k < nt; ++k) {
      if (!artificial[k]) continue;
      lo[k] = given_lo[k];
      hi[k] = given_hi[k];
      artificial[k] = 0;
      if (status[k] != VarStatus::kBasic) {
        if (x[k] == lo[k]) {
          status[k] = VarStatus::kAtLower;
        } else if (x[k] == hi[k]) {
          status[k] = VarStatus::kAtUpper;
        } else {
          status[k] = VarStatus::kFree;
        }
      }
    }
  }

  double max_primal_infeasibility() const {
    double worst = 0;
    for (int k = 0; k < nt; ++k) worst = std::max({worst, lo[k] - x[k], x[k] - hi[k]});
    return worst;
  }

  double max_dual_infeasibility() const {
    double worst = 0;
    for (int k = 0; k < nt; ++k) {
      const VarStatus st = status[k];
      if (st == VarStatus::kBasic || st == VarStatus::kFixed) continue;
      if (x[k] < hi[k]) worst = std::max(worst, -d[k]);
      if (x[k] > lo[k]) worst = std::max(worst, d[k]);
    }
    return worst;
  }

  LpResult solve(const std::vector<double>& col_lo, const std::vector<double>& col_hi,
                 const Basis* warm, double cutoff) {
    given_lo.assign(nt, 0.0);
    given_hi.assign(nt, 0.0);
    for (int j = 0; j < n; ++j) {
      given_lo[j] = col_lo[j];
      given_hi[j] = col_hi[j];
    }
    for (int i = 0; i < m; ++i) {
      given_lo[n + i] = lp.row_lo[i];
      given_hi[n + i] = lp.row_hi[i];
    }
    LpResult res;
    for (int k = 0; k < nt; ++k) {
      if (given_lo[k] > given_hi[k] + tol_p) {
        res.status = LpStatus::kInfeasible;
        return res;
      }
    }
    lo = given_lo;
    hi = given_hi;
    artificial.assign(nt, 0);
    cost = true_cost;
    perturb_costs();
    x.assign(nt, 0.0);
    d.assign(nt, 0.0);
    iterations = 0;

    if (!(warm && load_warm(*warm) && refactor())) {
      slack_basis();
      if (!refactor()) throw NumericalError("slack basis factorization failed");
    }
    rebuild_row_of();

    for (int round = 0; round < 4; ++round) {
      compute_dual();
      make_dual_feasible();
      compute_primal();
      const LpStatus st = dual_phase(cutoff);
      if (st != LpStatus::kOptimal) {
        res.status = st;
        res.iterations = iterations;
        if (st == LpStatus::kCutoff) res.objective = objective();
        return res;
      }
      cost = true_cost;
      release_artificial_bounds();
      const LpStatus pst = primal_phase();
      if (pst != LpStatus::kOptimal) {
        res.status = pst;
        res.iterations = iterations;
        return res;
      }
      if (!refactor()) throw NumericalError("final basis is singular");
      compute_primal();
      compute_dual();
      const bool artificial_left = std::any_of(artificial.begin(), artificial.end(),
                                               [](char a) { return a != 0; });
      if (!artificial_left && max_primal_infeasibility() <= 1e-7 &&
          max_dual_infeasibility() <= tol_d) {
        res.status = LpStatus::kOptimal;
        res.objective = objective();
        res.x.assign(x.begin(), x.begin() + n);
        res.basis.basic = basic;
        res.basis.status = status;
        for (auto& s : res.basis.status) {
          if (s == VarStatus::kFree) s = VarStatus::kAtLower;
        }
        res.iterations = iterations;
        return res;
      }
    }
    throw NumericalError("simplex could not reach a primal and dual feasible basis (primal residual " +
                         std::to_string(max_primal_infeasibility()) + ", dual residual " +
                         std::to_string(max_dual_infeasibility()) + ")");
  }
};

SimplexSolver::SimplexSolver(const LpProblem& lp, const LpOptions& options)
    : impl_(std::make_unique<Impl>(lp, options)) {}

SimplexSolver::~SimplexSolver() = default;

LpResult SimplexSolver::solve(const std::vector<double>& lo, const std::vector<double>& hi,
                              const Basis* warm, double cutoff) {
  return impl_->solve(lo, hi, warm, cutoff);
}

}  // namespace gridxpand::detail
