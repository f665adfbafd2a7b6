#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "solver/simplex.hpp"

namespace gridxpand {

namespace {

using detail::Basis;
using detail::LpStatus;

struct Node {
  double bound = -kInf;
  long id = 0;
  std::vector<std::pair<int, double>> fixes;  // (variable, value) from the root
  std::shared_ptr<const Basis> basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_residual(const MilpModel& model, const std::vector<double>& x) {
  const double viol = model.max_violation(x);
  if (viol > 1e-6) {
    throw NumericalError("solution violates the model by " + std::to_string(viol));
  }
}

}  // namespace

Solution solve_milp(const MilpModel& model, const MilpOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  if (opt.gap < 0) throw ValidationError("gap must be non-negative");
  model.validate();
  Solution sol;
  const auto lp = detail::make_lp(model, opt.lp.primal_tolerance);
  if (lp.infeasible) {
    sol.wall_time = elapsed(start);
    return sol;
  }
  std::vector<int> binaries;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).type == VarType::kBinary) binaries.push_back(j);
  }

  detail::SimplexSolver simplex(lp, opt.lp);
  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  open.push(Node{-kInf, 0, {}, nullptr});
  long next_id = 1;
  double incumbent = kInf;
  double last_bound = -kInf;
  bool node_limit_hit = false;

  auto prune_tolerance = [&]() {
    return std::max(opt.gap * std::abs(incumbent), 1e-9 * std::max(1.0, std::abs(incumbent)));
  };
  auto record = [&](double bound) {
    last_bound = std::max(last_bound, std::min(bound, incumbent));
    sol.trace.push_back({sol.node_count, incumbent, last_bound});
  };

  while (!open.empty()) {
    if (incumbent < kInf) {
      const double bound = open.top().bound;
      if (incumbent - bound <= prune_tolerance()) break;
    }
    if (sol.node_count >= opt.node_limit) {
      node_limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (incumbent < kInf && node.bound >= incumbent - prune_tolerance()) continue;

    std::vector<double> lo = lp.lo, hi = lp.hi;
    for (const auto& [j, v] : node.fixes) lo[j] = hi[j] = v;
    const double cutoff = incumbent < kInf ? incumbent - prune_tolerance() : kInf;
    const auto res = simplex.solve(lo, hi, node.basis.get(), cutoff);
    ++sol.node_count;
    sol.lp_iterations += res.iterations;

    if (res.status == LpStatus::kIterationLimit) {
      sol.status = SolveStatus::kIterationLimit;
      sol.wall_time = elapsed(start);
      return sol;
    }
    if (res.status == LpStatus::kUnbounded) {
      sol.status = SolveStatus::kUnbounded;
      sol.wall_time = elapsed(start);
      return sol;
    }
    if (res.status != LpStatus::kOptimal) continue;
    const double obj = std::max(res.objective, node.bound);
    if (node.id == 0) record(obj);
    if (incumbent < kInf && obj >= incumbent - prune_tolerance()) continue;

    int branch = -1;
    double best_frac = opt.integrality_tolerance;
    for (int j : binaries) {
      const double frac = std::abs(res.x[j] - std::round(res.x[j]));
      if (frac > best_frac) {
        best_frac = frac;
        branch = j;
      }
    }

    if (branch < 0) {
      // Integral: fix the binaries exactly and re-solve the continuous part.
      std::vector<double> plo = lo, phi = hi;
      for (int j : binaries) plo[j] = phi[j] = std::round(res.x[j]);
      const auto polished = simplex.solve(plo, phi, &res.basis);
      sol.lp_iterations += polished.iterations;
      std::vector<double> x = res.x;
      double value = res.objective;
      if (polished.status == LpStatus::kOptimal) {
        x = polished.x;
        value = polished.objective;
      } else {
        for (int j : binaries) x[j] = std::round(x[j]);
        value = model.evaluate_objective(x);
      }
      if (value < incumbent) {
        incumbent = value;
        sol.values = std::move(x);
        record(open.empty() ? incumbent : open.top().bound);
      }
      continue;
    }

    auto basis = std::make_shared<const Basis>(res.basis);
    for (double v : {0.0, 1.0}) {
      Node child;
      child.bound = obj;
      child.id = next_id++;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch, v);
      child.basis = basis;
      open.push(std::move(child));
    }
    record(open.top().bound);
  }

  sol.wall_time = elapsed(start);
  // An empty model has an incumbent with no values, so test the incumbent.
  if (incumbent == kInf) {
    sol.status = node_limit_hit ? SolveStatus::kIterationLimit : SolveStatus::kInfeasible;
    return sol;
  }
  const double bound = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
  record(bound);
  sol.objective = incumbent;
  sol.mip_gap = incumbent == last_bound ? 0.0
                                        : (incumbent - last_bound) / std::max(std::abs(incumbent), 1e-9);
  sol.status = node_limit_hit && sol.mip_gap > opt.gap ? SolveStatus::kGapLimit : SolveStatus::kOptimal;
  check_residual(model, sol.values);
  return sol;
}

Solution solve_by_enumeration(const MilpModel& model, const LpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  model.validate();
  const auto lp = detail::make_lp(model, options.primal_tolerance);
  Solution best;
  if (lp.infeasible) return best;

  std::vector<int> free_bins;
  std::vector<char> is_binary(model.num_variables(), 0);
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).type != VarType::kBinary) continue;
    is_binary[j] = 1;
    if (lp.lo[j] != lp.hi[j]) free_bins.push_back(j);
  }
  if (free_bins.size() > 24) throw ValidationError("enumeration limited to 24 free binaries");

  std::vector<const LinConstraint*> binary_rows;
  for (const auto& c : model.constraints()) {
    const bool only_bins = !c.terms.empty() && std::all_of(c.terms.begin(), c.terms.end(),
                                                           [&](const Term& t) { return is_binary[t.var]; });
    if (only_bins) binary_rows.push_back(&c);
  }

  detail::SimplexSolver simplex(lp, options);
  const long combos = 1L << free_bins.size();
  for (long mask = 0; mask < combos; ++mask) {
    std::vector<double> lo = lp.lo, hi = lp.hi;
    for (std::size_t b = 0; b < free_bins.size(); ++b) {
      lo[free_bins[b]] = hi[free_bins[b]] = (mask >> b) & 1 ? 1.0 : 0.0;
    }
    bool ok = true;
    for (const auto* c : binary_rows) {
      double row = 0;
      for (const auto& t : c->terms) row += t.coef * lo[t.var];
      if (row < c->lower - 1e-9 || row > c->upper + 1e-9) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const auto res = simplex.solve(lo, hi);
    ++best.node_count;
    best.lp_iterations += res.iterations;
    if (res.status == LpStatus::kOptimal && res.objective < best.objective) {
      best.objective = res.objective;
      best.values = res.x;
      best.status = SolveStatus::kOptimal;
      best.mip_gap = 0;
    }
  }
  best.wall_time = elapsed(start);
  return best;
}

}  // namespace gridxpand
