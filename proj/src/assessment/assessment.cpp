#include <algorithm>
#include <cmath>

#include "gridxpand/assessment.hpp"

namespace gridxpand {

std::string_view to_string(CostClass c) {
  switch (c) {
    case CostClass::kNegative: return "negative";
    case CostClass::kZero: return "zero";
    case CostClass::kPositive: return "positive";
  }
  return "?";
}

double incremental_cost(const ExpansionPlan& with_cs, const ExpansionPlan& without_cs) {
  return with_cs.investment_cost - without_cs.investment_cost;
}

CostClass classify(double c_itgr, double tolerance) {
  if (std::abs(c_itgr) < tolerance) return CostClass::kZero;
  return c_itgr < 0 ? CostClass::kNegative : CostClass::kPositive;
}

std::map<std::string, TypeDelta> breakdown(const ExpansionPlan& with_cs, const ExpansionPlan& without_cs) {
  std::map<std::string, TypeDelta> out;
  for (const auto& t : kAssetTypes) out[t] = {};
  // Costs per (type, asset); an asset kept in both plans nets out.
  std::map<std::pair<std::string, std::string>, double> diff;
  for (const auto& inv : with_cs.investments) diff[{inv.type, inv.asset}] += inv.annual_cost;
  for (const auto& inv : without_cs.investments) diff[{inv.type, inv.asset}] -= inv.annual_cost;
  for (const auto& [key, d] : diff) {
    auto& slot = out[key.first];
    if (d > 0) slot.added += d;
    else slot.replaced -= d;
  }
  return out;
}

void normalize(AssessmentReport& r, const FeederNetwork& net) {
  r.annual_energy_kwh = annual_energy_kwh(net);
  r.cost_per_kw = r.cs_capacity_mw > 0 ? r.c_itgr / (r.cs_capacity_mw * 1000.0) : 0.0;
  r.cost_per_kwh = r.annual_energy_kwh > 0 ? 100.0 * r.c_itgr / r.annual_energy_kwh : 0.0;
}

double downsizing_metric(const ExpansionPlan& plan) {
  if (plan.cs_available_mwh <= 0) return 0.0;
  return std::clamp(plan.curtailed_mwh / plan.cs_available_mwh, 0.0, 1.0);
}

AssessmentReport assess_with_baseline(const FeederNetwork& net, const NetloadScenario& scenario,
                                      const LoopResult& without, const Siting& siting,
                                      const AssessOptions& options, const CandidateSet* seed) {
  LoopOptions loop = options.loop;
  if (!loop.cs_capacity) loop.cs_capacity = cs_total_capacity(net);
  const LoopResult with = expansion_loop(net, scenario, true, siting, loop, seed);

  AssessmentReport r;
  r.feeder = net.name;
  r.scenario = std::string(to_string(scenario.label));
  r.scale_factor = scenario.scale_factor;
  r.resolved = with.status == LoopStatus::kResolved && without.status == LoopStatus::kResolved;
  if (with.status == LoopStatus::kSolverFailure || without.status == LoopStatus::kSolverFailure) {
    r.status = std::string(to_string(LoopStatus::kSolverFailure));
  } else {
    r.status = std::string(to_string(r.resolved ? LoopStatus::kResolved : LoopStatus::kUnresolved));
  }
  r.c_with_cs = with.plan.investment_cost;
  r.c_without_cs = without.plan.investment_cost;
  r.c_itgr = r.c_with_cs - r.c_without_cs;
  r.classification = classify(r.c_itgr);
  r.breakdown = breakdown(with.plan, without.plan);
  r.cs_capacity_mw = *loop.cs_capacity;
  r.curtailed_fraction = downsizing_metric(with.plan);
  r.curtailment_cost_with = with.plan.curtailment_cost;
  r.curtailment_cost_without = without.plan.curtailment_cost;
  r.slack_mwh_with = with.plan.total_slack_mwh;
  r.slack_mwh_without = without.plan.total_slack_mwh;
  r.siting_mode = to_string(siting);
  r.siting_bus = with.siting_bus;
  r.iterations_with = with.iterations;
  r.iterations_without = without.iterations;
  r.investments_with = with.plan.investments;
  r.investments_without = without.plan.investments;
  r.candidates_with = with.candidates;
  normalize(r, scenario.network);
  return r;
}

AssessmentReport assess(const FeederNetwork& net, ScenarioLabel label, const Siting& siting,
                        const AssessOptions& options, const CandidateSet* seed) {
  const auto scenario = make_scenario(net, label, options.scan);
  const auto without = expansion_loop(net, scenario, false, siting, options.loop);
  return assess_with_baseline(net, scenario, without, siting, options, seed);
}

std::vector<SitingRow> compare_siting(const FeederNetwork& net, ScenarioLabel label,
                                      const AssessOptions& options, std::uint64_t seed) {
  const auto scenario = make_scenario(net, label, options.scan);
  const auto without = expansion_loop(net, scenario, false, Siting{}, options.loop);
  LoopOptions loop = options.loop;
  if (!loop.cs_capacity) loop.cs_capacity = cs_total_capacity(net);
  AssessOptions opts = options;
  opts.loop = loop;

  std::vector<SitingRow> rows;
  CandidateSet fixed_union;
  const char* roles[] = {"head", "middle", "end"};
  for (const char* role : roles) {
    Siting s{Siting::Kind::kFixed, role, seed};
    rows.push_back({std::string("fixed-") + role, assess_with_baseline(net, scenario, without, s, opts)});
    fixed_union.merge(rows.back().report.candidates_with);
  }
  rows.push_back({"random", assess_with_baseline(net, scenario, without, Siting{Siting::Kind::kRandom, {}, seed}, opts)});
  rows.push_back({"optimal", assess_with_baseline(net, scenario, without, Siting{}, opts, &fixed_union)});
  return rows;
}

}  // namespace gridxpand
