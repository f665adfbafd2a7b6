#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "gridxpand/scenario.hpp"
#include "json.hpp"

namespace gridxpand {

std::string_view to_string(LoopStatus s) {
  switch (s) {
    case LoopStatus::kResolved: return "resolved";
    case LoopStatus::kUnresolved: return "unresolved";
    case LoopStatus::kSolverFailure: return "solver_failure";
  }
  return "?";
}

namespace {

constexpr double kSlackEpsilon = 1e-7;  // MW, per period

std::vector<SlackEntry> slack_entries(const FeederNetwork& net, const ExpansionModel& em,
                                      const std::vector<double>& x) {
  std::vector<SlackEntry> out;
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    for (std::size_t t = 0; t < em.periods.size(); ++t) {
      const double p = x[em.p_slack_up[b][t]] - x[em.p_slack_down[b][t]];
      const double q = x[em.q_slack_up[b][t]] - x[em.q_slack_down[b][t]];
      if (std::abs(p) > kSlackEpsilon || std::abs(q) > kSlackEpsilon) {
        out.push_back({net.buses[b].id, static_cast<int>(t), p, q});
      }
    }
  }
  return out;
}

// Offers every upgradeable element on the paths from the root to buses that
// still rely on slack: the feeder-head step, reconductoring where a line has
// options, a regulator otherwise.
CandidateSet grow(const FeederNetwork& net, const Topology& topo, const CandidateSet& current,
                  const std::vector<SlackEntry>& slack) {
  CandidateSet next = current;
  std::set<std::string> recond(current.reconductor_segments.begin(), current.reconductor_segments.end());
  std::set<std::string> vr(current.vr_sites.begin(), current.vr_sites.end());
  std::set<int> buses;
  for (const auto& e : slack) buses.insert(net.bus_index(e.bus));
  for (int b : buses) {
    for (int s : topo.path_to(b)) {
      const auto& seg = net.segments[s];
      if (std::holds_alternative<FeederHead>(seg.kind)) {
        next.feeder_head_upgrade = true;
      } else if (std::holds_alternative<CandidateLine>(seg.kind)) {
        recond.insert(seg.id);
      } else if (const auto* line = std::get_if<FixedLine>(&seg.kind)) {
        if (!line->upgrades.empty()) recond.insert(seg.id);
        else if (net.regulator_template && !recond.count(seg.id)) vr.insert(seg.id);
      }
    }
  }
  next.reconductor_segments.assign(recond.begin(), recond.end());
  next.vr_sites.assign(vr.begin(), vr.end());
  return next;
}

nlohmann::json candidates_json(const CandidateSet& c) {
  return {{"reconductor", c.reconductor_segments},
          {"feeder_head", c.feeder_head_upgrade},
          {"vr", c.vr_sites},
          {"storage_sites", c.storage_sites},
          {"cs_sites", c.cs_sites}};
}

}  // namespace

LoopSetup prepare_loop(const FeederNetwork& base, const NetloadScenario& scenario, bool with_cs,
                       const Siting& siting, const LoopOptions& opt) {
  const FeederNetwork& net = scenario.network;
  LoopSetup setup;
  auto& build = setup.build;
  build.with_cs = with_cs;
  if (with_cs) {
    build.cs_capacity = opt.cs_capacity.value_or(cs_total_capacity(base));
    setup.siting_bus = resolve_siting_bus(net, siting);
    if (siting.kind != Siting::Kind::kOptimal) {
      build.siting = SitingMode::kFixed;
      build.fixed_bus = setup.siting_bus;
    }
  }
  auto& cand = setup.candidates;
  cand = select_candidates(net, screening_flows(net), opt.thresholds);
  if (with_cs && *build.cs_capacity > 0) {
    const auto sites = build.siting == SitingMode::kFixed ? std::vector<std::string>{build.fixed_bus}
                                                          : site_buses(net);
    for (const auto& bus : sites) {
      cand.merge(select_candidates(net, screening_flows(net, CsInjection{bus, *build.cs_capacity}),
                                   opt.thresholds));
    }
  }
  return setup;
}

LoopResult expansion_loop(const FeederNetwork& base, const NetloadScenario& scenario, bool with_cs,
                          const Siting& siting, const LoopOptions& opt, const CandidateSet* seed) {
  const FeederNetwork& net = scenario.network;
  const auto topo = analyze_topology(net);
  LoopResult result;
  const LoopSetup setup = prepare_loop(base, scenario, with_cs, siting, opt);
  const BuildOptions& build = setup.build;
  result.siting_bus = setup.siting_bus;
  CandidateSet cand = setup.candidates;
  if (seed) cand.merge(*seed);

  for (int it = 1; it <= opt.max_iterations; ++it) {
    result.iterations = it;
    result.candidates = cand;
    result.model = build_expansion_model(net, cand, build);
    result.solution = solve_milp(result.model.model, opt.milp);

    nlohmann::json line = {{"iteration", it},
                           {"scenario", to_string(scenario.label)},
                           {"with_cs", with_cs},
                           {"siting", to_string(siting)},
                           {"candidates", candidates_json(cand)},
                           {"status", to_string(result.solution.status)},
                           {"nodes", result.solution.node_count}};

    if (!result.solution.has_values()) {
      if (opt.trace) *opt.trace << line.dump() << "\n";
      result.status = LoopStatus::kSolverFailure;
      return result;
    }
    const auto& x = result.solution.values;
    result.plan = extract_plan(net, result.model, x);
    line["objective"] = result.solution.objective;
    line["investment_cost"] = result.plan.investment_cost;
    line["slack_mwh"] = result.plan.total_slack_mwh;
    if (opt.trace) *opt.trace << line.dump() << "\n";

    if (with_cs && siting.kind == Siting::Kind::kOptimal) result.siting_bus = result.plan.cs_bus;
    const auto slack = slack_entries(net, result.model, x);
    if (result.plan.total_slack_mwh < opt.slack_tolerance_mwh) {
      result.status = LoopStatus::kResolved;
      result.replay = replay_solution(net, result.model, x);
      return result;
    }
    CandidateSet next = grow(net, topo, cand, slack);
    if (next == cand) {
      result.status = LoopStatus::kUnresolved;
      result.residual_slack = slack;
      result.replay = replay_solution(net, result.model, x);
      return result;
    }
    cand = std::move(next);
  }
  result.status = LoopStatus::kUnresolved;
  result.residual_slack = slack_entries(net, result.model, result.solution.values);
  result.replay = replay_solution(net, result.model, result.solution.values);
  return result;
}

}  // namespace gridxpand
