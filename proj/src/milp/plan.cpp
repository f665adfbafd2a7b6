#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gridxpand/expansion.hpp"

namespace gridxpand {

namespace {

int chosen_option(const SegmentModel& sm, const std::vector<double>& x) {
  int best = 0;
  for (int r = 0; r < static_cast<int>(sm.option_bin.size()); ++r) {
    if (x[sm.option_bin[r]] > x[sm.option_bin[best]]) best = r;
  }
  return best;
}

bool on(const std::vector<double>& x, int var) { return var >= 0 && x[var] > 0.5; }

std::string reconductor_type(const LineSegment& seg) {
  if (seg.conductor && seg.conductor->placement == Placement::kUrbanUnderground) {
    return "reconductor_UG";
  }
  return "reconductor_OH";
}

// Electrical state implied by the plan; taps recovered from v_mid / v_to.
SegmentState plan_state(const FeederNetwork& net, const ExpansionModel& em,
                        const std::vector<double>& x, int s, int t, const Topology& topo) {
  const auto& seg = net.segments[s];
  const auto& sm = em.segments[s];
  SegmentState st{seg.resistance, seg.reactance, sm.capacity_mva, 1.0};
  if (sm.cls == SegmentClass::kCandidate) {
    const auto& o = sm.options[chosen_option(sm, x)];
    st.resistance = o.resistance;
    st.reactance = o.reactance;
    st.capacity_mva = o.capacity_mva;
  } else if (sm.cls == SegmentClass::kFeederHead || sm.cls == SegmentClass::kRegulator) {
    st.capacity_mva = x[sm.capacity_var];
    const double v_to = x[em.v[topo.to_bus[s]][t]];
    const double v_mid = x[sm.v_mid[t]];
    if (v_to > 0 && v_mid > 0) st.tap = std::sqrt(v_mid / v_to);
  }
  return st;
}

}  // namespace

ExpansionPlan extract_plan(const FeederNetwork& net, const ExpansionModel& em,
                           const std::vector<double>& x) {
  ExpansionPlan plan;
  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    const auto& seg = net.segments[s];
    const auto& sm = em.segments[s];
    if (sm.cls == SegmentClass::kCandidate) {
      const int r = chosen_option(sm, x);
      const auto& o = sm.options[r];
      if (o.annualized_cost_per_mva > 0) {
        plan.investments.push_back({seg.id, reconductor_type(seg), o.label, o.capacity_mva,
                                    o.annualized_cost_per_mva * o.capacity_mva});
      }
    } else if (sm.cls == SegmentClass::kFeederHead && on(x, sm.invest_bin)) {
      const auto& fh = std::get<FeederHead>(seg.kind);
      char detail[48];
      std::snprintf(detail, sizeof detail, "+%g MVA", fh.upgrade_capacity_mva);
      plan.investments.push_back({seg.id, "feeder_head", detail,
                                  fh.upgrade_capacity_mva, fh.upgrade_cost});
    } else if (sm.cls == SegmentClass::kRegulator && sm.regulator_candidate && on(x, sm.invest_bin)) {
      plan.investments.push_back({seg.id, "VR", "install", sm.capacity_mva, sm.install_cost});
    }
  }
  for (const auto& st : em.storage) {
    if (!st.candidate) continue;
    const double mw = x[st.x_inv];
    if (mw > 1e-9) {
      plan.investments.push_back({st.id, "storage", st.bus, mw, mw * st.annualized_cost});
    }
  }
  for (const auto& inv : plan.investments) plan.investment_cost += inv.annual_cost;

  const int nt = static_cast<int>(em.periods.size());
  for (std::size_t n = 0; n < net.buses.size(); ++n) {
    for (int t = 0; t < nt; ++t) {
      const double w = net.days[em.periods[t].first].weight;
      const double s = x[em.p_slack_up[n][t]] + x[em.p_slack_down[n][t]] + x[em.q_slack_up[n][t]] +
                       x[em.q_slack_down[n][t]];
      plan.total_slack_mwh += s;
      plan.slack_cost += net.imbalance_cost * w * s;
    }
  }
  double best_cs = -1;
  for (const auto& cs : em.cs) {
    if (x[cs.x_inv] > best_cs) {
      best_cs = x[cs.x_inv];
      plan.cs_bus = cs.bus;
    }
    plan.cs_mw += x[cs.x_inv];
    for (int t = 0; t < nt; ++t) {
      const auto [d, h] = em.periods[t];
      const double w = net.days[d].weight;
      plan.curtailment_cost += net.curtailment_price[d][h] * w * x[cs.g_crt[t]];
      plan.curtailed_mwh += w * x[cs.g_crt[t]];
      plan.cs_available_mwh += w * x[cs.x_inv] * cs.profile[d][h];
    }
  }
  return plan;
}

ReplayReport replay_solution(const FeederNetwork& net, const ExpansionModel& em,
                             const std::vector<double>& x) {
  const auto topo = analyze_topology(net);
  const int nb = static_cast<int>(net.buses.size());
  const int ns = static_cast<int>(net.segments.size());
  const int nt = static_cast<int>(em.periods.size());
  ReplayReport rep;

  for (int t = 0; t < nt; ++t) {
    const auto [d, h] = em.periods[t];
    double total_p = 0, total_q = 0, all_rooftop = 0;
    for (const auto& b : net.buses) {
      total_p += b.active_load[d][h];
      total_q += b.reactive_load[d][h];
    }
    for (const auto& g : em.g_rooftop) all_rooftop += x[g[t]];

    OperatingPoint op;
    op.day = d;
    op.hour = h;
    op.injections.resize(nb);
    for (int n = 0; n < nb; ++n) {
      const auto& bus = net.buses[n];
      double half_bp = 0, half_bq = 0;
      auto incident = [&](int s) {
        const auto lf = net.loss_factor(net.segments[s].id);
        half_bp += lf.beta_p / 2;
        half_bq += lf.beta_q / 2;
      };
      if (topo.parent_segment[n] >= 0) incident(topo.parent_segment[n]);
      for (int s : topo.child_segments[n]) incident(s);

      double p = -bus.active_load[d][h], q = -bus.reactive_load[d][h];
      double cs_here = 0;
      for (std::size_t k = 0; k < em.rooftop_unit.size(); ++k) {
        if (net.solar_units[em.rooftop_unit[k]].bus == bus.id) p += x[em.g_rooftop[k][t]];
      }
      for (const auto& cs : em.cs) {
        if (cs.bus == bus.id) cs_here += x[cs.g[t]];
      }
      p += cs_here;
      for (const auto& st : em.storage) {
        if (st.bus != bus.id) continue;
        p += x[st.p_out[t]] - x[st.p_in[t]];
        q += x[st.q[t]];
      }
      p += x[em.p_slack_down[n][t]] - x[em.p_slack_up[n][t]];
      q += x[em.q_slack_down[n][t]] - x[em.q_slack_up[n][t]];
      p -= half_bp * (total_p - all_rooftop - cs_here);
      q -= half_bq * total_q;
      op.injections[n] = {p, q};

      // Nodal balance with MILP flows.
      double bal_p = p, bal_q = q;
      if (n == topo.root_bus) {
        bal_p += x[em.p_subs[t]];
        bal_q += x[em.q_subs[t]];
      }
      if (topo.parent_segment[n] >= 0) {
        bal_p += x[em.segments[topo.parent_segment[n]].f_p[t]];
        bal_q += x[em.segments[topo.parent_segment[n]].f_q[t]];
      }
      for (int s : topo.child_segments[n]) {
        bal_p -= x[em.segments[s].f_p[t]];
        bal_q -= x[em.segments[s].f_q[t]];
      }
      rep.max_balance_residual =
          std::max({rep.max_balance_residual, std::abs(bal_p), std::abs(bal_q)});
    }

    op.segments.resize(ns);
    for (int s = 0; s < ns; ++s) {
      op.segments[s] = plan_state(net, em, x, s, t, topo);
      const auto& sm = em.segments[s];
      const double fp = x[sm.f_p[t]], fq = x[sm.f_q[t]];
      const double v_fr = x[em.v[topo.from_bus[s]][t]];
      const double v_to = x[em.v[topo.to_bus[s]][t]];
      const double drop = 2 * (op.segments[s].resistance * fp + op.segments[s].reactance * fq) /
                          net.base_mva;
      double residual;
      if (sm.cls == SegmentClass::kFeederHead || sm.cls == SegmentClass::kRegulator) {
        residual = x[sm.v_mid[t]] - (v_fr - drop);
        const double tap = op.segments[s].tap;
        residual = std::max(std::abs(residual), std::abs(v_to * tap * tap - x[sm.v_mid[t]]));
      } else {
        residual = v_to - (v_fr - drop);
      }
      rep.max_drop_residual = std::max(rep.max_drop_residual, std::abs(residual));
    }

    const auto res = solve_lindistflow(net, topo, op);
    for (int s = 0; s < ns; ++s) {
      rep.max_flow_difference =
          std::max({rep.max_flow_difference, std::abs(res.f_p[s] - x[em.segments[s].f_p[t]]),
                    std::abs(res.f_q[s] - x[em.segments[s].f_q[t]])});
    }
    for (int n = 0; n < nb; ++n) {
      rep.max_voltage_difference =
          std::max(rep.max_voltage_difference, std::abs(res.v_squared[n] - x[em.v[n][t]]));
    }
    for (auto& v : check_violations(res, net, 1e-6)) {
      const bool seen = std::any_of(rep.violations.begin(), rep.violations.end(), [&](const auto& w) {
        return w.element == v.element && w.kind == v.kind;
      });
      if (!seen) rep.violations.push_back(v);
    }
  }

  for (const auto& st : em.storage) {
    for (std::size_t d = 0; d < net.days.size(); ++d) {
      double sum = 0;
      for (int h = 0; h < kHoursPerDay; ++h) {
        const int t = static_cast<int>(d) * kHoursPerDay + h;
        sum += st.efficiency * x[st.p_in[t]] - x[st.p_out[t]];
      }
      rep.max_storage_cycle_residual = std::max(rep.max_storage_cycle_residual, std::abs(sum));
    }
  }
  return rep;
}

}  // namespace gridxpand
