#include <algorithm>
#include <cmath>
#include <set>

#include "gridxpand/expansion.hpp"

namespace gridxpand {

namespace {

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool includes(std::vector<std::string> a, std::vector<std::string> b) {
  sort_unique(a);
  sort_unique(b);
  return std::includes(a.begin(), a.end(), b.begin(), b.end());
}

void merge_into(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
  sort_unique(dst);
}

// Row builder: keeps the call sites close to the algebra.
struct Row {
  std::vector<Term> terms;
  Row& add(int var, double coef) {
    terms.push_back({var, coef});
    return *this;
  }
};

class Builder {
 public:
  Builder(const FeederNetwork& net, const CandidateSet& cand, const BuildOptions& opt)
      : net_(net), topo_(analyze_topology(net)), cand_(cand), opt_(opt) {
    em_.candidates = cand;
    em_.options = opt;
    for (int d = 0; d < static_cast<int>(net.days.size()); ++d) {
      for (int h = 0; h < kHoursPerDay; ++h) em_.periods.emplace_back(d, h);
    }
    nt_ = static_cast<int>(em_.periods.size());
  }

  ExpansionModel build() {
    classify_segments();
    plan_storage_and_cs();
    declare_network_variables();
    build_objective_slacks();
    build_nodal();
    build_fixed_lines();
    build_candidate_lines();
    build_taps();
    build_transformers();
    build_solar();
    build_colocation();
    build_storage();
    em_.model.validate();
    return std::move(em_);
  }

 private:
  MilpModel& m() { return em_.model; }
  double weight(int t) const { return net_.days[em_.periods[t].first].weight; }

  void classify_segments() {
    for (const auto& id : cand_.reconductor_segments) net_.segment_index(id);
    for (const auto& id : cand_.vr_sites) net_.segment_index(id);
    for (const auto& id : cand_.storage_sites) net_.bus_index(id);
    for (const auto& id : cand_.cs_sites) net_.bus_index(id);

    const std::set<std::string> recond(cand_.reconductor_segments.begin(),
                                       cand_.reconductor_segments.end());
    const std::set<std::string> vr(cand_.vr_sites.begin(), cand_.vr_sites.end());
    em_.segments.resize(net_.segments.size());
    for (std::size_t s = 0; s < net_.segments.size(); ++s) {
      const auto& seg = net_.segments[s];
      auto& sm = em_.segments[s];
      if (const auto* line = std::get_if<FixedLine>(&seg.kind)) {
        sm.capacity_mva = line->capacity_mva;
        if (recond.count(seg.id) && !line->upgrades.empty()) {
          sm.cls = SegmentClass::kCandidate;
          sm.options = seg.all_options();
        } else if (vr.count(seg.id) && net_.regulator_template) {
          sm.cls = SegmentClass::kRegulator;
          sm.regulator_candidate = true;
          sm.install_cost = net_.regulator_template->install_cost;
          sm.tap_min = net_.regulator_template->tap_min;
          sm.tap_max = net_.regulator_template->tap_max;
        }
      } else if (std::holds_alternative<CandidateLine>(seg.kind)) {
        sm.cls = SegmentClass::kCandidate;
        sm.options = seg.all_options();
      } else if (const auto* fh = std::get_if<FeederHead>(&seg.kind)) {
        sm.cls = SegmentClass::kFeederHead;
        sm.capacity_mva = fh->base_capacity_mva;
        sm.tap_min = fh->tap_min;
        sm.tap_max = fh->tap_max;
      } else if (const auto* reg = std::get_if<Regulator>(&seg.kind)) {
        sm.cls = SegmentClass::kRegulator;
        sm.capacity_mva = reg->capacity_mva;
        sm.regulator_candidate = !reg->existing;
        sm.install_cost = reg->install_cost;
        sm.tap_min = reg->tap_min;
        sm.tap_max = reg->tap_max;
      }
    }
  }

  void plan_storage_and_cs() {
    for (const auto& u : net_.storage_units) {
      StorageModel sm;
      sm.id = u.id;
      sm.bus = u.bus;
      sm.candidate = u.status == StorageStatus::kCandidate;
      sm.p_in_max = u.p_in_max;
      sm.p_out_max = u.p_out_max;
      sm.duration_h = u.duration_h;
      sm.efficiency = u.efficiency;
      sm.reactive_fraction = u.reactive_fraction;
      sm.annualized_cost = u.annualized_cost;
      sm.invest_cap_mw = u.invest_cap_mw;
      em_.storage.push_back(sm);
    }
    std::vector<std::string> sites = cand_.storage_sites;
    merge_into(sites, cand_.cs_sites);
    if (opt_.with_cs && opt_.siting == SitingMode::kFixed) {
      net_.bus_index(opt_.fixed_bus);
      merge_into(sites, {opt_.fixed_bus});
    }
    for (const auto& bus : sites) {
      const bool declared = std::any_of(em_.storage.begin(), em_.storage.end(), [&](const auto& s) {
        return s.candidate && s.bus == bus;
      });
      if (declared) continue;
      StorageModel sm;
      sm.id = "site:" + bus;
      sm.bus = bus;
      sm.candidate = true;
      if (net_.storage_template) {
        const auto& t = *net_.storage_template;
        sm.p_in_max = t.p_in_max;
        sm.p_out_max = t.p_out_max;
        sm.duration_h = t.duration_h;
        sm.efficiency = t.efficiency;
        sm.reactive_fraction = t.reactive_fraction;
        sm.annualized_cost = t.annualized_cost;
        sm.invest_cap_mw = t.invest_cap_mw;
      } else {
        // Site placeholder: selectable for colocation, no storage can be built.
        sm.p_in_max = sm.p_out_max = 1;
        sm.duration_h = 1;
      }
      em_.storage.push_back(sm);
    }
    const bool any_candidate =
        std::any_of(em_.storage.begin(), em_.storage.end(), [](const auto& s) { return s.candidate; });
    if (!any_candidate) {
      StorageModel sm;
      sm.id = "site:none";
      sm.bus = net_.buses[topo_.root_bus].id;
      sm.candidate = true;
      sm.p_in_max = sm.p_out_max = 1;
      sm.duration_h = 1;
      em_.storage.push_back(sm);
    }

    if (!opt_.with_cs) return;
    em_.cs_capacity_mw = opt_.cs_capacity.value_or(cs_total_capacity(net_));
    std::vector<std::string> cs_sites = cand_.cs_sites;
    if (opt_.siting == SitingMode::kFixed) merge_into(cs_sites, {opt_.fixed_bus});
    if (cs_sites.empty()) throw ValidationError("CS requested but no CS site is available");
    double best_cap = 0;
    for (const auto& bus : cs_sites) {
      CsModel cs;
      cs.bus = bus;
      cs.invest_cap_mw = net_.cs_invest_cap_mw.value_or(em_.cs_capacity_mw);
      cs.profile = net_.cs_profile;
      for (const auto& u : net_.solar_units) {
        if (u.role == SolarRole::kCommunity && u.bus == bus) {
          cs.invest_cap_mw = u.invest_cap_mw;
          cs.profile = u.capacity_factor;
        }
      }
      if (cs.profile.empty()) {
        throw ValidationError("no capacity-factor profile for community solar at bus " + bus +
                              " (set cs_profile)");
      }
      for (std::size_t h = 0; h < em_.storage.size(); ++h) {
        if (em_.storage[h].candidate && em_.storage[h].bus == bus) cs.storage = static_cast<int>(h);
      }
      if (opt_.siting == SitingMode::kOptimal || bus == opt_.fixed_bus) {
        best_cap = std::max(best_cap, cs.invest_cap_mw);
      }
      em_.cs.push_back(std::move(cs));
    }
    if (em_.cs_capacity_mw > best_cap + 1e-9) {
      throw ValidationError("CS capacity " + std::to_string(em_.cs_capacity_mw) +
                            " MW exceeds the investment cap of every eligible site");
    }
  }

  void declare_network_variables() {
    const int nb = static_cast<int>(net_.buses.size());
    em_.v.assign(nb, std::vector<int>(nt_));
    em_.p_slack_up = em_.p_slack_down = em_.q_slack_up = em_.q_slack_down = em_.v;
    for (int n = 0; n < nb; ++n) {
      for (int t = 0; t < nt_; ++t) {
        em_.v[n][t] = m().add_variable("v", {n, t}, 0, kInf);
        em_.p_slack_up[n][t] = m().add_variable("p_imb_up", {n, t}, 0, kInf);
        em_.p_slack_down[n][t] = m().add_variable("p_imb_down", {n, t}, 0, kInf);
        em_.q_slack_up[n][t] = m().add_variable("q_imb_up", {n, t}, 0, kInf);
        em_.q_slack_down[n][t] = m().add_variable("q_imb_down", {n, t}, 0, kInf);
      }
    }
    for (int t = 0; t < nt_; ++t) {
      em_.p_subs.push_back(m().add_variable("p_subs", {t}, -kInf, kInf));
      em_.q_subs.push_back(m().add_variable("q_subs", {t}, -kInf, kInf));
    }
    for (int s = 0; s < static_cast<int>(net_.segments.size()); ++s) {
      auto& sm = em_.segments[s];
      for (int t = 0; t < nt_; ++t) {
        sm.f_p.push_back(m().add_variable("f_p", {s, t}, -kInf, kInf));
        sm.f_q.push_back(m().add_variable("f_q", {s, t}, -kInf, kInf));
        if (sm.cls == SegmentClass::kFeederHead || sm.cls == SegmentClass::kRegulator) {
          sm.v_mid.push_back(m().add_variable("v_mid", {s, t}, 0, kInf));
        }
      }
    }
    for (int u = 0; u < static_cast<int>(net_.solar_units.size()); ++u) {
      if (net_.solar_units[u].role != SolarRole::kRooftop) continue;
      em_.rooftop_unit.push_back(u);
      std::vector<int> g;
      for (int t = 0; t < nt_; ++t) g.push_back(m().add_variable("g_rts", {u, t}, 0, kInf));
      em_.g_rooftop.push_back(std::move(g));
    }
    for (int r = 0; r < static_cast<int>(em_.cs.size()); ++r) {
      auto& cs = em_.cs[r];
      double lo = 0, hi = cs.invest_cap_mw;
      if (opt_.siting == SitingMode::kFixed) {
        lo = hi = cs.bus == opt_.fixed_bus ? em_.cs_capacity_mw : 0.0;
      }
      cs.x_inv = m().add_variable("x_cs", {r}, lo, hi);
      for (int t = 0; t < nt_; ++t) {
        cs.g.push_back(m().add_variable("g_cs", {r, t}, 0, kInf));
        cs.g_crt.push_back(m().add_variable("g_cs_crt", {r, t}, 0, kInf));
      }
    }
    const int nd = static_cast<int>(net_.days.size());
    for (int h = 0; h < static_cast<int>(em_.storage.size()); ++h) {
      auto& st = em_.storage[h];
      for (int d = 0; d < nd; ++d) st.soc0.push_back(m().add_variable("soc0", {h, d}, 0, kInf));
      for (int t = 0; t < nt_; ++t) {
        st.soc.push_back(m().add_variable("soc", {h, t}, 0, kInf));
        st.p_in.push_back(m().add_variable("p_in", {h, t}, 0, kInf));
        st.p_out.push_back(m().add_variable("p_out", {h, t}, 0, kInf));
        st.q.push_back(m().add_variable("q_st", {h, t}, -kInf, kInf));
      }
      if (st.candidate) {
        st.x_inv = m().add_variable("x_st", {h}, 0, kInf);
        st.x_bin = m().add_binary("x_st_bin", {h});
        m().add_objective(st.x_inv, st.annualized_cost);
      }
    }
  }

  void build_objective_slacks() {
    for (std::size_t n = 0; n < net_.buses.size(); ++n) {
      for (int t = 0; t < nt_; ++t) {
        const double c = net_.imbalance_cost * weight(t);
        m().add_objective(em_.p_slack_up[n][t], c);
        m().add_objective(em_.p_slack_down[n][t], c);
        m().add_objective(em_.q_slack_up[n][t], c);
        m().add_objective(em_.q_slack_down[n][t], c);
      }
    }
    for (const auto& cs : em_.cs) {
      for (int t = 0; t < nt_; ++t) {
        const auto [d, h] = em_.periods[t];
        m().add_objective(cs.g_crt[t], net_.curtailment_price[d][h] * weight(t));
      }
    }
  }

  void build_nodal() {
    const int nb = static_cast<int>(net_.buses.size());
    for (int t = 0; t < nt_; ++t) {
      const auto [d, h] = em_.periods[t];
      double total_p = 0, total_q = 0;
      for (const auto& b : net_.buses) {
        total_p += b.active_load[d][h];
        total_q += b.reactive_load[d][h];
      }
      for (int n = 0; n < nb; ++n) {
        const auto& bus = net_.buses[n];
        Row p, q;
        if (n == topo_.root_bus) {
          p.add(em_.p_subs[t], 1);
          q.add(em_.q_subs[t], 1);
        }
        // Half-beta of every incident segment; the loss bracket is
        // sum(load) - sum(all rooftop) - sum(CS at this bus).
        double half_bp = 0, half_bq = 0;
        auto incident = [&](int s) {
          const auto lf = net_.loss_factor(net_.segments[s].id);
          half_bp += lf.beta_p / 2;
          half_bq += lf.beta_q / 2;
        };
        if (topo_.parent_segment[n] >= 0) {
          const int s = topo_.parent_segment[n];
          p.add(em_.segments[s].f_p[t], 1);
          q.add(em_.segments[s].f_q[t], 1);
          incident(s);
        }
        for (int s : topo_.child_segments[n]) {
          p.add(em_.segments[s].f_p[t], -1);
          q.add(em_.segments[s].f_q[t], -1);
          incident(s);
        }
        for (const auto& cs : em_.cs) {
          if (cs.bus != bus.id) continue;
          p.add(cs.g[t], 1.0 + half_bp);
        }
        for (std::size_t k = 0; k < em_.rooftop_unit.size(); ++k) {
          const auto& unit = net_.solar_units[em_.rooftop_unit[k]];
          if (unit.bus == bus.id) p.add(em_.g_rooftop[k][t], 1);
          if (half_bp != 0) p.add(em_.g_rooftop[k][t], half_bp);
        }
        for (const auto& st : em_.storage) {
          if (st.bus != bus.id) continue;
          p.add(st.p_out[t], 1).add(st.p_in[t], -1);
          q.add(st.q[t], 1);
        }
        p.add(em_.p_slack_down[n][t], 1).add(em_.p_slack_up[n][t], -1);
        q.add(em_.q_slack_down[n][t], 1).add(em_.q_slack_up[n][t], -1);
        const double rhs_p = bus.active_load[d][h] + half_bp * total_p;
        const double rhs_q = bus.reactive_load[d][h] + half_bq * total_q;
        m().add_constraint("balance_p", {n, t}, std::move(p.terms), rhs_p, rhs_p);
        m().add_constraint("balance_q", {n, t}, std::move(q.terms), rhs_q, rhs_q);
      }
    }
    const double vref2 = net_.v_ref * net_.v_ref;
    for (std::size_t s = 0; s < net_.segments.size(); ++s) {
      if (em_.segments[s].cls != SegmentClass::kFeederHead) continue;
      for (int t = 0; t < nt_; ++t) {
        m().add_constraint("v_ref", {static_cast<int>(s), t}, {{em_.v[topo_.from_bus[s]][t], 1}},
                           vref2, vref2);
      }
    }
    for (int n = 0; n < nb; ++n) {
      const auto& bus = net_.buses[n];
      for (int t = 0; t < nt_; ++t) {
        m().add_constraint("v_band", {n, t}, {{em_.v[n][t], 1}}, bus.vmin * bus.vmin,
                           bus.vmax * bus.vmax);
      }
    }
  }

  // +-f_q - slope f_p - k * cap <= 0 for the four cuts (cap constant or variable).
  void octagon(const std::string& family_pos, const std::string& family_neg, int s, int t,
               double cap_const, int cap_var) {
    const auto cuts = octagon_cuts();
    const auto& sm = em_.segments[s];
    for (int e = 0; e < 4; ++e) {
      for (int sign : {1, -1}) {
        Row r;
        r.add(sm.f_q[t], sign).add(sm.f_p[t], -cuts[e].slope);
        double rhs = 0;
        if (cap_var >= 0) {
          r.add(cap_var, -cuts[e].intercept_factor);
        } else {
          rhs = cuts[e].intercept_factor * cap_const;
        }
        m().add_constraint(sign > 0 ? family_pos : family_neg, {s, t, e + 1}, std::move(r.terms),
                           -kInf, rhs);
      }
    }
  }

  // -cap <= f <= cap against a capacity variable: two rows.
  void box_var(const std::string& family, int s, int t, int flow, int cap_var) {
    m().add_constraint(family, {s, t, 0}, {{flow, 1}, {cap_var, -1}}, -kInf, 0);
    m().add_constraint(family, {s, t, 1}, {{flow, 1}, {cap_var, 1}}, 0, kInf);
  }

  void build_fixed_lines() {
    for (int s = 0; s < static_cast<int>(net_.segments.size()); ++s) {
      const auto& sm = em_.segments[s];
      if (sm.cls != SegmentClass::kFixed) continue;
      const auto& seg = net_.segments[s];
      const double cap = sm.capacity_mva;
      for (int t = 0; t < nt_; ++t) {
        m().add_constraint("fixed_p_box", {s, t}, {{sm.f_p[t], 1}}, -cap, cap);
        m().add_constraint("fixed_q_box", {s, t}, {{sm.f_q[t], 1}}, -cap, cap);
        octagon("fixed_octagon_pos", "fixed_octagon_neg", s, t, cap, -1);
        Row r;
        r.add(em_.v[topo_.to_bus[s]][t], 1)
            .add(em_.v[topo_.from_bus[s]][t], -1)
            .add(sm.f_p[t], 2 * seg.resistance / net_.base_mva)
            .add(sm.f_q[t], 2 * seg.reactance / net_.base_mva);
        m().add_constraint("fixed_drop", {s, t}, std::move(r.terms), 0, 0);
      }
    }
  }

  void build_candidate_lines() {
    for (int s = 0; s < static_cast<int>(net_.segments.size()); ++s) {
      auto& sm = em_.segments[s];
      if (sm.cls != SegmentClass::kCandidate) continue;
      const auto& seg = net_.segments[s];
      double max_cap = 0;
      for (const auto& o : sm.options) max_cap = std::max(max_cap, o.capacity_mva);
      sm.capacity_var = m().add_variable("f_upd", {s}, 0, max_cap);
      Row cap, choice;
      cap.add(sm.capacity_var, 1);
      for (int r = 0; r < static_cast<int>(sm.options.size()); ++r) {
        const auto& o = sm.options[r];
        const int x = m().add_binary("x_line", {s, r});
        sm.option_bin.push_back(x);
        m().add_objective(x, o.annualized_cost_per_mva * o.capacity_mva);
        cap.add(x, -o.capacity_mva);
        choice.add(x, 1);
      }
      m().add_constraint("cand_capacity", {s}, std::move(cap.terms), 0, 0);
      m().add_constraint("cand_choice", {s}, std::move(choice.terms), 1, 1);

      const double big_m = candidate_drop_big_m(net_, seg, sm.options);
      for (int t = 0; t < nt_; ++t) {
        box_var("cand_p_box", s, t, sm.f_p[t], sm.capacity_var);
        box_var("cand_q_box", s, t, sm.f_q[t], sm.capacity_var);
        octagon("cand_octagon_pos", "cand_octagon_neg", s, t, 0, sm.capacity_var);
        for (int r = 0; r < static_cast<int>(sm.options.size()); ++r) {
          const auto& o = sm.options[r];
          auto drop = [&](double m_coef) {
            Row row;
            row.add(em_.v[topo_.to_bus[s]][t], 1)
                .add(em_.v[topo_.from_bus[s]][t], -1)
                .add(sm.f_p[t], 2 * o.resistance / net_.base_mva)
                .add(sm.f_q[t], 2 * o.reactance / net_.base_mva)
                .add(sm.option_bin[r], m_coef);
            return std::move(row.terms);
          };
          // bracket <= (1 - x) M  and  bracket >= -(1 - x) M
          m().add_constraint("cand_drop", {s, t, r, 0}, drop(big_m), -kInf, big_m);
          m().add_constraint("cand_drop", {s, t, r, 1}, drop(-big_m), -big_m, kInf);
        }
      }
    }
  }

  void build_taps() {
    for (int s = 0; s < static_cast<int>(net_.segments.size()); ++s) {
      auto& sm = em_.segments[s];
      if (sm.cls != SegmentClass::kFeederHead && sm.cls != SegmentClass::kRegulator) continue;
      const int to = topo_.to_bus[s];
      for (int t = 0; t < nt_; ++t) {
        const int v_to = em_.v[to][t];
        m().add_constraint("tap_band", {s, t, 0},
                           {{v_to, 1}, {sm.v_mid[t], -1 / (sm.tap_max * sm.tap_max)}}, 0, kInf);
        m().add_constraint("tap_band", {s, t, 1},
                           {{v_to, 1}, {sm.v_mid[t], -1 / (sm.tap_min * sm.tap_min)}}, -kInf, 0);
      }
      if (!sm.regulator_candidate) continue;
      sm.invest_bin = m().add_binary("x_vr", {s});
      m().add_objective(sm.invest_bin, sm.install_cost);
      const double big_m = regulator_big_m(net_.buses[to].vmax, sm.tap_min, sm.tap_max);
      for (int t = 0; t < nt_; ++t) {
        const int v_to = em_.v[to][t];
        m().add_constraint("vr_bypass", {s, t, 0},
                           {{sm.v_mid[t], 1}, {v_to, -1}, {sm.invest_bin, -big_m}}, -kInf, 0);
        m().add_constraint("vr_bypass", {s, t, 1},
                           {{sm.v_mid[t], 1}, {v_to, -1}, {sm.invest_bin, big_m}}, 0, kInf);
      }
    }
  }

  void build_transformers() {
    for (int s = 0; s < static_cast<int>(net_.segments.size()); ++s) {
      auto& sm = em_.segments[s];
      if (sm.cls == SegmentClass::kFeederHead) {
        const auto& fh = std::get<FeederHead>(net_.segments[s].kind);
        sm.capacity_var =
            m().add_variable("f_trf", {s}, 0, fh.base_capacity_mva + fh.upgrade_capacity_mva);
        sm.invest_bin = m().add_binary("x_fh", {s});
        if (!cand_.feeder_head_upgrade || fh.upgrade_capacity_mva <= 0) {
          m().set_bounds(sm.invest_bin, 0, 0);
        }
        m().add_objective(sm.invest_bin, fh.upgrade_cost);
        m().add_constraint("fh_capacity", {s},
                           {{sm.capacity_var, 1}, {sm.invest_bin, -fh.upgrade_capacity_mva}},
                           fh.base_capacity_mva, fh.base_capacity_mva);
      } else if (sm.cls == SegmentClass::kRegulator) {
        sm.capacity_var = m().add_variable("f_trf", {s}, 0, sm.capacity_mva);
        m().add_constraint("vr_capacity", {s}, {{sm.capacity_var, 1}}, sm.capacity_mva,
                           sm.capacity_mva);
      } else {
        continue;
      }
      const auto& seg = net_.segments[s];
      for (int t = 0; t < nt_; ++t) {
        box_var("trf_p_box", s, t, sm.f_p[t], sm.capacity_var);
        box_var("trf_q_box", s, t, sm.f_q[t], sm.capacity_var);
        octagon("trf_octagon_pos", "trf_octagon_neg", s, t, 0, sm.capacity_var);
        Row r;
        r.add(sm.v_mid[t], 1)
            .add(em_.v[topo_.from_bus[s]][t], -1)
            .add(sm.f_p[t], 2 * seg.resistance / net_.base_mva)
            .add(sm.f_q[t], 2 * seg.reactance / net_.base_mva);
        m().add_constraint("trf_drop", {s, t}, std::move(r.terms), 0, 0);
      }
    }
  }

  void build_solar() {
    for (std::size_t k = 0; k < em_.rooftop_unit.size(); ++k) {
      const auto& unit = net_.solar_units[em_.rooftop_unit[k]];
      for (int t = 0; t < nt_; ++t) {
        const auto [d, h] = em_.periods[t];
        const double g = unit.installed_mw * unit.capacity_factor[d][h];
        m().add_constraint("rooftop_output", {static_cast<int>(k), t}, {{em_.g_rooftop[k][t], 1}}, g,
                           g);
      }
    }
    Row total;
    for (int r = 0; r < static_cast<int>(em_.cs.size()); ++r) {
      const auto& cs = em_.cs[r];
      for (int t = 0; t < nt_; ++t) {
        const auto [d, h] = em_.periods[t];
        m().add_constraint("cs_output", {r, t},
                           {{cs.g[t], 1}, {cs.g_crt[t], 1}, {cs.x_inv, -cs.profile[d][h]}}, 0, 0);
      }
      total.add(cs.x_inv, 1);
    }
    if (!em_.cs.empty()) {
      m().add_constraint("cs_total", {}, std::move(total.terms), em_.cs_capacity_mw,
                         em_.cs_capacity_mw);
    }
  }

  void build_colocation() {
    Row choice;
    for (int h = 0; h < static_cast<int>(em_.storage.size()); ++h) {
      const auto& st = em_.storage[h];
      if (!st.candidate) continue;
      m().add_constraint("storage_site_cap", {h}, {{st.x_inv, 1}, {st.x_bin, -st.invest_cap_mw}},
                         -kInf, 0);
      choice.add(st.x_bin, 1);
    }
    m().add_constraint("storage_site_choice", {}, std::move(choice.terms), 1, 1);
    for (int r = 0; r < static_cast<int>(em_.cs.size()); ++r) {
      const auto& cs = em_.cs[r];
      if (cs.storage < 0) {
        throw ValidationError("CS site " + cs.bus + " has no colocated storage candidate");
      }
      m().add_constraint("cs_site_cap", {r},
                         {{cs.x_inv, 1}, {em_.storage[cs.storage].x_bin, -cs.invest_cap_mw}}, -kInf,
                         0);
    }
  }

  void build_storage() {
    const int nd = static_cast<int>(net_.days.size());
    for (int h = 0; h < static_cast<int>(em_.storage.size()); ++h) {
      const auto& st = em_.storage[h];
      for (int d = 0; d < nd; ++d) {
        const int first = d * kHoursPerDay, last = first + kHoursPerDay - 1;
        m().add_constraint("soc_cyclic", {h, d}, {{st.soc0[d], 1}, {st.soc[last], -1}}, 0, 0);
        m().add_constraint("soc_first", {h, d},
                           {{st.soc[first], 1},
                            {st.soc0[d], -1},
                            {st.p_in[first], -st.efficiency},
                            {st.p_out[first], 1}},
                           0, 0);
        for (int t = first + 1; t <= last; ++t) {
          m().add_constraint("soc_update", {h, t},
                             {{st.soc[t], 1},
                              {st.soc[t - 1], -1},
                              {st.p_in[t], -st.efficiency},
                              {st.p_out[t], 1}},
                             0, 0);
        }
      }
      const double soc_cap = st.duration_h * st.p_in_max;
      const double q_cap = st.reactive_fraction * st.p_in_max;
      for (int t = 0; t < nt_; ++t) {
        if (!st.candidate) {
          m().add_constraint("soc_cap_existing", {h, t}, {{st.soc[t], 1}}, 0, soc_cap);
          m().add_constraint("charge_existing", {h, t}, {{st.p_in[t], 1}}, 0, st.p_in_max);
          m().add_constraint("discharge_existing", {h, t}, {{st.p_out[t], 1}}, 0, st.p_out_max);
          m().add_constraint("reactive_existing", {h, t}, {{st.q[t], 1}}, -q_cap, q_cap);
        } else {
          m().add_constraint("soc_cap_candidate", {h, t}, {{st.soc[t], 1}, {st.x_inv, -soc_cap}},
                             -kInf, 0);
          m().add_constraint("charge_candidate", {h, t},
                             {{st.p_in[t], 1}, {st.x_inv, -st.p_in_max}}, -kInf, 0);
          m().add_constraint("discharge_candidate", {h, t},
                             {{st.p_out[t], 1}, {st.x_inv, -st.p_out_max}}, -kInf, 0);
          m().add_constraint("reactive_candidate", {h, t, 0}, {{st.q[t], 1}, {st.x_inv, -q_cap}},
                             -kInf, 0);
          m().add_constraint("reactive_candidate", {h, t, 1}, {{st.q[t], 1}, {st.x_inv, q_cap}}, 0,
                             kInf);
        }
      }
    }
  }

  const FeederNetwork& net_;
  Topology topo_;
  const CandidateSet& cand_;
  const BuildOptions& opt_;
  ExpansionModel em_;
  int nt_ = 0;
};

}  // namespace

bool CandidateSet::contains(const CandidateSet& other) const {
  return includes(reconductor_segments, other.reconductor_segments) &&
         (feeder_head_upgrade || !other.feeder_head_upgrade) && includes(vr_sites, other.vr_sites) &&
         includes(storage_sites, other.storage_sites) && includes(cs_sites, other.cs_sites);
}

void CandidateSet::merge(const CandidateSet& other) {
  merge_into(reconductor_segments, other.reconductor_segments);
  feeder_head_upgrade = feeder_head_upgrade || other.feeder_head_upgrade;
  merge_into(vr_sites, other.vr_sites);
  merge_into(storage_sites, other.storage_sites);
  merge_into(cs_sites, other.cs_sites);
}

std::size_t CandidateSet::size() const {
  return reconductor_segments.size() + (feeder_head_upgrade ? 1 : 0) + vr_sites.size() +
         storage_sites.size() + cs_sites.size();
}

double candidate_drop_big_m(const FeederNetwork& net, const LineSegment& seg,
                            const std::vector<UpgradeOption>& options) {
  const auto& fr = net.buses[net.bus_index(seg.from_bus)];
  const auto& to = net.buses[net.bus_index(seg.to_bus)];
  const double vmax2 = std::max(fr.vmax, to.vmax) * std::max(fr.vmax, to.vmax);
  const double vmin2 = std::min(fr.vmin, to.vmin) * std::min(fr.vmin, to.vmin);
  double max_rx = 0, max_cap = 0;
  for (const auto& o : options) {
    max_rx = std::max(max_rx, o.resistance + o.reactance);
    max_cap = std::max(max_cap, o.capacity_mva);
  }
  return (vmax2 - vmin2) + 2.0 * max_rx * max_cap / net.base_mva;
}

double regulator_big_m(double vmax_to, double tap_min, double tap_max) {
  const double a = 1.0 / (tap_min * tap_min) - 1.0 / (tap_max * tap_max);
  const double b = tap_max * tap_max - 1.0;
  const double c = 1.0 - tap_min * tap_min;
  return vmax_to * vmax_to * std::max({a, b, c});
}

ExpansionModel build_expansion_model(const FeederNetwork& net, const CandidateSet& candidates,
                                     const BuildOptions& options) {
  return Builder(net, candidates, options).build();
}

}  // namespace gridxpand
