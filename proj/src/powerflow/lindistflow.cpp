#include "gridxpand/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridxpand {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kUndervoltage: return "undervoltage";
    case ViolationKind::kOvervoltage: return "overvoltage";
    case ViolationKind::kOverload: return "overload";
  }
  return "?";
}

std::vector<SegmentState> as_built(const FeederNetwork& net) {
  std::vector<SegmentState> out;
  out.reserve(net.segments.size());
  for (const auto& seg : net.segments) {
    out.push_back({seg.resistance, seg.reactance, seg.capacity_mva(), 1.0});
  }
  return out;
}

OperatingPoint operating_point(const FeederNetwork& net, int day, int hour) {
  OperatingPoint op;
  op.day = day;
  op.hour = hour;
  op.injections.resize(net.buses.size());
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    op.injections[b].p = -net.buses[b].active_load[day][hour];
    op.injections[b].q = -net.buses[b].reactive_load[day][hour];
  }
  for (const auto& s : net.solar_units) {
    if (s.role != SolarRole::kRooftop) continue;
    op.injections[net.bus_index(s.bus)].p += s.installed_mw * s.capacity_factor[day][hour];
  }
  op.segments = as_built(net);
  return op;
}

std::array<OctagonCut, 4> octagon_cuts() {
  std::array<OctagonCut, 4> cuts;
  for (int e = 1; e <= 4; ++e) {
    const double slope = 1.0 / std::tan((0.5 - e) * std::numbers::pi / 4.0);
    const double c = std::cos(e * std::numbers::pi / 4.0);
    const double s = std::sin(e * std::numbers::pi / 4.0);
    cuts[e - 1] = {slope, s - slope * c};
  }
  return cuts;
}

double octagon_norm(double p, double q) {
  static const auto cuts = octagon_cuts();
  double f = 0;
  for (const auto& cut : cuts) {
    // +-q <= slope p + k F  <=>  F >= (+-q - slope p) / k, with k > 0.
    f = std::max(f, (q - cut.slope * p) / cut.intercept_factor);
    f = std::max(f, (-q - cut.slope * p) / cut.intercept_factor);
  }
  return f;
}

FlowResult solve_lindistflow(const FeederNetwork& net, const OperatingPoint& op,
                             const LossOptions& losses) {
  return solve_lindistflow(net, analyze_topology(net), op, losses);
}

FlowResult solve_lindistflow(const FeederNetwork& net, const Topology& topo,
                             const OperatingPoint& op, const LossOptions& losses) {
  const std::size_t nb = net.buses.size();
  const std::size_t ns = net.segments.size();
  if (op.injections.size() != nb || op.segments.size() != ns) {
    throw ValidationError("operating point does not match the network size");
  }
  FlowResult res;
  res.f_p.assign(ns, 0.0);
  res.f_q.assign(ns, 0.0);
  res.losses.assign(ns, 0.0);
  res.v_squared.assign(nb, 0.0);
  res.v_mid.assign(ns, 0.0);
  res.loading.assign(ns, 0.0);

  const int max_iter = losses.enabled ? std::max(1, losses.max_iterations) : 1;
  std::vector<double> prev_p, prev_q;
  for (int iter = 1; iter <= max_iter; ++iter) {
    res.iterations = iter;
    // Leaf-to-root accumulation of withdrawals and downstream losses.
    std::vector<double> bus_p(nb), bus_q(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      bus_p[b] = -op.injections[b].p;
      bus_q[b] = -op.injections[b].q;
    }
    for (auto it = topo.segment_order.rbegin(); it != topo.segment_order.rend(); ++it) {
      const int s = *it;
      res.f_p[s] = bus_p[topo.to_bus[s]] + res.losses[s];
      res.f_q[s] = bus_q[topo.to_bus[s]];
      bus_p[topo.from_bus[s]] += res.f_p[s];
      bus_q[topo.from_bus[s]] += res.f_q[s];
    }
    res.substation_p = bus_p[topo.root_bus];
    res.substation_q = bus_q[topo.root_bus];

    res.v_squared[topo.root_bus] = net.v_ref * net.v_ref;
    for (int s : topo.segment_order) {
      const auto& st = op.segments[s];
      res.v_mid[s] = res.v_squared[topo.from_bus[s]] -
                     2.0 * (st.resistance * res.f_p[s] + st.reactance * res.f_q[s]) / net.base_mva;
      res.v_squared[topo.to_bus[s]] = res.v_mid[s] / (st.tap * st.tap);
    }
    if (!losses.enabled) break;

    for (int s : topo.segment_order) {
      const double v = std::max(res.v_squared[topo.from_bus[s]], 1e-6);
      const double p = res.f_p[s] - res.losses[s];
      const double q = res.f_q[s];
      res.losses[s] = op.segments[s].resistance * (p * p + q * q) / (net.base_mva * v);
    }
    if (!prev_p.empty()) {
      double change = 0;
      for (std::size_t s = 0; s < ns; ++s) {
        change = std::max({change, std::abs(res.f_p[s] - prev_p[s]),
                           std::abs(res.f_q[s] - prev_q[s])});
      }
      if (change / net.base_mva < losses.tolerance_pu) break;
    }
    prev_p = res.f_p;
    prev_q = res.f_q;
  }

  for (std::size_t s = 0; s < ns; ++s) {
    const double cap = op.segments[s].capacity_mva;
    const double p = res.f_p[s], q = res.f_q[s];
    const double norm = std::max({std::abs(p), std::abs(q), octagon_norm(p, q)});
    res.loading[s] = cap > 0 ? norm / cap : (norm > 0 ? INFINITY : 0.0);
  }
  return res;
}

std::vector<Violation> check_violations(const FlowResult& res, const FeederNetwork& net,
                                        double tolerance) {
  std::vector<Violation> out;
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    const auto& bus = net.buses[b];
    const double v = std::sqrt(std::max(res.v_squared[b], 0.0));
    if (v < bus.vmin - tolerance) {
      out.push_back({bus.id, ViolationKind::kUndervoltage, bus.vmin - v});
    } else if (v > bus.vmax + tolerance) {
      out.push_back({bus.id, ViolationKind::kOvervoltage, v - bus.vmax});
    }
  }
  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    if (res.loading[s] > 1.0 + tolerance) {
      out.push_back({net.segments[s].id, ViolationKind::kOverload, res.loading[s] - 1.0});
    }
  }
  return out;
}

void apply_screening_taps(const FeederNetwork& net, Screening mode, OperatingPoint& op) {
  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    if (const auto* fh = std::get_if<FeederHead>(&net.segments[s].kind)) {
      op.segments[s].tap = mode == Screening::kPeakLoad ? fh->tap_min : fh->tap_max;
    } else {
      op.segments[s].tap = 1.0;
    }
  }
}

std::map<std::string, LossFactor> compute_loss_factors(const FeederNetwork& net) {
  const auto topo = analyze_topology(net);
  auto net_load_at = [&](int d, int h) {
    return total_active_load(net, d, h) - rooftop_output(net, d, h);
  };
  int day = 0, hour = 0;
  double best = -INFINITY;
  for (int d = 0; d < static_cast<int>(net.days.size()); ++d) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      if (net_load_at(d, h) > best) best = net_load_at(d, h), day = d, hour = h;
    }
  }
  for (int d = 0; d < static_cast<int>(net.days.size()); ++d) {
    if (net.days[d].label != "peak_load") continue;
    day = d;
    best = -INFINITY;
    for (int h = 0; h < kHoursPerDay; ++h) {
      if (net_load_at(d, h) > best) best = net_load_at(d, h), hour = h;
    }
  }
  const double net_load = net_load_at(day, hour);
  const double net_q = [&] {
    double q = 0;
    for (const auto& b : net.buses) q += b.reactive_load[day][hour];
    return q;
  }();
  const auto res = solve_lindistflow(net, topo, operating_point(net, day, hour), {true, 1e-6, 20});

  std::map<std::string, LossFactor> out;
  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    LossFactor lf;
    if (net_load > 0) lf.beta_p = 2.0 * res.losses[s] / net_load;
    const double x = net.segments[s].reactance, r = net.segments[s].resistance;
    if (net_q > 0 && r > 0) lf.beta_q = 2.0 * res.losses[s] * (x / r) / net_q;
    out[net.segments[s].id] = lf;
  }
  return out;
}

}  // namespace gridxpand
