#include <algorithm>
#include <cmath>

#include "gridxpand/scenario.hpp"

namespace gridxpand {

std::string_view to_string(ScenarioLabel s) {
  switch (s) {
    case ScenarioLabel::kBase: return "base";
    case ScenarioLabel::kHighPV: return "highpv";
    case ScenarioLabel::kHighLoad: return "highload";
  }
  return "?";
}

ScenarioLabel parse_scenario_label(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "base") return ScenarioLabel::kBase;
  if (lower == "highpv") return ScenarioLabel::kHighPV;
  if (lower == "highload") return ScenarioLabel::kHighLoad;
  throw ValidationError("unknown scenario '" + std::string(s) + "' (expected base, highpv, highload)");
}

FeederNetwork scale_network(const FeederNetwork& net, ScenarioLabel label, double factor) {
  FeederNetwork out = net;
  if (label == ScenarioLabel::kHighLoad) {
    for (auto& bus : out.buses) {
      for (auto& day : bus.active_load) for (double& v : day) v *= factor;
      for (auto& day : bus.reactive_load) for (double& v : day) v *= factor;
    }
  } else if (label == ScenarioLabel::kHighPV) {
    for (auto& s : out.solar_units) {
      if (s.role == SolarRole::kRooftop) s.installed_mw *= factor;
    }
  }
  return out;
}

namespace {

const DailyProfile& cs_profile_at(const FeederNetwork& net, const std::string& bus) {
  for (const auto& u : net.solar_units) {
    if (u.role == SolarRole::kCommunity && u.bus == bus) return u.capacity_factor;
  }
  if (net.cs_profile.empty()) {
    throw ValidationError("no capacity-factor profile for community solar at bus " + bus +
                          " (set cs_profile)");
  }
  return net.cs_profile;
}

}  // namespace

FlowResult screening_flow(const FeederNetwork& net, const Topology& topo, int day, int hour,
                          const std::optional<CsInjection>& cs) {
  OperatingPoint op = operating_point(net, day, hour);
  if (cs && cs->capacity_mw > 0) {
    op.injections[net.bus_index(cs->bus)].p += cs->capacity_mw * cs_profile_at(net, cs->bus)[day][hour];
  }
  FlowResult res = solve_lindistflow(net, topo, op);
  const int fh = net.feeder_head_index();
  const auto& head = std::get<FeederHead>(net.segments[fh].kind);
  const double v_mid = res.v_mid[fh];
  if (v_mid <= 0) return res;

  // Flows do not depend on the tap, so each downstream v is v_mid * u - drop
  // with u = 1 / tap^2. Centre u inside the band every bus allows.
  double lo = -kInf, hi = kInf;
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    if (static_cast<int>(b) == topo.root_bus) continue;
    const double drop = v_mid - res.v_squared[b];
    lo = std::max(lo, (net.buses[b].vmin * net.buses[b].vmin + drop) / v_mid);
    hi = std::min(hi, (net.buses[b].vmax * net.buses[b].vmax + drop) / v_mid);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) return res;
  const double u = std::clamp(0.5 * (lo + hi), 1.0 / (head.tap_max * head.tap_max),
                              1.0 / (head.tap_min * head.tap_min));
  op.segments[fh].tap = 1.0 / std::sqrt(u);
  return solve_lindistflow(net, topo, op);
}

std::vector<FlowResult> screening_flows(const FeederNetwork& net, const std::optional<CsInjection>& cs) {
  const auto topo = analyze_topology(net);
  std::vector<FlowResult> out;
  out.reserve(net.num_periods());
  for (int d = 0; d < static_cast<int>(net.days.size()); ++d) {
    for (int h = 0; h < kHoursPerDay; ++h) out.push_back(screening_flow(net, topo, d, h, cs));
  }
  return out;
}

std::vector<Violation> screening_violations(const FeederNetwork& net, const std::optional<CsInjection>& cs) {
  std::vector<Violation> all;
  for (const auto& res : screening_flows(net, cs)) {
    for (const auto& v : check_violations(res, net)) {
      auto it = std::find_if(all.begin(), all.end(),
                             [&](const Violation& w) { return w.element == v.element && w.kind == v.kind; });
      if (it == all.end()) all.push_back(v);
      else it->magnitude = std::max(it->magnitude, v.magnitude);
    }
  }
  std::sort(all.begin(), all.end(), [](const Violation& a, const Violation& b) {
    return a.element != b.element ? a.element < b.element : a.kind < b.kind;
  });
  return all;
}

NetloadScenario make_scenario(const FeederNetwork& net, ScenarioLabel label, const ScanOptions& options) {
  if (!(options.step > 0)) throw ValidationError("scenario step must be positive");
  if (options.max_iter < 1) throw ValidationError("scenario max_iter must be at least 1");
  NetloadScenario sc;
  sc.label = label;
  sc.network = net;
  sc.preexisting_violation = !screening_violations(net).empty();
  if (label == ScenarioLabel::kBase || sc.preexisting_violation) return sc;

  if (label == ScenarioLabel::kHighPV) {
    const bool any_rooftop = std::any_of(net.solar_units.begin(), net.solar_units.end(), [](const auto& s) {
      return s.role == SolarRole::kRooftop && s.installed_mw > 0;
    });
    if (!any_rooftop) {
      // Nothing to scale: the scenario coincides with the base case.
      sc.scan_exhausted = true;
      return sc;
    }
  }

  double accepted = 1.0;
  for (int k = 1; k <= options.max_iter; ++k) {
    const double factor = 1.0 + k * options.step;
    auto scaled = scale_network(net, label, factor);
    if (!screening_violations(scaled).empty()) {
      sc.scale_factor = accepted;
      sc.network = accepted == 1.0 ? net : scale_network(net, label, accepted);
      return sc;
    }
    accepted = factor;
  }
  sc.scan_exhausted = true;
  sc.scale_factor = accepted;
  sc.network = scale_network(net, label, accepted);
  return sc;
}

}  // namespace gridxpand
