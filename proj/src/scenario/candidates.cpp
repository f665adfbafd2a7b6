#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gridxpand/scenario.hpp"

namespace gridxpand {

std::array<std::string, 3> site_roles(const FeederNetwork& net) {
  const auto topo = analyze_topology(net);
  std::array<std::string, 3> roles;
  roles[0] = net.feeder_head().to_bus;

  // Depths of the buses below the substation; lower median on even counts.
  std::vector<int> depths;
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    if (static_cast<int>(b) != topo.root_bus) depths.push_back(topo.depth[b]);
  }
  if (depths.empty()) return {roles[0], roles[0], roles[0]};
  std::sort(depths.begin(), depths.end());
  const int median = depths[(depths.size() - 1) / 2];
  const int deepest = depths.back();
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    if (static_cast<int>(b) == topo.root_bus) continue;
    const auto& id = net.buses[b].id;
    if (topo.depth[b] == median && (roles[1].empty() || id < roles[1])) roles[1] = id;
    if (topo.depth[b] == deepest && (roles[2].empty() || id < roles[2])) roles[2] = id;
  }
  return roles;
}

std::vector<std::string> site_buses(const FeederNetwork& net) {
  const auto roles = site_roles(net);
  std::vector<std::string> out(roles.begin(), roles.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CandidateSet select_candidates(const FeederNetwork& net, const std::vector<FlowResult>& flows,
                               const ScreeningThresholds& th) {
  const auto topo = analyze_topology(net);
  std::set<std::string> recond, vr;
  CandidateSet out;

  std::vector<double> peak_loading(net.segments.size(), 0.0);
  std::vector<double> v_low(net.buses.size(), kInf), v_high(net.buses.size(), -kInf);
  for (const auto& f : flows) {
    for (std::size_t s = 0; s < net.segments.size(); ++s) peak_loading[s] = std::max(peak_loading[s], f.loading[s]);
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
      const double v = std::sqrt(std::max(0.0, f.v_squared[b]));
      v_low[b] = std::min(v_low[b], v);
      v_high[b] = std::max(v_high[b], v);
    }
  }

  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    if (peak_loading[s] < th.loading) continue;
    const auto& seg = net.segments[s];
    if (std::holds_alternative<FeederHead>(seg.kind)) {
      out.feeder_head_upgrade = true;
    } else if (const auto* line = std::get_if<FixedLine>(&seg.kind)) {
      if (!line->upgrades.empty()) recond.insert(seg.id);
    } else if (std::holds_alternative<CandidateLine>(seg.kind)) {
      recond.insert(seg.id);
    }
  }

  // Regulators go on plain lines next to buses close to a voltage bound;
  // lines already offered for reconductoring are left to that option.
  auto offer_vr = [&](int s) {
    if (s < 0 || !net.regulator_template) return;
    const auto& seg = net.segments[s];
    if (std::holds_alternative<FixedLine>(seg.kind) && !recond.count(seg.id)) vr.insert(seg.id);
  };
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    if (static_cast<int>(b) == topo.root_bus) continue;
    const auto& bus = net.buses[b];
    const bool near_low = v_low[b] <= bus.vmin + th.voltage_margin + 1e-12;
    const bool near_high = v_high[b] >= bus.vmax - th.voltage_margin - 1e-12;
    if (!near_low && !near_high) continue;
    offer_vr(topo.parent_segment[b]);
    for (int s : topo.child_segments[b]) offer_vr(s);
  }

  out.reconductor_segments.assign(recond.begin(), recond.end());
  out.vr_sites.assign(vr.begin(), vr.end());
  out.storage_sites = site_buses(net);
  out.cs_sites = out.storage_sites;
  return out;
}

Siting parse_siting(std::string_view s, std::uint64_t seed) {
  Siting out;
  out.seed = seed;
  if (s == "optimal") {
    out.kind = Siting::Kind::kOptimal;
  } else if (s == "random") {
    out.kind = Siting::Kind::kRandom;
  } else if (s.rfind("fixed:", 0) == 0 && s.size() > 6) {
    out.kind = Siting::Kind::kFixed;
    out.bus = std::string(s.substr(6));
  } else {
    throw ValidationError("unknown siting '" + std::string(s) + "' (expected fixed:<bus>, random, optimal)");
  }
  return out;
}

std::string to_string(const Siting& s) {
  switch (s.kind) {
    case Siting::Kind::kFixed: return "fixed:" + s.bus;
    case Siting::Kind::kRandom: return "random";
    case Siting::Kind::kOptimal: return "optimal";
  }
  return "?";
}

std::string resolve_siting_bus(const FeederNetwork& net, const Siting& s) {
  switch (s.kind) {
    case Siting::Kind::kOptimal: return {};
    case Siting::Kind::kRandom: {
      std::mt19937_64 rng(s.seed);
      return site_roles(net)[rng() % 3];
    }
    case Siting::Kind::kFixed: {
      const bool is_bus = std::any_of(net.buses.begin(), net.buses.end(), [&](const Bus& b) { return b.id == s.bus; });
      if (is_bus) return s.bus;
      const auto roles = site_roles(net);
      if (s.bus == "head") return roles[0];
      if (s.bus == "middle") return roles[1];
      if (s.bus == "end") return roles[2];
      throw ValidationError("siting bus '" + s.bus + "' is neither a bus nor head, middle or end");
    }
  }
  return {};
}

}  // namespace gridxpand
