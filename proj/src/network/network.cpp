#include "gridxpand/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace gridxpand {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_profile(const DailyProfile& profile, std::size_t num_days, const std::string& what,
                   const std::vector<ScenarioDay>& days, double lo, double hi) {
  if (profile.size() != num_days) {
    std::string day = profile.size() < num_days ? days[profile.size()].label : "?";
    throw ValidationError(what + ": profile coverage gap at (day " + day + ", hour 0)");
  }
  for (std::size_t d = 0; d < num_days; ++d) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      double v = profile[d][h];
      if (!std::isfinite(v)) {
        throw ValidationError(what + ": profile coverage gap at (day " + days[d].label +
                              ", hour " + std::to_string(h) + ")");
      }
      if (v < lo || v > hi) {
        throw ValidationError(what + ": value " + std::to_string(v) + " out of range at (day " +
                              days[d].label + ", hour " + std::to_string(h) + ")");
      }
    }
  }
}

void check_taps(const std::string& id, double tap_min, double tap_max) {
  if (!(tap_min > 0 && tap_min <= 1.0 && 1.0 <= tap_max)) {
    throw ValidationError("segment " + id + ": tap range must satisfy 0 < tap_min <= 1 <= tap_max");
  }
}

void check_options(const LineSegment& seg, const std::vector<UpgradeOption>& options,
                   bool with_keep) {
  int zero_cost = 0;
  for (const auto& o : options) {
    if (!(o.capacity_mva > 0)) {
      throw ValidationError("segment " + seg.id + ": upgrade option '" + o.label +
                            "' must have positive capacity");
    }
    if (o.annualized_cost_per_mva < 0 || o.resistance < 0 || o.reactance < 0) {
      throw ValidationError("segment " + seg.id + ": upgrade option '" + o.label +
                            "' has negative cost or impedance");
    }
    if (o.annualized_cost_per_mva == 0) ++zero_cost;
  }
  if (with_keep) {
    if (zero_cost != 1) {
      throw ValidationError("segment " + seg.id +
                            ": candidate options need exactly one zero-cost keep-as-is entry");
    }
    auto keep = std::find_if(options.begin(), options.end(),
                             [](const auto& o) { return o.annualized_cost_per_mva == 0; });
    if (keep->resistance != seg.resistance || keep->reactance != seg.reactance) {
      throw ValidationError("segment " + seg.id +
                            ": keep-as-is option must match the segment impedance");
    }
  } else if (zero_cost != 0) {
    throw ValidationError("segment " + seg.id + ": reconductoring upgrades must have positive cost");
  }
}

}  // namespace

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::kRuralOverhead: return "rural-OH";
    case Placement::kUrbanOverhead: return "urban-OH";
    case Placement::kUrbanUnderground: return "urban-UG";
  }
  return "?";
}

Placement parse_placement(std::string_view s) {
  if (s == "rural-OH" || s == "R-OH") return Placement::kRuralOverhead;
  if (s == "urban-OH" || s == "U-OH") return Placement::kUrbanOverhead;
  if (s == "urban-UG" || s == "U-UG") return Placement::kUrbanUnderground;
  throw ValidationError("unknown conductor placement '" + std::string(s) + "'");
}

double LineSegment::capacity_mva() const {
  return std::visit(
      Overloaded{
          [](const FixedLine& k) { return k.capacity_mva; },
          [](const CandidateLine& k) {
            for (const auto& o : k.options) {
              if (o.annualized_cost_per_mva == 0) return o.capacity_mva;
            }
            return k.options.empty() ? 0.0 : k.options.front().capacity_mva;
          },
          [](const FeederHead& k) { return k.base_capacity_mva; },
          [](const Regulator& k) { return k.capacity_mva; },
      },
      kind);
}

std::vector<UpgradeOption> LineSegment::all_options() const {
  if (const auto* c = std::get_if<CandidateLine>(&kind)) return c->options;
  std::vector<UpgradeOption> out;
  out.push_back({"keep", capacity_mva(), resistance, reactance, 0.0});
  if (const auto* f = std::get_if<FixedLine>(&kind)) {
    out.insert(out.end(), f->upgrades.begin(), f->upgrades.end());
  }
  return out;
}

bool LineSegment::has_tap() const {
  return std::holds_alternative<FeederHead>(kind) || std::holds_alternative<Regulator>(kind);
}

int FeederNetwork::bus_index(std::string_view id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return static_cast<int>(i);
  }
  throw ValidationError("unknown bus '" + std::string(id) + "'");
}

int FeederNetwork::segment_index(std::string_view id) const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].id == id) return static_cast<int>(i);
  }
  throw ValidationError("unknown segment '" + std::string(id) + "'");
}

int FeederNetwork::day_index(std::string_view label) const {
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (days[i].label == label) return static_cast<int>(i);
  }
  throw ValidationError("unknown day '" + std::string(label) + "'");
}

int FeederNetwork::feeder_head_index() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (std::holds_alternative<FeederHead>(segments[i].kind)) return static_cast<int>(i);
  }
  throw ValidationError("network has no feeder-head segment");
}

const LineSegment& FeederNetwork::feeder_head() const { return segments[feeder_head_index()]; }

LossFactor FeederNetwork::loss_factor(std::string_view segment_id) const {
  auto it = loss_factors.find(std::string(segment_id));
  return it == loss_factors.end() ? LossFactor{} : it->second;
}

void FeederNetwork::validate() const {
  if (!(base_mva > 0)) throw ValidationError("base_mva must be positive");
  if (!(v_ref > 0)) throw ValidationError("v_ref must be positive");
  if (days.empty()) throw ValidationError("at least one scenario day is required");
  if (!(imbalance_cost >= 0)) throw ValidationError("imbalance_cost must be non-negative");

  std::set<std::string> labels;
  for (const auto& d : days) {
    if (!labels.insert(d.label).second) throw ValidationError("duplicate day '" + d.label + "'");
    if (!(d.weight > 0)) throw ValidationError("day '" + d.label + "' needs a positive weight");
  }

  std::set<std::string> ids;
  const std::size_t nd = days.size();
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) throw ValidationError("duplicate bus '" + b.id + "'");
    if (!(0 < b.vmin && b.vmin < b.vmax)) {
      throw ValidationError("bus " + b.id + ": requires 0 < vmin < vmax");
    }
    check_profile(b.active_load, nd, "bus " + b.id + " active load", days,
                  -std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    check_profile(b.reactive_load, nd, "bus " + b.id + " reactive load", days,
                  -std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  }

  ids.clear();
  int heads = 0;
  for (const auto& s : segments) {
    if (!ids.insert(s.id).second) throw ValidationError("duplicate segment '" + s.id + "'");
    if (s.resistance < 0 || s.reactance < 0) {
      throw ValidationError("segment " + s.id + ": negative impedance");
    }
    std::visit(Overloaded{
                   [&](const FixedLine& k) {
                     if (!(k.capacity_mva > 0)) {
                       throw ValidationError("segment " + s.id + ": capacity must be positive");
                     }
                     check_options(s, k.upgrades, false);
                   },
                   [&](const CandidateLine& k) { check_options(s, k.options, true); },
                   [&](const FeederHead& k) {
                     ++heads;
                     if (!(k.base_capacity_mva > 0) || k.upgrade_capacity_mva < 0 ||
                         k.upgrade_cost < 0) {
                       throw ValidationError("segment " + s.id + ": invalid feeder-head ratings");
                     }
                     check_taps(s.id, k.tap_min, k.tap_max);
                   },
                   [&](const Regulator& k) {
                     if (!(k.capacity_mva > 0) || k.install_cost < 0) {
                       throw ValidationError("segment " + s.id + ": invalid regulator ratings");
                     }
                     check_taps(s.id, k.tap_min, k.tap_max);
                   },
               },
               s.kind);
  }
  if (heads != 1) {
    throw ValidationError("network needs exactly one feeder-head segment, found " +
                          std::to_string(heads));
  }
  const auto topo = analyze_topology(*this);
  const auto& root = buses[topo.root_bus];
  if (v_ref < root.vmin || v_ref > root.vmax) {
    throw ValidationError("v_ref lies outside the voltage band of the substation bus");
  }

  for (const auto& [seg, lf] : loss_factors) {
    segment_index(seg);
    if (lf.beta_p < 0 || lf.beta_q < 0) {
      throw ValidationError("segment " + seg + ": loss factors must be non-negative");
    }
  }

  ids.clear();
  auto check_storage = [&](const StorageUnit& u, const std::string& what) {
    if (!(u.duration_h > 0)) throw ValidationError(what + ": duration must be positive");
    if (!(u.efficiency > 0 && u.efficiency <= 1)) {
      throw ValidationError(what + ": efficiency must lie in (0, 1]");
    }
    if (u.reactive_fraction < 0) throw ValidationError(what + ": reactive fraction is negative");
    if (u.p_in_max < 0 || u.p_out_max < 0 || u.annualized_cost < 0 || u.invest_cap_mw < 0) {
      throw ValidationError(what + ": ratings and costs must be non-negative");
    }
  };
  for (const auto& u : storage_units) {
    if (!ids.insert(u.id).second) throw ValidationError("duplicate storage '" + u.id + "'");
    bus_index(u.bus);
    check_storage(u, "storage " + u.id);
  }
  if (storage_template) check_storage(*storage_template, "storage template");

  ids.clear();
  for (const auto& s : solar_units) {
    if (!ids.insert(s.id).second) throw ValidationError("duplicate solar '" + s.id + "'");
    bus_index(s.bus);
    check_profile(s.capacity_factor, nd, "solar " + s.id, days, 0.0, 1.0);
    if (s.role == SolarRole::kRooftop && s.installed_mw < 0) {
      throw ValidationError("solar " + s.id + ": installed capacity is negative");
    }
    if (s.role == SolarRole::kCommunity && !(s.invest_cap_mw > 0)) {
      throw ValidationError("solar " + s.id + ": candidate needs invest_cap > 0");
    }
  }

  check_profile(curtailment_price, nd, "prices", days, 0.0, std::numeric_limits<double>::max());
  if (!cs_profile.empty()) check_profile(cs_profile, nd, "cs_profile", days, 0.0, 1.0);
  if (cs_capacity_mw && *cs_capacity_mw < 0) {
    throw ValidationError("cs_capacity_mw must be non-negative");
  }
  if (regulator_template) {
    check_taps("regulator template", regulator_template->tap_min, regulator_template->tap_max);
  }
}

double total_active_load(const FeederNetwork& net, int day, int hour) {
  double sum = 0;
  for (const auto& b : net.buses) sum += b.active_load[day][hour];
  return sum;
}

double rooftop_output(const FeederNetwork& net, int day, int hour) {
  double sum = 0;
  for (const auto& s : net.solar_units) {
    if (s.role == SolarRole::kRooftop) sum += s.installed_mw * s.capacity_factor[day][hour];
  }
  return sum;
}

double minimum_daily_load(const FeederNetwork& net, int day) {
  if (day < 0 || day >= static_cast<int>(net.days.size())) {
    throw ValidationError("day index out of range");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int h = 0; h < kHoursPerDay; ++h) {
    best = std::min(best, total_active_load(net, day, h) - rooftop_output(net, day, h));
  }
  return best;
}

double minimum_daily_load(const FeederNetwork& net, std::string_view day_label) {
  return minimum_daily_load(net, net.day_index(day_label));
}

double cs_total_capacity(const FeederNetwork& net) {
  if (net.cs_capacity_mw) return *net.cs_capacity_mw;
  int day = 0;
  for (std::size_t d = 0; d < net.days.size(); ++d) {
    if (net.days[d].label == "average") day = static_cast<int>(d);
  }
  return std::max(0.0, minimum_daily_load(net, day));
}

double annual_energy_kwh(const FeederNetwork& net) {
  double mwh = 0;
  for (std::size_t d = 0; d < net.days.size(); ++d) {
    double day_sum = 0;
    for (int h = 0; h < kHoursPerDay; ++h) day_sum += total_active_load(net, d, h);
    mwh += net.days[d].weight * day_sum;
  }
  return mwh * 1000.0;
}

}  // namespace gridxpand
