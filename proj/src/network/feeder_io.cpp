#include <fstream>
#include <sstream>

#include "gridxpand/network.hpp"
#include "json.hpp"

namespace gridxpand {

namespace {

using nlohmann::json;

// Thin accessor that reports the JSON path of missing or mistyped fields.
class Field {
 public:
  Field(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& node() const { return node_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const {
    return node_.is_object() && node_.contains(key) && !node_.at(key).is_null();
  }

  Field at(const char* key) const {
    if (!node_.is_object()) throw ParseError(path_, "expected an object");
    if (!has(key)) throw ParseError(child_path(key), "missing required field");
    return {node_.at(key), child_path(key)};
  }

  Field at(std::size_t i) const { return {node_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  double number() const {
    if (!node_.is_number()) throw ParseError(path_, "expected a number");
    return node_.get<double>();
  }
  double number(const char* key) const { return at(key).number(); }
  double number(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }

  std::string string() const {
    if (!node_.is_string()) throw ParseError(path_, "expected a string");
    return node_.get<std::string>();
  }
  std::string string(const char* key) const { return at(key).string(); }
  std::string string(const char* key, const std::string& fallback) const {
    return has(key) ? at(key).string() : fallback;
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw ParseError(child_path(key), "expected true or false");
    return v.get<bool>();
  }

  std::size_t array_size() const {
    if (!node_.is_array()) throw ParseError(path_, "expected an array");
    return node_.size();
  }

 private:
  std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  const json& node_;
  std::string path_;
};

DailyProfile parse_profile(const Field& f, const std::vector<ScenarioDay>& days) {
  DailyProfile out(days.size());
  if (f.node().is_number()) {
    for (auto& day : out) day.fill(f.number());
    return out;
  }
  if (!f.node().is_object()) throw ParseError(f.path(), "expected a number or {day: [24 values]}");
  for (std::size_t d = 0; d < days.size(); ++d) {
    const auto& label = days[d].label;
    if (!f.has(label.c_str())) {
      throw ParseError(f.path() + "." + label, "profile coverage gap at (day " + label +
                                                   ", hour 0): day missing");
    }
    Field day = f.at(label.c_str());
    if (day.node().is_number()) {
      out[d].fill(day.number());
      continue;
    }
    const std::size_t n = day.array_size();
    if (n != kHoursPerDay) {
      throw ParseError(day.path(), "profile coverage gap at (day " + label + ", hour " +
                                       std::to_string(std::min<std::size_t>(n, kHoursPerDay)) +
                                       "): expected 24 hourly values, got " + std::to_string(n));
    }
    for (int h = 0; h < kHoursPerDay; ++h) out[d][h] = day.at(h).number();
  }
  return out;
}

DailyProfile zero_profile(std::size_t num_days) {
  DailyProfile p(num_days);
  for (auto& d : p) d.fill(0.0);
  return p;
}

UpgradeOption parse_option(const Field& f) {
  UpgradeOption o;
  o.label = f.string("label", "");
  o.capacity_mva = f.number("capacity_mva");
  o.resistance = f.number("r");
  o.reactance = f.number("x");
  o.annualized_cost_per_mva = f.number("cost_per_mva_yr");
  return o;
}

ConductorInfo parse_conductor(const Field& f) {
  ConductorInfo c;
  c.label = f.string("label");
  c.length_mi = f.number("length_mi");
  c.kv_ll = f.number("kv", 12.47);
  try {
    c.placement = parse_placement(f.string("placement", "rural-OH"));
  } catch (const ValidationError& e) {
    throw ParseError(f.path() + ".placement", e.what());
  }
  return c;
}

LineSegment parse_segment(const Field& f) {
  LineSegment s;
  s.id = f.string("id");
  s.from_bus = f.string("from");
  s.to_bus = f.string("to");
  s.resistance = f.number("r");
  s.reactance = f.number("x");
  if (f.has("conductor")) s.conductor = parse_conductor(f.at("conductor"));

  const std::string kind = f.string("kind");
  if (kind == "line") {
    FixedLine k;
    k.capacity_mva = f.number("capacity_mva");
    if (f.has("upgrades")) {
      Field ups = f.at("upgrades");
      for (std::size_t i = 0; i < ups.array_size(); ++i) k.upgrades.push_back(parse_option(ups.at(i)));
    }
    s.kind = std::move(k);
  } else if (kind == "candidate") {
    CandidateLine k;
    Field opts = f.at("options");
    for (std::size_t i = 0; i < opts.array_size(); ++i) k.options.push_back(parse_option(opts.at(i)));
    s.kind = std::move(k);
  } else if (kind == "feeder_head") {
    FeederHead k;
    k.base_capacity_mva = f.number("capacity_mva");
    k.upgrade_capacity_mva = f.number("upgrade_capacity_mva", 0.0);
    k.upgrade_cost = f.number("upgrade_cost", 0.0);
    k.tap_min = f.number("tap_min", 0.95);
    k.tap_max = f.number("tap_max", 1.05);
    s.kind = k;
  } else if (kind == "regulator") {
    Regulator k;
    k.existing = f.boolean("existing", true);
    k.capacity_mva = f.number("capacity_mva");
    k.install_cost = f.number("install_cost", 0.0);
    k.tap_min = f.number("tap_min", 0.9);
    k.tap_max = f.number("tap_max", 1.1);
    s.kind = k;
  } else {
    throw ParseError(f.path() + ".kind", "unknown segment kind '" + kind +
                                             "' (expected line, candidate, feeder_head, regulator)");
  }
  return s;
}

StorageUnit parse_storage(const Field& f, bool is_template) {
  StorageUnit u;
  if (!is_template) {
    u.id = f.string("id");
    u.bus = f.string("bus");
    const std::string status = f.string("status", "existing");
    if (status == "existing") {
      u.status = StorageStatus::kExisting;
    } else if (status == "candidate") {
      u.status = StorageStatus::kCandidate;
    } else {
      throw ParseError(f.path() + ".status", "expected existing or candidate");
    }
  } else {
    u.status = StorageStatus::kCandidate;
  }
  u.p_in_max = f.number("p_in_max_mw", 1.0);
  u.p_out_max = f.number("p_out_max_mw", u.p_in_max);
  u.duration_h = f.number("duration_h", 2.0);
  u.efficiency = f.number("efficiency", 0.9);
  u.reactive_fraction = f.number("reactive_fraction", 0.0);
  u.annualized_cost = f.number("annualized_cost_per_mw", 0.0);
  u.invest_cap_mw = f.number("invest_cap_mw", 0.0);
  return u;
}

json profile_json(const DailyProfile& p, const std::vector<ScenarioDay>& days) {
  json out = json::object();
  for (std::size_t d = 0; d < days.size() && d < p.size(); ++d) {
    out[days[d].label] = json(std::vector<double>(p[d].begin(), p[d].end()));
  }
  return out;
}

json option_json(const UpgradeOption& o) {
  return {{"label", o.label},
          {"capacity_mva", o.capacity_mva},
          {"r", o.resistance},
          {"x", o.reactance},
          {"cost_per_mva_yr", o.annualized_cost_per_mva}};
}

json storage_json(const StorageUnit& u, bool is_template) {
  json j;
  if (!is_template) {
    j["id"] = u.id;
    j["bus"] = u.bus;
    j["status"] = u.status == StorageStatus::kExisting ? "existing" : "candidate";
  }
  j["p_in_max_mw"] = u.p_in_max;
  j["p_out_max_mw"] = u.p_out_max;
  j["duration_h"] = u.duration_h;
  j["efficiency"] = u.efficiency;
  j["reactive_fraction"] = u.reactive_fraction;
  j["annualized_cost_per_mw"] = u.annualized_cost;
  j["invest_cap_mw"] = u.invest_cap_mw;
  return j;
}

json conductor_json(const ConductorInfo& c) {
  return {{"label", c.label},
          {"length_mi", c.length_mi},
          {"kv", c.kv_ll},
          {"placement", std::string(to_string(c.placement))}};
}

FeederNetwork parse_document(const json& doc) {
  Field root(doc, "");
  if (!doc.is_object()) throw ParseError("<root>", "expected a JSON object");

  FeederNetwork net;
  net.name = root.string("name", "");
  net.base_mva = root.number("base_mva");
  net.v_ref = root.number("v_ref", 1.0);
  net.region = root.string("region", "CA");
  net.imbalance_cost = root.number("imbalance_cost", 1e6);

  if (root.has("days")) {
    Field days = root.at("days");
    for (std::size_t i = 0; i < days.array_size(); ++i) {
      Field d = days.at(i);
      net.days.push_back({d.string("label"), d.number("weight")});
    }
  } else {
    net.days = {{"peak_load", 1}, {"max_solar", 1}, {"average", 363}};
  }

  Field buses = root.at("buses");
  for (std::size_t i = 0; i < buses.array_size(); ++i) {
    Field b = buses.at(i);
    Bus bus;
    bus.id = b.string("id");
    bus.vmin = b.number("vmin", 0.95);
    bus.vmax = b.number("vmax", 1.05);
    bus.active_load = b.has("load") ? parse_profile(b.at("load"), net.days) : zero_profile(net.days.size());
    bus.reactive_load =
        b.has("qload") ? parse_profile(b.at("qload"), net.days) : zero_profile(net.days.size());
    net.buses.push_back(std::move(bus));
  }

  Field segs = root.at("segments");
  for (std::size_t i = 0; i < segs.array_size(); ++i) net.segments.push_back(parse_segment(segs.at(i)));

  if (root.has("storage")) {
    Field st = root.at("storage");
    for (std::size_t i = 0; i < st.array_size(); ++i) {
      net.storage_units.push_back(parse_storage(st.at(i), false));
    }
  }

  if (root.has("solar")) {
    Field sol = root.at("solar");
    for (std::size_t i = 0; i < sol.array_size(); ++i) {
      Field s = sol.at(i);
      SolarUnit u;
      u.id = s.string("id");
      u.bus = s.string("bus");
      const std::string role = s.string("role", "rooftop");
      if (role == "rooftop") {
        u.role = SolarRole::kRooftop;
      } else if (role == "cs") {
        u.role = SolarRole::kCommunity;
      } else {
        throw ParseError(s.path() + ".role", "expected rooftop or cs");
      }
      u.installed_mw = s.number("capacity_mw", 0.0);
      u.invest_cap_mw = s.number("invest_cap_mw", 0.0);
      u.capacity_factor = parse_profile(s.at("profile"), net.days);
      net.solar_units.push_back(std::move(u));
    }
  }

  net.curtailment_price =
      root.has("prices") ? parse_profile(root.at("prices"), net.days) : zero_profile(net.days.size());
  if (root.has("cs_profile")) net.cs_profile = parse_profile(root.at("cs_profile"), net.days);
  if (root.has("cs_capacity_mw")) net.cs_capacity_mw = root.number("cs_capacity_mw");
  if (root.has("cs_invest_cap_mw")) net.cs_invest_cap_mw = root.number("cs_invest_cap_mw");
  if (root.has("storage_template")) {
    net.storage_template = parse_storage(root.at("storage_template"), true);
  }
  if (root.has("regulator_template")) {
    Field r = root.at("regulator_template");
    net.regulator_template =
        RegulatorTemplate{r.number("install_cost"), r.number("tap_min", 0.9), r.number("tap_max", 1.1)};
  }
  if (root.has("default_conductor")) {
    net.default_conductor = parse_conductor(root.at("default_conductor"));
  }
  if (root.has("loss_factors")) {
    Field lf = root.at("loss_factors");
    if (!lf.node().is_object()) throw ParseError(lf.path(), "expected {segment: [beta_p, beta_q]}");
    for (const auto& [seg, val] : lf.node().items()) {
      Field v(val, lf.path() + "." + seg);
      if (v.array_size() != 2) throw ParseError(v.path(), "expected [beta_p, beta_q]");
      net.loss_factors[seg] = {v.at(std::size_t{0}).number(), v.at(std::size_t{1}).number()};
    }
  }
  return net;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

FeederNetwork parse_feeder(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(json_text, e.byte)), e.what());
  }
  FeederNetwork net = parse_document(doc);
  net.validate();
  return net;
}

FeederNetwork load_feeder(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feeder file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_feeder(buf.str());
}

std::string serialize_feeder(const FeederNetwork& net) {
  json doc;
  doc["name"] = net.name;
  doc["base_mva"] = net.base_mva;
  doc["v_ref"] = net.v_ref;
  doc["region"] = net.region;
  doc["imbalance_cost"] = net.imbalance_cost;
  doc["days"] = json::array();
  for (const auto& d : net.days) doc["days"].push_back({{"label", d.label}, {"weight", d.weight}});

  doc["buses"] = json::array();
  for (const auto& b : net.buses) {
    doc["buses"].push_back({{"id", b.id},
                            {"vmin", b.vmin},
                            {"vmax", b.vmax},
                            {"load", profile_json(b.active_load, net.days)},
                            {"qload", profile_json(b.reactive_load, net.days)}});
  }

  doc["segments"] = json::array();
  for (const auto& s : net.segments) {
    json j{{"id", s.id}, {"from", s.from_bus}, {"to", s.to_bus}, {"r", s.resistance}, {"x", s.reactance}};
    if (s.conductor) j["conductor"] = conductor_json(*s.conductor);
    if (const auto* k = std::get_if<FixedLine>(&s.kind)) {
      j["kind"] = "line";
      j["capacity_mva"] = k->capacity_mva;
      j["upgrades"] = json::array();
      for (const auto& o : k->upgrades) j["upgrades"].push_back(option_json(o));
    } else if (const auto* k = std::get_if<CandidateLine>(&s.kind)) {
      j["kind"] = "candidate";
      j["options"] = json::array();
      for (const auto& o : k->options) j["options"].push_back(option_json(o));
    } else if (const auto* k = std::get_if<FeederHead>(&s.kind)) {
      j["kind"] = "feeder_head";
      j["capacity_mva"] = k->base_capacity_mva;
      j["upgrade_capacity_mva"] = k->upgrade_capacity_mva;
      j["upgrade_cost"] = k->upgrade_cost;
      j["tap_min"] = k->tap_min;
      j["tap_max"] = k->tap_max;
    } else if (const auto* k = std::get_if<Regulator>(&s.kind)) {
      j["kind"] = "regulator";
      j["existing"] = k->existing;
      j["capacity_mva"] = k->capacity_mva;
      j["install_cost"] = k->install_cost;
      j["tap_min"] = k->tap_min;
      j["tap_max"] = k->tap_max;
    }
    doc["segments"].push_back(std::move(j));
  }

  doc["storage"] = json::array();
  for (const auto& u : net.storage_units) doc["storage"].push_back(storage_json(u, false));

  doc["solar"] = json::array();
  for (const auto& s : net.solar_units) {
    doc["solar"].push_back({{"id", s.id},
                            {"bus", s.bus},
                            {"role", s.role == SolarRole::kRooftop ? "rooftop" : "cs"},
                            {"capacity_mw", s.installed_mw},
                            {"invest_cap_mw", s.invest_cap_mw},
                            {"profile", profile_json(s.capacity_factor, net.days)}});
  }

  doc["prices"] = profile_json(net.curtailment_price, net.days);
  if (!net.cs_profile.empty()) doc["cs_profile"] = profile_json(net.cs_profile, net.days);
  doc["cs_capacity_mw"] = net.cs_capacity_mw ? json(*net.cs_capacity_mw) : json(nullptr);
  if (net.cs_invest_cap_mw) doc["cs_invest_cap_mw"] = *net.cs_invest_cap_mw;
  if (net.storage_template) doc["storage_template"] = storage_json(*net.storage_template, true);
  if (net.regulator_template) {
    doc["regulator_template"] = {{"install_cost", net.regulator_template->install_cost},
                                 {"tap_min", net.regulator_template->tap_min},
                                 {"tap_max", net.regulator_template->tap_max}};
  }
  if (net.default_conductor) doc["default_conductor"] = conductor_json(*net.default_conductor);
  if (!net.loss_factors.empty()) {
    json lf = json::object();
    for (const auto& [seg, f] : net.loss_factors) lf[seg] = {f.beta_p, f.beta_q};
    doc["loss_factors"] = lf;
  }
  return doc.dump(2);
}

void save_feeder(const FeederNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write feeder file " + path.string());
  out << serialize_feeder(net) << '\n';
}

}  // namespace gridxpand
