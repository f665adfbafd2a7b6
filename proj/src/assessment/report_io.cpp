#include <charconv>
#include <cmath>
#include <fstream>

#include "gridxpand/assessment.hpp"
#include "json.hpp"

namespace gridxpand {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";  // folds -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

nlohmann::ordered_json investments_json(const std::vector<Investment>& list) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& i : list) {
    out.push_back({{"asset", i.asset},
                   {"type", i.type},
                   {"detail", i.detail},
                   {"size", i.size},
                   {"annual_cost", i.annual_cost}});
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_json(const AssessmentReport& r) {
  nlohmann::ordered_json j;
  j["feeder"] = r.feeder;
  j["scenario"] = r.scenario;
  j["scale_factor"] = r.scale_factor;
  j["status"] = r.status;
  j["siting"] = {{"mode", r.siting_mode}, {"bus", r.siting_bus}};
  j["cs_capacity_mw"] = r.cs_capacity_mw;
  j["c_with_cs"] = r.c_with_cs;
  j["c_without_cs"] = r.c_without_cs;
  j["c_itgr"] = r.c_itgr;
  j["classification"] = std::string(to_string(r.classification));
  auto b = nlohmann::ordered_json::object();
  for (const auto& t : kAssetTypes) {
    const auto it = r.breakdown.find(t);
    const TypeDelta d = it == r.breakdown.end() ? TypeDelta{} : it->second;
    b[t] = {{"new", d.added}, {"replaced", d.replaced}};
  }
  j["breakdown"] = b;
  j["annual_energy_kwh"] = r.annual_energy_kwh;
  j["cost_per_kw"] = r.cost_per_kw;
  j["cost_per_kwh_cents"] = r.cost_per_kwh;
  j["downsizing_proxy"] = {{"definition", "weighted annual curtailed CS energy / available CS energy"},
                           {"curtailed_fraction", r.curtailed_fraction}};
  j["curtailment_cost"] = {{"with_cs", r.curtailment_cost_with}, {"without_cs", r.curtailment_cost_without}};
  j["slack_mwh"] = {{"with_cs", r.slack_mwh_with}, {"without_cs", r.slack_mwh_without}};
  j["iterations"] = {{"with_cs", r.iterations_with}, {"without_cs", r.iterations_without}};
  j["investments"] = {{"with_cs", investments_json(r.investments_with)},
                      {"without_cs", investments_json(r.investments_without)}};
  return j.dump(2) + "\n";
}

void write_report_json(const AssessmentReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << report_json(r);
  if (!out) throw Error("write failed for " + path.string());
}

std::string csv_header() {
  std::string h =
      "feeder,scenario,scale_factor,status,siting_mode,siting_bus,cs_capacity_mw,c_with_cs,c_without_cs,"
      "c_itgr,classification,cost_per_kw,cost_per_kwh_cents,curtailed_fraction,curtailment_cost_with,"
      "curtailment_cost_without,slack_mwh_with,slack_mwh_without,iterations_with,iterations_without";
  for (const auto& t : kAssetTypes) h += "," + t + "_new," + t + "_replaced";
  return h;
}

std::string csv_row(const AssessmentReport& r) {
  std::string s = csv_field(r.feeder) + "," + r.scenario + "," + format_number(r.scale_factor) + "," +
                  r.status + "," + csv_field(r.siting_mode) + "," + csv_field(r.siting_bus) + "," +
                  format_number(r.cs_capacity_mw) + "," + format_number(r.c_with_cs) + "," +
                  format_number(r.c_without_cs) + "," + format_number(r.c_itgr) + "," +
                  std::string(to_string(r.classification)) + "," + format_number(r.cost_per_kw) + "," +
                  format_number(r.cost_per_kwh) + "," + format_number(r.curtailed_fraction) + "," +
                  format_number(r.curtailment_cost_with) + "," + format_number(r.curtailment_cost_without) +
                  "," + format_number(r.slack_mwh_with) + "," + format_number(r.slack_mwh_without) + "," +
                  std::to_string(r.iterations_with) + "," + std::to_string(r.iterations_without);
  for (const auto& t : kAssetTypes) {
    const auto it = r.breakdown.find(t);
    const TypeDelta d = it == r.breakdown.end() ? TypeDelta{} : it->second;
    s += "," + format_number(d.added) + "," + format_number(d.replaced);
  }
  return s;
}

}  // namespace gridxpand
