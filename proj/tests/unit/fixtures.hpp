#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridxpand/network.hpp"
#include "json.hpp"

namespace fixtures {

inline std::filesystem::path data(const std::string& rel) { return std::filesystem::path(GRIDXPAND_DATA_DIR) / rel; }

inline std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path dir = GRIDXPAND_SCRATCH_DIR;
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline nlohmann::json one_day() { return nlohmann::json::array({{{"label", "peak_load"}, {"weight", 365}}}); }

inline nlohmann::json feeder_head(const std::string& to, double cap, double r = 0.001, double x = 0.002) {
  return {{"id", "fh"}, {"from", "b0"}, {"to", to}, {"kind", "feeder_head"}, {"r", r}, {"x", x},
          {"capacity_mva", cap}};
}

inline nlohmann::json line(const std::string& id, const std::string& from, const std::string& to, double cap,
                           double r = 0.001, double x = 0.002) {
  return {{"id", id}, {"from", from}, {"to", to}, {"kind", "line"}, {"r", r}, {"x", x}, {"capacity_mva", cap}};
}

// Radial chain b0 - b1 - ... with flat loads (MW, Q = 0) on b1..bn and one
// representative day.
inline nlohmann::json chain_doc(const std::vector<double>& loads, double fh_cap = 10.0, double line_cap = 10.0) {
  nlohmann::json buses = nlohmann::json::array({{{"id", "b0"}}});
  nlohmann::json segs = nlohmann::json::array();
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const std::string id = "b" + std::to_string(i + 1);
    buses.push_back({{"id", id}, {"load", loads[i]}, {"qload", 0.0}});
    if (i == 0) segs.push_back(feeder_head(id, fh_cap));
    else segs.push_back(line("l" + std::to_string(i) + std::to_string(i + 1), "b" + std::to_string(i), id, line_cap));
  }
  return {{"name", "chain"}, {"base_mva", 1.0}, {"days", one_day()}, {"buses", buses}, {"segments", segs},
          {"imbalance_cost", 1e4}, {"prices", 30.0}};
}

inline gridxpand::FeederNetwork parse(const nlohmann::json& doc) { return gridxpand::parse_feeder(doc.dump()); }

inline gridxpand::FeederNetwork tutorial() { return gridxpand::load_feeder(data("feeders/tutorial.json")); }

}  // namespace fixtures
