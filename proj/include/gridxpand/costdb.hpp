#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gridxpand/network.hpp"

namespace gridxpand {

enum class Region { kCalifornia, kOther };

Region parse_region(std::string_view s);  // "CA" or "nonCA"
std::string_view to_string(Region r);

struct TransformerCost {
  std::string label;
  double capital_k = 0;  // k$
  double capacity_mva = 0;
  double lifetime_yr = 0;
};

struct ConductorCost {
  std::string label;
  Region region = Region::kCalifornia;
  Placement placement = Placement::kRuralOverhead;
  double cost_k_per_mile = 0;
  double ampacity_a = 0;
  double r_ohm_per_mile = 0;
  double x_ohm_per_mile = 0;
};

struct RegulatorCost {
  double ca_k = 0;
  double non_ca_k = 0;
  double lifetime_yr = 0;
};

struct BessCost {
  double cost_per_kw = 0;
  double duration_h = 0;
  double lifetime_yr = 0;
};

struct CostDatabase {
  std::vector<TransformerCost> transformers;  // strictly increasing capacity
  std::vector<ConductorCost> conductors;
  RegulatorCost regulator;
  BessCost bess;
  double reconductor_lifetime_yr = 30;
  double discount_rate = 0.05;

  void validate() const;

  // Conductors for one cost column, ordered by ampacity.
  std::vector<ConductorCost> conductors_for(Region region, Placement placement) const;
  const ConductorCost* find_conductor(std::string_view label, Region region,
                                      Placement placement) const;

  double regulator_annual_cost(Region region) const;   // $/yr
  double bess_annual_cost_per_mw() const;               // $/MW/yr
  // Smallest transformer strictly larger than `capacity_mva`.
  std::optional<TransformerCost> next_transformer(double capacity_mva) const;
};

// Equivalent annual cost of `capital` over `lifetime_yr` at `rate`:
// capital * rate / (1 - (1 + rate)^-lifetime), or capital / lifetime at rate 0.
double annualize(double capital, double lifetime_yr, double rate);

CostDatabase load_cost_database(const std::filesystem::path& costs_csv,
                                const std::filesystem::path& conductors_csv);
// Loads `costs.csv` and `conductors.csv` from a directory.
CostDatabase load_cost_directory(const std::filesystem::path& dir);

// Thermal rating of a three-phase conductor.
double ampacity_to_mva(double ampacity_a, double kv_ll);

// Keep-as-is plus every conductor with strictly higher ampacity than the one in
// place. Costs are $/MVA/yr so that cost * option capacity recovers the
// annualized lump sum.
std::vector<UpgradeOption> upgrade_options_for(const LineSegment& segment, const CostDatabase& db,
                                               Region region, double base_mva);

// Fills cost-derived fields the feeder file left open: reconductoring options
// of lines that carry conductor data, the feeder-head upgrade step, and the
// storage and regulator templates.
void apply_cost_defaults(FeederNetwork& net, const CostDatabase& db, Region region);

}  // namespace gridxpand
