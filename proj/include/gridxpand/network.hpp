#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace gridxpand {

inline constexpr int kHoursPerDay = 24;

// Hourly values indexed [day][hour], days in the order of FeederNetwork::days.
using DailyProfile = std::vector<std::array<double, kHoursPerDay>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `where()` carries "line N" or a JSON field path.
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class Placement { kRuralOverhead, kUrbanOverhead, kUrbanUnderground };

std::string_view to_string(Placement p);
Placement parse_placement(std::string_view s);

struct Bus {
  std::string id;
  double vmin = 0.95;  // pu
  double vmax = 1.05;  // pu
  DailyProfile active_load;    // MW
  DailyProfile reactive_load;  // MVAr

  bool operator==(const Bus&) const = default;
};

struct UpgradeOption {
  std::string label;
  double capacity_mva = 0;
  double resistance = 0;  // pu on the feeder base
  double reactance = 0;   // pu on the feeder base
  double annualized_cost_per_mva = 0;  // $/MVA/yr

  bool operator==(const UpgradeOption&) const = default;
};

// Physical description used to look up reconductoring options.
struct ConductorInfo {
  std::string label;
  double length_mi = 0;
  double kv_ll = 12.47;
  Placement placement = Placement::kRuralOverhead;

  bool operator==(const ConductorInfo&) const = default;
};

// An ordinary line. `upgrades` lists reconductoring options (excluding the
// keep-as-is option) that the candidate screening may activate.
struct FixedLine {
  double capacity_mva = 0;
  std::vector<UpgradeOption> upgrades;

  bool operator==(const FixedLine&) const = default;
};

// A line that is always offered for reconductoring. `options` includes the
// zero-cost keep-as-is entry.
struct CandidateLine {
  std::vector<UpgradeOption> options;

  bool operator==(const CandidateLine&) const = default;
};

struct FeederHead {
  double base_capacity_mva = 0;
  double upgrade_capacity_mva = 0;
  double upgrade_cost = 0;  // $/yr
  double tap_min = 0.95;
  double tap_max = 1.05;

  bool operator==(const FeederHead&) const = default;
};

struct Regulator {
  bool existing = true;
  double capacity_mva = 0;
  double install_cost = 0;  // $/yr, only charged when !existing
  double tap_min = 0.9;
  double tap_max = 1.1;

  bool operator==(const Regulator&) const = default;
};

using SegmentKind = std::variant<FixedLine, CandidateLine, FeederHead, Regulator>;

struct LineSegment {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double resistance = 0;  // pu
  double reactance = 0;   // pu
  SegmentKind kind;
  std::optional<ConductorInfo> conductor;

  // Capacity of the segment as built today (keep-as-is / base transformer).
  double capacity_mva() const;
  // Keep-as-is option followed by every reconductoring option.
  std::vector<UpgradeOption> all_options() const;
  bool has_tap() const;

  bool operator==(const LineSegment&) const = default;
};

enum class StorageStatus { kExisting, kCandidate };

// For existing units p_in_max/p_out_max are absolute MW ratings. For
// candidates they are ratings per MW of invested capacity (usually 1).
struct StorageUnit {
  std::string id;
  std::string bus;
  StorageStatus status = StorageStatus::kExisting;
  double p_in_max = 1;
  double p_out_max = 1;
  double duration_h = 2;
  double efficiency = 0.9;
  double reactive_fraction = 0;
  double annualized_cost = 0;  // $/MW/yr
  double invest_cap_mw = 0;

  bool operator==(const StorageUnit&) const = default;
};

enum class SolarRole { kRooftop, kCommunity };

struct SolarUnit {
  std::string id;
  std::string bus;
  SolarRole role = SolarRole::kRooftop;
  double installed_mw = 0;
  DailyProfile capacity_factor;
  double invest_cap_mw = 0;

  bool operator==(const SolarUnit&) const = default;
};

struct ScenarioDay {
  std::string label;
  double weight = 1;

  bool operator==(const ScenarioDay&) const = default;
};

struct RegulatorTemplate {
  double install_cost = 0;  // $/yr
  double tap_min = 0.9;
  double tap_max = 1.1;

  bool operator==(const RegulatorTemplate&) const = default;
};

struct LossFactor {
  double beta_p = 0;
  double beta_q = 0;

  bool operator==(const LossFactor&) const = default;
};

struct FeederNetwork {
  std::string name;
  double base_mva = 1;
  double v_ref = 1.0;
  std::vector<Bus> buses;
  std::vector<LineSegment> segments;
  std::vector<StorageUnit> storage_units;
  std::vector<SolarUnit> solar_units;
  std::vector<ScenarioDay> days;
  std::map<std::string, LossFactor> loss_factors;
  double imbalance_cost = 1e6;     // $/MWh
  DailyProfile curtailment_price;  // $/MWh
  DailyProfile cs_profile;         // capacity factor of community-solar sites
  std::optional<double> cs_capacity_mw;
  std::optional<double> cs_invest_cap_mw;
  std::optional<StorageUnit> storage_template;
  std::optional<RegulatorTemplate> regulator_template;
  std::optional<ConductorInfo> default_conductor;
  std::string region = "CA";

  int bus_index(std::string_view id) const;      // throws if unknown
  int segment_index(std::string_view id) const;  // throws if unknown
  int day_index(std::string_view label) const;   // throws if unknown
  int num_periods() const { return static_cast<int>(days.size()) * kHoursPerDay; }
  const LineSegment& feeder_head() const;
  int feeder_head_index() const;
  LossFactor loss_factor(std::string_view segment_id) const;

  // Checks every structural and numeric invariant; throws ValidationError.
  void validate() const;

  bool operator==(const FeederNetwork&) const = default;
};

// Radial structure derived from a network. Segment and bus indices refer to
// positions in FeederNetwork::segments / ::buses.
struct Topology {
  int root_bus = -1;
  std::vector<int> depth;           // hop distance from the root, per bus
  std::vector<int> parent_segment;  // segment feeding each bus, -1 at root
  std::vector<int> from_bus;        // per segment
  std::vector<int> to_bus;          // per segment
  std::vector<std::vector<int>> child_segments;  // per bus
  std::vector<int> segment_order;   // root-to-leaf order of segments
  std::vector<int> bus_order;       // root-to-leaf order of buses

  // Segments on the path root -> bus, root side first.
  std::vector<int> path_to(int bus) const;
};

// Validates connectivity, radiality and orientation; throws ValidationError
// naming the offending bus or segment.
Topology analyze_topology(const FeederNetwork& net);

FeederNetwork load_feeder(const std::filesystem::path& path);
FeederNetwork parse_feeder(std::string_view json_text);
std::string serialize_feeder(const FeederNetwork& net);
void save_feeder(const FeederNetwork& net, const std::filesystem::path& path);

// Smallest hourly net load (load minus existing rooftop output) on one day.
double minimum_daily_load(const FeederNetwork& net, int day);
double minimum_daily_load(const FeederNetwork& net, std::string_view day_label);

// Community-solar size in force: the declared value, or the minimum daily load
// of the "average" day (first day when no such label exists).
double cs_total_capacity(const FeederNetwork& net);

double total_active_load(const FeederNetwork& net, int day, int hour);
double rooftop_output(const FeederNetwork& net, int day, int hour);
// Weighted annual energy of the feeder load, in kWh.
double annual_energy_kwh(const FeederNetwork& net);

}  // namespace gridxpand
