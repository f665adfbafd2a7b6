#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridxpand/milp.hpp"
#include "gridxpand/network.hpp"
#include "gridxpand/powerflow.hpp"

namespace gridxpand {

// Elements offered to the optimizer. Lists hold ids, sorted and unique.
struct CandidateSet {
  std::vector<std::string> reconductor_segments;
  bool feeder_head_upgrade = false;
  std::vector<std::string> vr_sites;       // segment ids
  std::vector<std::string> storage_sites;  // bus ids
  std::vector<std::string> cs_sites;       // bus ids, same as storage_sites

  // Set inclusion on every component.
  bool contains(const CandidateSet& other) const;
  void merge(const CandidateSet& other);
  std::size_t size() const;

  bool operator==(const CandidateSet&) const = default;
};

enum class SitingMode { kFixed, kOptimal };

struct BuildOptions {
  bool with_cs = false;
  SitingMode siting = SitingMode::kOptimal;
  std::string fixed_bus;              // kFixed only
  std::optional<double> cs_capacity;  // defaults to cs_total_capacity(net)
};

enum class SegmentClass { kFixed, kCandidate, kFeederHead, kRegulator };

// Per-segment view of the optimization: how the segment is modelled and the
// variable indices attached to it (-1 when absent).
struct SegmentModel {
  SegmentClass cls = SegmentClass::kFixed;
  bool regulator_candidate = false;  // OLTC to be installed (carries a binary)
  std::vector<UpgradeOption> options;  // kCandidate: keep-as-is first
  double capacity_mva = 0;             // kFixed / kRegulator rating
  double install_cost = 0;             // regulator candidate, $/yr
  double tap_min = 1, tap_max = 1;
  std::vector<int> f_p, f_q, v_mid;    // per period
  std::vector<int> option_bin;         // kCandidate
  int capacity_var = -1;               // upgraded or transformer capacity
  int invest_bin = -1;                 // feeder-head upgrade or regulator install
};

struct StorageModel {
  std::string id;
  std::string bus;
  bool candidate = false;
  double p_in_max = 0, p_out_max = 0, duration_h = 0, efficiency = 1, reactive_fraction = 0;
  double annualized_cost = 0, invest_cap_mw = 0;
  int x_inv = -1, x_bin = -1;
  std::vector<int> soc0;  // per day
  std::vector<int> soc, p_in, p_out, q;  // per period
};

struct CsModel {
  std::string bus;
  int storage = -1;  // colocated candidate storage (index into storage)
  double invest_cap_mw = 0;
  DailyProfile profile;
  int x_inv = -1;
  std::vector<int> g, g_crt;  // per period
};

struct ExpansionModel {
  MilpModel model;
  CandidateSet candidates;
  BuildOptions options;
  double cs_capacity_mw = 0;
  std::vector<std::pair<int, int>> periods;  // (day, hour); t = day * 24 + hour
  std::vector<std::vector<int>> v;           // [bus][t]
  std::vector<int> p_subs, q_subs;           // [t]
  std::vector<std::vector<int>> p_slack_up, p_slack_down, q_slack_up, q_slack_down;  // [bus][t]
  std::vector<SegmentModel> segments;
  std::vector<int> rooftop_unit;             // index into net.solar_units
  std::vector<std::vector<int>> g_rooftop;   // [unit][t]
  std::vector<StorageModel> storage;
  std::vector<CsModel> cs;
};

// Builds the full least-cost expansion MILP. Throws ValidationError for
// candidates naming unknown elements or a CS size no site can host.
ExpansionModel build_expansion_model(const FeederNetwork& net, const CandidateSet& candidates,
                                     const BuildOptions& options);

// Big-M of the option voltage-drop band of a candidate segment.
double candidate_drop_big_m(const FeederNetwork& net, const LineSegment& seg,
                            const std::vector<UpgradeOption>& options);
// Big-M coupling v_mid and v_to of a candidate regulator.
double regulator_big_m(double vmax_to, double tap_min, double tap_max);

struct Investment {
  std::string asset;  // segment or storage id
  std::string type;   // reconductor_OH | reconductor_UG | feeder_head | VR | storage
  std::string detail; // chosen conductor, capacity or bus
  double size = 0;    // MVA or MW
  double annual_cost = 0;
};

struct ExpansionPlan {
  std::vector<Investment> investments;
  double investment_cost = 0;   // $/yr
  double curtailment_cost = 0;  // $/yr
  double slack_cost = 0;        // $/yr
  double total_slack_mwh = 0;   // unweighted sum over periods of |imbalance|
  double curtailed_mwh = 0;     // weighted annual
  double cs_available_mwh = 0;  // weighted annual
  std::string cs_bus;
  double cs_mw = 0;
};

ExpansionPlan extract_plan(const FeederNetwork& net, const ExpansionModel& em,
                           const std::vector<double>& x);

// Replays a MILP dispatch through the radial power flow with the chosen
// options and taps.
struct ReplayReport {
  double max_drop_residual = 0;     // pu^2, MILP values in the drop equations
  double max_balance_residual = 0;  // MW / MVAr, MILP values in nodal balance
  double max_flow_difference = 0;   // MW, MILP vs power flow
  double max_voltage_difference = 0;  // pu^2, MILP vs power flow
  double max_storage_cycle_residual = 0;  // MWh, per day sum(eta p_in - p_out)
  std::vector<Violation> violations;  // of the replayed power flow
};

ReplayReport replay_solution(const FeederNetwork& net, const ExpansionModel& em,
                             const std::vector<double>& x);

}  // namespace gridxpand
