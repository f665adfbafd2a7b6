#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gridxpand/scenario.hpp"

namespace gridxpand {

enum class CostClass { kNegative, kZero, kPositive };
std::string_view to_string(CostClass c);

// |c_itgr| below this is reported as zero, $/yr.
inline constexpr double kZeroCostTolerance = 1.0;

struct TypeDelta {
  double added = 0;     // $/yr present with CS only
  double replaced = 0;  // $/yr present without CS only
};

// Asset types in report order.
inline const std::vector<std::string> kAssetTypes = {"reconductor_OH", "reconductor_UG", "feeder_head",
                                                     "VR", "storage"};

struct AssessmentReport {
  std::string feeder;
  std::string scenario;
  double scale_factor = 1;
  bool resolved = false;  // both runs drove slack to zero
  std::string status;     // resolved | unresolved | solver_failure
  double c_with_cs = 0;   // annualized investment, $/yr
  double c_without_cs = 0;
  double c_itgr = 0;
  CostClass classification = CostClass::kZero;
  std::map<std::string, TypeDelta> breakdown;  // keyed by asset type
  double cs_capacity_mw = 0;
  double annual_energy_kwh = 0;
  double cost_per_kw = 0;   // $/kW of CS
  double cost_per_kwh = 0;  // cents per kWh of annual feeder energy
  double curtailed_fraction = 0;  // downsizing proxy
  double curtailment_cost_with = 0, curtailment_cost_without = 0;  // $/yr
  double slack_mwh_with = 0, slack_mwh_without = 0;
  std::string siting_mode;
  std::string siting_bus;
  int iterations_with = 0, iterations_without = 0;
  std::vector<Investment> investments_with, investments_without;
  CandidateSet candidates_with;  // final candidate set of the with-CS run
};

// Difference of annualized investment costs.
double incremental_cost(const ExpansionPlan& with_cs, const ExpansionPlan& without_cs);
CostClass classify(double c_itgr, double tolerance = kZeroCostTolerance);

// Per asset, the positive part of (with - without) is new investment and the
// negative part is replaced investment, summed per type. Every type in
// kAssetTypes is present.
std::map<std::string, TypeDelta> breakdown(const ExpansionPlan& with_cs, const ExpansionPlan& without_cs);

// Fills cost_per_kw and cost_per_kwh from c_itgr, cs_capacity_mw and the
// network's weighted annual energy.
void normalize(AssessmentReport& report, const FeederNetwork& net);

// Downsizing proxy: weighted annual curtailed CS energy over weighted annual
// available CS energy; 0 without CS output.
double downsizing_metric(const ExpansionPlan& plan);

struct AssessOptions {
  ScanOptions scan;
  LoopOptions loop;
};

// Builds the scenario, runs the loop without and with community solar and
// aggregates. `seed` is merged into the with-CS candidate set.
AssessmentReport assess(const FeederNetwork& net, ScenarioLabel label, const Siting& siting,
                        const AssessOptions& options = {}, const CandidateSet* seed = nullptr);

// Same, reusing a finished without-CS run of the same scenario.
AssessmentReport assess_with_baseline(const FeederNetwork& net, const NetloadScenario& scenario,
                                      const LoopResult& without_cs, const Siting& siting,
                                      const AssessOptions& options, const CandidateSet* seed = nullptr);

struct SitingRow {
  std::string mode;  // fixed-head | fixed-middle | fixed-end | random | optimal
  AssessmentReport report;
};

// One assessment per siting mode, sharing the without-CS run. The optimal run
// is offered the union of the fixed modes' candidate sets.
std::vector<SitingRow> compare_siting(const FeederNetwork& net, ScenarioLabel label,
                                      const AssessOptions& options = {}, std::uint64_t seed = 1);

// ---- reports --------------------------------------------------------------

std::string report_json(const AssessmentReport& r);
void write_report_json(const AssessmentReport& r, const std::filesystem::path& path);

// One header line plus one line per report.
std::string csv_header();
std::string csv_row(const AssessmentReport& r);

// Shortest decimal that reads back to the same double.
std::string format_number(double v);

// ---- fleet ----------------------------------------------------------------

struct FleetOptions {
  AssessOptions assess;
  std::vector<ScenarioLabel> scenarios = {ScenarioLabel::kBase, ScenarioLabel::kHighPV,
                                          ScenarioLabel::kHighLoad};
  Siting siting;
  int threads = 0;  // 0: GRIDXPAND_THREADS or hardware concurrency
  // Optional cost database applied to every feeder before the runs.
  std::filesystem::path costs_dir;
  std::string region;  // empty: each feeder's own
};

struct FleetRun {
  std::string feeder_path;
  ScenarioLabel scenario = ScenarioLabel::kBase;
  bool ok = false;
  std::string error;
  AssessmentReport report;
};

// Feeder paths, one per line; blank lines and '#' comments skipped. Relative
// paths resolve against the manifest's directory.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest);

// Runs feeder x scenario jobs concurrently. Results are in manifest order,
// then scenario order, independent of scheduling.
std::vector<FleetRun> run_fleet(const std::vector<std::filesystem::path>& feeders, const FleetOptions& options);

// Rows for every run; failed runs keep their error text.
std::string fleet_csv(const std::vector<FleetRun>& runs);
// Histogram counts of $/kW, cents/kWh and curtailed fraction per scenario.
std::string fleet_histograms_csv(const std::vector<FleetRun>& runs);

int fleet_thread_count(int requested);

}  // namespace gridxpand
