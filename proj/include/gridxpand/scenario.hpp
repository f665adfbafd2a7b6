#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridxpand/expansion.hpp"
#include "gridxpand/network.hpp"
#include "gridxpand/powerflow.hpp"
#include "gridxpand/solver.hpp"

namespace gridxpand {

enum class ScenarioLabel { kBase, kHighPV, kHighLoad };
std::string_view to_string(ScenarioLabel s);
ScenarioLabel parse_scenario_label(std::string_view s);  // base | highpv | highload

struct NetloadScenario {
  ScenarioLabel label = ScenarioLabel::kBase;
  double scale_factor = 1.0;
  bool preexisting_violation = false;  // scale 1 already violates
  bool scan_exhausted = false;         // max_iter steps without a violation
  FeederNetwork network;
};

struct ScanOptions {
  double step = 0.05;
  int max_iter = 200;
};

// Copy of `net` with loads (HighLoad) or rooftop capacity (HighPV) scaled.
FeederNetwork scale_network(const FeederNetwork& net, ScenarioLabel label, double factor);

// Base returns `net` unchanged. Otherwise scans factors 1 + k * step and
// keeps the last one without a screening violation.
NetloadScenario make_scenario(const FeederNetwork& net, ScenarioLabel label,
                              const ScanOptions& options = {});

// Extra community-solar injection seen by the screening flows.
struct CsInjection {
  std::string bus;
  double capacity_mw = 0;
};

// Power flow of one period with the feeder-head tap set the way an on-load
// tap changer would: the turns ratio that centres downstream voltages in
// their bands, clipped to the tap range. Other regulators stay neutral.
FlowResult screening_flow(const FeederNetwork& net, const Topology& topo, int day, int hour,
                          const std::optional<CsInjection>& cs = std::nullopt);

// Screening flows for every period, in period order (t = day * 24 + hour).
std::vector<FlowResult> screening_flows(const FeederNetwork& net,
                                        const std::optional<CsInjection>& cs = std::nullopt);

// Violations over all periods, de-duplicated per (element, kind) keeping the
// largest magnitude, sorted by element then kind.
std::vector<Violation> screening_violations(const FeederNetwork& net,
                                            const std::optional<CsInjection>& cs = std::nullopt);

struct ScreeningThresholds {
  double loading = 0.9;          // fraction of as-built capacity
  double voltage_margin = 0.01;  // pu from either voltage bound
};

// First bus below the feeder head, the median-depth bus and the deepest bus
// (ties to the smaller bus id), de-duplicated and sorted.
std::vector<std::string> site_buses(const FeederNetwork& net);
// The same three sites by role: 0 head, 1 middle, 2 end.
std::array<std::string, 3> site_roles(const FeederNetwork& net);

CandidateSet select_candidates(const FeederNetwork& net, const std::vector<FlowResult>& flows,
                               const ScreeningThresholds& thresholds = {});

// How the community-solar site is chosen.
struct Siting {
  enum class Kind { kFixed, kRandom, kOptimal } kind = Kind::kOptimal;
  std::string bus;  // kFixed: a bus id or head | middle | end
  std::uint64_t seed = 1;
};
Siting parse_siting(std::string_view s, std::uint64_t seed = 1);  // fixed:<bus> | random | optimal
std::string to_string(const Siting& s);
// Bus for fixed and random siting; empty for optimal.
std::string resolve_siting_bus(const FeederNetwork& net, const Siting& s);

struct LoopOptions {
  ScreeningThresholds thresholds;
  MilpOptions milp;
  int max_iterations = 25;
  double slack_tolerance_mwh = 1e-6;
  std::optional<double> cs_capacity;  // defaults to the base-network value
  std::ostream* trace = nullptr;      // JSON lines, one per iteration
};

enum class LoopStatus { kResolved, kUnresolved, kSolverFailure };
std::string_view to_string(LoopStatus s);

struct SlackEntry {
  std::string bus;
  int period = 0;
  double p = 0;  // MW, up minus down
  double q = 0;  // MVAr
};

struct LoopResult {
  LoopStatus status = LoopStatus::kSolverFailure;
  int iterations = 0;
  Solution solution;
  CandidateSet candidates;
  ExpansionModel model;
  ExpansionPlan plan;
  ReplayReport replay;
  std::string siting_bus;       // fixed/random bus, or the optimizer's choice
  std::vector<SlackEntry> residual_slack;  // unresolved runs
};

// Build options and the screening candidates of a loop's first iteration.
struct LoopSetup {
  BuildOptions build;
  CandidateSet candidates;
  std::string siting_bus;  // fixed/random siting
};
LoopSetup prepare_loop(const FeederNetwork& base, const NetloadScenario& scenario, bool with_cs,
                       const Siting& siting, const LoopOptions& options = {});

// Screening -> candidates -> MILP, growing the candidate set along the paths
// to buses that still need slack until slack vanishes or nothing changes.
// `seed` candidates are merged into the first iteration.
LoopResult expansion_loop(const FeederNetwork& base, const NetloadScenario& scenario, bool with_cs,
                          const Siting& siting, const LoopOptions& options = {},
                          const CandidateSet* seed = nullptr);

}  // namespace gridxpand
