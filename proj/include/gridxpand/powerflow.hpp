#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "gridxpand/network.hpp"

namespace gridxpand {

// Net injection at a bus: generation minus load.
struct Injection {
  double p = 0;  // MW
  double q = 0;  // MVAr
};

// Electrical state of a segment for one evaluation. Capacity and impedance
// change when a plan selects an upgrade; tap is the turns ratio phi with
// v_to = v_mid / phi^2 (1 on segments without a tap changer).
struct SegmentState {
  double resistance = 0;  // pu
  double reactance = 0;   // pu
  double capacity_mva = 0;
  double tap = 1.0;
};

struct OperatingPoint {
  int day = 0;
  int hour = 0;
  std::vector<Injection> injections;  // per bus; the root injection is ignored
  std::vector<SegmentState> segments;  // per segment
};

struct FlowResult {
  std::vector<double> f_p;        // MW, per segment, sending end
  std::vector<double> f_q;        // MVAr
  std::vector<double> v_squared;  // pu^2, per bus
  std::vector<double> v_mid;      // pu^2, per segment, before the tap
  std::vector<double> loading;    // fraction of capacity, per segment
  std::vector<double> losses;     // MW, per segment (zero in lossless mode)
  double substation_p = 0;        // MW drawn from the upstream grid
  double substation_q = 0;
  int iterations = 1;
};

enum class ViolationKind { kUndervoltage, kOvervoltage, kOverload };
std::string_view to_string(ViolationKind k);

struct Violation {
  std::string element;  // bus id or segment id
  ViolationKind kind = ViolationKind::kOverload;
  double magnitude = 0;  // pu voltage distance, or loading - 1
  bool operator==(const Violation&) const = default;
};

// Segment parameters as built today, all taps neutral.
std::vector<SegmentState> as_built(const FeederNetwork& net);

// Loads and rooftop output at (day, hour), as-built segments, neutral taps.
OperatingPoint operating_point(const FeederNetwork& net, int day, int hour);

struct LossOptions {
  bool enabled = false;
  double tolerance_pu = 1e-6;  // max change of any flow between iterations
  int max_iterations = 20;
};

// Radial LinDistFlow: flows aggregate downstream injections, voltages follow
// v_mid = v_fr - 2 (R P + X Q) / base, v_to = v_mid / tap^2, from v_ref^2 at
// the root. With losses enabled, I^2 R losses are added to upstream flows
// by fixed-point iteration.
FlowResult solve_lindistflow(const FeederNetwork& net, const Topology& topo,
                             const OperatingPoint& op, const LossOptions& losses = {});
FlowResult solve_lindistflow(const FeederNetwork& net, const OperatingPoint& op,
                             const LossOptions& losses = {});

// Smallest capacity F for which (p, q) satisfies all eight polygon cuts.
double octagon_norm(double p, double q);

// Polygon cut k in {1..4}: q <= slope * p + intercept_factor * F.
struct OctagonCut {
  double slope = 0;             // cot((1/2 - e) pi / 4)
  double intercept_factor = 0;  // sin(e pi / 4) - slope * cos(e pi / 4)
};
std::array<OctagonCut, 4> octagon_cuts();

std::vector<Violation> check_violations(const FlowResult& res, const FeederNetwork& net,
                                        double tolerance = 1e-9);

// Tap rules for screening: at peak load the feeder-head tap boosts voltage
// (tap_min), at maximum solar it bucks (tap_max). Regulators stay neutral.
enum class Screening { kPeakLoad, kMaxSolar };
void apply_screening_taps(const FeederNetwork& net, Screening mode, OperatingPoint& op);

// beta_l = 2 * loss_l / system net load at the peak hour of the peak-load day,
// from a loss-refined base flow. Zero where the net load is not positive.
std::map<std::string, LossFactor> compute_loss_factors(const FeederNetwork& net);

}  // namespace gridxpand
