#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridxpand/milp.hpp"
#include "gridxpand/network.hpp"

namespace gridxpand {

// Thrown when the simplex engine cannot produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kGapLimit, kIterationLimit };
std::string_view to_string(SolveStatus s);

struct TracePoint {
  long node = 0;
  double incumbent = kInf;
  double bound = -kInf;
};

struct Solution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = kInf;
  std::vector<double> values;  // indexed like MilpModel::variables()
  double mip_gap = kInf;
  long node_count = 0;
  long lp_iterations = 0;
  double wall_time = 0;  // seconds
  std::vector<TracePoint> trace;  // one point per incumbent or bound change

  bool has_values() const { return !values.empty(); }
};

struct LpOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;  // relative to the largest cost magnitude
  long iteration_limit = 5'000'000;
  int refactor_interval = 100;
};

struct MilpOptions {
  double gap = 1e-4;
  long node_limit = 1'000'000;
  double integrality_tolerance = 1e-6;
  LpOptions lp;
};

// Solves the continuous relaxation.
Solution solve_lp(const MilpModel& model, const LpOptions& options = {});

// Best-bound branch-and-bound over the binaries. Branches on the most
// fractional binary, ties to the lowest index.
Solution solve_milp(const MilpModel& model, const MilpOptions& options = {});

// Exhaustive oracle: every assignment of the binaries that satisfies the
// rows containing only binaries, each completed by an LP. Exponential; meant
// for verification of small models.
Solution solve_by_enumeration(const MilpModel& model, const LpOptions& options = {});

// Fixed-field MPS with generated 8-character names (Xnnnnnnn, Rnnnnnnn).
void export_mps(const MilpModel& model, std::ostream& out, const std::string& name = "GRIDXPND");
void export_mps(const MilpModel& model, const std::filesystem::path& path);
MilpModel import_mps(std::istream& in);
MilpModel import_mps(const std::filesystem::path& path);

}  // namespace gridxpand
