#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace gridxpand {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { kContinuous, kBinary };

struct Variable {
  std::string family;
  std::vector<int> index;
  double lo = 0;
  double hi = kInf;
  VarType type = VarType::kContinuous;

  // "family[i,j,...]"
  std::string name() const;
};

struct Term {
  int var = 0;
  double coef = 0;
};

enum class Sense { kLessEqual, kEqual, kGreaterEqual, kRanged };

// lower <= sum(coef * x) <= upper; either side may be infinite.
struct LinConstraint {
  std::vector<Term> terms;  // sorted by variable, no duplicates
  double lower = -kInf;
  double upper = kInf;
  std::string family;
  std::vector<int> index;

  Sense sense() const;
  std::string tag() const;
};

class MilpModel {
 public:
  int add_variable(std::string family, std::vector<int> index, double lo, double hi,
                   VarType type = VarType::kContinuous);
  int add_binary(std::string family, std::vector<int> index) {
    return add_variable(std::move(family), std::move(index), 0, 1, VarType::kBinary);
  }
  // Merges repeated variables and drops exact zeros.
  int add_constraint(std::string family, std::vector<int> index, std::vector<Term> terms,
                     double lower, double upper);
  void add_objective(int var, double cost);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  int num_binaries() const;
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<LinConstraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }
  const Variable& variable(int j) const { return variables_[j]; }
  const LinConstraint& constraint(int i) const { return constraints_[i]; }

  // Bound edits used by branch-and-bound and siting modes.
  void set_bounds(int var, double lo, double hi);

  // Row counts per constraint family.
  std::map<std::string, int> constraint_counts() const;
  // Variable counts per variable family.
  std::map<std::string, int> variable_counts() const;

  double evaluate_objective(const std::vector<double>& x) const;
  // Largest bound or row violation, absolute.
  double max_violation(const std::vector<double>& x) const;

  // Throws if a term references an undeclared variable, a coefficient or
  // objective entry is not finite, or a binary has bounds outside [0, 1].
  void validate() const;

 private:
  std::vector<Variable> variables_;
  std::vector<LinConstraint> constraints_;
  std::vector<double> objective_;
};

}  // namespace gridxpand
