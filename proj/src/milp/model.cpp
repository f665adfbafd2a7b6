#include "gridxpand/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridxpand/network.hpp"

namespace gridxpand {

namespace {

std::string with_index(const std::string& family, const std::vector<int>& index) {
  std::string out = family + "[";
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(index[i]);
  }
  return out + "]";
}

}  // namespace

std::string Variable::name() const { return with_index(family, index); }

std::string LinConstraint::tag() const { return with_index(family, index); }

Sense LinConstraint::sense() const {
  if (lower == upper) return Sense::kEqual;
  if (std::isinf(lower)) return Sense::kLessEqual;
  if (std::isinf(upper)) return Sense::kGreaterEqual;
  return Sense::kRanged;
}

int MilpModel::add_variable(std::string family, std::vector<int> index, double lo, double hi,
                            VarType type) {
  if (lo > hi) throw ValidationError("variable " + with_index(family, index) + " has lo > hi");
  variables_.push_back({std::move(family), std::move(index), lo, hi, type});
  objective_.push_back(0.0);
  return static_cast<int>(variables_.size()) - 1;
}

int MilpModel::add_constraint(std::string family, std::vector<int> index, std::vector<Term> terms,
                              double lower, double upper) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  constraints_.push_back({std::move(merged), lower, upper, std::move(family), std::move(index)});
  return static_cast<int>(constraints_.size()) - 1;
}

void MilpModel::add_objective(int var, double cost) { objective_.at(var) += cost; }

int MilpModel::num_binaries() const {
  return static_cast<int>(std::count_if(variables_.begin(), variables_.end(),
                                        [](const Variable& v) { return v.type == VarType::kBinary; }));
}

void MilpModel::set_bounds(int var, double lo, double hi) {
  variables_.at(var).lo = lo;
  variables_.at(var).hi = hi;
}

std::map<std::string, int> MilpModel::constraint_counts() const {
  std::map<std::string, int> out;
  for (const auto& c : constraints_) ++out[c.family];
  return out;
}

std::map<std::string, int> MilpModel::variable_counts() const {
  std::map<std::string, int> out;
  for (const auto& v : variables_) ++out[v.family];
  return out;
}

double MilpModel::evaluate_objective(const std::vector<double>& x) const {
  double sum = 0;
  for (std::size_t j = 0; j < objective_.size(); ++j) sum += objective_[j] * x[j];
  return sum;
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max({worst, variables_[j].lo - x[j], x[j] - variables_[j].hi});
  }
  for (const auto& c : constraints_) {
    double row = 0;
    for (const auto& t : c.terms) row += t.coef * x[t.var];
    worst = std::max({worst, c.lower - row, row - c.upper});
  }
  return worst;
}

void MilpModel::validate() const {
  const int n = num_variables();
  for (const auto& v : variables_) {
    if (v.type == VarType::kBinary && (v.lo < 0 || v.hi > 1)) {
      throw ValidationError("binary " + v.name() + " has bounds outside [0, 1]");
    }
  }
  for (const auto& c : constraints_) {
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= n) throw ValidationError(c.tag() + " references an unknown variable");
      if (!std::isfinite(t.coef)) throw ValidationError(c.tag() + " has a non-finite coefficient");
    }
    if (c.lower > c.upper) throw ValidationError(c.tag() + " has lower > upper");
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective_[j])) {
      throw ValidationError("objective coefficient of " + variables_[j].name() + " is not finite");
    }
  }
}

}  // namespace gridxpand
