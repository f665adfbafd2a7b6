#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "gridxpand/solver.hpp"

namespace gridxpand {

namespace {

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string col_name(int j) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "X%07d", j + 1);
  return buf;
}

std::string row_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "R%07d", i + 1);
  return buf;
}

// Fixed-field layout: fields start at columns 2, 5, 15, 25, 40, 50. Values
// longer than 12 characters push later fields right; a separating space is
// always kept so whitespace-delimited readers see the same tokens.
std::string pad_to(std::string s, std::size_t col) {
  if (s.size() < col) s.resize(col, ' ');
  else s.push_back(' ');
  return s;
}

std::string record(const std::string& f1, const std::string& f2, const std::string& f3,
                   const std::string& f4, const std::string& f5 = {}, const std::string& f6 = {}) {
  std::string s = " " + f1;
  s = pad_to(s, 4) + f2;
  if (f3.empty()) return s;
  s = pad_to(s, 14) + f3;
  s = pad_to(s, 24) + f4;
  if (f5.empty()) return s;
  s = pad_to(s, 39) + f5;
  s = pad_to(s, 49) + f6;
  return s;
}

}  // namespace

void export_mps(const MilpModel& model, std::ostream& out, const std::string& name) {
  const auto& rows = model.constraints();
  const int n = model.num_variables();
  out << "NAME          " << name << "\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    const auto& c = rows[i];
    const char* type = "G";
    switch (c.sense()) {
      case Sense::kEqual: type = "E"; break;
      case Sense::kLessEqual: type = "L"; break;
      default: type = "G"; break;
    }
    if (std::isinf(c.lower) && std::isinf(c.upper)) type = "N";
    out << " " << type << "  " << row_name(i) << "\n";
  }

  std::vector<std::vector<std::pair<int, double>>> columns(n);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    for (const auto& t : rows[i].terms) columns[t.var].emplace_back(i, t.coef);
  }

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    const bool binary = model.variable(j).type == VarType::kBinary;
    if (binary != in_int) {
      char mname[16];
      std::snprintf(mname, sizeof mname, "MARKER%02d", marker++ % 100);
      out << record("", mname, "'MARKER'", binary ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = binary;
    }
    const std::string cname = col_name(j);
    const double cost = model.objective()[j];
    if (cost != 0.0 || columns[j].empty()) out << record("", cname, "COST", num(cost)) << "\n";
    for (const auto& [i, a] : columns[j]) out << record("", cname, row_name(i), num(a)) << "\n";
  }
  if (in_int) out << record("", "MARKER99", "'MARKER'", "'INTEND'") << "\n";

  out << "RHS\n";
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    const auto& c = rows[i];
    double rhs = 0;
    switch (c.sense()) {
      case Sense::kLessEqual: rhs = c.upper; break;
      case Sense::kEqual:
      case Sense::kGreaterEqual:
      case Sense::kRanged: rhs = c.lower; break;
    }
    if (std::isinf(c.lower) && std::isinf(c.upper)) continue;
    if (rhs != 0.0) out << record("", "RHS", row_name(i), num(rhs)) << "\n";
  }

  bool ranges_header = false;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    const auto& c = rows[i];
    if (c.sense() != Sense::kRanged) continue;
    if (!ranges_header) {
      out << "RANGES\n";
      ranges_header = true;
    }
    out << record("", "RNG", row_name(i), num(c.upper - c.lower)) << "\n";
  }

  out << "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const auto& v = model.variable(j);
    const std::string cname = col_name(j);
    if (v.type == VarType::kBinary && v.lo == 0 && v.hi == 1) {
      out << record("BV", "BND", cname, "") << "\n";
      continue;
    }
    if (v.lo == v.hi) {
      out << record("FX", "BND", cname, num(v.lo)) << "\n";
      continue;
    }
    if (std::isinf(v.lo) && std::isinf(v.hi)) {
      out << record("FR", "BND", cname, "") << "\n";
      continue;
    }
    if (std::isinf(v.lo)) out << record("MI", "BND", cname, "") << "\n";
    else if (v.lo != 0.0 || v.type == VarType::kBinary) out << record("LO", "BND", cname, num(v.lo)) << "\n";
    if (!std::isinf(v.hi)) out << record("UP", "BND", cname, num(v.hi)) << "\n";
    else if (v.type == VarType::kBinary) out << record("PL", "BND", cname, "") << "\n";
  }
  out << "ENDATA\n";
}

void export_mps(const MilpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  export_mps(model, out);
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

namespace {

double parse_num(const std::string& s, int line) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ParseError("MPS line " + std::to_string(line), "bad number '" + s + "'");
  }
  return v;
}

struct RowDef {
  char type = 'N';
  std::vector<Term> terms;
  double rhs = 0;
  bool has_range = false;
  double range = 0;
};

struct ColDef {
  bool integer = false;
  double lo = 0, hi = kInf;
  bool hi_set = false;
  double cost = 0;
};

}  // namespace

MilpModel import_mps(std::istream& in) {
  enum class Section { kNone, kName, kRows, kColumns, kRhs, kRanges, kBounds, kEnd };
  Section section = Section::kNone;
  std::string objective_row;
  std::unordered_map<std::string, int> row_index, col_index;
  std::vector<RowDef> rows;
  std::vector<ColDef> cols;
  bool integer_block = false;

  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("MPS line " + std::to_string(lineno), what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      const auto& h = tok[0];
      if (h == "NAME") section = Section::kName;
      else if (h == "ROWS") section = Section::kRows;
      else if (h == "COLUMNS") section = Section::kColumns;
      else if (h == "RHS") section = Section::kRhs;
      else if (h == "RANGES") section = Section::kRanges;
      else if (h == "BOUNDS") section = Section::kBounds;
      else if (h == "ENDATA") {
        section = Section::kEnd;
        break;
      } else fail("unknown section " + h);
      continue;
    }
    switch (section) {
      case Section::kRows: {
        if (tok.size() != 2) fail("expected row type and name");
        const char type = tok[0][0];
        if (type == 'N' && objective_row.empty()) {
          objective_row = tok[1];
          continue;
        }
        if (std::string("NELG").find(type) == std::string::npos) fail("bad row type");
        row_index[tok[1]] = static_cast<int>(rows.size());
        rows.push_back(RowDef{type, {}, 0, false, 0});
        break;
      }
      case Section::kColumns: {
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'") integer_block = true;
          else if (tok[2] == "'INTEND'") integer_block = false;
          else fail("bad marker");
          continue;
        }
        if (tok.size() != 3 && tok.size() != 5) fail("expected column entries");
        auto [it, inserted] = col_index.try_emplace(tok[0], static_cast<int>(cols.size()));
        if (inserted) {
          cols.push_back(ColDef{});
          cols.back().integer = integer_block;
        }
        const int j = it->second;
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double a = parse_num(tok[k + 1], lineno);
          if (tok[k] == objective_row) {
            cols[j].cost = a;
          } else {
            auto r = row_index.find(tok[k]);
            if (r == row_index.end()) fail("unknown row " + tok[k]);
            rows[r->second].terms.push_back({j, a});
          }
        }
        break;
      }
      case Section::kRhs:
      case Section::kRanges: {
        if (tok.size() != 3 && tok.size() != 5) fail("expected set name and entries");
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double a = parse_num(tok[k + 1], lineno);
          if (tok[k] == objective_row) continue;
          auto r = row_index.find(tok[k]);
          if (r == row_index.end()) fail("unknown row " + tok[k]);
          if (section == Section::kRhs) {
            rows[r->second].rhs = a;
          } else {
            rows[r->second].has_range = true;
            rows[r->second].range = a;
          }
        }
        break;
      }
      case Section::kBounds: {
        if (tok.size() < 3) fail("short bound record");
        const auto& type = tok[0];
        auto c = col_index.find(tok[2]);
        if (c == col_index.end()) fail("unknown column " + tok[2]);
        auto& col = cols[c->second];
        const bool needs_value = type == "UP" || type == "LO" || type == "FX";
        if (needs_value && tok.size() != 4) fail("bound needs a value");
        const double v = needs_value ? parse_num(tok[3], lineno) : 0.0;
        if (type == "UP") {
          col.hi = v;
          col.hi_set = true;
        } else if (type == "LO") col.lo = v;
        else if (type == "FX") {
          col.lo = col.hi = v;
          col.hi_set = true;
        } else if (type == "FR") {
          col.lo = -kInf;
          col.hi = kInf;
        } else if (type == "MI") col.lo = -kInf;
        else if (type == "PL") {
          col.hi = kInf;
          col.hi_set = true;
        } else if (type == "BV") {
          col.integer = true;
          col.lo = 0;
          col.hi = 1;
          col.hi_set = true;
        } else fail("unsupported bound type " + type);
        break;
      }
      default: fail("data outside a section");
    }
  }
  if (section != Section::kEnd) throw ParseError("MPS", "missing ENDATA");

  MilpModel model;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto& c = cols[j];
    // Integer columns without an explicit upper bound default to binary.
    if (c.integer && !c.hi_set) c.hi = 1;
    if (c.integer && (c.lo < 0 || c.hi > 1)) {
      throw ParseError("MPS", "general integer column X" + std::to_string(j + 1) + " not supported");
    }
    const int id = model.add_variable("mps_col", {static_cast<int>(j)}, c.lo, c.hi,
                                      c.integer ? VarType::kBinary : VarType::kContinuous);
    if (c.cost != 0.0) model.add_objective(id, c.cost);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double lo = -kInf, hi = kInf;
    switch (r.type) {
      case 'E':
        lo = hi = r.rhs;
        if (r.has_range) (r.range >= 0 ? hi : lo) = r.rhs + r.range;
        break;
      case 'L':
        hi = r.rhs;
        if (r.has_range) lo = r.rhs - std::abs(r.range);
        break;
      case 'G':
        lo = r.rhs;
        if (r.has_range) hi = r.rhs + std::abs(r.range);
        break;
      default: break;
    }
    model.add_constraint("mps_row", {static_cast<int>(i)}, r.terms, lo, hi);
  }
  return model;
}

MilpModel import_mps(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return import_mps(in);
}

}  // namespace gridxpand
