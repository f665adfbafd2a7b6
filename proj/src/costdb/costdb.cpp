#include "gridxpand/costdb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gridxpand {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;

  int column(const std::string& name, const std::string& where) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw ParseError(where, "missing column '" + name + "'");
  }
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Reads a CSV file made of "[section]" blocks, each followed by a header row.
// A file without section markers is returned as a single "" section.
std::map<std::string, CsvTable> read_sections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open cost file " + path.string());
  std::map<std::string, CsvTable> out;
  std::string section;
  std::string line;
  int line_no = 0;
  bool expect_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (out.count(section)) {
        throw ParseError(path.filename().string() + " line " + std::to_string(line_no),
                         "duplicate section [" + section + "]");
      }
      out[section];
      expect_header = true;
      continue;
    }
    auto cells = split_csv(line);
    auto& table = out[section];
    if (expect_header) {
      table.header = std::move(cells);
      expect_header = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(path.filename().string() + " line " + std::to_string(line_no),
                       "expected " + std::to_string(table.header.size()) + " fields, got " +
                           std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.row_lines.push_back(line_no);
  }
  return out;
}

double to_number(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where, "expected a number, got '" + cell + "'");
  }
}

const CsvTable& section(const std::map<std::string, CsvTable>& sections, const std::string& name,
                        const std::filesystem::path& path) {
  auto it = sections.find(name);
  if (it == sections.end() || it->second.rows.empty()) {
    throw ParseError(path.filename().string(), "missing section [" + name + "]");
  }
  return it->second;
}

std::string where(const std::filesystem::path& path, const CsvTable& t, std::size_t row) {
  return path.filename().string() + " line " + std::to_string(t.row_lines[row]);
}

}  // namespace

Region parse_region(std::string_view s) {
  if (s == "CA") return Region::kCalifornia;
  if (s == "nonCA") return Region::kOther;
  throw ValidationError("unknown region '" + std::string(s) + "' (expected CA or nonCA)");
}

std::string_view to_string(Region r) { return r == Region::kCalifornia ? "CA" : "nonCA"; }

double annualize(double capital, double lifetime_yr, double rate) {
  if (!(lifetime_yr > 0)) throw ValidationError("annualize: lifetime must be positive");
  if (rate < 0) throw ValidationError("annualize: rate must be non-negative");
  if (rate == 0) return capital / lifetime_yr;
  return capital * rate / (1.0 - std::pow(1.0 + rate, -lifetime_yr));
}

double ampacity_to_mva(double ampacity_a, double kv_ll) {
  return std::sqrt(3.0) * kv_ll * ampacity_a / 1000.0;
}

void CostDatabase::validate() const {
  for (std::size_t i = 0; i < transformers.size(); ++i) {
    const auto& t = transformers[i];
    if (t.capital_k < 0 || !(t.lifetime_yr > 0) || !(t.capacity_mva > 0)) {
      throw ValidationError("transformer " + t.label + ": invalid cost, capacity or lifetime");
    }
    if (i > 0 && !(transformers[i - 1].capacity_mva < t.capacity_mva)) {
      throw ValidationError("transformers must be sorted by strictly increasing capacity");
    }
  }
  for (const auto& c : conductors) {
    if (c.cost_k_per_mile < 0 || !(c.ampacity_a > 0) || c.r_ohm_per_mile < 0 ||
        c.x_ohm_per_mile < 0) {
      throw ValidationError("conductor " + c.label + ": invalid cost or electrical data");
    }
  }
  if (regulator.ca_k < 0 || regulator.non_ca_k < 0 || !(regulator.lifetime_yr > 0)) {
    throw ValidationError("voltage regulator costs must be non-negative with positive lifetime");
  }
  if (bess.cost_per_kw < 0 || !(bess.duration_h > 0) || !(bess.lifetime_yr > 0)) {
    throw ValidationError("BESS cost must be non-negative with positive duration and lifetime");
  }
  if (!(reconductor_lifetime_yr > 0)) throw ValidationError("reconductoring lifetime must be positive");
  if (discount_rate < 0) throw ValidationError("discount rate must be non-negative");
}

std::vector<ConductorCost> CostDatabase::conductors_for(Region region, Placement placement) const {
  std::vector<ConductorCost> out;
  for (const auto& c : conductors) {
    if (c.region == region && c.placement == placement) out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.ampacity_a < b.ampacity_a; });
  return out;
}

const ConductorCost* CostDatabase::find_conductor(std::string_view label, Region region,
                                                  Placement placement) const {
  for (const auto& c : conductors) {
    if (c.label == label && c.region == region && c.placement == placement) return &c;
  }
  return nullptr;
}

double CostDatabase::regulator_annual_cost(Region region) const {
  const double k = region == Region::kCalifornia ? regulator.ca_k : regulator.non_ca_k;
  return annualize(k * 1000.0, regulator.lifetime_yr, discount_rate);
}

double CostDatabase::bess_annual_cost_per_mw() const {
  return annualize(bess.cost_per_kw * 1000.0, bess.lifetime_yr, discount_rate);
}

std::optional<TransformerCost> CostDatabase::next_transformer(double capacity_mva) const {
  for (const auto& t : transformers) {
    if (t.capacity_mva > capacity_mva) return t;
  }
  return std::nullopt;
}

CostDatabase load_cost_database(const std::filesystem::path& costs_csv,
                                const std::filesystem::path& conductors_csv) {
  CostDatabase db;
  const auto sections = read_sections(costs_csv);

  const auto& tr = section(sections, "transformers", costs_csv);
  {
    const std::string w = costs_csv.filename().string() + " [transformers]";
    const int label = tr.column("label", w), cost = tr.column("capital_k", w),
              cap = tr.column("capacity_mva", w), life = tr.column("lifetime_yr", w);
    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
      const auto& r = tr.rows[i];
      const auto at = where(costs_csv, tr, i);
      db.transformers.push_back(
          {r[label], to_number(r[cost], at), to_number(r[cap], at), to_number(r[life], at)});
    }
  }

  const auto& vr = section(sections, "voltage_regulator", costs_csv);
  {
    const std::string w = costs_csv.filename().string() + " [voltage_regulator]";
    const int region = vr.column("region", w), cost = vr.column("capital_k", w),
              life = vr.column("lifetime_yr", w);
    for (std::size_t i = 0; i < vr.rows.size(); ++i) {
      const auto& r = vr.rows[i];
      const auto at = where(costs_csv, vr, i);
      if (parse_region(r[region]) == Region::kCalifornia) {
        db.regulator.ca_k = to_number(r[cost], at);
      } else {
        db.regulator.non_ca_k = to_number(r[cost], at);
      }
      db.regulator.lifetime_yr = to_number(r[life], at);
    }
  }

  const auto& bess = section(sections, "bess", costs_csv);
  {
    const std::string w = costs_csv.filename().string() + " [bess]";
    const auto& r = bess.rows.front();
    const auto at = where(costs_csv, bess, 0);
    db.bess.cost_per_kw = to_number(r[bess.column("cost_per_kw", w)], at);
    db.bess.duration_h = to_number(r[bess.column("duration_h", w)], at);
    db.bess.lifetime_yr = to_number(r[bess.column("lifetime_yr", w)], at);
  }

  const auto& rec = section(sections, "reconductoring", costs_csv);
  db.reconductor_lifetime_yr =
      to_number(rec.rows.front()[rec.column("lifetime_yr", "[reconductoring]")], where(costs_csv, rec, 0));

  const auto& fin = section(sections, "finance", costs_csv);
  db.discount_rate =
      to_number(fin.rows.front()[fin.column("discount_rate", "[finance]")], where(costs_csv, fin, 0));

  // conductors.csv: one row per conductor, one cost column per region/placement.
  const auto cond_sections = read_sections(conductors_csv);
  const auto& ct = section(cond_sections, "", conductors_csv);
  const std::string w = conductors_csv.filename().string();
  const int label = ct.column("label", w), amp = ct.column("ampacity_a", w),
            rr = ct.column("r_ohm_per_mile", w), xx = ct.column("x_ohm_per_mile", w);
  const std::pair<const char*, Region> regions[] = {{"CA", Region::kCalifornia},
                                                    {"nonCA", Region::kOther}};
  const std::pair<const char*, Placement> placements[] = {{"R-OH", Placement::kRuralOverhead},
                                                          {"U-OH", Placement::kUrbanOverhead},
                                                          {"U-UG", Placement::kUrbanUnderground}};
  for (std::size_t i = 0; i < ct.rows.size(); ++i) {
    const auto& r = ct.rows[i];
    const auto at = where(conductors_csv, ct, i);
    for (const auto& [rname, region] : regions) {
      for (const auto& [pname, placement] : placements) {
        const int col = ct.column(std::string(rname) + "_" + pname, w);
        db.conductors.push_back({r[label], region, placement, to_number(r[col], at),
                                 to_number(r[amp], at), to_number(r[rr], at), to_number(r[xx], at)});
      }
    }
  }

  db.validate();
  return db;
}

CostDatabase load_cost_directory(const std::filesystem::path& dir) {
  return load_cost_database(dir / "costs.csv", dir / "conductors.csv");
}

std::vector<UpgradeOption> upgrade_options_for(const LineSegment& segment, const CostDatabase& db,
                                               Region region, double base_mva) {
  std::vector<UpgradeOption> options;
  options.push_back({"keep", segment.capacity_mva(), segment.resistance, segment.reactance, 0.0});
  if (!segment.conductor) return options;

  const auto& info = *segment.conductor;
  double current_amps = segment.capacity_mva() * 1000.0 / (std::sqrt(3.0) * info.kv_ll);
  if (const auto* now = db.find_conductor(info.label, region, info.placement)) {
    current_amps = now->ampacity_a;
  }
  const double z_base = info.kv_ll * info.kv_ll / base_mva;
  for (const auto& c : db.conductors_for(region, info.placement)) {
    if (!(c.ampacity_a > current_amps)) continue;
    const double capacity = ampacity_to_mva(c.ampacity_a, info.kv_ll);
    const double capital = c.cost_k_per_mile * 1000.0 * info.length_mi;
    const double annual = annualize(capital, db.reconductor_lifetime_yr, db.discount_rate);
    options.push_back({c.label, capacity, c.r_ohm_per_mile * info.length_mi / z_base,
                       c.x_ohm_per_mile * info.length_mi / z_base, annual / capacity});
  }
  return options;
}

void apply_cost_defaults(FeederNetwork& net, const CostDatabase& db, Region region) {
  for (auto& seg : net.segments) {
    if (auto* line = std::get_if<FixedLine>(&seg.kind)) {
      if (line->upgrades.empty() && seg.conductor) {
        auto options = upgrade_options_for(seg, db, region, net.base_mva);
        line->upgrades.assign(options.begin() + 1, options.end());
      }
    } else if (auto* head = std::get_if<FeederHead>(&seg.kind)) {
      if (head->upgrade_capacity_mva == 0) {
        if (auto next = db.next_transformer(head->base_capacity_mva)) {
          head->upgrade_capacity_mva = next->capacity_mva - head->base_capacity_mva;
          head->upgrade_cost = annualize(next->capital_k * 1000.0, next->lifetime_yr, db.discount_rate);
        }
      }
    }
  }
  if (!net.storage_template) {
    StorageUnit t;
    t.status = StorageStatus::kCandidate;
    t.p_in_max = 1.0;
    t.p_out_max = 1.0;
    t.duration_h = db.bess.duration_h;
    t.annualized_cost = db.bess_annual_cost_per_mw();
    t.invest_cap_mw = std::max(1.0, cs_total_capacity(net));
    net.storage_template = t;
  }
  if (!net.regulator_template) {
    net.regulator_template = RegulatorTemplate{db.regulator_annual_cost(region), 0.9, 1.1};
  }
}

}  // namespace gridxpand
