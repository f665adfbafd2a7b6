#include <charconv>
#include <fstream>
#include <sstream>

#include "gridxpand/config.hpp"

namespace gridxpand {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ValidationError("config key " + key + ": cannot parse '" + v + "'");
  }
  return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key " + key + ": expected on/off, got '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    std::string line;
    for (char c : raw) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      line += c;
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError(where, "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& entries,
                  const std::filesystem::path& base_dir) {
  auto path = [&](const std::string& v) {
    std::filesystem::path p = v;
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  for (const auto& [full, v] : entries) {
    std::string k = full;
    if (k.rfind("run.", 0) == 0) k = k.substr(4);
    if (k == "feeder") cfg.feeder = path(v);
    else if (k == "costs") cfg.costs = path(v);
    else if (k == "region") cfg.region = v;
    else if (k == "scenario") cfg.scenario = v;
    else if (k == "cs") cfg.cs = parse_flag(full, v);
    else if (k == "siting") cfg.siting = v;
    else if (k == "seed") cfg.seed = parse_value<std::uint64_t>(full, v);
    else if (k == "out") cfg.out = path(v);
    else if (k == "trace") cfg.trace = path(v);
    else if (k == "solver.gap") cfg.gap = parse_value<double>(full, v);
    else if (k == "solver.node_limit") cfg.node_limit = parse_value<long>(full, v);
    else if (k == "scenario.step") cfg.scenario_step = parse_value<double>(full, v);
    else if (k == "scenario.max_iter") cfg.scenario_max_iter = parse_value<int>(full, v);
    else if (k == "screening.loading") cfg.loading_threshold = parse_value<double>(full, v);
    else if (k == "screening.voltage_margin") cfg.voltage_margin = parse_value<double>(full, v);
    else if (k == "loop.max_iterations") cfg.loop_max_iterations = parse_value<int>(full, v);
    else if (k == "fleet.manifest") cfg.manifest = path(v);
    else if (k == "fleet.threads") cfg.threads = parse_value<int>(full, v);
    else throw ValidationError("unknown config key '" + full + "'");
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_config(cfg, parse_config_text(buf.str()), path.parent_path());
  return cfg;
}

AssessOptions assess_options(const RunConfig& cfg) {
  if (cfg.gap < 0) throw ValidationError("solver.gap must be non-negative");
  if (cfg.node_limit < 1) throw ValidationError("solver.node_limit must be positive");
  AssessOptions o;
  o.scan.step = cfg.scenario_step;
  o.scan.max_iter = cfg.scenario_max_iter;
  o.loop.milp.gap = cfg.gap;
  o.loop.milp.node_limit = cfg.node_limit;
  o.loop.thresholds.loading = cfg.loading_threshold;
  o.loop.thresholds.voltage_margin = cfg.voltage_margin;
  o.loop.max_iterations = cfg.loop_max_iterations;
  return o;
}

}  // namespace gridxpand
