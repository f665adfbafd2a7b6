#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridxpand/assessment.hpp"
#include "gridxpand/config.hpp"
#include "gridxpand/costdb.hpp"
#include "json.hpp"

using namespace gridxpand;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Raw flag values; only the ones given on the command line override the config.
struct Flags {
  std::string config, feeder, costs, region, scenario, cs, siting, out, trace, manifest;
  double gap = 0, step = 0;
  long node_limit = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string day;
  int hour = -1;
  bool losses = false, screening = false, solve = false;
};

struct Options {
  CLI::Option* feeder = nullptr;
  CLI::Option* costs = nullptr;
  CLI::Option* region = nullptr;
  CLI::Option* scenario = nullptr;
  CLI::Option* cs = nullptr;
  CLI::Option* siting = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* trace = nullptr;
  CLI::Option* manifest = nullptr;
  CLI::Option* gap = nullptr;
  CLI::Option* node_limit = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* step = nullptr;
};

bool given(const CLI::Option* o) { return o && o->count() > 0; }

RunConfig merge(const Flags& f, const Options& o, const std::string& config_path) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (given(o.feeder)) cfg.feeder = f.feeder;
  if (given(o.costs)) cfg.costs = f.costs;
  if (given(o.region)) cfg.region = f.region;
  if (given(o.scenario)) cfg.scenario = f.scenario;
  if (given(o.cs)) cfg.cs = f.cs == "on";
  if (given(o.siting)) cfg.siting = f.siting;
  if (given(o.out)) cfg.out = f.out;
  if (given(o.trace)) cfg.trace = f.trace;
  if (given(o.manifest)) cfg.manifest = f.manifest;
  if (given(o.gap)) cfg.gap = f.gap;
  if (given(o.node_limit)) cfg.node_limit = f.node_limit;
  if (given(o.seed)) cfg.seed = f.seed;
  if (given(o.threads)) cfg.threads = f.threads;
  if (given(o.step)) cfg.scenario_step = f.step;
  return cfg;
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw CLI::ValidationError(std::string(what) + " is required");
  if (!std::filesystem::exists(p)) throw Error(std::string(what) + " not found: " + p.string());
}

FeederNetwork load_network(const RunConfig& cfg) {
  require_file(cfg.feeder, "feeder");
  FeederNetwork net = load_feeder(cfg.feeder);
  if (!cfg.costs.empty()) {
    if (!std::filesystem::is_directory(cfg.costs)) throw Error("cost directory not found: " + cfg.costs.string());
    const auto db = load_cost_directory(cfg.costs);
    apply_cost_defaults(net, db, parse_region(cfg.region.empty() ? net.region : cfg.region));
  }
  if (net.name.empty()) net.name = cfg.feeder.stem().string();
  return net;
}

// Writes to --out when given, standard output otherwise.
void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw Error("cannot write " + cfg.out.string());
  out << text;
  if (!out) throw Error("write failed for " + cfg.out.string());
}

std::unique_ptr<std::ofstream> open_trace(const RunConfig& cfg) {
  if (cfg.trace.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(cfg.trace, std::ios::binary);
  if (!*f) throw Error("cannot write " + cfg.trace.string());
  return f;
}

nlohmann::ordered_json investments_json(const std::vector<Investment>& list) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& i : list) {
    arr.push_back({{"asset", i.asset}, {"type", i.type}, {"detail", i.detail}, {"size", i.size},
                   {"annual_cost", i.annual_cost}});
  }
  return arr;
}

int cmd_validate(const RunConfig& cfg) {
  const auto net = load_network(cfg);
  net.validate();
  const auto topo = analyze_topology(net);
  int depth = 0;
  for (int d : topo.depth) depth = std::max(depth, d);
  std::ostringstream s;
  s << "feeder " << net.name << ": " << net.buses.size() << " buses, " << net.segments.size() << " segments, "
    << net.days.size() << " days, " << net.storage_units.size() << " storage units, " << net.solar_units.size()
    << " solar units, depth " << depth << ", cs capacity " << format_number(cs_total_capacity(net)) << " MW\n";
  std::cout << s.str();
  return 0;
}

int cmd_pf(const RunConfig& cfg, const Flags& f) {
  const auto net = load_network(cfg);
  const auto topo = analyze_topology(net);
  if (!f.day.empty()) net.day_index(f.day);
  std::ostringstream s;
  s << "day,hour,kind,id,p_mw,q_mvar,v_pu,loading\n";
  for (int d = 0; d < static_cast<int>(net.days.size()); ++d) {
    if (!f.day.empty() && net.days[d].label != f.day) continue;
    for (int h = 0; h < kHoursPerDay; ++h) {
      if (f.hour >= 0 && f.hour != h) continue;
      FlowResult res;
      if (f.screening) {
        res = screening_flow(net, topo, d, h);
      } else {
        LossOptions lo;
        lo.enabled = f.losses;
        res = solve_lindistflow(net, topo, operating_point(net, d, h), lo);
      }
      for (std::size_t b = 0; b < net.buses.size(); ++b) {
        s << net.days[d].label << "," << h << ",bus," << net.buses[b].id << ",,,"
          << format_number(std::sqrt(std::max(0.0, res.v_squared[b]))) << ",\n";
      }
      for (std::size_t k = 0; k < net.segments.size(); ++k) {
        s << net.days[d].label << "," << h << ",segment," << net.segments[k].id << "," << format_number(res.f_p[k])
          << "," << format_number(res.f_q[k]) << ",," << format_number(res.loading[k]) << "\n";
      }
    }
  }
  emit(cfg, s.str());
  return 0;
}

int cmd_scenario(const RunConfig& cfg) {
  const auto net = load_network(cfg);
  const auto opts = assess_options(cfg);
  const auto sc = make_scenario(net, parse_scenario_label(cfg.scenario), opts.scan);
  nlohmann::ordered_json j = {{"feeder", net.name},
                              {"scenario", to_string(sc.label)},
                              {"scale_factor", sc.scale_factor},
                              {"preexisting_violation", sc.preexisting_violation},
                              {"scan_exhausted", sc.scan_exhausted}};
  if (!cfg.out.empty()) {
    save_feeder(sc.network, cfg.out);
    j["network"] = cfg.out.string();
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_plan(const RunConfig& cfg) {
  const auto net = load_network(cfg);
  auto opts = assess_options(cfg);
  const auto trace = open_trace(cfg);
  opts.loop.trace = trace.get();
  const auto sc = make_scenario(net, parse_scenario_label(cfg.scenario), opts.scan);
  const auto siting = parse_siting(cfg.siting, cfg.seed);
  const auto r = expansion_loop(net, sc, cfg.cs, siting, opts.loop);

  nlohmann::ordered_json j;
  j["feeder"] = net.name;
  j["scenario"] = to_string(sc.label);
  j["scale_factor"] = sc.scale_factor;
  j["with_cs"] = cfg.cs;
  j["siting"] = {{"mode", to_string(siting)}, {"bus", r.siting_bus}};
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["solver"] = {{"status", to_string(r.solution.status)},
                 {"objective", r.solution.objective},
                 {"mip_gap", r.solution.mip_gap},
                 {"nodes", r.solution.node_count}};
  j["investment_cost"] = r.plan.investment_cost;
  j["curtailment_cost"] = r.plan.curtailment_cost;
  j["slack_cost"] = r.plan.slack_cost;
  j["slack_mwh"] = r.plan.total_slack_mwh;
  j["cs"] = {{"bus", r.plan.cs_bus}, {"mw", r.plan.cs_mw}, {"curtailed_mwh", r.plan.curtailed_mwh},
             {"available_mwh", r.plan.cs_available_mwh}};
  j["investments"] = investments_json(r.plan.investments);
  j["candidates"] = {{"reconductor", r.candidates.reconductor_segments},
                     {"feeder_head", r.candidates.feeder_head_upgrade},
                     {"vr", r.candidates.vr_sites},
                     {"storage_sites", r.candidates.storage_sites},
                     {"cs_sites", r.candidates.cs_sites}};
  j["replay"] = {{"max_drop_residual", r.replay.max_drop_residual},
                 {"max_balance_residual", r.replay.max_balance_residual},
                 {"max_flow_difference", r.replay.max_flow_difference},
                 {"max_voltage_difference", r.replay.max_voltage_difference},
                 {"max_storage_cycle_residual", r.replay.max_storage_cycle_residual},
                 {"violations", r.replay.violations.size()}};
  auto slack = nlohmann::ordered_json::array();
  for (const auto& e : r.residual_slack) slack.push_back({{"bus", e.bus}, {"period", e.period}, {"p", e.p}, {"q", e.q}});
  j["residual_slack"] = slack;
  emit(cfg, j.dump(2) + "\n");
  if (r.status != LoopStatus::kResolved) {
    std::cerr << "plan " << to_string(r.status) << ": " << format_number(r.plan.total_slack_mwh)
              << " MWh of slack remain\n";
    return kExitDomain;
  }
  return 0;
}

int cmd_assess(const RunConfig& cfg) {
  const auto net = load_network(cfg);
  auto opts = assess_options(cfg);
  const auto trace = open_trace(cfg);
  opts.loop.trace = trace.get();
  const auto label = parse_scenario_label(cfg.scenario);
  const bool csv = cfg.out.extension() == ".csv";

  std::vector<AssessmentReport> reports;
  std::vector<std::string> modes;
  if (cfg.siting == "compare") {
    for (auto& row : compare_siting(net, label, opts, cfg.seed)) {
      modes.push_back(row.mode);
      reports.push_back(std::move(row.report));
    }
  } else {
    reports.push_back(assess(net, label, parse_siting(cfg.siting, cfg.seed), opts));
  }

  std::string text;
  if (csv) {
    text = csv_header() + "\n";
    for (const auto& r : reports) text += csv_row(r) + "\n";
  } else if (reports.size() == 1) {
    text = report_json(reports.front());
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      arr.push_back({{"mode", modes[i]}, {"report", nlohmann::ordered_json::parse(report_json(reports[i]))}});
    }
    text = arr.dump(2) + "\n";
  }
  emit(cfg, text);
  for (const auto& r : reports) {
    if (!r.resolved) {
      std::cerr << "assessment " << r.status << " (" << r.siting_mode << ")\n";
      return kExitDomain;
    }
  }
  return 0;
}

int cmd_fleet(const RunConfig& cfg) {
  require_file(cfg.manifest, "manifest");
  const auto feeders = read_manifest(cfg.manifest);
  for (const auto& f : feeders) require_file(f, "feeder");
  FleetOptions opt;
  opt.assess = assess_options(cfg);
  opt.siting = parse_siting(cfg.siting, cfg.seed);
  opt.threads = cfg.threads;
  opt.costs_dir = cfg.costs;
  opt.region = cfg.region;
  const auto runs = run_fleet(feeders, opt);
  emit(cfg, fleet_csv(runs));
  if (!cfg.out.empty()) {
    auto hist = cfg.out;
    hist.replace_filename(cfg.out.stem().string() + "_histograms.csv");
    std::ofstream out(hist, std::ios::binary);
    if (!out) throw Error("cannot write " + hist.string());
    out << fleet_histograms_csv(runs);
  }
  int failed = 0;
  for (const auto& r : runs) failed += !r.ok || !r.report.resolved;
  if (failed) {
    std::cerr << failed << " of " << runs.size() << " runs failed or stayed unresolved\n";
    return kExitDomain;
  }
  return 0;
}

int cmd_export(const RunConfig& cfg, bool solve) {
  const auto net = load_network(cfg);
  const auto opts = assess_options(cfg);
  const auto sc = make_scenario(net, parse_scenario_label(cfg.scenario), opts.scan);
  const auto setup = prepare_loop(net, sc, cfg.cs, parse_siting(cfg.siting, cfg.seed), opts.loop);
  const auto em = build_expansion_model(sc.network, setup.candidates, setup.build);
  std::ostringstream s;
  export_mps(em.model, s);
  emit(cfg, s.str());
  std::cerr << "exported " << em.model.num_variables() << " columns, " << em.model.num_constraints()
            << " rows, " << em.model.num_binaries() << " binaries\n";
  if (solve) {
    // Objective of the embedded solver on the exported model, for comparison
    // with external solvers.
    const auto sol = solve_milp(em.model, opts.loop.milp);
    nlohmann::ordered_json j = {{"status", to_string(sol.status)},
                                {"objective", sol.objective},
                                {"mip_gap", sol.mip_gap},
                                {"nodes", sol.node_count}};
    std::cerr << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution feeder expansion planning with community solar"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool feeder_positional) {
    sub->add_option("--config", f.config, "key = value configuration file");
    if (feeder_positional) sub->add_option("feeder", f.feeder, "feeder JSON file");
    sub->add_option("--costs", f.costs, "directory with costs.csv and conductors.csv");
    sub->add_option("--region", f.region, "cost region: CA or nonCA");
    sub->add_option("--out", f.out, "output file (standard output when omitted)");
  };
  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--scenario", f.scenario, "base, highpv or highload");
    sub->add_option("--cs", f.cs, "community solar on or off")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--siting", f.siting, "fixed:<bus|head|middle|end>, random or optimal");
    sub->add_option("--gap", f.gap, "relative MIP gap");
    sub->add_option("--node-limit", f.node_limit, "branch-and-bound node limit");
    sub->add_option("--seed", f.seed, "seed for random siting");
    sub->add_option("--step", f.step, "scenario scaling step");
    sub->add_option("--trace", f.trace, "JSON-lines iteration trace");
  };

  auto* validate = app.add_subcommand("validate", "check a feeder file and print its size");
  add_common(validate, true);
  auto* pf = app.add_subcommand("pf", "power flow of every period as CSV");
  add_common(pf, true);
  pf->add_option("--day", f.day, "day label");
  pf->add_option("--hour", f.hour, "hour 0-23")->check(CLI::Range(0, 23));
  pf->add_flag("--losses", f.losses, "iterate I^2R losses");
  pf->add_flag("--screening", f.screening, "apply the screening tap rule");
  auto* scenario = app.add_subcommand("scenario", "build a netload scenario");
  add_common(scenario, true);
  add_run(scenario);
  auto* plan = app.add_subcommand("plan", "run the expansion loop and write the solution");
  add_common(plan, true);
  add_run(plan);
  auto* assess_cmd = app.add_subcommand("assess", "with/without community solar assessment");
  add_common(assess_cmd, true);
  add_run(assess_cmd);
  auto* fleet = app.add_subcommand("fleet", "assess every feeder of a manifest");
  add_common(fleet, false);
  add_run(fleet);
  fleet->add_option("--manifest", f.manifest, "feeder list, one path per line");
  fleet->add_option("--threads", f.threads, "worker threads");
  auto* export_cmd = app.add_subcommand("export-mps", "write the first-iteration model in MPS format");
  add_common(export_cmd, true);
  add_run(export_cmd);
  export_cmd->add_flag("--solve", f.solve, "also solve the model and print the objective on standard error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    // Options are registered per subcommand; pick the pointers of the active one.
    CLI::App* sub = app.get_subcommands().front();
    auto opt = [&](const char* name) -> CLI::Option* {
      try {
        return sub->get_option(name);
      } catch (const CLI::OptionNotFound&) {
        return nullptr;
      }
    };
    Options active;
    active.feeder = opt("feeder");
    active.costs = opt("--costs");
    active.region = opt("--region");
    active.out = opt("--out");
    active.scenario = opt("--scenario");
    active.cs = opt("--cs");
    active.siting = opt("--siting");
    active.gap = opt("--gap");
    active.node_limit = opt("--node-limit");
    active.seed = opt("--seed");
    active.step = opt("--step");
    active.trace = opt("--trace");
    active.manifest = opt("--manifest");
    active.threads = opt("--threads");
    const RunConfig cfg = merge(f, active, f.config);

    const std::string name = sub->get_name();
    if (name == "validate") return cmd_validate(cfg);
    if (name == "pf") return cmd_pf(cfg, f);
    if (name == "scenario") return cmd_scenario(cfg);
    if (name == "plan") return cmd_plan(cfg);
    if (name == "assess") return cmd_assess(cfg);
    if (name == "fleet") return cmd_fleet(cfg);
    if (name == "export-mps") return cmd_export(cfg, f.solve);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
