#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "gridxpand/assessment.hpp"
#include "gridxpand/costdb.hpp"

namespace gridxpand {

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot read manifest " + manifest.string());
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::filesystem::path p = line.substr(first, last - first + 1);
    if (p.is_relative()) p = manifest.parent_path() / p;
    out.push_back(p.lexically_normal());
  }
  return out;
}

int fleet_thread_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("GRIDXPAND_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

std::vector<FleetRun> run_fleet(const std::vector<std::filesystem::path>& feeders, const FleetOptions& opt) {
  std::optional<CostDatabase> db;
  if (!opt.costs_dir.empty()) db = load_cost_directory(opt.costs_dir);

  std::vector<FleetRun> runs;
  for (const auto& f : feeders) {
    for (auto label : opt.scenarios) {
      FleetRun r;
      r.feeder_path = f.filename().string();
      r.scenario = label;
      runs.push_back(r);
    }
  }
  const std::size_t per_feeder = opt.scenarios.size();

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      auto& run = runs[i];
      try {
        FeederNetwork net = load_feeder(feeders[i / per_feeder]);
        if (db) apply_cost_defaults(net, *db, parse_region(opt.region.empty() ? net.region : opt.region));
        if (net.name.empty()) net.name = feeders[i / per_feeder].stem().string();
        run.report = assess(net, run.scenario, opt.siting, opt.assess);
        run.ok = true;
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(fleet_thread_count(opt.threads), std::max<std::size_t>(1, runs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return runs;
}

std::string fleet_csv(const std::vector<FleetRun>& runs) {
  std::string out = "file,ok,error," + csv_header() + "\n";
  for (const auto& r : runs) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '\n', ' ');
    std::replace(err.begin(), err.end(), '"', '\'');
    out += r.feeder_path + "," + (r.ok ? "1" : "0") + ",\"" + err + "\",";
    if (r.ok) {
      out += csv_row(r.report);
    } else {
      AssessmentReport empty;
      empty.scenario = std::string(to_string(r.scenario));
      empty.status = "error";
      out += csv_row(empty);
    }
    out += "\n";
  }
  return out;
}

namespace {

struct Histogram {
  std::string metric;
  std::vector<double> edges;  // bins [e_i, e_{i+1}); outer bins catch the tails
};

}  // namespace

std::string fleet_histograms_csv(const std::vector<FleetRun>& runs) {
  const std::vector<Histogram> hists = {
      {"cost_per_kw", {-200, -100, -50, -20, -10, -5, -1e-9, 1e-9, 5, 10, 20, 50, 100, 200}},
      {"cost_per_kwh_cents", {-1, -0.5, -0.2, -0.1, -0.05, -1e-12, 1e-12, 0.05, 0.1, 0.2, 0.5, 1}},
      {"curtailed_fraction", {0, 1e-9, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0000001}},
  };
  std::vector<std::string> scenarios;
  for (const auto& r : runs) {
    const std::string s(to_string(r.scenario));
    if (std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end()) scenarios.push_back(s);
  }

  std::string out = "metric,scenario,bin_lo,bin_hi,count\n";
  for (const auto& h : hists) {
    for (const auto& sc : scenarios) {
      std::vector<int> counts(h.edges.size() + 1, 0);
      for (const auto& r : runs) {
        if (!r.ok || !r.report.resolved || r.report.scenario != sc) continue;
        const double v = h.metric == "cost_per_kw"          ? r.report.cost_per_kw
                         : h.metric == "cost_per_kwh_cents" ? r.report.cost_per_kwh
                                                            : r.report.curtailed_fraction;
        const auto bin = std::upper_bound(h.edges.begin(), h.edges.end(), v) - h.edges.begin();
        ++counts[bin];
      }
      for (std::size_t b = 0; b < counts.size(); ++b) {
        const std::string lo = b == 0 ? "-inf" : format_number(h.edges[b - 1]);
        const std::string hi = b == h.edges.size() ? "inf" : format_number(h.edges[b]);
        out += h.metric + "," + sc + "," + lo + "," + hi + "," + std::to_string(counts[b]) + "\n";
      }
    }
  }
  // Classification counts mirror the negative / zero / positive split.
  for (const auto& sc : scenarios) {
    int n[3] = {0, 0, 0};
    for (const auto& r : runs) {
      if (r.ok && r.report.resolved && r.report.scenario == sc) ++n[static_cast<int>(r.report.classification)];
    }
    out += "classification," + sc + ",negative,negative," + std::to_string(n[0]) + "\n";
    out += "classification," + sc + ",zero,zero," + std::to_string(n[1]) + "\n";
    out += "classification," + sc + ",positive,positive," + std::to_string(n[2]) + "\n";
  }
  return out;
}

}  // namespace gridxpand
