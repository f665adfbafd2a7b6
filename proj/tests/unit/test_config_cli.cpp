#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "gridxpand/config.hpp"

using namespace gridxpand;

namespace {

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd = std::string("\"") + GRIDXPAND_CLI + "\" " + args + " > \"" + stdout_file + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string feeder(const std::string& name) { return "\"" + fixtures::data("feeders/" + name).string() + "\""; }

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("sections, comments and quotes") {
    const auto e = parse_config_text(
        "# top comment\n"
        "scenario = highload\n"
        "[solver]\n"
        "gap = 0.001   # trailing\n"
        "[run]\n"
        "out = \"dir # not a comment/out.json\"\n");
    CHECK(e.at("scenario") == "highload");
    CHECK(e.at("solver.gap") == "0.001");
    CHECK(e.at("run.out") == "dir # not a comment/out.json");
  }

  TEST_CASE("malformed lines") {
    CHECK_THROWS_AS(parse_config_text("[solver\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("justaword\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text(" = 3\n"), ParseError);
  }

  TEST_CASE("applied values") {
    RunConfig cfg;
    apply_config(cfg,
                 parse_config_text("[run]\ncs = on\nfeeder = f.json\nseed = 9\n[solver]\ngap = 0\nnode_limit = 50\n"
                                   "[screening]\nloading = 0.8\n[fleet]\nthreads = 3\n"),
                 "/base");
    CHECK(cfg.cs);
    CHECK(cfg.feeder == std::filesystem::path("/base/f.json"));
    CHECK(cfg.seed == 9);
    CHECK(cfg.gap == 0);
    CHECK(cfg.node_limit == 50);
    CHECK(cfg.threads == 3);
    const auto o = assess_options(cfg);
    CHECK(o.loop.milp.gap == 0);
    CHECK(o.loop.milp.node_limit == 50);
    CHECK(o.loop.thresholds.loading == 0.8);
  }

  TEST_CASE("flags") {
    for (const char* on : {"on", "true", "1", "yes"}) {
      RunConfig cfg;
      apply_config(cfg, {{"cs", on}});
      CHECK(cfg.cs);
    }
    RunConfig cfg;
    cfg.cs = true;
    apply_config(cfg, {{"run.cs", "off"}});
    CHECK_FALSE(cfg.cs);
    CHECK_THROWS_AS(apply_config(cfg, {{"cs", "maybe"}}), ValidationError);
  }

  TEST_CASE("unknown keys and bad numbers throw") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_config(cfg, {{"solver.gapp", "1"}}), ValidationError);
    CHECK_THROWS_AS(apply_config(cfg, {{"solver.gap", "1e-4x"}}), ValidationError);
    cfg.gap = -1;
    CHECK_THROWS_AS(assess_options(cfg), ValidationError);
  }

  TEST_CASE("config file paths resolve next to the file") {
    const auto path = fixtures::scratch("cfg/run.conf");
    std::filesystem::create_directories(path.parent_path());
    {
      std::ofstream out(path);
      out << "[run]\nfeeder = feeders/x.json\n";
    }
    CHECK(load_config(path).feeder == path.parent_path() / "feeders/x.json");
  }
}

TEST_SUITE("cli") {
  TEST_CASE("validate succeeds on shipped feeders") {
    CHECK(run_cli("validate " + feeder("tutorial.json")) == 0);
    CHECK(run_cli("validate " + feeder("oracle/oracle-vr4.json")) == 0);
  }

  TEST_CASE("usage and input errors exit with 2") {
    CHECK(run_cli("validate " + feeder("tutorial.json") + " --bogus") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("validate /nonexistent/feeder.json") == 2);
    CHECK(run_cli("plan " + feeder("tutorial.json") + " --cs maybe") == 2);
    const auto broken = fixtures::scratch("broken.json");
    {
      std::ofstream out(broken);
      out << "{\"base_mva\": 1, \"buses\": [";
    }
    CHECK(run_cli("validate \"" + broken.string() + "\"") == 2);
  }

  TEST_CASE("plan matches the library") {
    const auto out = fixtures::scratch("plan.json");
    REQUIRE(run_cli("plan " + feeder("deferral.json") + " --scenario highload --cs on --out \"" + out.string() + "\"") ==
            0);
    const auto j = nlohmann::json::parse(slurp(out));

    const auto net = load_feeder(fixtures::data("feeders/deferral.json"));
    const auto sc = make_scenario(net, ScenarioLabel::kHighLoad);
    const auto r = expansion_loop(net, sc, true, parse_siting("optimal"));
    CHECK(j["status"] == "resolved");
    CHECK(j["scale_factor"].get<double>() == sc.scale_factor);
    CHECK(j["solver"]["objective"].get<double>() == doctest::Approx(r.solution.objective).epsilon(1e-12));
    CHECK(j["investment_cost"].get<double>() == doctest::Approx(r.plan.investment_cost));
    CHECK(j["cs"]["bus"] == r.plan.cs_bus);
  }

  TEST_CASE("unresolved plan exits with 1") {
    const auto path = fixtures::scratch("overloaded.json");
    {
      std::ofstream out(path);
      out << fixtures::chain_doc({3.0}, 2.0).dump();
    }
    CHECK(run_cli("plan \"" + path.string() + "\"") == 1);
  }

  TEST_CASE("config file feeds the command") {
    const auto cfg = fixtures::scratch("cli.conf");
    const auto out = fixtures::scratch("cli_scenario.json");
    {
      std::ofstream f(cfg);
      f << "[run]\nfeeder = \"" << fixtures::data("feeders/tutorial.json").string() << "\"\nscenario = base\n";
    }
    CHECK(run_cli("scenario --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"") == 0);
    CHECK_FALSE(slurp(out).empty());
  }
}
