#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "gridxpand/expansion.hpp"
#include "gridxpand/solver.hpp"

using namespace gridxpand;

namespace {

// Random knapsack-like model with a continuous coupling variable. Small enough
// for the enumeration oracle.
MilpModel random_model(unsigned seed, int nbin) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(1, 10);
  MilpModel m;
  std::vector<Term> cover, budget;
  for (int i = 0; i < nbin; ++i) {
    const int b = m.add_binary("b", {i});
    m.add_objective(b, u(rng));
    cover.push_back({b, u(rng)});
    budget.push_back({b, 1});
  }
  const int s = m.add_variable("s", {}, 0, 5);
  m.add_objective(s, 3.0);
  cover.push_back({s, 1});
  m.add_constraint("cover", {}, cover, 12, kInf);
  m.add_constraint("budget", {}, budget, -kInf, nbin / 2);
  return m;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("single bounded variable") {
    MilpModel m;
    const int x = m.add_variable("x", {}, -kInf, kInf);
    m.add_objective(x, 1);
    m.add_constraint("lb", {}, {{x, 1}}, 3, kInf);
    const auto s = solve_lp(m);
    CHECK(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(3));
    CHECK(s.values[x] == doctest::Approx(3));
  }

  TEST_CASE("degenerate vertex") {
    // Three constraints meet at (1, 1); the optimum is there.
    MilpModel m;
    const int x = m.add_variable("x", {}, 0, kInf), y = m.add_variable("y", {}, 0, kInf);
    m.add_objective(x, -1);
    m.add_objective(y, -1);
    m.add_constraint("a", {}, {{x, 1}}, -kInf, 1);
    m.add_constraint("b", {}, {{y, 1}}, -kInf, 1);
    m.add_constraint("c", {}, {{x, 1}, {y, 1}}, -kInf, 2);
    m.add_constraint("d", {}, {{x, 1}, {y, -1}}, -kInf, 0);
    const auto s = solve_lp(m);
    CHECK(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(-2));
    CHECK(m.max_violation(s.values) <= 1e-9);
  }

  TEST_CASE("one binary chooses the cheaper branch") {
    MilpModel m;
    const int y = m.add_binary("y", {}), z = m.add_binary("z", {});
    m.add_objective(y, 5);
    m.add_objective(z, 100);
    m.add_constraint("one", {}, {{y, 1}, {z, 1}}, 1, kInf);
    const auto s = solve_milp(m);
    CHECK(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(5));
    CHECK(s.values[y] == doctest::Approx(1));
    CHECK(s.values[z] == doctest::Approx(0));
  }

  TEST_CASE("fractional relaxation needs branching") {
    // max x1 + x2 with 2x1 + 2x2 <= 3 has LP value 1.5 and integer value 1.
    MilpModel m;
    const int a = m.add_binary("a", {}), b = m.add_binary("b", {});
    m.add_objective(a, -1);
    m.add_objective(b, -1);
    m.add_constraint("cap", {}, {{a, 2}, {b, 2}}, -kInf, 3);
    CHECK(solve_lp(m).objective == doctest::Approx(-1.5));
    MilpOptions o;
    o.gap = 0;
    const auto s = solve_milp(m, o);
    CHECK(s.objective == doctest::Approx(-1));
    CHECK(s.node_count > 1);
  }

  TEST_CASE("fixed binaries reduce to the LP") {
    auto m = random_model(11, 6);
    // Three on, three off: within the budget row.
    for (int j = 0; j < 6; ++j) m.set_bounds(j, j % 2, j % 2);
    const auto lp = solve_lp(m), ip = solve_milp(m);
    REQUIRE(lp.status == SolveStatus::kOptimal);
    CHECK(ip.objective == doctest::Approx(lp.objective).epsilon(1e-9));
  }

  TEST_CASE("branch and bound matches enumeration on random models") {
    MilpOptions o;
    o.gap = 0;
    for (unsigned seed = 1; seed <= 25; ++seed) {
      const auto m = random_model(seed, 8);
      const auto a = solve_milp(m, o), b = solve_by_enumeration(m);
      CHECK(a.status == b.status);
      if (a.status == SolveStatus::kOptimal) {
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
        CHECK(m.max_violation(a.values) <= 1e-7);
      }
    }
  }

  TEST_CASE("infeasible and unbounded") {
    MilpModel inf;
    const int x = inf.add_variable("x", {}, 0, 1);
    inf.add_constraint("c", {}, {{x, 1}}, 2, kInf);
    CHECK(solve_lp(inf).status == SolveStatus::kInfeasible);
    CHECK(solve_milp(inf).status == SolveStatus::kInfeasible);

    MilpModel unb;
    const int y = unb.add_variable("y", {}, 0, kInf);
    unb.add_objective(y, -1);
    unb.add_constraint("c", {}, {{y, 1}}, 1, kInf);
    CHECK(solve_lp(unb).status == SolveStatus::kUnbounded);
  }

  TEST_CASE("incumbent trace is monotone") {
    MilpOptions o;
    o.gap = 0;
    const auto s = solve_milp(random_model(5, 12), o);
    REQUIRE(!s.trace.empty());
    for (std::size_t i = 1; i < s.trace.size(); ++i) {
      CHECK(s.trace[i].incumbent <= s.trace[i - 1].incumbent);
      CHECK(s.trace[i].bound >= s.trace[i - 1].bound - 1e-9);
      CHECK(s.trace[i].node >= s.trace[i - 1].node);
    }
    CHECK(s.mip_gap <= 1e-9);
  }

  TEST_CASE("repeated solves are identical") {
    const auto net = fixtures::tutorial();
    BuildOptions bo;
    bo.with_cs = true;
    CandidateSet sites;
    sites.storage_sites = sites.cs_sites = {"b1", "b2", "b3"};
    const auto em = build_expansion_model(net, sites, bo);
    const auto a = solve_milp(em.model), b = solve_milp(em.model);
    CHECK(a.objective == b.objective);
    CHECK(a.values == b.values);
    CHECK(a.node_count == b.node_count);
  }

  TEST_CASE("MPS round trip preserves the optimum") {
    const auto m = random_model(3, 8);
    std::stringstream ss;
    export_mps(m, ss);
    const auto text = ss.str();
    CHECK(text.find("ROWS") != std::string::npos);
    CHECK(text.find("MARKER") != std::string::npos);
    std::istringstream in(text);
    const auto back = import_mps(in);
    CHECK(back.num_variables() == m.num_variables());
    CHECK(back.num_constraints() == m.num_constraints());
    CHECK(back.num_binaries() == m.num_binaries());
    MilpOptions o;
    o.gap = 0;
    CHECK(solve_milp(back, o).objective == doctest::Approx(solve_milp(m, o).objective).epsilon(1e-9));
  }

  TEST_CASE("MPS of an expansion model round-trips through a file") {
    const auto net = fixtures::tutorial();
    const auto em = build_expansion_model(net, {}, {});
    const auto path = fixtures::scratch("tutorial.mps");
    export_mps(em.model, path);
    const auto back = import_mps(path);
    CHECK(back.num_variables() == em.model.num_variables());
    CHECK(back.num_constraints() == em.model.num_constraints());
    CHECK(solve_lp(back).objective == doctest::Approx(solve_lp(em.model).objective).epsilon(1e-9));
  }

  TEST_CASE("empty model") {
    MilpModel m;
    std::stringstream ss;
    export_mps(m, ss);
    std::istringstream in(ss.str());
    const auto back = import_mps(in);
    CHECK(back.num_variables() == 0);
    const auto s = solve_milp(m);
    CHECK(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == 0);
  }

  TEST_CASE("malformed MPS") {
    std::istringstream in("NAME X\nROWS\n N OBJ\nCOLUMNS\n    X1 NOPE 1\nENDATA\n");
    CHECK_THROWS_AS(import_mps(in), ParseError);
  }
}
