#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "gridxpand/expansion.hpp"
#include "gridxpand/milp.hpp"

using namespace gridxpand;

namespace {

int rows_with_variable(const MilpModel& m, const std::string& family, int var) {
  int n = 0;
  for (const auto& row : m.constraints()) {
    if (row.family != family) continue;
    for (const auto& t : row.terms) n += t.var == var;
  }
  return n;
}

}  // namespace

TEST_SUITE("milp") {
  TEST_CASE("model container") {
    MilpModel m;
    const int x = m.add_variable("x", {0}, 0, 4);
    const int y = m.add_binary("y", {1, 2});
    CHECK(m.variable(y).name() == "y[1,2]");
    const int r = m.add_constraint("row", {3}, {{x, 1}, {y, 2}, {x, 1}, {y, -2}}, -kInf, 5);
    // Repeated terms merge; the y terms cancel and vanish.
    REQUIRE(m.constraint(r).terms.size() == 1);
    CHECK(m.constraint(r).terms[0].coef == 2);
    CHECK(m.constraint(r).sense() == Sense::kLessEqual);
    CHECK(m.constraint(r).tag() == "row[3]");
    m.add_constraint("eq", {}, {{x, 1}}, 1, 1);
    CHECK(m.constraint(1).sense() == Sense::kEqual);
    m.add_objective(x, 3);
    m.add_objective(x, 1);
    CHECK(m.objective()[x] == 4);
    CHECK(m.num_binaries() == 1);
    CHECK(m.evaluate_objective({2, 0}) == 8);
    CHECK(m.max_violation({3, 0}) == doctest::Approx(2.0));  // eq row: 3 vs 1; row: 6 vs 5
    CHECK(m.max_violation({1, 1}) == 0);
    CHECK_NOTHROW(m.validate());
    m.set_bounds(y, 0, 2);
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }

  TEST_CASE("three-bus network without candidates") {
    const auto net = fixtures::parse(fixtures::chain_doc({1.0, 1.0}));
    const auto em = build_expansion_model(net, {}, {});
    const auto counts = em.model.constraint_counts();
    const int T = 24;
    CHECK(counts.at("balance_p") == 3 * T);
    CHECK(counts.at("balance_q") == 3 * T);
    CHECK(counts.at("v_band") == 3 * T);
    CHECK(counts.at("v_ref") == T);
    CHECK(counts.at("fixed_p_box") == T);
    CHECK(counts.at("fixed_q_box") == T);
    CHECK(counts.at("fixed_octagon_pos") == 4 * T);
    CHECK(counts.at("fixed_octagon_neg") == 4 * T);
    CHECK(counts.at("fixed_drop") == T);
    CHECK(counts.at("trf_drop") == T);
    CHECK(counts.at("tap_band") == 2 * T);
    CHECK(counts.count("cand_choice") == 0);
    CHECK(counts.count("vr_bypass") == 0);
    CHECK(counts.count("cs_total") == 0);
    CHECK_NOTHROW(em.model.validate());
  }

  TEST_CASE("objective of a model without candidates holds only imbalance penalties") {
    const auto net = fixtures::parse(fixtures::chain_doc({1.0, 1.0}));
    const auto em = build_expansion_model(net, {}, {});
    const std::set<std::string> slack = {"p_imb_up", "p_imb_down", "q_imb_up", "q_imb_down"};
    for (int j = 0; j < em.model.num_variables(); ++j) {
      const double c = em.model.objective()[j];
      if (c == 0) continue;
      const auto& v = em.model.variable(j);
      // Feeder-head upgrade binary carries its (zero) cost but is fixed at 0.
      if (v.family == "x_fh") {
        CHECK(v.hi == 0);
        continue;
      }
      CHECK(slack.count(v.family) == 1);
      CHECK(c == doctest::Approx(1e4 * 365));
    }
  }

  TEST_CASE("candidate line options") {
    const auto net = fixtures::tutorial();
    const int l23 = net.segment_index("l23");
    const auto em = build_expansion_model(net, {}, {});
    const auto& sm = em.segments[l23];
    CHECK(sm.cls == SegmentClass::kCandidate);
    REQUIRE(sm.option_bin.size() == 3);
    const auto counts = em.model.constraint_counts();
    CHECK(counts.at("cand_choice") == 1);
    CHECK(counts.at("cand_drop") == 2 * 3 * 72);  // two rows per option and period, three days
    for (int x : sm.option_bin) {
      CHECK(em.model.variable(x).type == VarType::kBinary);
      CHECK(rows_with_variable(em.model, "cand_choice", x) == 1);
    }
    for (const auto& row : em.model.constraints()) {
      if (row.family != "cand_choice") continue;
      CHECK(row.lower == 1);
      CHECK(row.upper == 1);
      CHECK(row.terms.size() == 3);
    }
    CHECK(em.model.objective()[sm.option_bin[0]] == 0);
    CHECK(em.model.objective()[sm.option_bin[1]] == doctest::Approx(1500 * 3.5));
    CHECK(em.model.objective()[sm.option_bin[2]] == doctest::Approx(2200 * 5.0));
  }

  TEST_CASE("curtailment and storage costs are weighted by day") {
    const auto net = fixtures::tutorial();
    BuildOptions bo;
    bo.with_cs = true;
    bo.siting = SitingMode::kFixed;
    bo.fixed_bus = "b3";
    const auto em = build_expansion_model(net, {}, bo);
    REQUIRE(em.cs.size() == 1);
    const auto& cs = em.cs[0];
    const int avg = net.day_index("average");
    // 30 $/MWh on a day standing for 363 days.
    CHECK(em.model.objective()[cs.g_crt[avg * 24 + 12]] == doctest::Approx(10890));
    CHECK(em.model.objective()[cs.g_crt[net.day_index("peak_load") * 24 + 12]] == doctest::Approx(30));
    REQUIRE(cs.storage >= 0);
    const auto& st = em.storage[cs.storage];
    CHECK(st.candidate);
    CHECK(em.model.objective()[st.x_inv] == doctest::Approx(61081));
    CHECK(em.model.constraint_counts().at("cs_total") == 1);
  }

  TEST_CASE("candidate drop big-M covers the voltage band and largest drop") {
    const auto net = fixtures::tutorial();
    const auto& seg = net.segments[net.segment_index("l23")];
    const auto opts = seg.all_options();
    // Band 1.05^2 - 0.95^2 plus 2 (r + x)_max S_max with (0.005 + 0.01) and 5 MVA.
    const double want = (1.1025 - 0.9025) + 2 * 0.015 * 5.0;
    CHECK(candidate_drop_big_m(net, seg, opts) == doctest::Approx(want));
  }

  TEST_CASE("regulator big-M bounds every tap position") {
    // With taps 0.9..1.1 the ratio spread dominates.
    CHECK(regulator_big_m(1.05, 0.9, 1.1) == doctest::Approx(1.1025 * (1 / 0.81 - 1 / 1.21)));
    // |v_to - v_mid| for bypassed and engaged states stays within M.
    for (double tmin : {0.9, 0.95, 0.98}) {
      for (double tmax : {1.02, 1.05, 1.1, 1.3}) {
        const double M = regulator_big_m(1.05, tmin, tmax);
        for (double vto : {0.9025, 1.0, 1.1025}) {
          for (double phi : {tmin, 1.0, tmax}) {
            const double vmid = vto * phi * phi;
            CHECK(std::abs(vmid - vto) <= M + 1e-12);
            CHECK(std::abs(vto / (tmin * tmin) - vto / (tmax * tmax)) <= M + 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("unknown candidates are rejected") {
    const auto net = fixtures::tutorial();
    CandidateSet c;
    c.reconductor_segments = {"nope"};
    CHECK_THROWS_AS(build_expansion_model(net, c, {}), ValidationError);
    BuildOptions bo;
    bo.with_cs = true;
    bo.siting = SitingMode::kFixed;
    bo.fixed_bus = "zz";
    CHECK_THROWS_AS(build_expansion_model(net, {}, bo), ValidationError);
  }
}
