#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gridxpand/powerflow.hpp"

using namespace gridxpand;

namespace {

FeederNetwork single_line(double p, double q, double r, double x, double cap = 10.0) {
  auto doc = fixtures::chain_doc({p}, cap);
  doc["buses"][1]["qload"] = q;
  doc["segments"][0]["r"] = r;
  doc["segments"][0]["x"] = x;
  return fixtures::parse(doc);
}

// Regular octagon with vertices at multiples of pi/4 on the circle of radius
// F: every edge lies at distance F cos(pi/8) from the origin along the normal
// at the edge's mid-angle.
double octagon_oracle(double p, double q) {
  double best = 0;
  for (int k = 0; k < 8; ++k) {
    const double a = (k + 0.5) * std::numbers::pi / 4.0;
    best = std::max(best, (std::cos(a) * p + std::sin(a) * q) / std::cos(std::numbers::pi / 8.0));
  }
  return best;
}

}  // namespace

TEST_SUITE("powerflow") {
  TEST_CASE("single line voltage drop") {
    const auto net = single_line(1.0, 0.5, 0.01, 0.02);
    const auto res = solve_lindistflow(net, operating_point(net, 0, 0));
    // 1 - 2 (0.01 * 1 + 0.02 * 0.5)
    CHECK(res.v_squared[1] == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(res.f_p[0] == doctest::Approx(1.0));
    CHECK(res.f_q[0] == doctest::Approx(0.5));
    CHECK(res.substation_p == doctest::Approx(1.0));
  }

  TEST_CASE("zero injection keeps the reference voltage") {
    const auto net = single_line(0.0, 0.0, 0.01, 0.02);
    const auto res = solve_lindistflow(net, operating_point(net, 0, 0));
    CHECK(res.v_squared[1] == doctest::Approx(1.0));
    CHECK(res.loading[0] == 0);
    CHECK(check_violations(res, net).empty());
  }

  TEST_CASE("series loads accumulate upstream") {
    auto doc = fixtures::chain_doc({2.0, 1.0});
    doc["segments"][0]["r"] = 0.01;
    doc["segments"][0]["x"] = 0.0;
    doc["segments"][1]["r"] = 0.02;
    doc["segments"][1]["x"] = 0.0;
    const auto net = fixtures::parse(doc);
    const auto res = solve_lindistflow(net, operating_point(net, 0, 0));
    CHECK(res.f_p[0] == doctest::Approx(3.0));
    CHECK(res.f_p[1] == doctest::Approx(1.0));
    CHECK(res.v_squared[1] == doctest::Approx(1.0 - 2 * 0.01 * 3.0));
    CHECK(res.v_squared[2] == doctest::Approx(1.0 - 2 * 0.01 * 3.0 - 2 * 0.02 * 1.0));
  }

  TEST_CASE("per-unit base scales the drop") {
    auto doc = fixtures::chain_doc({10.0});
    doc["base_mva"] = 10.0;
    doc["segments"][0]["r"] = 0.01;
    doc["segments"][0]["x"] = 0.0;
    doc["segments"][0]["capacity_mva"] = 20.0;
    const auto net = fixtures::parse(doc);
    const auto res = solve_lindistflow(net, operating_point(net, 0, 0));
    CHECK(res.v_squared[1] == doctest::Approx(0.98));
  }

  TEST_CASE("violation magnitudes") {
    const auto net = single_line(1.0, 0.0, 0.01, 0.0);
    FlowResult res;
    res.v_squared = {1.0, 0.94 * 0.94};
    res.loading = {1.2};
    const auto v = check_violations(res, net);
    REQUIRE(v.size() == 2);
    CHECK(v[0].element == "b1");
    CHECK(v[0].kind == ViolationKind::kUndervoltage);
    CHECK(v[0].magnitude == doctest::Approx(0.01));
    CHECK(v[1].element == "fh");
    CHECK(v[1].kind == ViolationKind::kOverload);
    CHECK(v[1].magnitude == doctest::Approx(0.2));

    res.v_squared = {1.0, 1.07 * 1.07};
    res.loading = {1.0};
    const auto over = check_violations(res, net);
    REQUIRE(over.size() == 1);
    CHECK(over[0].kind == ViolationKind::kOvervoltage);
    CHECK(over[0].magnitude == doctest::Approx(0.02));
  }

  TEST_CASE("octagon norm") {
    CHECK(octagon_norm(2.0, 0.0) == doctest::Approx(2.0));
    CHECK(octagon_norm(0.0, -3.0) == doctest::Approx(3.0));
    const double c8 = std::cos(std::numbers::pi / 8), s8 = std::sin(std::numbers::pi / 8);
    CHECK(octagon_norm(c8, s8) == doctest::Approx(1.0 / c8));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 200; ++i) {
      const double p = u(rng), q = u(rng);
      CHECK(octagon_norm(p, q) == doctest::Approx(octagon_oracle(p, q)).epsilon(1e-12));
      // Inscribed polygon: never below the Euclidean magnitude.
      CHECK(octagon_norm(p, q) >= std::hypot(p, q) - 1e-12);
    }
  }

  TEST_CASE("loading uses the octagon norm") {
    const auto net = single_line(3.0, 3.0, 0.001, 0.001, 5.0);
    const auto res = solve_lindistflow(net, operating_point(net, 0, 0));
    CHECK(res.loading[0] == doctest::Approx(octagon_oracle(3.0, 3.0) / 5.0));
  }

  TEST_CASE("screening taps bound the feeder-head voltage") {
    const auto net = single_line(1.0, 0.0, 0.01, 0.0);
    auto op = operating_point(net, 0, 0);
    apply_screening_taps(net, Screening::kPeakLoad, op);
    auto res = solve_lindistflow(net, op);
    CHECK(res.v_mid[0] == doctest::Approx(0.98));
    CHECK(res.v_squared[1] == doctest::Approx(0.98 / (0.95 * 0.95)));
    apply_screening_taps(net, Screening::kMaxSolar, op);
    res = solve_lindistflow(net, op);
    CHECK(res.v_squared[1] == doctest::Approx(0.98 / (1.05 * 1.05)));
    // Band of the secondary-side voltage squared for unit primary voltage.
    CHECK(1.0 / (1.05 * 1.05) == doctest::Approx(1 / 1.1025));
    CHECK(1.0 / (0.95 * 0.95) == doctest::Approx(1 / 0.9025));
  }

  TEST_CASE("losses raise the upstream flow") {
    const auto net = single_line(1.0, 0.2, 0.02, 0.04);
    const auto lossless = solve_lindistflow(net, operating_point(net, 0, 0));
    const auto lossy = solve_lindistflow(net, operating_point(net, 0, 0), {true, 1e-10, 50});
    CHECK(lossy.f_p[0] > lossless.f_p[0]);
    // Fixed point of loss = r (P^2 + Q^2) / v0 with v0 = 1.
    CHECK(lossy.losses[0] == doctest::Approx(0.02 * (1.0 + 0.04)).epsilon(1e-9));
    CHECK(lossy.iterations > 1);
  }

  TEST_CASE("loss factors are nonnegative and zero without resistance") {
    const auto net = fixtures::tutorial();
    const auto lf = compute_loss_factors(net);
    CHECK(lf.size() == net.segments.size());
    for (const auto& [id, f] : lf) {
      CHECK(f.beta_p >= 0);
      CHECK(f.beta_q >= 0);
    }
    const auto zero = compute_loss_factors(single_line(1.0, 0.5, 0.0, 0.02));
    CHECK(zero.at("fh").beta_p == 0);
    CHECK(zero.at("fh").beta_q == 0);
  }

  TEST_CASE("mismatched operating point is rejected") {
    const auto net = single_line(1.0, 0.0, 0.01, 0.0);
    auto op = operating_point(net, 0, 0);
    op.injections.pop_back();
    CHECK_THROWS_AS(solve_lindistflow(net, op), ValidationError);
  }
}
