#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fk/error.hpp"
#include "fk/verify.hpp"

using namespace fk;

namespace {

constexpr double kPi = std::numbers::pi;

// The two-variable energy written out from the explicit formula.
double displayed(double a, double b) {
  return 0.25 * (b - a) * (b - a) - std::cos(2 * kPi * a) - std::cos(2 * kPi * b);
}

PotentialPtr named(const std::string& name, std::map<std::string, double> params = {}) {
  PotentialDescriptor d;
  d.name = name;
  d.params = std::move(params);
  return make_potential(d);
}

}  // namespace

TEST_CASE("bottleneck oracle on constructed landscapes") {
  const OracleGrid2D flat = OracleGrid2D::sample(101, [](double, double) { return 3.5; });
  CHECK(bottleneck_minimax_2d(flat) == 3.5);
  const OracleGrid2D ridge =
      OracleGrid2D::sample(101, [](double a, double) { return std::abs(a - 0.5) < 1e-9 ? 7.0 : 0.0; });
  CHECK(bottleneck_minimax_2d(ridge) == 7.0);
  // a ridge with a gap in it can be bypassed
  const OracleGrid2D gap = OracleGrid2D::sample(
      101, [](double a, double b) { return std::abs(a - 0.5) < 1e-9 && b < 0.9 ? 7.0 : 0.0; });
  CHECK(bottleneck_minimax_2d(gap) == 0.0);
  CHECK_THROWS_AS(OracleGrid2D::sample(100, [](double, double) { return 0.0; }), InvalidArgument);
  CHECK_THROWS_AS(OracleGrid2D::sample(101, [](double, double) { return NAN; }), InvalidArgument);
  CHECK_THROWS_AS(bottleneck_minimax_2d(flat, {0, 0}, {101, 0}), InvalidArgument);
}

TEST_CASE("oracle on the displayed landscape refines monotonically") {
  double prev = 0.0;
  for (int res : {101, 201, 401, 801}) {
    const double v = bottleneck_minimax_2d(OracleGrid2D::sample(res, displayed));
    // grid-Lipschitz slack: |grad| <= 2 pi + 1/2 times the diagonal step
    if (res > 101) CHECK(v <= prev + (2 * kPi + 0.5) * std::sqrt(2.0) / (res - 1));
    prev = v;
  }
  CHECK(prev == doctest::Approx(0.0625).epsilon(1e-3));
}

TEST_CASE("model reduction matches the displayed formula") {
  const auto s = classical_fk();
  const GapPair g = require_gap_pair(s, Periods{1, 1}, 8, 0, FlowParams{}).extended(Periods{2, 1});
  const auto f = reduced_landscape(s, g);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double a = d(rng), b = d(rng);
    CHECK(f(a, b) == doctest::Approx(displayed(a, b)).epsilon(1e-12));
  }
  CHECK(f(0, 0) == doctest::Approx(-2.0));
  CHECK(f(0.5, 0.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(reduced_landscape(s, g.extended(Periods{2, 2})), InvalidArgument);
}

TEST_CASE("property suite on classical FK passes") {
  const auto reports = run_property_suite(classical_fk(), Periods{2, 1}, 7, 100);
  REQUIRE(reports.size() == 9);
  for (const auto& r : reports) {
    INFO(r.name << " margin " << r.worst_margin);
    CHECK(r.passed);
    CHECK(r.worst_margin >= 0.0);
  }
}

TEST_CASE("property suite detects the flipped bond") {
  const auto reports = run_property_suite(named("flipped-bond-fk"), Periods{2, 1}, 7, 20);
  bool comparison_failed = false;
  for (const auto& r : reports)
    if (r.name == "comparison") comparison_failed = !r.passed;
  CHECK(comparison_failed);
}

TEST_CASE("property suite edge cases and determinism") {
  CHECK(run_property_suite(classical_fk(), Periods{2, 1}, 7, 0).empty());
  CHECK_THROWS_AS(run_property_suite(classical_fk(), Periods{2, 1}, 7, -1), InvalidArgument);
  const auto a = run_property_suite(classical_fk(), Periods{2, 1}, 3, 10);
  const auto b = run_property_suite(classical_fk(), Periods{2, 1}, 3, 10);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].name == b[k].name);
    CHECK(a[k].worst_margin == b[k].worst_margin);
    CHECK(a[k].passed == b[k].passed);
  }
  // the free chain has no gap; box properties are skipped, the rest still run
  const auto free = run_property_suite(named("free-chain"), Periods{2, 1}, 3, 5);
  REQUIRE(free.size() == 9);
  CHECK(free[5].note.find("no gap") != std::string::npos);
}

TEST_CASE("cross check: node flow, heat flow and the oracle agree") {
  const CrossCheckReport r = cross_check_mountain_pass(classical_fk(), {201, 2001}, 65, MinimaxParams{}, 0);
  CHECK(r.agree);
  CHECK(std::abs(r.node_flow - r.heat_flow) <= 1e-3);
  CHECK(std::abs(r.node_flow - r.oracle.back().second) <= 1e-3);
  CHECK(r.grid_max == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.grid_max_a == doctest::Approx(0.5));
  CHECK(r.grid_max_b == doctest::Approx(0.5));
  CHECK(r.c0p == doctest::Approx(-2.0));
}

TEST_CASE("cross check under a constant energy offset") {
  const CrossCheckReport base = cross_check_mountain_pass(classical_fk(), {201}, 33, MinimaxParams{}, 0);
  const CrossCheckReport moved =
      cross_check_mountain_pass(named("classical-fk", {{"offset", 0.3}}), {201}, 33, MinimaxParams{}, 0);
  CHECK(moved.node_flow == doctest::Approx(base.node_flow + 0.6).epsilon(1e-10));
  CHECK(moved.heat_flow == doctest::Approx(base.heat_flow + 0.6).epsilon(1e-10));
  CHECK(moved.oracle[0].second == doctest::Approx(base.oracle[0].second + 0.6).epsilon(1e-10));
  CHECK(moved.node_flow - moved.c0p == doctest::Approx(base.node_flow - base.c0p).epsilon(1e-10));
}
