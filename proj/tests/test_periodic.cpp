#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fk/error.hpp"
#include "fk/periodic.hpp"

using namespace fk;

namespace {

constexpr double kPi = std::numbers::pi;

double frac_distance(double x, double target) {
  const double d = x - target;
  return std::abs(d - std::round(d));
}

PotentialPtr named(const std::string& name) {
  PotentialDescriptor d;
  d.name = name;
  return make_potential(d);
}

}  // namespace

TEST_CASE("periods validation") {
  CHECK_THROWS_AS(Periods({0, 1}), InvalidArgument);
  CHECK_THROWS_AS(Periods({2, -1}), InvalidArgument);
  CHECK(Periods({3, 2}).cells() == 6);
  CHECK(Periods({3, 2}).unflatten(1) == LatticeIndex{1, 0});
}

TEST_CASE("torus energy examples") {
  const auto s = classical_fk();
  CHECK(torus_energy(*s, TorusField(Periods{1, 1}, -0.25)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(torus_energy(*s, TorusField(Periods{2, 1}, -0.25)) == doctest::Approx(-2.0).epsilon(1e-14));
  const TorusField u(Periods{1, 1}, 0.123);
  CHECK(torus_energy(*s, u) == local_energy(*s, u, LatticeIndex{0, 0}));
}

TEST_CASE("relative energy examples") {
  const auto s = classical_fk();
  const Periods p{1, 1};
  const TorusField v0(p, -0.25);
  CHECK(relative_energy(*s, TorusField(p, 0.0), v0) == doctest::Approx(-1.0));
  CHECK(relative_energy(*s, TorusField(p, 1.0), v0) == doctest::Approx(-1.0));
  CHECK(relative_energy(*s, TorusField(p, 0.5), v0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_energy(*s, TorusField(Periods{2, 1}, 0.0), v0), InvalidArgument);
}

TEST_CASE("gradient examples and finite differences") {
  const auto s = classical_fk();
  const Periods p{1, 1};
  CHECK(gradient(*s, TorusField(p, 0.25), TorusField(p, -0.25)).values[0] == doctest::Approx(2 * kPi));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const Periods q{3, 2};
  const TorusField v0(q, -0.25);
  for (int t = 0; t < 20; ++t) {
    TorusField u(q, 0.0);
    for (double& v : u.values) v = d(rng);
    const TorusField g = gradient(*s, u, v0);
    for (std::size_t k = 0; k < u.size(); ++k) {
      TorusField up = u, dn = u;
      up.values[k] += 1e-6;
      dn.values[k] -= 1e-6;
      const double fd = (relative_energy(*s, up, v0) - relative_energy(*s, dn, v0)) / 2e-6;
      CHECK(std::abs(fd - g.values[k]) / std::max(1.0, std::abs(g.values[k])) <= 1e-6);
    }
  }
}

TEST_CASE("flow: fixed points stay fixed, energy decreases, limit is stationary") {
  const auto s = classical_fk();
  const Periods p{2, 1};
  const GapPair gap = require_gap_pair(s, Periods{1, 1}, 8, 0, FlowParams{}).extended(p);
  FlowParams fp;
  for (const TorusField& end : {TorusField(p, 0.0), gap.width()}) {
    const auto r = flow(s, end, gap.v0, fp);
    CHECK((r.field - end).linf_norm() <= 1e-12);
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  TorusField u0(p, 0.0);
  for (double& v : u0.values) v = d(rng);
  const auto r = flow(s, u0, gap.v0, fp);
  CHECK(r.outcome.converged);
  CHECK(r.outcome.residual <= fp.stationarity_tol);
  CHECK(r.outcome.energy <= relative_energy(*s, u0, gap.v0));
  for (std::size_t k = 1; k < r.outcome.trace.size(); ++k)
    CHECK(r.outcome.trace[k].energy <= r.outcome.trace[k - 1].energy + 1e-10);
}

TEST_CASE("flow rejects a step above the stability bound") {
  const auto s = classical_fk();
  const Periods p{1, 1};
  FlowParams fp;
  fp.dt = 1.0;
  CHECK_THROWS_AS(flow(s, TorusField(p, 0.3), TorusField(p, 0.0), fp), InvalidArgument);
}

TEST_CASE("minimize_periodic: example seeds and scaling") {
  const auto s = classical_fk();
  const Periods p11{1, 1};
  std::vector<TorusField> seeds{TorusField(p11, 0.0), TorusField(p11, 0.3), TorusField(p11, 0.6)};
  const MinimizeResult r = minimize_periodic(s, p11, seeds, FlowParams{});
  CHECK(r.c0p == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(frac_distance(r.best.values[0], -0.25) < 1e-8);
  for (double res : r.residuals) CHECK(res <= 1e-10);

  const MinimizeResult r21 = minimize_periodic(s, Periods{2, 1}, constant_seeds(Periods{2, 1}, 16), FlowParams{});
  CHECK(r21.c0p == doctest::Approx(-2.0).epsilon(1e-12));
  for (double v : r21.best.values) CHECK(frac_distance(v, -0.25) < 1e-8);

  const MinimizeResult r32 = minimize_periodic(s, Periods{3, 2}, constant_seeds(Periods{3, 2}, 16), FlowParams{});
  CHECK(std::abs(r32.c0p - 6 * r.c0p) <= 1e-9);
  CHECK(is_birkhoff(r32.best, 3));
}

TEST_CASE("minimize_periodic errors") {
  const auto s = classical_fk();
  CHECK_THROWS_AS(minimize_periodic(s, Periods{1, 1}, {}, FlowParams{}), InvalidArgument);
  FlowParams fp;
  fp.max_steps = 1;
  fp.t_max = 1e-6;
  CHECK_THROWS_AS(minimize_periodic(s, Periods{1, 1}, {TorusField(Periods{1, 1}, 0.1)}, fp), SolverError);
}

TEST_CASE("find_gap_pair") {
  const auto s = classical_fk();
  const auto g = find_gap_pair(s, Periods{1, 1}, 8, 0, FlowParams{});
  REQUIRE(g);
  CHECK(g->v0.values[0] == doctest::Approx(-0.25).epsilon(1e-10));
  CHECK(g->w0.values[0] == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(g->evidence.probes == 7);  // theta = k / 8, k = 1..7
  CHECK(g->evidence.refinements == 0);

  CHECK_FALSE(find_gap_pair(named("free-chain"), Periods{1, 1}, 8, 0, FlowParams{}));
  CHECK_THROWS_AS(require_gap_pair(named("free-chain"), Periods{1, 1}, 8, 0, FlowParams{}), NoGapError);

  const auto tw = find_gap_pair(named("two-well-fk"), Periods{1, 1}, 8, 0, FlowParams{});
  REQUIRE(tw);
  CHECK((tw->w0 - tw->v0).values[0] == doctest::Approx(0.5).epsilon(1e-10));
  // the pair is determined by the model, not the seed
  const auto again = find_gap_pair(s, Periods{1, 1}, 8, 12345, FlowParams{});
  REQUIRE(again);
  CHECK(again->v0.values == g->v0.values);
}

TEST_CASE("is_birkhoff") {
  CHECK(is_birkhoff(TorusField(Periods{2, 2}, 0.3), 2));
  TorusField bump(Periods{4, 4}, 0.0);
  bump.values[5] = 0.5;
  CHECK_FALSE(is_birkhoff(bump, 2));
}

TEST_CASE("box_maximize") {
  const auto s = classical_fk();
  const GapPair g11 = require_gap_pair(s, Periods{1, 1}, 8, 0, FlowParams{});
  const BoxMaxResult m11 = box_maximize(s, g11, {});
  CHECK(m11.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m11.field.values[0] == doctest::Approx(0.5).epsilon(1e-6));

  const GapPair g21 = g11.extended(Periods{2, 1});
  const BoxMaxResult m21 = box_maximize(s, g21, {});
  CHECK(m21.value == doctest::Approx(2.0).epsilon(1e-9));
  for (double v : m21.field.values) CHECK(v + g21.v0.values[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(m21.interior_residual <= 1e-8);
  CHECK(m21.lower_sign_ok);
  CHECK(m21.upper_sign_ok);
}
