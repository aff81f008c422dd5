#include <doctest.h>

#include <cmath>
#include <random>

#include "fk/error.hpp"
#include "fk/hetero.hpp"
#include "fk/model.hpp"

using namespace fk;

namespace {

PotentialPtr pinned() {
  PotentialDescriptor d;
  d.name = "pinned-fk";
  return make_potential(d);
}

struct Fixture {
  PotentialPtr s = pinned();
  GapPair gap0 = require_gap_pair(s, Periods{1, 1}, 8, 0, FlowParams{});
  HeteroMinimizeResult min1 = minimize_hetero(s, TransversePeriods{1}, gap0, FlowParams{});
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

StripField offset(const StripField& u, const StripField& base) {
  StripField d = u;
  for (std::size_t k = 0; k < d.size(); ++k) d.values[k] -= base.values[k];
  for (auto& v : d.left_tail) v = 0.0;
  for (auto& v : d.right_tail) v = 0.0;
  return d;
}

}  // namespace

TEST_CASE("strip norm examples") {
  const TransversePeriods q{2};
  StripField zero(q, 4, 0.0);
  CHECK(strip_norm(zero) == 0.0);
  StripField bump = zero;
  bump.values[3] = 0.7;
  CHECK(strip_norm(bump) == doctest::Approx(1.4));
  const auto& f = fixture();
  const auto gap = find_gap_pair_hetero(f.s, f.min1, f.gap0, 8, 0, FlowParams{});
  REQUIRE(gap);
  const StripField w = gap->width();
  double l1 = 0.0;
  for (double v : w.values) l1 += std::abs(v);
  CHECK(std::isfinite(strip_norm(w)));
  CHECK(strip_norm(w) <= l1 + std::sqrt(l1) + 1e-12);
}

TEST_CASE("pinned tails and rewindowing") {
  const auto& f = fixture();
  const StripField u = pinned_strip(TransversePeriods{1}, 5, f.gap0, 0.1);
  CHECK(u.at({-100, 0}) == doctest::Approx(-0.25));
  CHECK(u.at({100, 0}) == doctest::Approx(0.75));
  CHECK(u.at({0, 0}) == 0.1);
  const StripField wide = rewindow(u, 8);
  CHECK(wide.at({7, 0}) == doctest::Approx(0.75));
  CHECK(wide.at({3, 0}) == 0.1);
  const StripField t = extend_transverse(u, TransversePeriods{3});
  CHECK(t.q.cells() == 3);
  CHECK(t.at({2, 2}) == 0.1);
  CHECK_THROWS_AS(extend_transverse(t, TransversePeriods{2}), InvalidArgument);
}

TEST_CASE("minimize_hetero on q = (1)") {
  const auto& f = fixture();
  const auto& r = f.min1;
  CHECK(r.c1q > 0.0);
  CHECK(r.constants.c1 == r.c1q);
  CHECK(r.constants.c0 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.constants.doubling_change <= 1e-9);
  CHECK(r.constants.tail_bound < 1e-10);
  for (double res : r.residuals) CHECK(res <= 1e-8);
  // monotone profile from v0 to w0
  for (int i = -r.v1.half_width; i < r.v1.half_width; ++i)
    CHECK(r.v1.at({i + 1, 0}) >= r.v1.at({i, 0}) - 1e-12);
  CHECK(r.v1.at({-r.v1.half_width, 0}) == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(r.v1.at({r.v1.half_width, 0}) == doctest::Approx(0.75).epsilon(1e-6));
  // renormalized energy at the minimizer is c1 and stays put when the window doubles
  const StripField zero = offset(r.v1, r.v1);
  CHECK(renormalized_energy(*f.s, zero, r.v1, r.constants.c0) == doctest::Approx(r.c1q).epsilon(1e-12));
  const StripField v1wide = rewindow(r.v1, 2 * r.v1.half_width);
  CHECK(std::abs(strip_energy(*f.s, v1wide, r.constants.c0) - r.c1q) <= 1e-9);
}

TEST_CASE("independent windowed oracle for c1") {
  // Brute-force layer-by-layer minimization at W = 40: plain gradient
  // descent on the chain energy with pinned ends, written out by hand.
  const auto& f = fixture();
  const int W = 40;
  const double pi = std::acos(-1.0);
  std::vector<double> u(2 * W + 1);
  for (int i = -W; i <= W; ++i) u[i + W] = -0.25 + 0.5 * (1 + std::tanh((i - 0.25) / 5.0));
  auto value = [&](int i) { return i < -W ? -0.25 : (i > W ? 0.75 : u[i + W]); };
  // per layer: sin(2 pi u_i) + (1/16)[(u_{i+1}-u_i)^2 + (u_{i-1}-u_i)^2], transverse bonds vanish for q = (1)
  auto energy = [&]() {
    double e = 0.0;
    for (int i = -W - 1; i <= W + 1; ++i) {
      const double c = value(i), a = value(i + 1) - c, b = value(i - 1) - c;
      e += std::sin(2 * pi * c) + (a * a + b * b) / 16.0 + 1.0;
    }
    return e;
  };
  const double dt = 0.01;
  for (int it = 0; it < 200000; ++it) {
    double gmax = 0.0;
    std::vector<double> g(u.size());
    for (int i = -W; i <= W; ++i) {
      const double c = value(i);
      g[i + W] = 2 * pi * std::cos(2 * pi * c) + (2 * c - value(i + 1) - value(i - 1)) / 4.0;
      gmax = std::max(gmax, std::abs(g[i + W]));
    }
    for (std::size_t k = 0; k < u.size(); ++k) u[k] -= dt * g[k];
    if (gmax < 1e-12) break;
  }
  CHECK(energy() == doctest::Approx(f.min1.c1q).epsilon(1e-9));
}

TEST_CASE("scaling c1q = prod(q) c1") {
  const auto& f = fixture();
  const HeteroMinimizeResult r2 = minimize_hetero(f.s, TransversePeriods{2}, f.gap0, FlowParams{});
  CHECK(std::abs(r2.c1q - 2 * f.min1.c1q) <= 2e-8);
  CHECK(r2.constants.c1 == doctest::Approx(f.min1.c1q).epsilon(1e-10));
}

TEST_CASE("seed at a converged minimizer is returned unchanged") {
  const auto& f = fixture();
  const HeteroMinimizeResult again =
      minimize_hetero(f.s, TransversePeriods{1}, f.gap0, FlowParams{}, {f.min1.v1});
  CHECK(std::abs(again.c1q - f.min1.c1q) <= 1e-12);
}

TEST_CASE("strip gradient vs finite differences and energy decrease of the strip flow") {
  const auto& f = fixture();
  const StripField& v1 = f.min1.v1;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(0.0, 0.3);
  StripField u = offset(v1, v1);
  for (double& x : u.values) x = d(rng);
  const StripField g = strip_gradient(*f.s, u, v1);
  const double c0 = f.min1.constants.c0;
  for (std::size_t k = 0; k < u.size(); k += 7) {
    StripField up = u, dn = u;
    up.values[k] += 1e-6;
    dn.values[k] -= 1e-6;
    const double fd = (renormalized_energy(*f.s, up, v1, c0) - renormalized_energy(*f.s, dn, v1, c0)) / 2e-6;
    CHECK(std::abs(fd - g.values[k]) / std::max(1.0, std::abs(g.values[k])) <= 1e-6);
  }
  const StripFlowResult r = flow_hetero(f.s, u, v1, c0, FlowParams{});
  for (std::size_t k = 1; k < r.outcome.trace.size(); ++k)
    CHECK(r.outcome.trace[k].energy <= r.outcome.trace[k - 1].energy + 1e-10);
  CHECK(r.outcome.residual <= 1e-10);
  // v1 itself is a fixed point
  const StripFlowResult fixed = flow_hetero(f.s, offset(v1, v1), v1, c0, FlowParams{});
  CHECK(strip_norm(fixed.field) <= 1e-12);
}

TEST_CASE("window margin errors") {
  const auto& f = fixture();
  const StripField narrow = pinned_strip(TransversePeriods{1}, 1, f.gap0, 0.0);
  CHECK_THROWS_AS(renormalized_energy(*f.s, narrow, narrow, -1.0), SupportError);
  WindowPolicy bad;
  bad.initial = 1;
  CHECK_THROWS_AS(minimize_hetero(f.s, TransversePeriods{1}, f.gap0, FlowParams{}, {}, bad), InvalidArgument);
}

TEST_CASE("heteroclinic gap pair and mountain pass on q = (1)") {
  const auto& f = fixture();
  const auto gap = find_gap_pair_hetero(f.s, f.min1, f.gap0, 8, 0, FlowParams{});
  REQUIRE(gap);
  const StripField w = gap->width();
  for (double v : w.values) CHECK(v >= 0.0);
  CHECK(*std::max_element(w.values.begin(), w.values.end()) > 1e-3);
  const double c0 = gap->c0;
  CHECK(renormalized_energy(*f.s, offset(gap->w1, gap->v1), gap->v1, c0) ==
        doctest::Approx(gap->c1q).epsilon(1e-9));
  const StripMinimaxResult r = mountain_pass_hetero(f.s, *gap, MinimaxParams{}, 65);
  CHECK(r.success());
  CHECK(r.excess() > 1e-6);
  CHECK(r.residual <= 1e-8);
  CHECK(r.level == doctest::Approx(gap->c1q).epsilon(1e-9));
  CHECK(r.details.box_margin >= 0.0);
  // window doubling leaves d1 unchanged
  const StripField wide = rewindow(r.critical_field, 2 * r.critical_field.half_width);
  StripField abs_wide = rewindow(gap->v1, 2 * gap->v1.half_width);
  for (std::size_t k = 0; k < abs_wide.size(); ++k) abs_wide.values[k] += wide.values[k];
  CHECK(std::abs(strip_energy(*f.s, abs_wide, c0) - r.value) <= 1e-8);
}

TEST_CASE("no heteroclinic gap for the free chain") {
  PotentialDescriptor d;
  d.name = "free-chain";
  CHECK_FALSE(find_gap_pair_hetero(make_potential(d), TransversePeriods{1}, 8, 0, FlowParams{}));
}

TEST_CASE("bound scan rows") {
  const auto& f = fixture();
  const auto gap = find_gap_pair_hetero(f.s, f.min1, f.gap0, 8, 0, FlowParams{});
  REQUIRE(gap);
  const HeteroBoundTable t = bound_scan_hetero(f.s, 2, *gap, MinimaxParams{});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1].c1q == doctest::Approx(2 * t.rows[0].c1q).epsilon(1e-8));
  for (const auto& row : t.rows) {
    CHECK(row.ok);
    CHECK(row.excess <= row.witness + 1e-9);
  }
}

TEST_CASE("asymptotics report") {
  const auto& f = fixture();
  const AsymptoticsReport a = asymptotics_report(f.min1.v1, f.gap0);
  CHECK(a.left == "v0");
  CHECK(a.right == "w0");
  // offset 0 over v1 is v1 itself
  StripField zero_offset = f.min1.v1;
  const StripField zero = offset(f.min1.v1, f.min1.v1);
  for (std::size_t k = 0; k < zero_offset.size(); ++k) zero_offset.values[k] += zero.values[k];
  const AsymptoticsReport z = asymptotics_report(zero_offset, f.gap0);
  CHECK(z.left == "v0");
  CHECK(z.right == "w0");
  StripField reversed = f.min1.v1;
  std::reverse(reversed.values.begin(), reversed.values.end());
  std::swap(reversed.left_tail, reversed.right_tail);
  const AsymptoticsReport r = asymptotics_report(reversed, f.gap0);
  CHECK(r.left == "w0");
  CHECK(r.right == "v0");
}
