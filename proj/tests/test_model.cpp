#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fk/error.hpp"
#include "fk/field.hpp"
#include "fk/lattice.hpp"
#include "fk/model.hpp"
#include "fk/potential.hpp"

using namespace fk;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent evaluation of the classical FK site energy at a 2-D field.
double classical_by_hand(const std::function<double(int, int)>& u, int a, int b) {
  const double c = u(a, b);
  double coupling = 0.0;
  for (auto [da, db] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    const double d = u(a + da, b + db) - c;
    coupling += d * d;
  }
  return std::sin(2 * kPi * c) + coupling / 16.0;
}

TorusField random_torus(const Periods& p, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  TorusField u(p, 0.0);
  for (double& v : u.values) v = d(rng);
  return u;
}

}  // namespace

TEST_CASE("lattice index norm is l1 and ball offsets start at the origin") {
  CHECK(LatticeIndex{3, -2, 1}.norm() == 6);
  const auto ball = ball_offsets(2, 1);
  REQUIRE(ball.size() == 5);
  CHECK(ball.front() == LatticeIndex{0, 0});
  CHECK(ball_offsets(3, 2).size() == 25);
  CHECK(wrap(-1, 3) == 2);
  CHECK(wrap(7, 3) == 1);
}

TEST_CASE("shift: identity, full period and the constant minimizer") {
  std::mt19937_64 rng(1);
  const TorusField u = random_torus(Periods{2, 1}, rng);
  CHECK(shift(u, 1, 0).values == u.values);
  CHECK(shift(u, 1, 2).values == u.values);
  const TorusField m(Periods{1, 1}, -0.25);
  CHECK(shift(m, 1, 5).values == m.values);
  // shift(u, axis, k)(i) = u(i + k e_axis)
  const TorusField w = random_torus(Periods{3, 2}, rng);
  const TorusField s = shift(w, 2, 1);
  CHECK(s.at({1, 0}) == w.at({1, 1}));
  CHECK(s.periods == w.periods);
  CHECK_THROWS_AS(shift(u, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(shift(u, 3, 1), InvalidArgument);
}

TEST_CASE("local energy of classical FK matches the example values") {
  const auto s = classical_fk();
  CHECK(local_energy(*s, constant_field(2, -0.25), LatticeIndex{4, -7}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(local_energy(*s, constant_field(2, 0.25), LatticeIndex{0, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  for (double c : {0.1, 0.37, -2.6})
    CHECK(local_energy(*s, constant_field(2, c), LatticeIndex{1, 1}) ==
          doctest::Approx(std::sin(2 * kPi * c)).epsilon(1e-13));
}

TEST_CASE("local energy agrees with a hand evaluation and is invariant under u + 1") {
  const auto s = classical_fk();
  std::mt19937_64 rng(2);
  const TorusField u = random_torus(Periods{3, 2}, rng);
  auto at = [&](int a, int b) { return u.at({a, b}); };
  for (int a = -1; a < 4; ++a)
    for (int b = -1; b < 3; ++b) {
      const double e = local_energy(*s, u, LatticeIndex{a, b});
      CHECK(e == doctest::Approx(classical_by_hand(at, a, b)).epsilon(1e-13));
      CHECK(local_energy(*s, u + TorusField(u.periods, 1.0), LatticeIndex{a, b}) ==
            doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("local energy needs the whole ball inside a finite field") {
  const auto s = classical_fk();
  FiniteField f(LatticeIndex{0, 0}, LatticeIndex{2, 2}, 0.1);
  CHECK_NOTHROW(local_energy(*s, f, LatticeIndex{1, 1}));
  CHECK_THROWS_AS(local_energy(*s, f, LatticeIndex{0, 1}), SupportError);
  CHECK_THROWS_AS(el_residual(*s, f, LatticeIndex{1, 1}), SupportError);
}

TEST_CASE("el_residual examples") {
  const auto s = classical_fk();
  CHECK(std::abs(el_residual(*s, constant_field(2, -0.25), LatticeIndex{0, 0})) < 1e-13);
  CHECK(el_residual(*s, constant_field(2, 0.0), LatticeIndex{3, 3}) == doctest::Approx(2 * kPi));
}

TEST_CASE("el_residual matches a finite difference of the total energy and is shift equivariant") {
  const auto s = classical_fk();
  std::mt19937_64 rng(3);
  const TorusField u = random_torus(Periods{3, 3}, rng);
  // On the torus the residual at i is d/du(i) of the sum of all cell energies.
  auto total = [&](const TorusField& f) {
    double e = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) e += local_energy(*s, f, f.periods.unflatten(k));
    return e;
  };
  const double h = 1e-6;
  for (std::size_t k = 0; k < u.size(); ++k) {
    TorusField up = u, dn = u;
    up.values[k] += h;
    dn.values[k] -= h;
    const double fd = (total(up) - total(dn)) / (2 * h);
    CHECK(el_residual(*s, u, u.periods.unflatten(k)) == doctest::Approx(fd).epsilon(1e-6));
  }
  const TorusField v = shift(u, 1, 2);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const LatticeIndex i = u.periods.unflatten(k);
    LatticeIndex j = i;
    j[0] += 2;
    CHECK(el_residual(*s, v, i) == doctest::Approx(el_residual(*s, u, j)).epsilon(1e-13));
  }
}

TEST_CASE("classical FK satisfies the sampled assumptions") {
  const auto report = validate_assumptions(*classical_fk(), 200, 11);
  CHECK(report.all_passed());
  CHECK(report.check("S2").heuristic);
  CHECK(classical_fk()->second_derivative_bound() >= 4 * kPi * kPi);
}

TEST_CASE("a flipped bond breaks S3") {
  PotentialDescriptor d;
  d.name = "flipped-bond-fk";
  const auto report = validate_assumptions(*make_potential(d), 100, 5);
  CHECK_FALSE(report.check("S3").passed);
  CHECK(report.check("S1").passed);
  CHECK(report.check("S4").passed);
}

TEST_CASE("an uncoupled on-site potential fails S3 strictness") {
  FkPotential s(2, OnSiteKind::kSine, 1.0, 0.0);
  const auto report = validate_assumptions(s, 100, 5);
  CHECK_FALSE(report.check("S3").passed);
}

TEST_CASE("S1 and derivative accuracy on random configurations") {
  const auto s = classical_fk();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  const std::size_t b = s->ball_size();
  std::vector<double> x(b), y(b), g(b), h(b * b);
  for (int t = 0; t < 1000; ++t) {
    for (auto& v : x) v = d(rng);
    for (std::size_t k = 0; k < b; ++k) y[k] = x[k] + 1.0;
    CHECK(std::abs(s->eval(y) - s->eval(x)) <= 1e-12 * (1 + std::abs(s->eval(x))));
  }
  const double step = 1e-6;
  for (int t = 0; t < 100; ++t) {
    for (auto& v : x) v = d(rng);
    s->grad(x, g);
    s->hess(x, h);
    for (std::size_t k = 0; k < b; ++k) {
      y = x;
      y[k] += step;
      const double up = s->eval(y);
      std::vector<double> gu(b), gd(b);
      s->grad(y, gu);
      y[k] -= 2 * step;
      const double dn = s->eval(y);
      s->grad(y, gd);
      const double fd = (up - dn) / (2 * step);
      CHECK(std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])) <= 1e-6);
      for (std::size_t j = 0; j < b; ++j) {
        const double fdh = (gu[j] - gd[j]) / (2 * step);
        CHECK(std::abs(fdh - h[j * b + k]) / std::max(1.0, std::abs(h[j * b + k])) <= 1e-6);
      }
    }
  }
}

TEST_CASE("plug-in potential uses the finite-difference fallback") {
  FunctionPotential s("quadratic", 1, 1, 4.0, [](std::span<const double> x) {
    return x[0] * x[0] + (x[1] - x[0]) * (x[1] - x[0]);
  });
  CHECK_FALSE(s.has_analytic_derivatives());
  std::vector<double> x{0.3, -0.2, 0.5}, g(3);
  s.grad(x, g);
  // ball order: origin first
  CHECK(g[0] == doctest::Approx(2 * 0.3 - 2 * (x[1] - x[0])).epsilon(1e-6));
}

TEST_CASE("potential descriptors") {
  PotentialDescriptor d;
  d.name = "nope";
  CHECK_THROWS_AS(make_potential(d), InvalidArgument);
  d.name = "classical-fk";
  d.params["dx"] = 1.0;
  CHECK_THROWS_WITH_AS(make_potential(d), doctest::Contains("dx"), InvalidArgument);
  d.params.clear();
  d.params["amplitude"] = 2.0;
  CHECK(local_energy(*make_potential(d), constant_field(2, 0.25), LatticeIndex{0, 0}) ==
        doctest::Approx(2.0));
  d.params.clear();
  d.name = "two-well-fk";
  CHECK(local_energy(*make_potential(d), constant_field(2, 0.25), LatticeIndex{0, 0}) ==
        doctest::Approx(0.0).epsilon(1e-15));
}
