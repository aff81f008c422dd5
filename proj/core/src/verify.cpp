#include "fk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <random>

#include "fk/error.hpp"
#include "fk/mpp.hpp"

namespace fk {

OracleGrid2D OracleGrid2D::sample(int resolution, const std::function<double(double, double)>& f) {
  if (resolution < 101) throw InvalidArgument("oracle grid resolution must be >= 101");
  OracleGrid2D g;
  g.resolution = resolution;
  const auto r = static_cast<std::size_t>(resolution);
  g.values.resize(r * r);
  for (int ia = 0; ia < resolution; ++ia)
    for (int ib = 0; ib < resolution; ++ib) {
      const double v = f(g.coordinate(ia), g.coordinate(ib));
      if (!std::isfinite(v)) throw InvalidArgument("oracle landscape is not finite");
      g.values[static_cast<std::size_t>(ia) * r + static_cast<std::size_t>(ib)] = v;
    }
  return g;
}

std::function<double(double, double)> reduced_landscape(PotentialPtr s, const GapPair& gap) {
  const Periods& p = gap.v0.periods;
  if (p[0] != 2) throw InvalidArgument("the two-site reduction needs p = (2, 1, ..., 1)");
  for (std::size_t k = 1; k < p.dimension(); ++k)
    if (p[k] != 1) throw InvalidArgument("the two-site reduction needs p = (2, 1, ..., 1)");
  const TorusField width = gap.width();
  auto land = std::make_shared<EnergyLandscape>(torus_landscape(std::move(s), gap.v0, width));
  return [land, width](double a, double b) {
    const std::vector<double> x{a * width.values[0], b * width.values[1]};
    return land->energy(x);
  };
}

double bottleneck_minimax_2d(const OracleGrid2D& grid, std::pair<int, int> start,
                             std::pair<int, int> end) {
  const int r = grid.resolution;
  auto inside = [r](std::pair<int, int> q) {
    return q.first >= 0 && q.first < r && q.second >= 0 && q.second < r;
  };
  if (!inside(start) || !inside(end)) throw InvalidArgument("oracle endpoints must be grid nodes");
  const std::size_t n = static_cast<std::size_t>(r) * static_cast<std::size_t>(r);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> done(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto flat = [r](int a, int b) { return static_cast<std::size_t>(a) * static_cast<std::size_t>(r) + static_cast<std::size_t>(b); };
  const std::size_t s0 = flat(start.first, start.second), target = flat(end.first, end.second);
  best[s0] = grid.values[s0];
  heap.emplace(best[s0], s0);
  while (!heap.empty()) {
    const auto [key, node] = heap.top();
    heap.pop();
    if (done[node]) continue;
    done[node] = 1;
    if (node == target) return key;
    const int a = static_cast<int>(node / static_cast<std::size_t>(r));
    const int b = static_cast<int>(node % static_cast<std::size_t>(r));
    for (int da = -1; da <= 1; ++da)
      for (int db = -1; db <= 1; ++db) {
        if (!da && !db) continue;
        const int na = a + da, nb = b + db;
        if (na < 0 || na >= r || nb < 0 || nb >= r) continue;
        const std::size_t m = flat(na, nb);
        const double k = std::max(key, grid.values[m]);
        if (k < best[m]) {
          best[m] = k;
          heap.emplace(k, m);
        }
      }
  }
  return best[target];
}

double bottleneck_minimax_2d(const OracleGrid2D& grid) {
  return bottleneck_minimax_2d(grid, {0, 0}, {grid.resolution - 1, grid.resolution - 1});
}

namespace {

struct SuiteContext {
  PotentialPtr s;
  Periods p;
  std::optional<GapPair> gap;
  TorusField lower;  // absolute box used for random fields
  TorusField upper;
  FlowParams flow;
};

std::mt19937_64 property_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{seed, index};
  return std::mt19937_64(seq);
}

// Uniform in [lower, upper], then one smoothing flow step.
TorusField random_field(const SuiteContext& ctx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TorusField u = ctx.lower;
  for (std::size_t k = 0; k < u.size(); ++k)
    u.values[k] += unit(rng) * (ctx.upper.values[k] - ctx.lower.values[k]);
  const TorusField zero(ctx.p, 0.0);
  const EnergyLandscape land = torus_landscape(ctx.s, zero);
  std::vector<double> g(u.size()), out(u.size());
  land.gradient(u.values, g);
  rk4_step(land, u.values, g, land.safe_time_step(), out);
  return TorusField(ctx.p, out);
}

PropertyReport start(const std::string& name, int trials, std::uint64_t seed) {
  PropertyReport r;
  r.name = name;
  r.trials = trials;
  r.seed = seed;
  r.worst_margin = std::numeric_limits<double>::infinity();
  return r;
}

void finish(PropertyReport& r) {
  r.passed = r.worst_margin >= 0.0;
  if (r.trials == 0) r.worst_margin = 0.0;
}

PropertyReport submodularity(const SuiteContext& ctx, int trials, std::uint64_t seed,
                             double thr) {
  PropertyReport r = start("submodularity", trials, seed);
  auto rng = property_rng(seed, 1);
  for (int t = 0; t < trials; ++t) {
    const TorusField u = random_field(ctx, rng), v = random_field(ctx, rng);
    TorusField hi = u, lo = u;
    for (std::size_t k = 0; k < u.size(); ++k) {
      hi.values[k] = std::max(u.values[k], v.values[k]);
      lo.values[k] = std::min(u.values[k], v.values[k]);
    }
    const double slack = torus_energy(*ctx.s, u) + torus_energy(*ctx.s, v) -
                         torus_energy(*ctx.s, hi) - torus_energy(*ctx.s, lo);
    r.worst_margin = std::min(r.worst_margin, slack + thr);
  }
  finish(r);
  return r;
}

// Flows u and the gap d = Phi(u + d0) - Phi(u) together: u' = -grad I(u),
// d' = -A d with A the Hessian averaged over the segment [u, u + d]
// (3-point Gauss). Subtracting two separately flowed fields loses the gap to
// rounding once both settle on the same attracting state.
std::vector<double> flowed_gap(const EnergyLandscape& land, std::vector<double> u,
                               std::vector<double> d, double time) {
  const std::size_t n = u.size();
  const double nodes[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
  const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  auto rhs = [&](const std::vector<double>& x, const std::vector<double>& y,
                 std::vector<double>& fx, std::vector<double>& fy) {
    land.gradient(x, fx);
    for (double& v : fx) v = -v;
    std::fill(fy.begin(), fy.end(), 0.0);
    std::vector<double> z(n);
    for (int q = 0; q < 3; ++q) {
      for (std::size_t k = 0; k < n; ++k) z[k] = x[k] + nodes[q] * y[k];
      const std::vector<double> h = land.hessian(z);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h[i * n + j] * y[j];
        fy[i] -= weights[q] * acc;
      }
    }
  };
  const long steps = static_cast<long>(std::ceil(time / land.safe_time_step()));
  const double dt = time / static_cast<double>(std::max(1L, steps));
  std::vector<double> k1x(n), k1y(n), k2x(n), k2y(n), k3x(n), k3y(n), k4x(n), k4y(n), tx(n), ty(n);
  for (long step = 0; step < steps; ++step) {
    rhs(u, d, k1x, k1y);
    for (std::size_t k = 0; k < n; ++k) tx[k] = u[k] + 0.5 * dt * k1x[k], ty[k] = d[k] + 0.5 * dt * k1y[k];
    rhs(tx, ty, k2x, k2y);
    for (std::size_t k = 0; k < n; ++k) tx[k] = u[k] + 0.5 * dt * k2x[k], ty[k] = d[k] + 0.5 * dt * k2y[k];
    rhs(tx, ty, k3x, k3y);
    for (std::size_t k = 0; k < n; ++k) tx[k] = u[k] + dt * k3x[k], ty[k] = d[k] + dt * k3y[k];
    rhs(tx, ty, k4x, k4y);
    for (std::size_t k = 0; k < n; ++k) {
      u[k] += dt / 6.0 * (k1x[k] + 2.0 * k2x[k] + 2.0 * k3x[k] + k4x[k]);
      d[k] += dt / 6.0 * (k1y[k] + 2.0 * k2y[k] + 2.0 * k3y[k] + k4y[k]);
    }
  }
  return d;
}

PropertyReport comparison(const SuiteContext& ctx, int trials, std::uint64_t seed, double time) {
  PropertyReport r = start("comparison", trials, seed);
  r.note = "min sitewise gap after the flow; must be > 0";
  auto rng = property_rng(seed, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const TorusField zero(ctx.p, 0.0);
  const EnergyLandscape land = torus_landscape(ctx.s, zero);
  for (int t = 0; t < trials; ++t) {
    const TorusField u1 = random_field(ctx, rng);
    std::vector<double> raise(u1.size(), 0.0);
    // Raise a random nonempty subset of sites.
    const std::size_t forced = static_cast<std::size_t>(unit(rng) * static_cast<double>(u1.size()));
    for (std::size_t k = 0; k < raise.size(); ++k)
      if (k == forced || unit(rng) < 0.5)
        raise[k] = (0.01 + 0.1 * unit(rng)) * (ctx.upper.values[k] - ctx.lower.values[k]);
    const auto gap = flowed_gap(land, u1.values, raise, time);
    r.worst_margin = std::min(r.worst_margin, *std::min_element(gap.begin(), gap.end()));
  }
  r.passed = trials == 0 || r.worst_margin > 0.0;
  if (trials == 0) r.worst_margin = 0.0;
  return r;
}

PropertyReport strong_comparison(const SuiteContext& ctx, int trials, std::uint64_t seed) {
  PropertyReport r = start("strong-comparison", trials, seed);
  r.note = "min of v - u over ordered distinct stationary pairs; must exceed 1e-8";
  auto rng = property_rng(seed, 3);
  const TorusField zero(ctx.p, 0.0);
  const EnergyLandscape land = torus_landscape(ctx.s, zero);
  FlowParams fp = ctx.flow;
  fp.trace_stride = 0;
  std::vector<std::vector<double>> stationary;
  auto add = [&](std::vector<double> x) {
    for (const auto& known : stationary)
      if ((TorusField(ctx.p, known) - TorusField(ctx.p, x)).linf_norm() <= 1e-6)
        return;
    stationary.push_back(std::move(x));
  };
  if (ctx.gap) {
    add(ctx.gap->v0.values);
    add(ctx.gap->w0.values);
  }
  for (int t = 0; t < trials; ++t) {
    FlowOutcome out = integrate_flow(land, random_field(ctx, rng).values, fp);
    if (!out.converged) continue;
    NewtonOutcome pol = newton_polish(land, out.x, 1e-13, 20);
    add(pol.residual < out.residual ? pol.x : out.x);
  }
  const std::size_t base = stationary.size();
  // Integer and lattice translates are stationary too.
  for (std::size_t k = 0; k < base; ++k) {
    const TorusField u(ctx.p, stationary[k]);
    for (std::size_t axis = 1; axis <= ctx.p.dimension(); ++axis)
      if (ctx.p[axis - 1] > 1) add(shift(u, axis, 1).values);
    add((u + TorusField(ctx.p, 1.0)).values);
  }
  constexpr double touch = 1e-8;
  for (std::size_t a = 0; a < stationary.size(); ++a)
    for (std::size_t b = 0; b < stationary.size(); ++b) {
      if (a == b) continue;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t k = 0; k < stationary[a].size(); ++k) {
        const double d = stationary[b][k] - stationary[a][k];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      if (lo < -touch || hi <= touch) continue;  // not ordered, or equal
      r.worst_margin = std::min(r.worst_margin, lo - touch);
    }
  if (!std::isfinite(r.worst_margin)) r.worst_margin = 0.0;
  r.passed = r.worst_margin >= 0.0;
  return r;
}

PropertyReport energy_decrease(const SuiteContext& ctx, int trials, std::uint64_t seed,
                               double thr) {
  PropertyReport r = start("energy-decrease", trials, seed);
  auto rng = property_rng(seed, 4);
  const TorusField zero(ctx.p, 0.0);
  const EnergyLandscape land = torus_landscape(ctx.s, zero);
  FlowParams fp = ctx.flow;
  fp.trace_stride = 1;
  for (int t = 0; t < trials; ++t) {
    const FlowOutcome out = flow_for(land, random_field(ctx, rng).values, 1.0, fp);
    double rise = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < out.trace.size(); ++k)
      rise = std::max(rise, out.trace[k].energy - out.trace[k - 1].energy);
    r.worst_margin = std::min(r.worst_margin, thr - rise);
  }
  finish(r);
  return r;
}

PropertyReport gradient_fd(const SuiteContext& ctx, int trials, std::uint64_t seed, double thr) {
  PropertyReport r = start("gradient-fd", trials, seed);
  auto rng = property_rng(seed, 5);
  const TorusField zero(ctx.p, 0.0);
  constexpr double h = 1e-6;
  for (int t = 0; t < trials; ++t) {
    const TorusField u = random_field(ctx, rng);
    const TorusField g = gradient(*ctx.s, u, zero);
    double worst = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      TorusField up = u, dn = u;
      up.values[k] += h;
      dn.values[k] -= h;
      const double fd = (torus_energy(*ctx.s, up) - torus_energy(*ctx.s, dn)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g.values[k]) / std::max(1.0, std::abs(g.values[k])));
    }
    r.worst_margin = std::min(r.worst_margin, thr - worst);
  }
  finish(r);
  return r;
}

PropertyReport box_invariance(const SuiteContext& ctx, int trials, std::uint64_t seed,
                              double thr) {
  PropertyReport r = start("box-invariance", trials, seed);
  auto rng = property_rng(seed, 6);
  const TorusField width = ctx.gap->width();
  const EnergyLandscape land = torus_landscape(ctx.s, ctx.gap->v0, width);
  FlowParams fp = ctx.flow;
  fp.trace_stride = 0;
  for (int t = 0; t < trials; ++t) {
    const TorusField u = random_field(ctx, rng) - ctx.gap->v0;
    std::vector<double> x = u.values;
    land.clip(x);
    const auto y = flow_for(land, x, 1.0, fp).x;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < y.size(); ++k) m = std::min({m, y[k], width.values[k] - y[k]});
    r.worst_margin = std::min(r.worst_margin, m + thr);
  }
  finish(r);
  return r;
}

PropertyReport clip_decrease(const SuiteContext& ctx, int trials, std::uint64_t seed,
                             double thr) {
  PropertyReport r = start("clip-decrease", trials, seed);
  auto rng = property_rng(seed, 7);
  std::uniform_real_distribution<double> wide(-0.5, 1.5);
  const TorusField width = ctx.gap->width();
  const EnergyLandscape land = torus_landscape(ctx.s, ctx.gap->v0, width);
  for (int t = 0; t < trials; ++t) {
    TorusField u(ctx.p, 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) u.values[k] = wide(rng) * width.values[k];
    const TorusField clipped = clip_to_box(u, *ctx.gap);
    r.worst_margin =
        std::min(r.worst_margin, land.energy(u.values) - land.energy(clipped.values) + thr);
  }
  finish(r);
  return r;
}

PropertyReport endpoint_fixity(const SuiteContext& ctx, int trials, std::uint64_t seed,
                               double thr) {
  PropertyReport r = start("endpoint-fixity", trials, seed);
  auto rng = property_rng(seed, 9);
  std::uniform_real_distribution<double> horizon(0.05, 2.0);
  const TorusField width = ctx.gap->width();
  const EnergyLandscape land = torus_landscape(ctx.s, ctx.gap->v0, width);
  FlowParams fp = ctx.flow;
  fp.trace_stride = 0;
  const TorusField ends[] = {TorusField(ctx.p, 0.0), width};
  for (int t = 0; t < trials; ++t) {
    const TorusField& end = ends[t % 2];
    const auto y = flow_for(land, end.values, horizon(rng), fp).x;
    r.worst_margin = std::min(r.worst_margin, thr - (TorusField(ctx.p, y) - end).linf_norm());
  }
  finish(r);
  return r;
}

PropertyReport scaling(const SuiteContext& ctx, std::uint64_t seed, double thr) {
  const std::size_t n = ctx.p.dimension();
  std::vector<std::vector<int>> shapes{{1}, {2}, {3}, {2, 2}, {3, 2}};
  PropertyReport r = start("scaling", static_cast<int>(shapes.size()), seed);
  auto rng = property_rng(seed, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto level = [&](const Periods& p) {
    std::vector<TorusField> seeds = constant_seeds(p, 16);
    for (int k = 0; k < 4; ++k) {
      TorusField u(p, 0.0);
      for (double& v : u.values) v = unit(rng);
      seeds.push_back(std::move(u));
    }
    return minimize_periodic(ctx.s, p, seeds, ctx.flow).c0p;
  };
  const double c0 = level(Periods::ones(n));
  for (auto shape : shapes) {
    if (shape.size() > n) continue;
    shape.resize(n, 1);
    const Periods p(shape);
    const double cells = static_cast<double>(p.cells());
    r.worst_margin = std::min(r.worst_margin, thr * cells - std::abs(level(p) - cells * c0));
  }
  finish(r);
  return r;
}

}  // namespace

std::vector<PropertyReport> run_property_suite(PotentialPtr s, const Periods& p,
                                               std::uint64_t seed, int trials,
                                               const PropertyThresholds& thr) {
  if (trials < 0) throw InvalidArgument("trials must be >= 0");
  if (trials == 0) return {};
  SuiteContext ctx{s, p, std::nullopt, TorusField(p, 0.0), TorusField(p, 1.0), FlowParams{}};
  if (auto g = find_gap_pair(s, Periods::ones(p.dimension()), 8, seed, ctx.flow)) {
    ctx.gap = g->extended(p);
    ctx.lower = ctx.gap->v0;
    ctx.upper = ctx.gap->w0;
  }
  std::vector<PropertyReport> out;
  out.push_back(submodularity(ctx, trials, seed, thr.submodularity));
  out.push_back(comparison(ctx, trials, seed, thr.comparison_time));
  out.push_back(strong_comparison(ctx, trials, seed));
  out.push_back(energy_decrease(ctx, trials, seed, thr.energy_increase));
  out.push_back(gradient_fd(ctx, trials, seed, thr.gradient_relative));
  if (ctx.gap) {
    out.push_back(box_invariance(ctx, trials, seed, thr.box));
    out.push_back(clip_decrease(ctx, trials, seed, thr.clip));
    out.push_back(endpoint_fixity(ctx, trials, seed, thr.endpoint));
  } else {
    for (const char* name : {"box-invariance", "clip-decrease", "endpoint-fixity"}) {
      PropertyReport r = start(name, 0, seed);
      r.worst_margin = 0.0;
      r.note = "skipped: no gap pair";
      out.push_back(r);
    }
  }
  out.push_back(scaling(ctx, seed, thr.scaling));
  return out;
}

CrossCheckReport cross_check_mountain_pass(PotentialPtr s, const std::vector<int>& resolutions,
                                           int n_nodes, const MinimaxParams& params,
                                           std::uint64_t seed, double tolerance) {
  if (resolutions.empty()) throw InvalidArgument("cross check needs at least one resolution");
  CrossCheckReport rep;
  rep.tolerance = tolerance;
  const std::size_t n = s->dimension();
  std::vector<int> shape(n, 1);
  shape[0] = 2;
  const Periods p(shape);
  const GapPair gap = require_gap_pair(s, Periods::ones(n), 8, seed, params.flow).extended(p);
  rep.c0p = gap.c0p;
  const PathOnBox path = build_initial_path(PathKind::kChi, n_nodes, 2, gap);
  rep.node_flow = mountain_pass(s, gap, path, params, MinimaxMode::kNodeFlow).value;
  rep.heat_flow = mountain_pass(s, gap, path, params, MinimaxMode::kHeatFlow).value;

  const auto f = reduced_landscape(s, gap);
  for (int res : resolutions) {
    const OracleGrid2D grid = OracleGrid2D::sample(res, f);
    rep.oracle.emplace_back(res, bottleneck_minimax_2d(grid));
    if (res == resolutions.back()) {
      const auto it = std::max_element(grid.values.begin(), grid.values.end());
      const auto k = static_cast<std::size_t>(it - grid.values.begin());
      rep.grid_max = *it;
      rep.grid_max_a = grid.coordinate(static_cast<int>(k / static_cast<std::size_t>(res)));
      rep.grid_max_b = grid.coordinate(static_cast<int>(k % static_cast<std::size_t>(res)));
    }
  }
  const double oracle = rep.oracle.back().second;
  const double spread = std::max({rep.node_flow, rep.heat_flow, oracle}) -
                        std::min({rep.node_flow, rep.heat_flow, oracle});
  rep.agree = spread <= tolerance;
  if (!rep.agree)
    rep.message = "node-flow " + std::to_string(rep.node_flow) + ", heat-flow " +
                  std::to_string(rep.heat_flow) + ", oracle " + std::to_string(oracle);
  return rep;
}

}  // namespace fk
