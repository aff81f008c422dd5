#include "fk/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fk/error.hpp"

namespace fk {

namespace {

constexpr double kDedupTol = 1e-6;
constexpr int kMaxRefinements = 8;
constexpr std::size_t kContinuumCount = 8;

std::vector<double> infinite_box(std::size_t n) {
  return std::vector<double>(n, std::numeric_limits<double>::infinity());
}

bool is_minimizer_level(double e, double c0p) {
  return e <= c0p + 1e-8 * std::max(1.0, std::abs(c0p));
}

}  // namespace

GapPair GapPair::extended(const Periods& p) const {
  GapPair out = *this;
  out.v0 = extend_to(v0, p);
  out.w0 = extend_to(w0, p);
  out.c0p = c0p / static_cast<double>(v0.periods.cells()) * static_cast<double>(p.cells());
  return out;
}

double torus_energy(const SitePotential& s, const TorusField& u) {
  double e = 0.0;
  for (std::size_t f = 0; f < u.size(); ++f) e += local_energy(s, u, u.periods.unflatten(f));
  return e;
}

double relative_energy(const SitePotential& s, const TorusField& u, const TorusField& v0) {
  return torus_energy(s, u + v0);
}

TorusField gradient(const SitePotential& s, const TorusField& u, const TorusField& v0) {
  const TorusField abs = u + v0;
  TorusField g(u.periods, 0.0);
  for (std::size_t f = 0; f < u.size(); ++f) g.values[f] = el_residual(s, abs, u.periods.unflatten(f));
  return g;
}

EnergyLandscape torus_landscape(PotentialPtr s, const TorusField& v0) {
  TorusField upper(v0.periods, infinite_box(v0.size()));
  return EnergyLandscape::torus(std::move(s), v0, upper);
}

EnergyLandscape torus_landscape(PotentialPtr s, const TorusField& v0, const TorusField& upper) {
  return EnergyLandscape::torus(std::move(s), v0, upper);
}

TorusFlowResult flow(PotentialPtr s, const TorusField& u0, const TorusField& v0,
                     const FlowParams& params) {
  if (!(u0.periods == v0.periods)) throw InvalidArgument("flow: period mismatch");
  const EnergyLandscape land = torus_landscape(std::move(s), v0);
  FlowOutcome out = integrate_flow(land, u0.values, params);
  TorusField field(u0.periods, out.x);
  return {std::move(field), std::move(out)};
}

std::vector<TorusField> constant_seeds(const Periods& p, int count) {
  std::vector<TorusField> seeds;
  for (int k = 0; k < count; ++k) seeds.emplace_back(p, static_cast<double>(k) / count);
  return seeds;
}

MinimizeResult minimize_periodic(PotentialPtr s, const Periods& p,
                                 const std::vector<TorusField>& seeds, const FlowParams& params) {
  if (seeds.empty()) throw InvalidArgument("minimize_periodic needs at least one seed");
  const TorusField zero(p, 0.0);
  const EnergyLandscape land = torus_landscape(s, zero);
  FlowParams fp = params;
  fp.trace_stride = 0;

  MinimizeResult result;
  bool any = false;
  double best_energy = std::numeric_limits<double>::infinity();
  for (const auto& seed : seeds) {
    if (!(seed.periods == p)) throw InvalidArgument("seed periods differ from p");
    FlowOutcome out = integrate_flow(land, seed.values, fp);
    result.iterations += out.steps;
    if (!out.converged) continue;
    NewtonOutcome polished = newton_polish(land, out.x, 1e-14, 20);
    if (polished.residual > out.residual) {
      polished.x = out.x;
      polished.residual = out.residual;
      polished.energy = out.energy;
    }
    any = true;
    TorusField limit = lift_normalize(TorusField(p, polished.x), 0.0);
    const double e = land.energy(limit.values);
    bool duplicate = false;
    for (const auto& known : result.limits)
      if (periodic_distance(known, limit) <= kDedupTol) duplicate = true;
    if (!duplicate) {
      result.limits.push_back(limit);
      result.limit_energies.push_back(e);
      result.residuals.push_back(polished.residual);
    }
    if (e < best_energy) {
      best_energy = e;
      result.best = limit;
    }
  }
  if (!any) throw SolverError("no seed converged within maxSteps");
  result.c0p = land.energy(result.best.values);
  return result;
}

std::optional<GapPair> find_gap_pair(PotentialPtr s, const Periods& p, int probes,
                                     std::uint64_t seed, const FlowParams& params) {
  if (probes < 1) throw InvalidArgument("probes must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<TorusField> seeds = constant_seeds(p, 16);
  for (int k = 0; k < probes; ++k) {
    TorusField r(p, 0.0);
    for (double& v : r.values) v = unit(rng);
    seeds.push_back(std::move(r));
  }
  const MinimizeResult min = minimize_periodic(s, p, seeds, params);
  const double c0p = min.c0p;

  std::vector<TorusField> minimizers;
  for (std::size_t k = 0; k < min.limits.size(); ++k)
    if (is_minimizer_level(min.limit_energies[k], c0p))
      minimizers.push_back(lift_normalize(min.limits[k], -0.5));
  if (minimizers.size() > kContinuumCount) return std::nullopt;
  std::sort(minimizers.begin(), minimizers.end(),
            [](const TorusField& a, const TorusField& b) { return a.values[0] < b.values[0]; });

  GapPair gap;
  gap.v0 = minimizers.front();
  gap.w0 = minimizers.size() > 1 ? minimizers[1] : gap.v0 + TorusField(p, 1.0);
  gap.c0p = c0p;
  auto ordered = [](const TorusField& a, const TorusField& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
      if (!(a.values[k] < b.values[k])) return false;
    return true;
  };
  if (!ordered(gap.v0, gap.w0)) gap.w0 = gap.v0 + TorusField(p, 1.0);

  const TorusField zero(p, 0.0);
  const EnergyLandscape land = torus_landscape(s, zero);
  FlowParams fp = params;
  fp.trace_stride = 0;
  const int combos = std::max(probes - 1, 1);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  for (int refinement = 0;; ++refinement) {
    if (refinement > kMaxRefinements) return std::nullopt;
    gap.evidence = {};
    gap.evidence.refinements = refinement;
    std::vector<TorusField> distinct;
    bool refined = false;
    for (int k = 1; k <= combos && !refined; ++k) {
      const double theta = probes > 1 ? static_cast<double>(k) / probes : 0.5;
      std::vector<double> x(p.cells());
      for (std::size_t f = 0; f < x.size(); ++f) {
        const double lo = gap.v0.values[f], hi = gap.w0.values[f];
        const double mid = theta * lo + (1.0 - theta) * hi;
        x[f] = std::clamp(mid + 0.1 * (hi - lo) * jitter(rng), lo, hi);
      }
      ++gap.evidence.probes;
      FlowOutcome out = integrate_flow(land, x, fp);
      if (!out.converged) continue;
      NewtonOutcome pol = newton_polish(land, out.x, 1e-14, 20);
      const std::vector<double>& lim = pol.residual < out.residual ? pol.x : out.x;
      TorusField limit(p, lim);
      bool seen = false;
      for (const auto& d : distinct)
        if (periodic_distance(d, limit) <= kDedupTol) seen = true;
      if (!seen) distinct.push_back(limit);

      const double e = land.energy(lim);
      if (!is_minimizer_level(e, c0p)) continue;
      if (periodic_distance(limit, gap.v0) <= kDedupTol ||
          periodic_distance(limit, gap.w0) <= kDedupTol)
        continue;
      bool inside = true;
      for (std::size_t f = 0; f < lim.size(); ++f)
        if (!(lim[f] > gap.v0.values[f] + 1e-9 && lim[f] < gap.w0.values[f] - 1e-9)) inside = false;
      if (inside) {
        gap.w0 = limit;
        refined = true;
      }
    }
    gap.evidence.distinct_limits = static_cast<int>(distinct.size());
    if (!refined) break;
  }
  return gap;
}

GapPair require_gap_pair(PotentialPtr s, const Periods& p, int probes, std::uint64_t seed,
                         const FlowParams& params) {
  auto gap = find_gap_pair(std::move(s), p, probes, seed, params);
  if (!gap) throw NoGapError();
  return *gap;
}

BoxMaxResult box_maximize(PotentialPtr s, const GapPair& gap, std::vector<TorusField> seeds,
                          double tol, long max_iterations) {
  const TorusField width = gap.width();
  const EnergyLandscape land = torus_landscape(s, gap.v0, width);
  if (seeds.empty()) seeds.push_back(0.5 * width);
  const double step = 2.0 * land.safe_time_step();  // 1 / Lipschitz constant
  const std::size_t n = width.size();

  BoxMaxResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<double> g(n);
  for (const auto& seed : seeds) {
    if (!(seed.periods == width.periods)) throw InvalidArgument("seed periods differ from gap");
    std::vector<double> x = seed.values;
    land.clip(x);
    long it = 0;
    double value = land.energy_and_gradient(x, g);
    for (; it < max_iterations; ++it) {
      double pg = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const bool at_lo = x[k] <= 0.0 && g[k] <= 0.0;
        const bool at_hi = x[k] >= width.values[k] && g[k] >= 0.0;
        if (!at_lo && !at_hi) pg += g[k] * g[k];
      }
      if (std::sqrt(pg) <= tol) break;
      for (std::size_t k = 0; k < n; ++k) x[k] += step * g[k];
      land.clip(x);
      const double next = land.energy_and_gradient(x, g);
      if (!std::isfinite(next)) throw SolverError("box_maximize diverged");
      value = next;
    }
    if (value > best.value) {
      best = {};
      best.field = TorusField(width.periods, x);
      best.value = value;
      best.iterations = it;
    }
  }

  land.gradient(best.field.values, g);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = best.field.values[k];
    if (x <= 0.0) {
      ++best.lower_clipped;
      if (g[k] > tol) best.lower_sign_ok = false;
    } else if (x >= width.values[k]) {
      ++best.upper_clipped;
      if (g[k] < -tol) best.upper_sign_ok = false;
    } else {
      ++best.interior_sites;
      best.interior_residual = std::max(best.interior_residual, std::abs(g[k]));
    }
  }
  return best;
}

}  // namespace fk
