#include "fk/hetero.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fk/error.hpp"
#include "fk/model.hpp"
#include "fk/mpp.hpp"

namespace fk {

namespace {

constexpr double kDedupTol = 1e-6;
constexpr int kMaxRefinements = 8;

void same_shape(const StripField& a, const StripField& b) {
  if (!(a.q == b.q) || a.half_width != b.half_width)
    throw InvalidArgument("strip fields have different shapes");
}

// Window values of a + b; tails from a.
StripField plus(const StripField& a, const StripField& b) {
  same_shape(a, b);
  StripField out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.values[k] += b.values[k];
  return out;
}

// Offset a - b on the window; tails zero.
StripField minus(const StripField& a, const StripField& b) {
  same_shape(a, b);
  StripField out(a.q, a.half_width, 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) out.values[k] = a.values[k] - b.values[k];
  return out;
}

double window_distance(const StripField& a, const StripField& b) {
  same_shape(a, b);
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

bool is_minimizer_level(double e, double c) { return e <= c + 1e-8 * std::max(1.0, std::abs(c)); }

// Transverse coordinates of transverse cell t as a full index on layer i1.
LatticeIndex layer_site(const StripField& u, int i1, std::size_t t) {
  LatticeIndex i = u.site(t);
  i[0] = i1;
  return i;
}

void require_axis_periodic(const GapPair& gap0) {
  if (gap0.v0.periods[0] != 1 || gap0.w0.periods[0] != 1)
    throw InvalidArgument("heteroclinic asymptotes must be 1-periodic along axis 1");
}

double per_cell_level(const GapPair& gap0) {
  return gap0.c0p / static_cast<double>(gap0.v0.periods.cells());
}

struct WindowSolve {
  StripField best;  // absolute
  double energy = std::numeric_limits<double>::infinity();
  std::vector<StripField> limits;
  std::vector<double> energies;
  std::vector<double> residuals;
};

// Flow + Newton for every seed on the box [v0, w0] of a fixed window.
WindowSolve solve_window(const PotentialPtr& s, const TransversePeriods& q, int w,
                         const GapPair& gap0, const std::vector<StripField>& seeds,
                         const FlowParams& params) {
  const double c0 = per_cell_level(gap0);
  const StripField base = pinned_strip(q, w, gap0, 0.0);
  StripField lower = base, upper(q, w, 0.0);
  for (std::size_t f = 0; f < base.size(); ++f) {
    const LatticeIndex i = base.site(f);
    lower.values[f] = gap0.v0.at(i);
    upper.values[f] = gap0.w0.at(i) - gap0.v0.at(i);
  }
  const EnergyLandscape land = EnergyLandscape::strip(s, lower, upper, c0);
  FlowParams fp = params;
  fp.trace_stride = 0;

  WindowSolve out;
  bool any = false;
  for (const auto& seed : seeds) {
    std::vector<double> x = minus(rewindow(seed, w), lower).values;
    land.clip(x);
    FlowOutcome flowed = integrate_flow(land, std::move(x), fp);
    if (!flowed.converged) continue;
    any = true;
    NewtonOutcome pol = newton_polish(land, flowed.x, 1e-13, 30, true);
    if (pol.residual > flowed.residual) {
      pol.x = flowed.x;
      pol.residual = flowed.residual;
    }
    StripField limit = lower;
    for (std::size_t k = 0; k < limit.size(); ++k) limit.values[k] += pol.x[k];
    const double e = land.energy(pol.x);
    bool seen = false;
    for (const auto& known : out.limits)
      if (window_distance(known, limit) <= kDedupTol) seen = true;
    if (!seen) {
      out.limits.push_back(limit);
      out.energies.push_back(e);
      out.residuals.push_back(pol.residual);
    }
    if (e < out.energy) {
      out.energy = e;
      out.best = limit;
    }
  }
  if (!any) throw SolverError("no heteroclinic seed converged within maxSteps");
  return out;
}

double partial_sum_floor(const std::vector<double>& layers) {
  // min over a <= b of sum_{a..b}; Kadane on the negated sequence.
  double best = std::numeric_limits<double>::infinity(), run = 0.0;
  for (double e : layers) {
    run = std::min(e, run + e);
    best = std::min(best, run);
  }
  return best;
}

}  // namespace

double strip_norm(const StripField& u) {
  double l1 = 0.0, l2 = 0.0;
  for (double v : u.values) {
    l1 += std::abs(v);
    l2 += v * v;
  }
  return l1 + std::sqrt(l2);
}

StripField pinned_strip(const TransversePeriods& q, int half_width, const GapPair& gap0,
                        double fill) {
  require_axis_periodic(gap0);
  if (gap0.v0.dimension() != q.dimension() + 1)
    throw InvalidArgument("transverse periods do not match the model dimension");
  StripField u(q, half_width, fill);
  for (std::size_t t = 0; t < q.cells(); ++t) {
    const LatticeIndex i = layer_site(u, 0, t);
    u.left_tail[t] = gap0.v0.at(i);
    u.right_tail[t] = gap0.w0.at(i);
  }
  return u;
}

StripField rewindow(const StripField& u, int half_width) {
  StripField out(u.q, half_width, 0.0);
  out.left_tail = u.left_tail;
  out.right_tail = u.right_tail;
  for (std::size_t f = 0; f < out.size(); ++f) out.values[f] = u.at(out.site(f));
  return out;
}

StripField extend_transverse(const StripField& u, const TransversePeriods& q) {
  if (q.dimension() != u.q.dimension()) throw InvalidArgument("transverse dimension mismatch");
  for (std::size_t k = 0; k < q.dimension(); ++k)
    if (q[k] % u.q[k] != 0)
      throw InvalidArgument("target transverse periods must be multiples of the source");
  StripField out(q, u.half_width, 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) out.values[f] = u.at(out.site(f));
  for (std::size_t t = 0; t < q.cells(); ++t) {
    const std::size_t src = u.transverse_flat(out.site(t));
    out.left_tail[t] = u.left_tail[src];
    out.right_tail[t] = u.right_tail[src];
  }
  return out;
}

std::vector<double> layer_energies(const SitePotential& s, const StripField& u, double c0) {
  if (u.dimension() != s.dimension()) throw InvalidArgument("field/potential dimension mismatch");
  const int r = s.radius(), w = u.half_width;
  std::vector<double> out;
  for (int i1 = -w - r; i1 <= w + r; ++i1) {
    double e = 0.0;
    for (std::size_t t = 0; t < u.q.cells(); ++t) e += local_energy(s, u, layer_site(u, i1, t)) - c0;
    out.push_back(e);
  }
  return out;
}

double strip_energy(const SitePotential& s, const StripField& u, double c0) {
  double e = 0.0;
  for (double v : layer_energies(s, u, c0)) e += v;
  return e;
}

double renormalized_energy(const SitePotential& s, const StripField& u, const StripField& v1,
                           double c0) {
  same_shape(u, v1);
  if (u.half_width < 2 * s.radius())
    throw SupportError("strip window narrower than the 2r margin");
  return strip_energy(s, plus(v1, u), c0);
}

StripField strip_gradient(const SitePotential& s, const StripField& u, const StripField& v1) {
  same_shape(u, v1);
  const StripField abs = plus(v1, u);
  StripField g(u.q, u.half_width, 0.0);
  for (std::size_t f = 0; f < g.size(); ++f) g.values[f] = el_residual(s, abs, g.site(f));
  return g;
}

EnergyLandscape strip_landscape(PotentialPtr s, const StripField& base, const StripField& upper,
                                double c0) {
  return EnergyLandscape::strip(std::move(s), base, upper, c0);
}

double tail_bound(const SitePotential& s, const StripField& u) {
  const int r = s.radius(), w = u.half_width;
  const int depth = std::min(2 * r, w + 1);
  double mass = 0.0;
  for (int d = 0; d < depth; ++d) {
    const auto left = u.layer(-w + d);
    const auto right = u.layer(w - d);
    for (std::size_t t = 0; t < u.q.cells(); ++t)
      mass += std::abs(left[t] - u.left_tail[t]) + std::abs(right[t] - u.right_tail[t]);
  }
  return s.second_derivative_bound() * static_cast<double>(s.ball_size()) * mass;
}

StripField tanh_seed(const TransversePeriods& q, int half_width, const GapPair& gap0,
                     double center) {
  StripField u = pinned_strip(q, half_width, gap0, 0.0);
  for (std::size_t f = 0; f < u.size(); ++f) {
    const LatticeIndex i = u.site(f);
    const double sigma = 0.5 * (1.0 + std::tanh((i[0] - center) / 5.0));
    u.values[f] = gap0.v0.at(i) + sigma * (gap0.w0.at(i) - gap0.v0.at(i));
  }
  return u;
}

HeteroMinimizeResult minimize_hetero(PotentialPtr s, const TransversePeriods& q,
                                     const GapPair& gap0, const FlowParams& params,
                                     std::vector<StripField> seeds, const WindowPolicy& policy) {
  require_axis_periodic(gap0);
  if (policy.initial < 2 * s->radius()) throw InvalidArgument("initial window below the 2r margin");
  const double c0 = per_cell_level(gap0);
  HeteroMinimizeResult res;
  int w = policy.initial;
  auto seeds_for = [&](int width) {
    std::vector<StripField> out;
    if (seeds.empty())
      for (double center : {0.0, 0.25, 0.5}) out.push_back(tanh_seed(q, width, gap0, center));
    else
      for (const auto& seed : seeds) out.push_back(rewindow(seed, width));
    return out;
  };

  WindowSolve solve;
  double bound = 0.0;
  while (true) {
    solve = solve_window(s, q, w, gap0, seeds_for(w), params);
    bound = tail_bound(*s, solve.best);
    res.window_history.emplace_back(w, solve.energy);
    if (bound < policy.tail_tolerance) break;
    if (2 * w > policy.cap)
      throw SolverError("heteroclinic window growth exceeded the cap W = " +
                        std::to_string(policy.cap));
    w *= 2;
  }
  const WindowSolve doubled =
      solve_window(s, q, 2 * w, gap0, {rewindow(solve.best, 2 * w)}, params);
  res.window_history.emplace_back(2 * w, doubled.energy);

  res.v1 = solve.best;
  res.c1q = solve.energy;
  res.limits = solve.limits;
  res.limit_energies = solve.energies;
  res.residuals = solve.residuals;
  RenormalizationConstants& k = res.constants;
  k.c0 = c0;
  k.c1 = res.c1q / static_cast<double>(q.cells());
  k.window = w;
  k.tail_bound = bound;
  k.doubling_change = std::abs(doubled.energy - solve.energy);
  k.K1 = std::max(0.0, -partial_sum_floor(layer_energies(*s, res.v1, c0)));
  return res;
}

StripFlowResult flow_hetero(PotentialPtr s, const StripField& u0, const StripField& v1, double c0,
                            const FlowParams& params) {
  same_shape(u0, v1);
  if (u0.half_width < 2 * s->radius()) throw SupportError("strip window narrower than the 2r margin");
  StripField upper(v1.q, v1.half_width, std::numeric_limits<double>::infinity());
  const EnergyLandscape land = EnergyLandscape::strip(std::move(s), v1, upper, c0);
  FlowOutcome out = integrate_flow(land, u0.values, params);
  StripField field(v1.q, v1.half_width, 0.0);
  field.values = out.x;
  return {std::move(field), std::move(out)};
}

StripField HeteroGapPair::width() const { return minus(w1, v1); }

std::optional<HeteroGapPair> find_gap_pair_hetero(PotentialPtr s, const HeteroMinimizeResult& min,
                                                  const GapPair& gap0, int probes,
                                                  std::uint64_t seed, const FlowParams& params) {
  if (probes < 1) throw InvalidArgument("probes must be >= 1");
  const StripField& v1 = min.v1;
  const TransversePeriods& q = v1.q;
  const int w = v1.half_width;
  const double c1q = min.c1q;

  const WindowSolve translate = solve_window(s, q, w, gap0, {shift(v1, 1, 1)}, params);
  HeteroGapPair gap;
  gap.v1 = v1;
  gap.w1 = translate.best;
  gap.c0 = min.constants.c0;
  gap.c1q = c1q;
  gap.gap0 = gap0;
  if (window_distance(gap.v1, gap.w1) <= kDedupTol) return std::nullopt;
  if (!is_minimizer_level(translate.energy, c1q)) return std::nullopt;
  for (std::size_t k = 0; k < v1.size(); ++k)
    if (gap.w1.values[k] < v1.values[k] - 1e-12) return std::nullopt;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const int combos = std::max(probes - 1, 1);
  for (int refinement = 0;; ++refinement) {
    if (refinement > kMaxRefinements) return std::nullopt;
    gap.evidence = {};
    gap.evidence.refinements = refinement;
    std::vector<StripField> probe_seeds;
    for (int k = 1; k <= combos; ++k) {
      const double theta = probes > 1 ? static_cast<double>(k) / probes : 0.5;
      StripField x = gap.v1;
      for (std::size_t f = 0; f < x.size(); ++f) {
        const double lo = gap.v1.values[f], hi = gap.w1.values[f];
        x.values[f] =
            std::clamp(theta * lo + (1.0 - theta) * hi + 0.1 * (hi - lo) * jitter(rng), lo, hi);
      }
      probe_seeds.push_back(std::move(x));
    }
    gap.evidence.probes = static_cast<int>(probe_seeds.size());
    const WindowSolve probe = solve_window(s, q, w, gap0, probe_seeds, params);
    gap.evidence.distinct_limits = static_cast<int>(probe.limits.size());
    bool refined = false;
    for (std::size_t k = 0; k < probe.limits.size() && !refined; ++k) {
      const StripField& lim = probe.limits[k];
      if (!is_minimizer_level(probe.energies[k], c1q)) continue;
      if (window_distance(lim, gap.v1) <= kDedupTol || window_distance(lim, gap.w1) <= kDedupTol)
        continue;
      bool inside = true;
      for (std::size_t f = 0; f < lim.size(); ++f)
        if (lim.values[f] < gap.v1.values[f] - 1e-9 || lim.values[f] > gap.w1.values[f] + 1e-9)
          inside = false;
      if (inside) {
        gap.w1 = lim;
        refined = true;
      }
    }
    if (!refined) break;
  }
  return gap;
}

std::optional<HeteroGapPair> find_gap_pair_hetero(PotentialPtr s, const TransversePeriods& q,
                                                  int probes, std::uint64_t seed,
                                                  const FlowParams& params,
                                                  const WindowPolicy& policy) {
  const auto gap0 = find_gap_pair(s, Periods::ones(q.dimension() + 1), probes, seed, params);
  if (!gap0) return std::nullopt;
  const HeteroMinimizeResult min = minimize_hetero(s, q, *gap0, params, {}, policy);
  return find_gap_pair_hetero(s, min, *gap0, probes, seed, params);
}

HeteroGapPair extend_transverse(const HeteroGapPair& gap, const TransversePeriods& q) {
  HeteroGapPair out = gap;
  out.v1 = extend_transverse(gap.v1, q);
  out.w1 = extend_transverse(gap.w1, q);
  out.c1q = gap.c1q / static_cast<double>(gap.v1.q.cells()) * static_cast<double>(q.cells());
  return out;
}

StripPath build_strip_path(const HeteroGapPair& gap, int n_nodes, int k) {
  if (n_nodes < 3) throw InvalidArgument("a path needs at least 3 nodes");
  const StripField width = gap.width();
  if (k >= 2 && width.q.dimension() == 0)
    throw InvalidArgument("the transverse chi path needs n >= 2");
  StripPath path;
  for (int m = 0; m < n_nodes; ++m) {
    const double theta = static_cast<double>(m) / (n_nodes - 1);
    StripField node = width;
    for (std::size_t f = 0; f < node.size(); ++f) {
      const double scale = k >= 2 ? phi_path(k, theta, node.site(f)[1]) : theta;
      node.values[f] = scale * width.values[f];
    }
    path.nodes.push_back(std::move(node));
  }
  path.nodes.back() = width;
  return path;
}

StripMinimaxResult mountain_pass_hetero(PotentialPtr s, const HeteroGapPair& gap,
                                        const MinimaxParams& params, int n_nodes,
                                        MinimaxMode mode, int chi_k) {
  const StripField width = gap.width();
  const EnergyLandscape land = EnergyLandscape::strip(std::move(s), gap.v1, width, gap.c0);
  const StripPath path = build_strip_path(gap, n_nodes, chi_k);
  PathNodes raw;
  for (const auto& node : path.nodes) raw.push_back(node.values);
  StripMinimaxResult r;
  r.details = run_minimax(land, std::move(raw), params, mode);
  r.value = r.details.value;
  r.level = land.energy(path.nodes.front().values);
  r.argmax_index = r.details.argmax_index;
  r.critical_field = StripField(width.q, width.half_width, 0.0);
  r.critical_field.values = r.details.critical;
  r.residual = r.details.residual_sup;
  r.iterations = r.details.iterations;
  r.value_trace = r.details.value_trace;
  return r;
}

double strip_path_witness(PotentialPtr s, const HeteroGapPair& gap, int k, int samples) {
  const StripField width = gap.width();
  const EnergyLandscape land = EnergyLandscape::strip(std::move(s), gap.v1, width, gap.c0);
  const StripPath path = build_strip_path(gap, samples, k);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& node : path.nodes) best = std::max(best, land.energy(node.values));
  return best - land.energy(path.nodes.front().values);
}

double HeteroBoundTable::max_excess() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.ok) m = std::max(m, r.excess);
  return m;
}

double HeteroBoundTable::max_witness() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.ok) m = std::max(m, r.witness);
  return m;
}

HeteroBoundTable bound_scan_hetero(PotentialPtr s, int k_max, const HeteroGapPair& gap,
                                   const MinimaxParams& params) {
  if (gap.v1.q.dimension() == 0) throw InvalidArgument("bound scan needs n >= 2");
  if (k_max < 1) throw InvalidArgument("bound scan needs kMax >= 1");
  HeteroBoundTable table;
  for (int k = 1; k <= k_max; ++k) {
    HeteroBoundRow row;
    row.k = k;
    try {
      std::vector<int> qk(gap.v1.q.dimension(), 1);
      qk[0] = k;
      const HeteroGapPair gk = extend_transverse(gap, TransversePeriods(qk));
      const int chi = k >= 2 ? k : 0;
      const int n_nodes = std::min(16 * k + 1, 257);
      row.witness = strip_path_witness(s, gk, chi);
      const StripMinimaxResult r =
          mountain_pass_hetero(s, gk, params, n_nodes, MinimaxMode::kNodeFlow, chi);
      row.c1q = r.level;
      row.d1q = r.value;
      row.excess = r.excess();
      row.residual = r.residual;
      row.ok = r.success();
      if (!row.ok) row.error = r.details.message;
    } catch (const Error& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

AsymptoticsReport asymptotics_report(const StripField& u, const GapPair& gap0) {
  AsymptoticsReport rep;
  const int w = u.half_width;
  for (int i1 = -w; i1 <= w; ++i1) {
    double dv = 0.0, dw = 0.0;
    for (std::size_t t = 0; t < u.q.cells(); ++t) {
      const LatticeIndex i = layer_site(u, i1, t);
      dv = std::max(dv, std::abs(u.at(i) - gap0.v0.at(i)));
      dw = std::max(dw, std::abs(u.at(i) - gap0.w0.at(i)));
    }
    rep.layers.push_back(i1);
    rep.distance_v0.push_back(dv);
    rep.distance_w0.push_back(dw);
  }
  rep.left = rep.distance_v0.front() <= rep.distance_w0.front() ? "v0" : "w0";
  rep.right = rep.distance_v0.back() <= rep.distance_w0.back() ? "v0" : "w0";
  for (std::size_t k = 0; k < rep.layers.size(); ++k) {
    const bool left_half = rep.layers[k] < 0;
    const std::string& tag = left_half ? rep.left : rep.right;
    rep.decay.push_back(tag == "v0" ? rep.distance_v0[k] : rep.distance_w0[k]);
  }
  return rep;
}

}  // namespace fk
