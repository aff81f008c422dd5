#include "fk/mpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fk/error.hpp"
#include "fk/model.hpp"

namespace fk {

PathNodes PathOnBox::raw() const {
  PathNodes out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.values);
  return out;
}

PathOnBox PathOnBox::from_raw(const Periods& p, const PathNodes& raw) {
  PathOnBox path;
  for (const auto& x : raw) path.nodes.emplace_back(p, x);
  path.monotone = path.check_monotone();
  return path;
}

void PathOnBox::validate(const GapPair& gap, double tol) const {
  if (nodes.size() < 3) throw InvalidArgument("a path needs at least 3 nodes");
  const TorusField width = gap.width();
  for (const auto& n : nodes) {
    if (!(n.periods == width.periods)) throw InvalidArgument("path periods differ from the gap");
    for (std::size_t k = 0; k < n.size(); ++k)
      if (n.values[k] < -tol || n.values[k] > width.values[k] + tol)
        throw InvalidArgument("path node leaves the order box");
  }
  if (nodes.front().linf_norm() > tol) throw InvalidArgument("path must start at 0");
  if ((nodes.back() - width).linf_norm() > tol)
    throw InvalidArgument("path must end at w0 - v0");
}

bool PathOnBox::check_monotone(double tol) const {
  for (std::size_t m = 0; m + 1 < nodes.size(); ++m)
    for (std::size_t k = 0; k < nodes[m].size(); ++k)
      if (nodes[m].values[k] > nodes[m + 1].values[k] + tol) return false;
  return true;
}

std::string to_string(PathKind kind) { return kind == PathKind::kLinear ? "linear" : "chi"; }

PathKind parse_path_kind(const std::string& name) {
  if (name == "linear") return PathKind::kLinear;
  if (name == "chi") return PathKind::kChi;
  throw InvalidArgument("unknown path kind '" + name + "' (expected linear or chi)");
}

std::string to_string(MinimaxMode mode) {
  return mode == MinimaxMode::kNodeFlow ? "node-flow" : "heat-flow";
}

MinimaxMode parse_minimax_mode(const std::string& name) {
  if (name == "node-flow") return MinimaxMode::kNodeFlow;
  if (name == "heat-flow") return MinimaxMode::kHeatFlow;
  throw InvalidArgument("unknown mode '" + name + "' (expected node-flow or heat-flow)");
}

namespace {

double chi_even(int k, double t, int i) {
  const double end = (k + 5) / 2.0;
  if (i == 0) return std::min(t, 1.0);
  if (i == k / 2) {
    if (t <= (k + 1) / 2.0) return 0.0;
    return 1.0 - 0.5 * (end - t);
  }
  if (t <= i + 0.5) return 0.0;
  if (t <= i + 1.0) return 2.0 * t - 1.0 - 2.0 * i;
  return 1.0;
}

}  // namespace

double chi_path(int k, double t, int i) {
  if (k < 2) throw InvalidArgument("chi path needs k >= 2");
  const double end = (k + 5) / 2.0;
  if (t < 0.0 || t > end * (1.0 + 1e-15))
    throw InvalidArgument("chi path time outside [0, (k + 5) / 2]");
  t = std::min(t, end);
  int j = wrap(i, k);
  if (k % 2 == 0) {
    if (j > k / 2) j = k - j;
    return std::clamp(chi_even(k, t, j), 0.0, 1.0);
  }
  // Odd k: representatives -(k-1)/2..(k-1)/2 folded onto 0..(k-1)/2.
  if (j > (k - 1) / 2) j = k - j;
  return std::clamp(chi_even(k - 1, t, j), 0.0, 1.0);
}

double phi_path(int k, double theta, int i) {
  if (theta < 0.0 || theta > 1.0) throw InvalidArgument("phi path theta outside [0, 1]");
  return chi_path(k, theta * (k + 5) / 2.0, i);
}

int default_node_count(const Periods& p) {
  const std::size_t n = 16 * p.cells() + 1;
  return static_cast<int>(std::min<std::size_t>(n, 257));
}

PathOnBox build_initial_path(PathKind kind, int n_nodes, int k, const GapPair& gap) {
  if (n_nodes < 3) throw InvalidArgument("a path needs at least 3 nodes");
  if (kind == PathKind::kChi && k < 2) throw InvalidArgument("chi path needs k >= 2");
  const TorusField width = gap.width();
  const Periods& p = width.periods;
  PathOnBox path;
  for (int m = 0; m < n_nodes; ++m) {
    const double theta = static_cast<double>(m) / (n_nodes - 1);
    TorusField node(p, 0.0);
    for (std::size_t f = 0; f < node.size(); ++f) {
      const double scale = kind == PathKind::kLinear ? theta : phi_path(k, theta, p.unflatten(f)[0]);
      node.values[f] = scale * width.values[f];
    }
    path.nodes.push_back(std::move(node));
  }
  path.nodes.back() = width;
  path.monotone = true;
  return path;
}

TorusField clip_to_box(const TorusField& u, const GapPair& gap) {
  const TorusField width = gap.width();
  if (!(u.periods == width.periods)) throw InvalidArgument("clip_to_box: period mismatch");
  TorusField out = u;
  for (std::size_t k = 0; k < out.size(); ++k)
    out.values[k] = std::max(std::min(out.values[k], width.values[k]), 0.0);
  return out;
}

MinimaxResult mountain_pass(PotentialPtr s, const GapPair& gap, const PathOnBox& path0,
                            const MinimaxParams& params, MinimaxMode mode) {
  path0.validate(gap);
  const EnergyLandscape land = torus_landscape(std::move(s), gap.v0, gap.width());
  MinimaxResult r;
  r.details = run_minimax(land, path0.raw(), params, mode);
  r.value = r.details.value;
  r.level = land.energy(path0.nodes.front().values);
  r.argmax_index = r.details.argmax_index;
  r.critical_field = TorusField(gap.v0.periods, r.details.critical);
  r.residual = r.details.residual_sup;
  r.iterations = r.details.iterations;
  r.value_trace = r.details.value_trace;
  return r;
}

double chi_path_witness(PotentialPtr s, const GapPair& gap, int k, int samples) {
  if (samples < 2) throw InvalidArgument("witness needs at least 2 samples");
  const TorusField width = gap.width();
  const EnergyLandscape land = torus_landscape(std::move(s), gap.v0, width);
  const Periods& p = width.periods;
  std::vector<double> x(width.size());
  double best = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < samples; ++m) {
    const double theta = static_cast<double>(m) / (samples - 1);
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double scale = k < 2 ? theta : phi_path(k, theta, p.unflatten(f)[0]);
      x[f] = scale * width.values[f];
    }
    best = std::max(best, land.energy(x));
  }
  return best - gap.c0p;
}

bool UnconstrainedPathCheck::all_agree() const {
  return std::all_of(variants.begin(), variants.end(), [](const Variant& v) { return v.agrees; });
}

UnconstrainedPathCheck minimax_over_unconstrained_paths_check(
    PotentialPtr s, const GapPair& gap, const PathOnBox& path0, const MinimaxResult& reference,
    const MinimaxParams& params, std::uint64_t seed, double tolerance) {
  UnconstrainedPathCheck report;
  report.reference = reference.value;
  report.tolerance = tolerance;
  const TorusField width = gap.width();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto run = [&](const std::string& name, PathOnBox path) {
    UnconstrainedPathCheck::Variant v;
    v.name = name;
    try {
      for (auto& node : path.nodes) node = clip_to_box(node, gap);
      path.nodes.front() = TorusField(width.periods, 0.0);
      path.nodes.back() = width;
      const MinimaxResult r = mountain_pass(s, gap, path, params, MinimaxMode::kNodeFlow);
      v.value = r.value;
      v.difference = std::abs(r.value - reference.value);
      v.agrees = r.success() && v.difference <= tolerance;
      if (!r.success()) v.error = r.details.message;
    } catch (const Error& e) {
      v.error = e.what();
    }
    report.variants.push_back(std::move(v));
  };

  run("in-box", path0);

  PathOnBox scaled = path0;
  for (auto& node : scaled.nodes) node = 1.5 * node;
  run("scaled-1.5", std::move(scaled));

  PathOnBox excursion = path0;
  const double last = static_cast<double>(path0.size() - 1);
  std::vector<double> xi(width.size());
  for (double& v : xi) v = unit(rng);
  for (std::size_t m = 0; m < excursion.size(); ++m) {
    const double bump = 0.5 * std::sin(M_PI * static_cast<double>(m) / last);
    for (std::size_t f = 0; f < width.size(); ++f)
      excursion.nodes[m].values[f] += bump * xi[f] * width.values[f];
  }
  run("random-excursion", std::move(excursion));
  return report;
}

ThetaBounds theta_bounds(PotentialPtr s, const GapPair& gap, const PathOnBox& path,
                         const TorusField& u0, const std::vector<double>& times,
                         const FlowParams& params) {
  path.validate(gap);
  if (!path.check_monotone()) throw InvalidArgument("theta_bounds needs a monotone path");
  const TorusField width = gap.width();
  if (!(u0.periods == width.periods)) throw InvalidArgument("theta_bounds: period mismatch");
  for (std::size_t k = 0; k < u0.size(); ++k)
    if (!(u0.values[k] > 0.0 && u0.values[k] < width.values[k]))
      throw InvalidArgument("u0 not strictly inside the box");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw InvalidArgument("theta_bounds times must be nondecreasing and >= 0");

  const EnergyLandscape land = torus_landscape(std::move(s), gap.v0, width);
  FlowParams fp = params;
  fp.trace_stride = 0;
  PathNodes nodes = path.raw();
  const std::size_t n = nodes.size();
  const double last = static_cast<double>(n - 1);
  constexpr double tol = 1e-12;

  auto compare = [&](const std::vector<double>& x, bool below) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - u0.values[k];
      if (below ? d > tol : d < -tol) return false;
    }
    return true;
  };
  auto equal = [&](const std::vector<double>& x) {
    for (std::size_t k = 0; k < x.size(); ++k)
      if (std::abs(x[k] - u0.values[k]) > tol) return false;
    return true;
  };

  ThetaBounds out;
  double now = 0.0;
  for (double t : times) {
    if (t > now) {
      for (std::size_t m = 1; m + 1 < n; ++m) nodes[m] = flow_for(land, nodes[m], t - now, fp).x;
      now = t;
    }
    std::size_t under = 0, over = n - 1;
    for (std::size_t m = 0; m < n; ++m)
      if (compare(nodes[m], true) && !equal(nodes[m])) under = m;
    if (under + 1 < n && equal(nodes[under + 1])) ++under;
    for (std::size_t m = n; m-- > 0;)
      if (compare(nodes[m], false) && !equal(nodes[m])) over = m;
    if (over > 0 && equal(nodes[over - 1])) --over;
    out.history.push_back({t, static_cast<double>(under) / last, static_cast<double>(over) / last});
  }
  if (!out.history.empty()) {
    out.under = out.history.back().under;
    out.over = out.history.back().over;
  }
  return out;
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::kBelow: return "below";
    case Relation::kAbove: return "above";
    case Relation::kTouchBelow: return "touch-below";
    case Relation::kTouchAbove: return "touch-above";
    case Relation::kEqual: return "equal";
    case Relation::kCross: return "cross";
  }
  return "cross";
}

double shift_normalized_distance(const TorusField& a, const TorusField& b) {
  if (a.dimension() != b.dimension()) throw InvalidArgument("dimension mismatch");
  const int period = std::lcm(a.periods[0], b.periods[0]);
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < period; ++m) best = std::min(best, periodic_distance(shift(a, 1, m), b));
  return best;
}

int MultiplicityTable::distinct_pairs(double threshold) const {
  int count = 0;
  for (std::size_t a = 0; a < distances.size(); ++a)
    for (std::size_t b = a + 1; b < distances.size(); ++b)
      if (distances[a][b] > threshold) ++count;
  return count;
}

MultiplicityTable multiplicity_scan(PotentialPtr s, int k_max, const GapPair& gap,
                                    const MinimaxParams& params, MinimaxMode mode) {
  if (k_max < 2) throw InvalidArgument("multiplicity scan needs kMax >= 2");
  const std::size_t n = gap.v0.dimension();
  MultiplicityTable table;
  for (int k = 1; k <= k_max; ++k) {
    MultiplicityRow row;
    row.k = k;
    std::vector<int> pk(n, 1);
    pk[0] = k;
    row.periods = Periods(pk);
    try {
      const GapPair gk = gap.extended(row.periods);
      row.c0p = gk.c0p;
      const PathKind kind = k == 1 ? PathKind::kLinear : PathKind::kChi;
      const PathOnBox path = build_initial_path(kind, default_node_count(row.periods), k, gk);
      row.witness = chi_path_witness(s, gk, k == 1 ? 0 : k);
      const MinimaxResult r = mountain_pass(s, gk, path, params, mode);
      row.d0p = r.value;
      row.excess = r.value - row.c0p;
      row.residual = r.residual;
      row.critical = r.critical_field;
      row.ok = r.success();
      if (!row.ok) row.error = r.details.message;
    } catch (const Error& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }

  const std::size_t m = table.rows.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.distances.assign(m, std::vector<double>(m, nan));
  for (std::size_t a = 0; a < m; ++a) {
    if (!table.rows[a].ok) continue;
    for (std::size_t b = 0; b < m; ++b)
      if (table.rows[b].ok)
        table.distances[a][b] = shift_normalized_distance(table.rows[a].critical, table.rows[b].critical);
  }
  const MultiplicityRow& first = table.rows.front();
  if (first.ok) {
    for (auto& row : table.rows) {
      if (!row.ok) continue;
      const GapPair gk = gap.extended(row.periods);
      const TorusField u = row.critical + gk.v0;
      const TorusField u1 = extend_to(first.critical + gap.extended(first.periods).v0, row.periods);
      LatticeIndex hi(n);
      for (std::size_t a = 0; a < n; ++a) hi[a] = row.periods[a] - 1;
      row.relation_to_first = intersects(u, u1, LatticeIndex(n), hi);
    }
  }
  return table;
}

}  // namespace fk
