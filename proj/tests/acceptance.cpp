// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fk/hetero.hpp"
#include "fk/mpp.hpp"
#include "fk/periodic.hpp"
#include "fk/verify.hpp"
#include "fk_cli/pipelines.hpp"

using namespace fk;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

using Scalars = std::map<std::string, double>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

PotentialPtr model(const std::string& name, std::map<std::string, double> params = {}) {
  PotentialDescriptor d;
  d.name = name;
  d.dimension = 2;
  d.params = std::move(params);
  return make_potential(d);
}

std::vector<TorusField> seeds_for(const Periods& p, std::uint64_t seed) {
  std::vector<TorusField> seeds = constant_seeds(p, 16);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    TorusField u(p, 0.0);
    for (double& v : u.values) v = unit(rng);
    seeds.push_back(std::move(u));
  }
  return seeds;
}

double prod(const Periods& p) { return static_cast<double>(p.cells()); }

GapPair unit_gap(PotentialPtr s) { return require_gap_pair(s, Periods{1, 1}, 8, kSeed, FlowParams{}); }

MinimaxResult pass_on(PotentialPtr s, const GapPair& g, MinimaxMode mode = MinimaxMode::kNodeFlow) {
  const Periods& p = g.v0.periods;
  const int k = p[0];
  const PathOnBox path = k >= 2 ? build_initial_path(PathKind::kChi, default_node_count(p), k, g)
                                : build_initial_path(PathKind::kLinear, default_node_count(p), 2, g);
  return mountain_pass(s, g, path, MinimaxParams{}, mode);
}

// Sup-norm gradient of the torus energy at an absolute field.
double sup_residual(const SitePotential& s, const TorusField& u) {
  return gradient(s, u, TorusField(u.periods, 0.0)).linf_norm();
}

// Bottleneck value between two grid corners: add cells in increasing value
// order and stop when the corners join one component.
double widest_path_oracle(int n, const std::function<double(double, double)>& f) {
  const std::size_t cells = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  std::vector<double> value(cells);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      value[static_cast<std::size_t>(i) * n + j] = f(static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1));
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
  std::vector<std::size_t> parent(cells);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> live(cells, 0);
  std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const std::size_t start = 0, goal = cells - 1;
  for (std::size_t c : order) {
    live[c] = 1;
    const int i = static_cast<int>(c / n), j = static_cast<int>(c % n);
    const int di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
    for (int e = 0; e < 4; ++e) {
      const int a = i + di[e], b = j + dj[e];
      if (a < 0 || b < 0 || a >= n || b >= n) continue;
      const std::size_t nb = static_cast<std::size_t>(a) * n + b;
      if (live[nb]) parent[root(nb)] = root(c);
    }
    if (live[start] && live[goal] && root(start) == root(goal)) return value[c];
  }
  return value[goal];
}

// Energy on p = (2, 1) along u = (-1/4 + a, -1/4 + b), written out by hand.
double displayed_landscape(double a, double b) {
  return -std::cos(2 * kPi * a) - std::cos(2 * kPi * b) + (b - a) * (b - a) / 4.0;
}

Outcome criterion1(Scalars& out) {
  Outcome o;
  auto s = classical_fk();
  const Periods p{1, 1};
  const MinimizeResult r = minimize_periodic(s, p, seeds_for(p, kSeed), FlowParams{});
  const double u = r.best.values[0];
  const double phase = u + 0.25 - std::round(u + 0.25);
  const GapPair g = unit_gap(s);
  out["c1.c0"] = r.c0p;
  out["c1.minimizer"] = u;
  out["c1.v0"] = g.v0.values[0];
  out["c1.w0"] = g.w0.values[0];
  o.require(std::abs(r.c0p + 1.0) <= 1e-8, "c0 = " + num(r.c0p));
  o.require(std::abs(phase) <= 1e-8, "minimizer " + num(u) + " not -1/4 mod 1");
  o.require(std::abs(g.v0.values[0] + 0.25) <= 1e-8, "v0 = " + num(g.v0.values[0]));
  o.require(std::abs(g.w0.values[0] - 0.75) <= 1e-8, "w0 = " + num(g.w0.values[0]));
  return o;
}

Outcome criterion2(Scalars& out) {
  Outcome o;
  auto s = classical_fk();
  const double c0 = minimize_periodic(s, Periods{1, 1}, seeds_for(Periods{1, 1}, kSeed), FlowParams{}).c0p;
  for (const Periods& p : {Periods{1, 1}, Periods{2, 1}, Periods{3, 1}, Periods{2, 2}, Periods{3, 2}}) {
    const double cp = minimize_periodic(s, p, seeds_for(p, kSeed), FlowParams{}).c0p;
    out["c2.c0p." + p.to_string()] = cp;
    o.require(std::abs(cp - prod(p) * c0) <= 1e-8 * prod(p), p.to_string() + ": c0p = " + num(cp));
  }
  return o;
}

Outcome criterion3(Scalars& out) {
  Outcome o;
  auto s = classical_fk();
  const GapPair g = unit_gap(s).extended(Periods{2, 1});
  const MinimaxResult node = pass_on(s, g, MinimaxMode::kNodeFlow);
  const MinimaxResult heat = pass_on(s, g, MinimaxMode::kHeatFlow);
  const double oracle = widest_path_oracle(2001, displayed_landscape);
  out["c3.node"] = node.value;
  out["c3.heat"] = heat.value;
  out["c3.oracle"] = oracle;
  o.require(std::abs(node.value - heat.value) <= 1e-3, "node " + num(node.value) + " vs heat " + num(heat.value));
  o.require(std::abs(node.value - oracle) <= 1e-3, "node " + num(node.value) + " vs oracle " + num(oracle));
  o.require(std::abs(heat.value - oracle) <= 1e-3, "heat " + num(heat.value) + " vs oracle " + num(oracle));

  const TorusField critical = g.v0 + node.critical_field;
  const double residual = std::max(node.residual, sup_residual(*s, critical));
  const TorusField translate = shift(critical, 1, -1);
  const double translate_residual = sup_residual(*s, translate);
  double inside = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < critical.size(); ++k)
    inside = std::min({inside, critical.values[k] - g.v0.values[k], g.w0.values[k] - critical.values[k]});
  const auto [lo, hi] = std::minmax_element(critical.values.begin(), critical.values.end());
  out["c3.residual"] = residual;
  out["c3.translate_residual"] = translate_residual;
  out["c3.inside"] = inside;
  out["c3.spread"] = *hi - *lo;
  o.require(residual <= 1e-8, "residual " + num(residual));
  o.require(inside > 0.0, "critical field touches the box");
  o.require(*hi - *lo > 1e-6, "critical field is constant");
  o.require(translate_residual <= 1e-8, "translate residual " + num(translate_residual));
  o.require((translate - critical).linf_norm() > 1e-6, "translate coincides with the critical field");
  return o;
}

Outcome criterion4(Scalars& out) {
  Outcome o;
  const int grid = 400;
  const cli::LandscapeGrid g = cli::emit_landscape(classical_fk(), Periods{2, 1}, grid, "", kSeed);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.value.size(); ++k)
    worst = std::max(worst, std::abs(g.value[k] - displayed_landscape(g.a[k], g.b[k])));
  const double h = 1.0 / (grid - 1);
  // The max sits at (1/2, 1/2) where the surface has curvature at most 4 pi^2 per axis.
  const double slack = 4 * kPi * kPi * h * h;
  out["c4.max"] = g.max_value;
  out["c4.a"] = g.max_a;
  out["c4.b"] = g.max_b;
  o.require(worst <= 1e-10, "grid deviates from the formula by " + num(worst));
  o.require(std::abs(g.max_value - 2.0) <= slack, "max " + num(g.max_value));
  o.require(std::abs(g.max_a - 0.5) <= h && std::abs(g.max_b - 0.5) <= h,
            "argmax (" + num(g.max_a) + ", " + num(g.max_b) + ")");
  return o;
}

Outcome criterion5(Scalars& out) {
  Outcome o;
  auto s = classical_fk();
  const MinimaxResult one = pass_on(s, unit_gap(s));
  out["c5.classical.1x1"] = one.value - one.level;
  o.require(std::abs(one.value - 1.0) <= 1e-6 && std::abs(one.level + 1.0) <= 1e-6,
            "p=(1,1): d = " + num(one.value) + ", c = " + num(one.level));
  o.require(std::abs(one.value - one.level - 2.0) <= 1e-6, "p=(1,1): d - c = " + num(one.value - one.level));
  const std::vector<std::pair<std::string, PotentialPtr>> models{
      {"classical-fk", s}, {"pinned-fk", model("pinned-fk", {{"strength", 1.5}})}, {"two-well-fk", model("two-well-fk")}};
  for (const auto& [name, m] : models) {
    const GapPair base = unit_gap(m);
    for (const Periods& p : {Periods{1, 1}, Periods{2, 1}, Periods{3, 1}, Periods{2, 2}}) {
      const MinimaxResult r = pass_on(m, base.extended(p));
      const double excess = r.value - r.level;
      out["c5." + name + "." + p.to_string()] = excess;
      o.require(excess > 1e-6, name + " " + p.to_string() + ": d - c = " + num(excess));
    }
  }
  return o;
}

Outcome criterion6(Scalars& out) {
  Outcome o;
  auto s = classical_fk();
  const GapPair g = unit_gap(s);
  const MultiplicityTable t = multiplicity_scan(s, 8, g, MinimaxParams{});
  // Along the chi path at most two sites are in transit at once, each adjacent
  // to at most two bonds counted from both ends. For unit amplitude and
  // coupling 1/16 on a unit-width gap that caps the excess at 2*2 + 8/16.
  const double width = g.width().linf_norm();
  const double bound = 2 * 2.0 + 8 * (1.0 / 16.0) * width * width;
  double max_excess = 0.0, max_witness = 0.0;
  for (const auto& row : t.rows) {
    if (row.k < 2) continue;
    o.require(row.ok, "k=" + std::to_string(row.k) + ": " + row.error);
    max_excess = std::max(max_excess, row.excess);
    max_witness = std::max(max_witness, row.witness);
    out["c6.excess." + std::to_string(row.k)] = row.excess;
    out["c6.witness." + std::to_string(row.k)] = row.witness;
  }
  o.require(max_excess <= max_witness, "max excess " + num(max_excess) + " > max witness " + num(max_witness));
  o.require(max_witness <= bound, "witness " + num(max_witness) + " above the k-independent bound " + num(bound));
  return o;
}

Outcome criterion7(Scalars& out) {
  Outcome o;
  auto s = classical_fk();
  const MultiplicityTable t = multiplicity_scan(s, 6, unit_gap(s), MinimaxParams{});
  double largest = 0.0;
  for (std::size_t a = 0; a < t.rows.size(); ++a)
    for (std::size_t b = a + 1; b < t.rows.size(); ++b)
      if (t.rows[a].ok && t.rows[b].ok)
        largest = std::max(largest, shift_normalized_distance(t.rows[a].critical, t.rows[b].critical));
  out["c7.largest_distance"] = largest;
  out["c7.distinct_pairs"] = t.distinct_pairs(1e-3);
  o.require(largest > 1e-3, "largest shift-normalized distance " + num(largest));
  return o;
}

Outcome criterion8(Scalars& out) {
  Outcome o;
  const auto reports = run_property_suite(classical_fk(), Periods{2, 1}, kSeed, 100);
  const std::vector<std::string> wanted{"submodularity", "comparison", "strong-comparison", "energy-decrease",
                                        "gradient-fd",   "box-invariance", "clip-decrease", "endpoint-fixity"};
  for (const auto& name : wanted) {
    auto it = std::find_if(reports.begin(), reports.end(), [&](const PropertyReport& r) { return r.name == name; });
    if (it == reports.end()) {
      o.require(false, name + " missing");
      continue;
    }
    out["c8." + name] = it->worst_margin;
    o.require(it->passed && it->trials >= 100, name + " failed (" + it->note + ")");
  }
  return o;
}

Outcome criterion9(Scalars& out) {
  Outcome o;
  auto s = model("pinned-fk");
  const GapPair gap0 = unit_gap(s);
  const HeteroMinimizeResult one = minimize_hetero(s, TransversePeriods{1}, gap0, FlowParams{});
  const HeteroMinimizeResult two = minimize_hetero(s, TransversePeriods{2}, gap0, FlowParams{});
  out["c9.c1"] = one.c1q;
  out["c9.c1q2"] = two.c1q;
  out["c9.doubling"] = one.constants.doubling_change;
  o.require(one.constants.doubling_change <= 1e-9, "window doubling change " + num(one.constants.doubling_change));
  o.require(two.constants.doubling_change <= 1e-9, "q=2 window doubling change " + num(two.constants.doubling_change));
  o.require(std::abs(two.c1q - 2 * one.c1q) <= 1e-8, "c1(2) = " + num(two.c1q) + " vs 2 c1 = " + num(2 * one.c1q));

  const auto gap = find_gap_pair_hetero(s, one, gap0, 8, kSeed, FlowParams{});
  if (!gap) {
    o.require(false, "no heteroclinic gap pair");
    return o;
  }
  const StripMinimaxResult r = mountain_pass_hetero(s, *gap, MinimaxParams{}, 65);
  out["c9.d1"] = r.value;
  out["c9.residual"] = r.residual;
  o.require(r.value - r.level > 1e-6, "d1 - c1 = " + num(r.value - r.level));
  o.require(r.residual <= 1e-8, "residual " + num(r.residual));

  const HeteroBoundTable t = bound_scan_hetero(s, 4, *gap, MinimaxParams{});
  for (const auto& row : t.rows) {
    o.require(row.ok, "bound scan k=" + std::to_string(row.k) + ": " + row.error);
    out["c9.excess." + std::to_string(row.k)] = row.excess;
    out["c9.witness." + std::to_string(row.k)] = row.witness;
  }
  o.require(t.rows.size() == 4, "bound scan has " + std::to_string(t.rows.size()) + " rows");
  o.require(t.max_excess() <= t.max_witness(),
            "max excess " + num(t.max_excess()) + " > witness " + num(t.max_witness()));
  return o;
}

struct Criterion {
  int id;
  double limit_seconds;  // 0: no runtime limit
  std::function<Outcome(Scalars&)> run;
};

const std::vector<Criterion> kCriteria{
    {1, 5, criterion1},   {2, 30, criterion2}, {3, 120, criterion3}, {4, 5, criterion4},   {5, 0, criterion5},
    {6, 300, criterion6}, {7, 0, criterion7},  {8, 180, criterion8}, {9, 600, criterion9},
};

Outcome timed(const Criterion& c, Scalars& out, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run(out);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (c.limit_seconds > 0)
    o.require(seconds < c.limit_seconds, "took " + num(seconds) + " s (limit " + num(c.limit_seconds) + " s)");
  return o;
}

void report(int id, const Outcome& o, double seconds) {
  std::printf("criterion %d: %s (%.2f s)%s%s\n", id, o.pass ? "PASS" : "FAIL", seconds,
              o.detail.empty() ? "" : " ", o.detail.c_str());
}

}  // namespace

int main() {
  bool all = true;
  Scalars first;
  for (const auto& c : kCriteria) {
    double seconds = 0.0;
    const Outcome o = timed(c, first, seconds);
    report(c.id, o, seconds);
    all = all && o.pass;
  }

  Outcome repeat;
  Scalars second;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : kCriteria) {
    double seconds = 0.0;
    timed(c, second, seconds);
  }
  repeat.require(first.size() == second.size(), "scalar sets differ in size");
  for (const auto& [key, value] : first) {
    auto it = second.find(key);
    if (it == second.end())
      repeat.require(false, key + " missing on repeat");
    else if (std::bit_cast<std::uint64_t>(value) != std::bit_cast<std::uint64_t>(it->second))
      repeat.require(false, key + ": " + num(value) + " vs " + num(it->second));
  }
  if (repeat.pass) repeat.detail = std::to_string(first.size()) + " scalars identical";
  report(10, repeat, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  all = all && repeat.pass;
  return all ? 0 : 1;
}
