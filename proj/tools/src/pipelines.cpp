#include "fk_cli/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "fk/error.hpp"
#include "fk/hetero.hpp"
#include "fk/mpp.hpp"
#include "fk/periodic.hpp"
#include "fk/verify.hpp"
#include "fk/version.hpp"

namespace fk::cli {

using json = nlohmann::ordered_json;

std::string format_scientific(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  return f;
}

std::string index_header(std::size_t n) {
  std::string h;
  for (std::size_t k = 1; k <= n; ++k) h += "i" + std::to_string(k) + ",";
  return h;
}

std::string index_cells(const LatticeIndex& i) {
  std::string s;
  for (std::size_t k = 0; k < i.dimension(); ++k) s += std::to_string(i[k]) + ",";
  return s;
}

json field_json(const TorusField& u) {
  return json{{"periods", u.periods.values()}, {"values", u.values}};
}

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

GapPair gap_on(const RunConfig& c, PotentialPtr s, const Periods& p) {
  return require_gap_pair(s, Periods::ones(p.dimension()), c.probes, c.seed.value_or(0), c.flow)
      .extended(p);
}

void minimize_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const Periods p = c.periods();
  std::vector<TorusField> seeds = constant_seeds(p, c.seeds);
  std::mt19937_64 rng(c.seed.value_or(0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < c.probes; ++k) {
    TorusField u(p, 0.0);
    for (double& v : u.values) v = unit(rng);
    seeds.push_back(std::move(u));
  }
  const MinimizeResult r = minimize_periodic(s, p, seeds, c.flow);
  const double worst = r.residuals.empty() ? 0.0 : *std::max_element(r.residuals.begin(), r.residuals.end());
  m.scalars["c0p"] = r.c0p;
  m.scalars["c0_per_cell"] = r.c0p / static_cast<double>(p.cells());
  m.scalars["max_residual"] = worst;
  m.scalars["limits"] = static_cast<double>(r.limits.size());
  m.scalars["iterations"] = static_cast<double>(r.iterations);
  json limits = json::array();
  for (std::size_t k = 0; k < r.limits.size(); ++k)
    limits.push_back({{"energy", r.limit_energies[k]}, {"residual", r.residuals[k]},
                      {"field", field_json(r.limits[k])}});
  m.details["best"] = field_json(r.best);
  m.details["limits"] = std::move(limits);
  if (worst > c.flow.stationarity_tol)
    m.failures.push_back("minimize: residual " + format_scientific(worst) + " above tolerance");
  if (!c.csv.empty()) {
    write_field_csv(c.csv, r.best);
    m.files.push_back(c.csv);
  }
}

void gap_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const Periods p = c.periods();
  const auto found = find_gap_pair(s, Periods::ones(p.dimension()), c.probes, *c.seed, c.flow);
  if (!found) {
    m.scalars["gap_found"] = 0.0;
    m.failures.push_back("gap: no adjacent minimizer pair (probes keep finding new minimizers)");
    return;
  }
  const GapPair g = found->extended(p);
  const TorusField w = g.width();
  m.scalars["gap_found"] = 1.0;
  m.scalars["c0p"] = g.c0p;
  m.scalars["width_min"] = *std::min_element(w.values.begin(), w.values.end());
  m.scalars["width_max"] = *std::max_element(w.values.begin(), w.values.end());
  m.details["v0"] = field_json(g.v0);
  m.details["w0"] = field_json(g.w0);
  m.details["evidence"] = {{"probes", g.evidence.probes},
                           {"distinct_limits", g.evidence.distinct_limits},
                           {"refinements", g.evidence.refinements}};
  if (!c.csv.empty()) {
    auto f = open_out(c.csv);
    f << index_header(p.dimension()) << "v0,w0\n";
    for (std::size_t k = 0; k < g.v0.size(); ++k)
      f << index_cells(p.unflatten(k)) << format_scientific(g.v0.values[k]) << ","
        << format_scientific(g.w0.values[k]) << "\n";
    m.files.push_back(c.csv);
  }
}

void mpp_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const Periods p = c.periods();
  const GapPair g = gap_on(c, s, p);
  const int nodes = c.path.nodes ? c.path.nodes : default_node_count(p);
  const PathOnBox path = build_initial_path(c.path.kind, nodes, c.path.k, g);
  const MinimaxResult r = mountain_pass(s, g, path, c.minimax, c.path.mode);
  const TorusField absolute = g.v0 + r.critical_field;
  const TorusField zero(p, 0.0);
  const TorusField translate = shift(absolute, 1, -1);
  m.scalars["c0p"] = g.c0p;
  m.scalars["d0p"] = r.value;
  m.scalars["excess"] = r.excess();
  m.scalars["residual"] = r.residual;
  m.scalars["box_margin"] = r.details.box_margin;
  m.scalars["critical_spread"] = spread(r.critical_field.values);
  m.scalars["translate_residual"] = gradient(*s, translate, zero).linf_norm();
  m.scalars["translate_distance"] = (translate - absolute).linf_norm();
  m.scalars["iterations"] = static_cast<double>(r.iterations);
  m.scalars["nodes"] = nodes;
  m.scalars["path_witness"] = chi_path_witness(s, g, c.path.kind == PathKind::kChi ? c.path.k : 1);
  if (c.path.mode == MinimaxMode::kHeatFlow) m.scalars["theta_infinity"] = r.details.theta_infinity;
  m.details["path"] = {{"kind", to_string(c.path.kind)}, {"k", c.path.k}, {"mode", to_string(c.path.mode)}};
  m.details["message"] = r.details.message;
  m.details["critical"] = field_json(absolute);
  if (!r.success()) m.failures.push_back("mpp: " + r.details.message);
  if (!(r.excess() > 1e-6)) m.failures.push_back("mpp: d - c not positive");
  if (!c.csv.empty()) {
    write_field_csv(c.csv, absolute);
    m.files.push_back(c.csv);
  }
}

json tail_json(const StripField& u) {
  return json{{"q", u.q.values()},
              {"half_width", u.half_width},
              {"left_tail", u.left_tail},
              {"right_tail", u.right_tail}};
}

void hetero_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const TransversePeriods q = c.transverse();
  const GapPair gap0 = require_gap_pair(s, Periods::ones(c.model.dimension), c.probes,
                                        c.seed.value_or(0), c.flow);
  const HeteroMinimizeResult r = minimize_hetero(s, q, gap0, c.flow, {}, c.window);
  const double worst = r.residuals.empty() ? 0.0 : *std::max_element(r.residuals.begin(), r.residuals.end());
  m.scalars["c0"] = r.constants.c0;
  m.scalars["c1"] = r.constants.c1;
  m.scalars["c1q"] = r.c1q;
  m.scalars["K1"] = r.constants.K1;
  m.scalars["window"] = r.constants.window;
  m.scalars["tail_bound"] = r.constants.tail_bound;
  m.scalars["doubling_change"] = r.constants.doubling_change;
  m.scalars["max_residual"] = worst;
  json history = json::array();
  for (const auto& [w, v] : r.window_history) history.push_back({w, v});
  m.details["window_history"] = std::move(history);
  m.details["tails"] = tail_json(r.v1);
  const AsymptoticsReport a = asymptotics_report(r.v1, gap0);
  m.details["asymptotics"] = {{"left", a.left}, {"right", a.right}, {"decay", a.decay}};
  if (r.constants.doubling_change > 1e-9)
    m.failures.push_back("hetero: window doubling changed c1q by " +
                         format_scientific(r.constants.doubling_change));
  if (!c.csv.empty()) {
    write_strip_csv(c.csv, r.v1);
    m.files.push_back(c.csv);
  }
}

void mph_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const TransversePeriods q = c.transverse();
  const auto gap = find_gap_pair_hetero(s, q, c.probes, c.seed.value_or(0), c.flow, c.window);
  if (!gap) {
    m.failures.push_back("mph: no heteroclinic gap pair");
    return;
  }
  const int nodes = c.path.nodes ? c.path.nodes : 65;
  // The transverse chi path winds once around the transverse period.
  const int chi_k = c.path.kind == PathKind::kChi && q.dimension() > 0 && q[0] >= 2 ? q[0] : 0;
  const StripMinimaxResult r = mountain_pass_hetero(s, *gap, c.minimax, nodes, c.path.mode, chi_k);
  m.scalars["c0"] = gap->c0;
  m.scalars["c1q"] = gap->c1q;
  m.scalars["d1q"] = r.value;
  m.scalars["excess"] = r.excess();
  m.scalars["residual"] = r.residual;
  m.scalars["box_margin"] = r.details.box_margin;
  m.scalars["iterations"] = static_cast<double>(r.iterations);
  m.scalars["nodes"] = nodes;
  m.scalars["path_witness"] = strip_path_witness(s, *gap, chi_k);
  m.details["message"] = r.details.message;
  m.details["tails"] = tail_json(gap->v1);
  if (!r.success()) m.failures.push_back("mph: " + r.details.message);
  if (!(r.excess() > 1e-6)) m.failures.push_back("mph: d1 - c1 not positive");
  if (!c.csv.empty()) {
    StripField absolute = r.critical_field;
    for (std::size_t k = 0; k < absolute.size(); ++k) absolute.values[k] += gap->v1.values[k];
    absolute.left_tail = gap->v1.left_tail;
    absolute.right_tail = gap->v1.right_tail;
    write_strip_csv(c.csv, absolute);
    m.files.push_back(c.csv);
  }
}

void multiplicity_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const GapPair g = gap_on(c, s, Periods::ones(c.model.dimension));
  const MultiplicityTable t = multiplicity_scan(s, c.k_max, g, c.minimax, c.path.mode);
  double max_excess = 0.0, max_witness = 0.0;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json j{{"k", row.k},          {"periods", row.periods.values()}, {"c0p", row.c0p},
           {"d0p", row.d0p},      {"excess", row.excess},            {"residual", row.residual},
           {"witness", row.witness}, {"ok", row.ok}};
    if (row.relation_to_first) j["relation_to_first"] = to_string(*row.relation_to_first);
    if (!row.error.empty()) {
      j["error"] = row.error;
      m.failures.push_back("multiplicity k=" + std::to_string(row.k) + ": " + row.error);
    }
    rows.push_back(std::move(j));
    max_excess = std::max(max_excess, row.excess);
    max_witness = std::max(max_witness, row.witness);
  }
  m.scalars["rows"] = static_cast<double>(t.rows.size());
  m.scalars["distinct_pairs"] = t.distinct_pairs(1e-3);
  m.scalars["max_excess"] = max_excess;
  m.scalars["max_witness"] = max_witness;
  m.details["rows"] = std::move(rows);
  m.details["distances"] = t.distances;
  if (!c.csv.empty()) {
    auto f = open_out(c.csv);
    f << "k,c0p,d0p,excess,residual,witness\n";
    for (const auto& row : t.rows)
      f << row.k << "," << format_scientific(row.c0p) << "," << format_scientific(row.d0p) << ","
        << format_scientific(row.excess) << "," << format_scientific(row.residual) << ","
        << format_scientific(row.witness) << "\n";
    m.files.push_back(c.csv);
  }
}

void verify_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  const auto reports = run_property_suite(s, c.periods(), *c.seed, c.trials);
  json props = json::array();
  int failed = 0;
  for (const auto& r : reports) {
    props.push_back({{"name", r.name},
                     {"trials", r.trials},
                     {"worst_margin", r.worst_margin},
                     {"passed", r.passed},
                     {"seed", r.seed},
                     {"note", r.note}});
    m.scalars["margin." + r.name] = r.worst_margin;
    if (!r.passed) {
      ++failed;
      m.failures.push_back("verify: " + r.name + " failed (worst margin " +
                           format_scientific(r.worst_margin) + ")");
    }
  }
  m.scalars["properties"] = static_cast<double>(reports.size());
  m.scalars["failed"] = failed;
  m.details["properties"] = std::move(props);
}

void landscape_pipeline(const RunConfig& c, PotentialPtr s, RunManifest& m) {
  Periods p = c.periods();
  if (c.p.empty()) {
    std::vector<int> two(c.model.dimension, 1);
    two[0] = 2;
    p = Periods(two);
  }
  const LandscapeGrid g = emit_landscape(s, p, c.grid, c.csv, c.seed.value_or(0));
  m.scalars["rows"] = static_cast<double>(g.value.size());
  m.scalars["grid_max"] = g.max_value;
  m.scalars["grid_max_a"] = g.max_a;
  m.scalars["grid_max_b"] = g.max_b;
  m.scalars["value_00"] = g.value.front();
  if (!c.csv.empty()) m.files.push_back(c.csv);
}

}  // namespace

void write_field_csv(const std::string& path, const TorusField& u) {
  auto f = open_out(path);
  f << index_header(u.dimension()) << "value\n";
  for (std::size_t k = 0; k < u.size(); ++k)
    f << index_cells(u.periods.unflatten(k)) << format_scientific(u.values[k]) << "\n";
}

void write_strip_csv(const std::string& path, const StripField& u) {
  auto f = open_out(path);
  f << index_header(u.dimension()) << "value\n";
  for (std::size_t k = 0; k < u.size(); ++k)
    f << index_cells(u.site(k)) << format_scientific(u.values[k]) << "\n";
}

LandscapeGrid emit_landscape(PotentialPtr model, const Periods& p, int grid, const std::string& out,
                             std::uint64_t seed) {
  if (grid < 2) throw InvalidArgument("landscape grid must be >= 2");
  const GapPair gap = require_gap_pair(model, Periods::ones(p.dimension()), 8, seed, FlowParams{});
  const auto f = reduced_landscape(model, gap.extended(p));
  LandscapeGrid g;
  g.grid = grid;
  g.max_value = -std::numeric_limits<double>::infinity();
  const std::size_t n = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
  g.a.reserve(n);
  g.b.reserve(n);
  g.value.reserve(n);
  for (int ia = 0; ia < grid; ++ia)
    for (int ib = 0; ib < grid; ++ib) {
      const double a = static_cast<double>(ia) / (grid - 1), b = static_cast<double>(ib) / (grid - 1);
      const double v = f(a, b);
      g.a.push_back(a);
      g.b.push_back(b);
      g.value.push_back(v);
      if (v > g.max_value) g.max_value = v, g.max_a = a, g.max_b = b;
    }
  if (!out.empty()) {
    auto file = open_out(out);
    file << "a,b,I\n";
    for (std::size_t k = 0; k < n; ++k)
      file << format_scientific(g.a[k]) << "," << format_scientific(g.b[k]) << ","
           << format_scientific(g.value[k]) << "\n";
  }
  return g;
}

json to_json(const RunManifest& m) {
  json j;
  j["config"] = print_config(m.config);
  j["version"] = m.version;
  j["wall_time"] = m.wall_time;
  j["success"] = m.success();
  j["scalars"] = m.scalars;
  j["details"] = m.details;
  j["files"] = m.files;
  j["failures"] = m.failures;
  return j;
}

RunManifest run(const RunConfig& config) {
  validate(config);
  if (needs_seed(config.command) && !config.seed)
    throw ConfigError("command '" + config.command + "' needs an explicit seed", "seed");
  RunConfig c = config;
  c.minimax.flow = c.flow;
  RunManifest m;
  m.config = c;
  m.version = kVersion;
  m.details = json::object();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const PotentialPtr s = make_potential(c.model);
    if (c.command == "minimize") minimize_pipeline(c, s, m);
    else if (c.command == "gap") gap_pipeline(c, s, m);
    else if (c.command == "mpp") mpp_pipeline(c, s, m);
    else if (c.command == "hetero") hetero_pipeline(c, s, m);
    else if (c.command == "mph") mph_pipeline(c, s, m);
    else if (c.command == "multiplicity") multiplicity_pipeline(c, s, m);
    else if (c.command == "verify") verify_pipeline(c, s, m);
    else if (c.command == "landscape") landscape_pipeline(c, s, m);
  } catch (const std::exception& e) {
    m.failures.push_back(c.command + ": " + e.what());
  }
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.out.empty()) {
    m.files.push_back(c.out);
    auto f = open_out(c.out);
    f << to_json(m).dump(2) << "\n";
  }
  return m;
}

}  // namespace fk::cli
