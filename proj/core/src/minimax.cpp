#include "fk/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fk/error.hpp"
#include "fk/parallel.hpp"

namespace fk {

namespace {

constexpr double kCollapse = 1e-12;
constexpr double kSameLimit = 1e-6;

double distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

struct NodeState {
  double energy = 0.0;
  std::vector<double> grad;
};

// One RK4 step kept inside the box; the step is halved while it raises the
// energy.
void guarded_step(const EnergyLandscape& land, std::vector<double>& x, NodeState& st, double dt,
                  const FlowParams& fp) {
  std::vector<double> next(x.size());
  for (int halvings = 0;; ++halvings) {
    rk4_step(land, x, st.grad, dt, next);
    land.clip(next);
    const double e = land.energy(next);
    if (std::isfinite(e) && e <= st.energy + fp.energy_slack) break;
    if (halvings >= fp.max_halvings) {
      std::ostringstream os;
      os << "path flow step rejected repeatedly; smallest attempted dt " << dt;
      throw SolverError(os.str());
    }
    dt *= 0.5;
  }
  x.swap(next);
  st.energy = land.energy_and_gradient(x, st.grad);
}

void check_path(const EnergyLandscape& land, const PathNodes& path) {
  if (path.size() < 3) throw InvalidArgument("a path needs at least 3 nodes");
  for (const auto& node : path)
    if (node.size() != land.size()) throw InvalidArgument("path node size mismatch");
}

double monotone_defect(const PathNodes& path) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m + 1 < path.size(); ++m)
    for (std::size_t k = 0; k < path[m].size(); ++k)
      worst = std::max(worst, path[m][k] - path[m + 1][k]);
  return worst;
}

struct Refinement {
  NewtonOutcome newton;
  double residual_sup = 0.0;
};

Refinement refine(const EnergyLandscape& land, const std::vector<double>& x,
                  const MinimaxParams& params) {
  Refinement r{newton_polish(land, x, params.saddle_tol, params.newton_iterations, true), 0.0};
  std::vector<double> g(x.size());
  land.gradient(r.newton.x, g);
  r.residual_sup = linf_norm(g);
  return r;
}

void finish(const EnergyLandscape& land, const Refinement& best, const MinimaxParams& params,
            MinimaxOutcome& out) {
  out.critical = best.newton.x;
  out.residual = best.newton.residual;
  out.residual_sup = best.residual_sup;
  out.refined = best.newton.residual <= params.saddle_tol;
  out.value = out.refined ? land.energy(out.critical) : out.path_max;
  out.box_margin = std::numeric_limits<double>::infinity();
  const auto upper = land.upper();
  for (std::size_t k = 0; k < out.critical.size(); ++k)
    if (upper[k] > 0.0)  // sites where the two minimizers coincide carry no box
      out.box_margin = std::min(out.box_margin, std::min(out.critical[k], upper[k] - out.critical[k]));
  if (!out.refined) {
    std::ostringstream os;
    os << "saddle not isolated at tolerance (residual " << out.residual << ")";
    out.message = os.str();
  }
}

MinimaxOutcome node_flow(const EnergyLandscape& land, PathNodes path,
                         const MinimaxParams& params) {
  const double dt = resolve_dt(land, params.flow);
  const std::vector<double> first = path.front(), last = path.back();
  const bool monotone_input = monotone_defect(path) <= 1e-12;
  if (params.reparam_every > 0) path = reparametrize(path);
  const std::size_t n_nodes = path.size();

  std::vector<NodeState> states(n_nodes);
  auto refresh = [&] {
    parallel_for(n_nodes, [&](std::size_t m) {
      states[m].grad.resize(land.size());
      states[m].energy = land.energy_and_gradient(path[m], states[m].grad);
    });
  };
  auto current_max = [&] {
    int arg = 0;
    for (std::size_t m = 1; m < n_nodes; ++m)
      if (states[m].energy > states[static_cast<std::size_t>(arg)].energy) arg = static_cast<int>(m);
    return std::pair{states[static_cast<std::size_t>(arg)].energy, arg};
  };
  refresh();

  MinimaxOutcome out;
  auto [max_e, arg] = current_max();
  out.value_trace.push_back(max_e);
  for (long sweep = 1; sweep <= params.max_sweeps; ++sweep) {
    const double before = max_e;
    parallel_for(n_nodes - 2, [&](std::size_t k) {
      guarded_step(land, path[k + 1], states[k + 1], dt, params.flow);
    });
    std::tie(max_e, arg) = current_max();
    out.max_sweep_increase = std::max(out.max_sweep_increase, max_e - before);
    if (params.reparam_every > 0 && sweep % params.reparam_every == 0) {
      path = reparametrize(path);
      refresh();
      const double flowed = max_e;
      std::tie(max_e, arg) = current_max();
      out.max_reparam_increase = std::max(out.max_reparam_increase, max_e - flowed);
    }
    out.value_trace.push_back(max_e);
    out.iterations = sweep;
    const auto w = static_cast<std::size_t>(params.stall_window);
    if (out.value_trace.size() > w &&
        std::abs(out.value_trace.back() - out.value_trace[out.value_trace.size() - 1 - w]) <
            params.stall_tol) {
      out.path_converged = true;
      break;
    }
  }
  out.path_max = max_e;
  out.argmax_index = arg;
  out.monotone_defect = monotone_input ? monotone_defect(path) : 0.0;
  out.endpoint_drift = std::max(distance(path.front(), first), distance(path.back(), last));

  Refinement best = refine(land, path[static_cast<std::size_t>(arg)], params);
  for (int off : {-1, 1}) {
    if (best.newton.residual <= params.saddle_tol) break;
    const int m = arg + off;
    if (m <= 0 || m >= static_cast<int>(n_nodes) - 1) continue;
    Refinement alt = refine(land, path[static_cast<std::size_t>(m)], params);
    if (alt.newton.residual < best.newton.residual) best = std::move(alt);
  }
  out.final_path = std::move(path);
  finish(land, best, params, out);
  if (!out.path_converged && out.message.empty())
    out.message = "max-node energy still moving after max_sweeps";
  return out;
}

// ---------------------------------------------------------------------------
// Heat-flow mode: flow the whole path, label every node by the limit it
// reaches, and locate the critical points sitting on the basin boundaries.

struct Limit {
  std::vector<double> x;
  double energy = 0.0;
  bool minimum = false;
};

class Basins {
 public:
  Basins(const EnergyLandscape& land, const MinimaxParams& params) : land_(land) {
    fp_ = params.flow;
    fp_.t_max = params.heat_horizon;
    fp_.trace_stride = 0;
  }

  int classify(std::vector<double> x) {
    const FlowOutcome out = integrate_flow(land_, std::move(x), fp_);
    return label(out.x);
  }

  int label(const std::vector<double>& x) {
    for (std::size_t k = 0; k < limits_.size(); ++k)
      if (distance(limits_[k].x, x) <= kSameLimit) return static_cast<int>(k);
    Limit lim{x, land_.energy(x), min_hessian_eigenvalue(land_, x) > 1e-8};
    limits_.push_back(std::move(lim));
    return static_cast<int>(limits_.size()) - 1;
  }

  const Limit& at(int k) const { return limits_[static_cast<std::size_t>(k)]; }

 private:
  const EnergyLandscape& land_;
  FlowParams fp_;
  std::vector<Limit> limits_;
};

std::vector<double> lerp(std::span<const double> a, std::span<const double> b, double s) {
  std::vector<double> x(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) x[k] = (1.0 - s) * a[k] + s * b[k];
  return x;
}

// Shrinks [a, b] (labels la != lb) to a segment of l-infinity length
// <= kCollapse; returns the final parameter of the bracket midpoint.
double bisect(Basins& basins, std::vector<double>& a, std::vector<double>& b, int la) {
  const std::vector<double> a0 = a, b0 = b;
  double sa = 0.0, sb = 1.0;
  while (distance(a, b) > kCollapse && sb - sa > 1e-16) {
    const double mid = 0.5 * (sa + sb);
    std::vector<double> x = lerp(a0, b0, mid);
    if (basins.classify(x) == la) {
      sa = mid;
      a = std::move(x);
    } else {
      sb = mid;
      b = std::move(x);
    }
  }
  return 0.5 * (sa + sb);
}

Refinement edge_track(const EnergyLandscape& land, Basins& basins, std::vector<double> a,
                      std::vector<double> b, int la, const MinimaxParams& params,
                      double& theta_fraction) {
  theta_fraction = bisect(basins, a, b, la);
  Refinement best;
  best.newton.residual = std::numeric_limits<double>::infinity();
  FlowParams fp = params.flow;
  fp.trace_stride = 0;
  const double chunk = 0.05;
  std::vector<double> g(land.size());
  for (int round = 0; round < params.edge_rounds; ++round) {
    for (double t = 0.0; t < params.heat_horizon; t += chunk) {
      a = flow_for(land, std::move(a), chunk, fp).x;
      b = flow_for(land, std::move(b), chunk, fp).x;
      if (distance(a, b) > params.separation) break;
      land.gradient(lerp(a, b, 0.5), g);
      if (l2_norm(g) < 1e-8) break;
    }
    Refinement r = refine(land, lerp(a, b, 0.5), params);
    const bool saddle = r.newton.residual <= params.saddle_tol &&
                        min_hessian_eigenvalue(land, r.newton.x) < -1e-10;
    if (r.newton.residual < best.newton.residual || saddle) best = r;
    if (saddle) break;
    bisect(basins, a, b, la);
  }
  return best;
}

MinimaxOutcome heat_flow(const EnergyLandscape& land, const PathNodes& path,
                         const MinimaxParams& params) {
  const std::size_t n_nodes = path.size();
  FlowParams fp = params.flow;
  fp.t_max = params.heat_horizon;
  fp.trace_stride = 50;
  std::vector<FlowOutcome> flowed(n_nodes);
  parallel_for(n_nodes, [&](std::size_t m) { flowed[m] = integrate_flow(land, path[m], fp); });

  MinimaxOutcome out;
  std::size_t longest = 0;
  for (const auto& f : flowed) longest = std::max(longest, f.trace.size());
  for (std::size_t s = 0; s < longest; ++s) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& f : flowed) mx = std::max(mx, f.trace[std::min(s, f.trace.size() - 1)].energy);
    out.value_trace.push_back(mx);
    if (s > 0)
      out.max_sweep_increase =
          std::max(out.max_sweep_increase, mx - out.value_trace[out.value_trace.size() - 2]);
  }
  for (const auto& f : flowed) out.iterations = std::max(out.iterations, f.steps);
  out.path_converged = std::all_of(flowed.begin(), flowed.end(),
                                   [](const FlowOutcome& f) { return f.converged; });
  out.final_path.reserve(n_nodes);
  for (const auto& f : flowed) out.final_path.push_back(f.x);
  out.endpoint_drift = std::max(distance(flowed.front().x, path.front()),
                                distance(flowed.back().x, path.back()));
  if (monotone_defect(path) <= 1e-12) {
    // Compare nodes at a common time; the limits above stop at different t.
    FlowParams common = params.flow;
    common.trace_stride = 0;
    PathNodes at_one(n_nodes);
    parallel_for(n_nodes, [&](std::size_t m) { at_one[m] = flow_for(land, path[m], 1.0, common).x; });
    out.monotone_defect = monotone_defect(at_one);
  }

  Basins basins(land, params);
  std::vector<int> labels(n_nodes);
  for (std::size_t m = 0; m < n_nodes; ++m) labels[m] = basins.label(flowed[m].x);
  out.path_max = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < n_nodes; ++m)
    if (flowed[m].energy > out.path_max) {
      out.path_max = flowed[m].energy;
      out.argmax_index = static_cast<int>(m);
    }

  // Candidates: critical points some node converged to, and the critical
  // points found on every boundary between two minimum basins.
  Refinement best;
  double best_energy = -std::numeric_limits<double>::infinity();
  int best_index = 0;
  double best_theta = std::numeric_limits<double>::quiet_NaN();
  const double last = static_cast<double>(n_nodes - 1);
  for (std::size_t m = 0; m < n_nodes; ++m) {
    const Limit& lim = basins.at(labels[m]);
    if (lim.minimum || lim.energy <= best_energy) continue;
    Refinement r = refine(land, lim.x, params);
    best_energy = land.energy(r.newton.x);
    best = std::move(r);
    best_index = static_cast<int>(m);
    best_theta = static_cast<double>(m) / last;
  }
  for (std::size_t m = 0; m + 1 < n_nodes; ++m) {
    if (labels[m] == labels[m + 1]) continue;
    if (!basins.at(labels[m]).minimum || !basins.at(labels[m + 1]).minimum) continue;
    double fraction = 0.0;
    Refinement r = edge_track(land, basins, path[m], path[m + 1], labels[m], params, fraction);
    const double e = land.energy(r.newton.x);
    if (e > best_energy) {
      best_energy = e;
      best = std::move(r);
      best_index = static_cast<int>(m);
      best_theta = (static_cast<double>(m) + fraction) / last;
    }
  }
  if (!std::isfinite(best_energy)) throw SolverError("heat flow found no basin boundary on the path");
  out.argmax_index = best_index;
  out.theta_infinity = best_theta;
  finish(land, best, params, out);
  return out;
}

}  // namespace

PathNodes reparametrize(const PathNodes& path) {
  const std::size_t n = path.size();
  std::vector<double> arc(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < path[m].size(); ++k) {
      const double d = path[m][k] - path[m - 1][k];
      s += d * d;
    }
    arc[m] = arc[m - 1] + std::sqrt(s);
  }
  const double total = arc.back();
  if (!(total / static_cast<double>(n - 1) > kCollapse))
    throw SolverError("reparametrization failure: adjacent nodes collapsed");
  PathNodes out(n);
  out.front() = path.front();
  out.back() = path.back();
  std::size_t seg = 1;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(n - 1);
    while (seg < n - 1 && arc[seg] < target) ++seg;
    const double len = arc[seg] - arc[seg - 1];
    const double s = len > 0.0 ? std::clamp((target - arc[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out[j] = lerp(path[seg - 1], path[seg], s);
  }
  return out;
}

std::pair<double, int> path_maximum(const EnergyLandscape& landscape, const PathNodes& path) {
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (std::size_t m = 0; m < path.size(); ++m) {
    const double e = landscape.energy(path[m]);
    if (e > best) {
      best = e;
      arg = static_cast<int>(m);
    }
  }
  return {best, arg};
}

MinimaxOutcome run_minimax(const EnergyLandscape& landscape, PathNodes path,
                           const MinimaxParams& params, MinimaxMode mode) {
  check_path(landscape, path);
  if (mode == MinimaxMode::kNodeFlow) return node_flow(landscape, std::move(path), params);
  return heat_flow(landscape, path, params);
}

}  // namespace fk
