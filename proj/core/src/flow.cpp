#include "fk/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "fk/error.hpp"

namespace fk {

double resolve_dt(const EnergyLandscape& landscape, const FlowParams& params) {
  const double safe = landscape.safe_time_step();
  if (params.dt < 0.0) throw InvalidArgument("flow dt must be positive");
  if (params.dt == 0.0) return safe;
  if (params.dt > safe * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "flow dt " << params.dt << " exceeds the stability bound " << safe;
    throw InvalidArgument(os.str());
  }
  return params.dt;
}

void rk4_step(const EnergyLandscape& landscape, std::span<const double> x,
              std::span<const double> grad0, double dt, std::span<double> out) {
  const std::size_t n = x.size();
  thread_local std::vector<double> k2, k3, k4, y;
  k2.resize(n);
  k3.resize(n);
  k4.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - 0.5 * dt * grad0[i];
  landscape.gradient(y, k2);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - 0.5 * dt * k2[i];
  landscape.gradient(y, k3);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - dt * k3[i];
  landscape.gradient(y, k4);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] - dt / 6.0 * (grad0[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

namespace {

FlowOutcome run(const EnergyLandscape& landscape, std::vector<double> x0,
                const FlowParams& params, double horizon, bool stop_when_stationary) {
  const double dt0 = resolve_dt(landscape, params);
  const std::size_t n = x0.size();
  if (n != landscape.size()) throw InvalidArgument("flow: field size mismatch");

  FlowOutcome out;
  out.x = std::move(x0);
  out.min_dt = dt0;
  std::vector<double> next(n), g(n);
  double energy = landscape.energy_and_gradient(out.x, g);
  double residual = l2_norm(g);
  auto record = [&](long step) {
    if (params.trace_stride > 0 && step % params.trace_stride == 0)
      out.trace.push_back({out.t, energy, residual});
  };
  record(0);

  while (true) {
    if (!std::isfinite(energy) || !std::isfinite(residual))
      throw SolverError("flow produced a non-finite value at t = " + std::to_string(out.t));
    if (stop_when_stationary && residual <= params.stationarity_tol) {
      out.converged = true;
      break;
    }
    if (out.t >= horizon * (1.0 - 1e-14) || out.steps >= params.max_steps) break;

    double dt = std::min(dt0, horizon - out.t);
    int halvings = 0;
    double e_next = 0.0;
    while (true) {
      rk4_step(landscape, out.x, g, dt, next);
      e_next = landscape.energy(next);
      if (std::isfinite(e_next) && e_next <= energy + params.energy_slack) break;
      if (++halvings > params.max_halvings) {
        std::ostringstream os;
        os << "flow step rejected repeatedly; smallest attempted dt " << dt;
        throw SolverError(os.str());
      }
      dt *= 0.5;
      out.min_dt = std::min(out.min_dt, dt);
    }
    out.max_energy_increase = std::max(out.max_energy_increase, e_next - energy);
    out.x.swap(next);
    out.t += dt;
    ++out.steps;
    energy = landscape.energy_and_gradient(out.x, g);
    residual = l2_norm(g);
    record(out.steps);
  }
  if (params.trace_stride > 0 && (out.trace.empty() || out.trace.back().t != out.t))
    out.trace.push_back({out.t, energy, residual});
  out.energy = energy;
  out.residual = residual;
  return out;
}

}  // namespace

FlowOutcome integrate_flow(const EnergyLandscape& landscape, std::vector<double> x0,
                           const FlowParams& params) {
  return run(landscape, std::move(x0), params, params.t_max, true);
}

FlowOutcome flow_for(const EnergyLandscape& landscape, std::vector<double> x0, double t,
                     const FlowParams& params) {
  FlowParams p = params;
  p.max_steps = std::max(p.max_steps, static_cast<long>(t / resolve_dt(landscape, params)) + 2);
  return run(landscape, std::move(x0), p, t, false);
}

NewtonOutcome newton_polish(const EnergyLandscape& landscape, std::vector<double> x, double tol,
                            int max_iterations, bool box) {
  const auto n = static_cast<Eigen::Index>(x.size());
  NewtonOutcome out;
  std::vector<double> g(x.size()), trial(x.size()), gt(x.size());
  out.energy = landscape.energy_and_gradient(x, g);
  out.residual = l2_norm(g);
  double mu = 1e-8;
  for (int it = 0; it < max_iterations && out.residual > tol; ++it) {
    ++out.iterations;
    const std::vector<double> hv = landscape.hessian(x);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        h(hv.data(), n, n);
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), n);
    const Eigen::MatrixXd h2 = h * h;
    const Eigen::VectorXd rhs = -(h * gv);
    bool accepted = false;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::MatrixXd a = h2;
      a.diagonal().array() += mu;
      const Eigen::VectorXd step = a.ldlt().solve(rhs);
      for (Eigen::Index k = 0; k < n; ++k) trial[static_cast<std::size_t>(k)] = x[k] + step[k];
      if (box) landscape.clip(trial);
      const double et = landscape.energy_and_gradient(trial, gt);
      const double rt = l2_norm(gt);
      if (std::isfinite(rt) && rt < out.residual) {
        x.swap(trial);
        g.swap(gt);
        out.residual = rt;
        out.energy = et;
        mu = std::max(mu * 0.1, 1e-14);
        accepted = true;
      } else {
        mu *= 10.0;
      }
    }
    if (!accepted) break;
  }
  out.converged = out.residual <= tol;
  out.x = std::move(x);
  return out;
}

double min_hessian_eigenvalue(const EnergyLandscape& landscape, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const std::vector<double> hv = landscape.hessian(x);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> h(
      hv.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

}  // namespace fk
