#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fk/landscape.hpp"

namespace fk {

/// Parameters of the gradient semiflow integrator.
struct FlowParams {
  double dt = 0.0;  // 0 selects EnergyLandscape::safe_time_step()
  double t_max = 200.0;
  double stationarity_tol = 1e-10;  // l2 norm of the gradient
  long max_steps = 4'000'000;
  int trace_stride = 1;  // record every n-th step (0 disables the trace)
  double energy_slack = 1e-10;
  int max_halvings = 20;

  friend bool operator==(const FlowParams&, const FlowParams&) = default;
};

struct TracePoint {
  double t;
  double energy;
  double residual;
};

struct FlowOutcome {
  std::vector<double> x;
  std::vector<TracePoint> trace;
  double t = 0.0;
  long steps = 0;
  bool converged = false;
  double residual = 0.0;
  double energy = 0.0;
  double min_dt = 0.0;
  /// Largest observed single-step energy rise (<= energy_slack on success).
  double max_energy_increase = 0.0;
};

/// Resolved step size: params.dt, or the landscape's safe step when 0.
/// Throws InvalidArgument when params.dt exceeds the safe step.
double resolve_dt(const EnergyLandscape& landscape, const FlowParams& params);

/// One classical RK4 step of dx/dt = -grad I(x); `grad0` is the gradient
/// at x.
void rk4_step(const EnergyLandscape& landscape, std::span<const double> x,
              std::span<const double> grad0, double dt, std::span<double> out);

/// Integrates the negative-gradient flow until the l2 residual drops below
/// params.stationarity_tol, t reaches params.t_max, or max_steps is hit.
/// A step that raises the energy by more than energy_slack is retried with
/// half the step (at most max_halvings times, then SolverError).
FlowOutcome integrate_flow(const EnergyLandscape& landscape, std::vector<double> x0,
                           const FlowParams& params);

/// Same, integrating to exactly time t (no stationarity stop).
FlowOutcome flow_for(const EnergyLandscape& landscape, std::vector<double> x0, double t,
                     const FlowParams& params);

struct NewtonOutcome {
  std::vector<double> x;
  double residual = 0.0;  // l2 norm of the gradient
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Drives the gradient to zero by minimizing 0.5 |grad I|^2 with
/// Levenberg-Marquardt steps (H^2 + mu) dx = -H g. Converges to the
/// nearest critical point of any index. When `box` is set, iterates are
/// kept in [0, upper].
NewtonOutcome newton_polish(const EnergyLandscape& landscape, std::vector<double> x, double tol,
                            int max_iterations = 100, bool box = false);

/// Smallest eigenvalue of the Hessian at x.
double min_hessian_eigenvalue(const EnergyLandscape& landscape, std::span<const double> x);

}  // namespace fk
