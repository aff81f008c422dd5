#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fk/flow.hpp"
#include "fk/landscape.hpp"

namespace fk {

/// A discretized path in offset coordinates; node 0 and the last node are
/// the two minimizers (0 and upper).
using PathNodes = std::vector<std::vector<double>>;

enum class MinimaxMode {
  kNodeFlow,  // string method: flow interior nodes, re-equidistribute
  kHeatFlow,  // flow the whole path, then track the basin boundary
};

struct MinimaxParams {
  FlowParams flow;
  int reparam_every = 10;
  int stall_window = 50;
  double stall_tol = 1e-12;
  long max_sweeps = 400'000;
  /// l2 residual the refined critical point must reach.
  double saddle_tol = 1e-10;
  int newton_iterations = 200;
  /// Heat-flow mode only.
  double heat_horizon = 2000.0;
  double separation = 1e-4;
  int edge_rounds = 40;

  friend bool operator==(const MinimaxParams&, const MinimaxParams&) = default;
};

/// Raw minimax outcome on a landscape; the periodic and strip wrappers add
/// their own field types on top.
struct MinimaxOutcome {
  double value = 0.0;     // d: energy of the refined critical point (path max if refinement failed)
  double path_max = 0.0;  // max node energy of the final path
  int argmax_index = 0;
  std::vector<double> critical;
  double residual = 0.0;      // l2 norm of the gradient at `critical`
  double residual_sup = 0.0;  // max sitewise |gradient|
  double box_margin = 0.0;    // min of min(x, upper - x) over sites with upper > 0
  bool refined = false;       // residual <= saddle_tol
  bool path_converged = false;
  long iterations = 0;  // sweeps (node-flow) or lockstep steps (heat-flow)
  std::vector<double> value_trace;
  double max_sweep_increase = 0.0;    // largest rise of the max over one flow sweep
  double max_reparam_increase = 0.0;  // largest rise caused by re-equidistribution
  double monotone_defect = 0.0;  // max over nodes/sites of node[m] - node[m+1] (<= 0 if monotone)
  double endpoint_drift = 0.0;
  double theta_infinity = std::numeric_limits<double>::quiet_NaN();
  PathNodes final_path;
  std::string message;
};

/// Equal l2 arc-length re-parametrization with linear interpolation.
/// Throws SolverError when the path has (numerically) zero length.
PathNodes reparametrize(const PathNodes& path);

/// Largest node energy and its (smallest) index.
std::pair<double, int> path_maximum(const EnergyLandscape& landscape, const PathNodes& path);

/// Mountain-pass minimax over paths from path.front() to path.back() inside
/// the landscape box.
MinimaxOutcome run_minimax(const EnergyLandscape& landscape, PathNodes path,
                           const MinimaxParams& params, MinimaxMode mode);

/// Minimax result carrying the critical field in the caller's field type.
template <class Field>
struct BasicMinimaxResult {
  double value = 0.0;  // d
  double level = 0.0;  // c: energy at both path endpoints
  int argmax_index = 0;
  Field critical_field;  // offset coordinates
  double residual = 0.0;  // max sitewise |Euler-Lagrange residual|
  long iterations = 0;
  std::vector<double> value_trace;
  MinimaxOutcome details;

  double excess() const { return value - level; }
  bool success() const { return details.refined; }
};

}  // namespace fk
