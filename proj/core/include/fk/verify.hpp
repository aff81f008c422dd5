#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fk/minimax.hpp"
#include "fk/periodic.hpp"

namespace fk {

/// Samples of a two-variable landscape f(a, b) on the uniform grid
/// a, b in {0, 1/(R-1), ..., 1}; index (ia, ib) is stored at ia * R + ib.
struct OracleGrid2D {
  int resolution = 0;
  std::vector<double> values;

  double at(int ia, int ib) const {
    return values[static_cast<std::size_t>(ia) * static_cast<std::size_t>(resolution) +
                  static_cast<std::size_t>(ib)];
  }
  double coordinate(int i) const { return static_cast<double>(i) / (resolution - 1); }

  /// Throws InvalidArgument for resolution < 101 or non-finite samples.
  static OracleGrid2D sample(int resolution, const std::function<double(double, double)>& f);
};

/// Two-site reduction of I_0^p on p = (2, 1, ..., 1): the field with value
/// a (w0 - v0) on the sites with i_1 = 0 and b (w0 - v0) on those with i_1 = 1.
/// Throws InvalidArgument unless the gap lives on such periods.
std::function<double(double, double)> reduced_landscape(PotentialPtr s, const GapPair& gap);

/// Minimax (widest-path) value over 8-connected grid paths from `start` to
/// `end`: min over paths of the max sample along the path.
double bottleneck_minimax_2d(const OracleGrid2D& grid, std::pair<int, int> start,
                             std::pair<int, int> end);
double bottleneck_minimax_2d(const OracleGrid2D& grid);

struct PropertyReport {
  std::string name;
  int trials = 0;
  double worst_margin = 0.0;  // >= 0 on pass (distance to the threshold)
  bool passed = true;
  std::uint64_t seed = 0;
  std::string note;
};

/// Thresholds shared by the property suite.
struct PropertyThresholds {
  double submodularity = 1e-10;
  double energy_increase = 1e-10;
  double gradient_relative = 1e-6;
  double box = 1e-10;
  double clip = 1e-10;
  double endpoint = 1e-10;
  double scaling = 1e-8;
  double comparison_time = 1.0;
};

/// Submodularity, flow comparison, strong comparison of stationary pairs,
/// energy decrease, gradient vs finite differences, box invariance,
/// clip decrease, endpoint fixity and the period scaling law. Random fields
/// are uniform in the gap box (the unit box when there is no gap) followed
/// by one smoothing flow step. trials = 0 returns an empty report.
std::vector<PropertyReport> run_property_suite(PotentialPtr s, const Periods& p,
                                               std::uint64_t seed, int trials,
                                               const PropertyThresholds& thresholds = {});

struct CrossCheckReport {
  double node_flow = 0.0;
  double heat_flow = 0.0;
  std::vector<std::pair<int, double>> oracle;  // (resolution, value)
  double grid_max = 0.0;
  double grid_max_a = 0.0;
  double grid_max_b = 0.0;
  double c0p = 0.0;
  double tolerance = 1e-3;
  bool agree = false;
  std::string message;
};

/// Node-flow, heat-flow and the bottleneck oracle (at every resolution) on
/// p = (2, 1, ..., 1); agreement is judged at the finest resolution.
CrossCheckReport cross_check_mountain_pass(PotentialPtr s, const std::vector<int>& resolutions,
                                           int n_nodes, const MinimaxParams& params,
                                           std::uint64_t seed, double tolerance = 1e-3);

}  // namespace fk
