#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fk/field.hpp"
#include "fk/minimax.hpp"
#include "fk/periodic.hpp"

namespace fk {

/// Nodes of a path in the order box [0, w0 - v0] (offset coordinates).
struct PathOnBox {
  std::vector<TorusField> nodes;
  bool monotone = false;

  std::size_t size() const { return nodes.size(); }
  PathNodes raw() const;
  static PathOnBox from_raw(const Periods& p, const PathNodes& raw);
  /// Throws InvalidArgument unless the endpoints are 0 and w0 - v0 and every
  /// node lies in the box (tolerance tol).
  void validate(const GapPair& gap, double tol = 1e-12) const;
  /// Recomputes `monotone` from the nodes.
  bool check_monotone(double tol = 1e-12) const;
};

enum class PathKind { kLinear, kChi };

std::string to_string(PathKind kind);
PathKind parse_path_kind(const std::string& name);
std::string to_string(MinimaxMode mode);
MinimaxMode parse_minimax_mode(const std::string& name);

/// Piecewise-linear profile chi_k(t, i), t in [0, (k + 5) / 2], k-periodic
/// and even in i. Odd k reuses chi_{k-1}, clamped to [0, 1].
double chi_path(int k, double t, int i);
/// phi_k(theta, i) = chi_k(theta (k + 5) / 2, i).
double phi_path(int k, double theta, int i);

/// 16 * prod(p) + 1 nodes, capped at 257.
int default_node_count(const Periods& p);

/// linear: node m = m / (N - 1) * (w0 - v0).
/// chi:    node m = phi_k(m / (N - 1), i_1) * (w0 - v0)(i).
PathOnBox build_initial_path(PathKind kind, int n_nodes, int k, const GapPair& gap);

/// Sitewise max(min(u, w0 - v0), 0).
TorusField clip_to_box(const TorusField& u, const GapPair& gap);

using MinimaxResult = BasicMinimaxResult<TorusField>;

/// Mountain-pass value of I_0^p between 0 and w0 - v0 starting from path0.
/// A failed saddle refinement is reported through details.message and
/// success() == false, not thrown.
MinimaxResult mountain_pass(PotentialPtr s, const GapPair& gap, const PathOnBox& path0,
                            const MinimaxParams& params, MinimaxMode mode);

/// max over a theta grid of I_0^p(h(theta)) for the chi_k path, relative to
/// c0p (the path witness of the uniform bound).
double chi_path_witness(PotentialPtr s, const GapPair& gap, int k, int samples = 2001);

struct UnconstrainedPathCheck {
  struct Variant {
    std::string name;
    double value = 0.0;
    double difference = 0.0;
    bool agrees = false;
    std::string error;
  };
  double reference = 0.0;
  double tolerance = 1e-6;
  std::vector<Variant> variants;
  bool all_agree() const;
};

/// Pushes the nodes of path0 outside the box (scaling by 1.5, smooth random
/// excursions), clips them back, re-runs the node flow and compares d.
UnconstrainedPathCheck minimax_over_unconstrained_paths_check(
    PotentialPtr s, const GapPair& gap, const PathOnBox& path0, const MinimaxResult& reference,
    const MinimaxParams& params, std::uint64_t seed, double tolerance = 1e-6);

struct ThetaBounds {
  struct Sample {
    double t;
    double under;
    double over;
  };
  double under = 0.0;
  double over = 1.0;
  std::vector<Sample> history;
};

/// Flows every node of a monotone path to each time in `times`
/// (nondecreasing) and records the node-grid sup of theta with
/// Phi_t h(theta) <= u0 and the inf of theta with Phi_t h(theta) >= u0.
ThetaBounds theta_bounds(PotentialPtr s, const GapPair& gap, const PathOnBox& path,
                         const TorusField& u0, const std::vector<double>& times,
                         const FlowParams& params);

enum class Relation { kBelow, kAbove, kTouchBelow, kTouchAbove, kEqual, kCross };

std::string to_string(Relation r);

/// Order relation of u and v over the box [lo, hi] of sites.
template <LatticeField F, LatticeField G>
Relation intersects(const F& u, const G& v, const LatticeIndex& lo, const LatticeIndex& hi,
                    double tol = 1e-12);

struct MultiplicityRow {
  int k = 0;
  Periods periods;
  double c0p = 0.0;
  double d0p = 0.0;
  double excess = 0.0;  // d - c
  double residual = 0.0;
  double witness = 0.0;  // path witness relative to c0p
  bool ok = false;
  std::string error;
  TorusField critical;  // offset coordinates
  std::optional<Relation> relation_to_first;
};

struct MultiplicityTable {
  std::vector<MultiplicityRow> rows;
  /// Shift-normalized l-infinity distances between critical fields;
  /// NaN where a row failed.
  std::vector<std::vector<double>> distances;
  int distinct_pairs(double threshold) const;
};

/// Mountain passes on p(k) = (k, 1, ..., 1) for k = 1..k_max. Row k uses
/// the linear path for k = 1 and the chi_k path otherwise.
MultiplicityTable multiplicity_scan(PotentialPtr s, int k_max, const GapPair& gap,
                                    const MinimaxParams& params,
                                    MinimaxMode mode = MinimaxMode::kNodeFlow);

/// min over axis-1 shifts of the l-infinity distance of two periodic fields.
double shift_normalized_distance(const TorusField& a, const TorusField& b);

// ---------------------------------------------------------------------------

template <LatticeField F, LatticeField G>
Relation intersects(const F& u, const G& v, const LatticeIndex& lo, const LatticeIndex& hi,
                    double tol) {
  if (lo.dimension() != hi.dimension() || lo.dimension() != u.dimension())
    throw InvalidArgument("intersects: window dimension mismatch");
  bool less = false, greater = false, equal = false;
  LatticeIndex i = lo;
  const std::size_t n = lo.dimension();
  while (true) {
    const double d = u.at(i) - v.at(i);
    if (d < -tol)
      less = true;
    else if (d > tol)
      greater = true;
    else
      equal = true;
    std::size_t axis = 0;
    for (; axis < n; ++axis) {
      if (i[axis] < hi[axis]) {
        ++i[axis];
        break;
      }
      i[axis] = lo[axis];
    }
    if (axis == n) break;
  }
  if (less && greater) return Relation::kCross;
  if (less) return equal ? Relation::kTouchBelow : Relation::kBelow;
  if (greater) return equal ? Relation::kTouchAbove : Relation::kAbove;
  return Relation::kEqual;
}

}  // namespace fk
