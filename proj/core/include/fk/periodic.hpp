#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fk/field.hpp"
#include "fk/flow.hpp"
#include "fk/landscape.hpp"
#include "fk/model.hpp"
#include "fk/potential.hpp"

namespace fk {

/// Two adjacent ordered minimizers v0 < w0 with w0 - v0 <= 1.
struct GapPair {
  struct Evidence {
    int probes = 0;           // probe minimizations seeded inside the gap
    int distinct_limits = 0;  // distinct limits reached by those probes
    int refinements = 0;      // times a minimizer inside the gap replaced w0
  };
  TorusField v0;
  TorusField w0;
  double c0p = 0.0;  // J_0^p(v0)
  Evidence evidence;

  /// w0 - v0, the upper corner of the order box.
  TorusField width() const { return w0 - v0; }
  /// The same pair re-tiled onto larger periods.
  GapPair extended(const Periods& p) const;
};

/// J_0^p(u): sum of the local energies over the fundamental torus.
double torus_energy(const SitePotential& s, const TorusField& u);
/// I_0^p(u) = J_0^p(u + v0).
double relative_energy(const SitePotential& s, const TorusField& u, const TorusField& v0);
/// Folded gradient of I_0^p at u (the Euler-Lagrange residual of u + v0).
TorusField gradient(const SitePotential& s, const TorusField& u, const TorusField& v0);

/// Landscape of I_0^p around v0 with box [0, upper] (upper defaults to +inf).
EnergyLandscape torus_landscape(PotentialPtr s, const TorusField& v0);
EnergyLandscape torus_landscape(PotentialPtr s, const TorusField& v0, const TorusField& upper);

struct TorusFlowResult {
  TorusField field;
  FlowOutcome outcome;
};

/// Negative-gradient semiflow of I_0^p started at u0 (offset coordinates).
TorusFlowResult flow(PotentialPtr s, const TorusField& u0, const TorusField& v0,
                     const FlowParams& params);

struct MinimizeResult {
  TorusField best;
  double c0p = 0.0;
  std::vector<TorusField> limits;  // deduplicated, lift-normalized to [0, 1)
  std::vector<double> limit_energies;
  std::vector<double> residuals;  // l2 gradient norm of every limit
  long iterations = 0;            // total flow steps
};

/// Flows every seed to stationarity (absolute coordinates), polishes with
/// Newton steps, and returns the lowest-energy limit. Limits closer than
/// 1e-6 in l-infinity after lift normalization are merged.
MinimizeResult minimize_periodic(PotentialPtr s, const Periods& p,
                                 const std::vector<TorusField>& seeds, const FlowParams& params);

/// Constant seeds k / count, k = 0..count-1.
std::vector<TorusField> constant_seeds(const Periods& p, int count);

/// Locates an adjacent ordered pair of minimizers on periods p. Returns
/// nullopt when the probes keep finding new minimizers inside every
/// candidate gap (a continuum, e.g. the free chain).
std::optional<GapPair> find_gap_pair(PotentialPtr s, const Periods& p, int probes,
                                     std::uint64_t seed, const FlowParams& params);

/// find_gap_pair, throwing NoGapError instead of returning nullopt.
GapPair require_gap_pair(PotentialPtr s, const Periods& p, int probes, std::uint64_t seed,
                         const FlowParams& params);

/// True iff every shifted copy tau_j^k u + l (|j| <= scan_range, l in
/// {-1, 0, 1}) is uniformly <, = or > u over the window [-R, R]^n.
template <LatticeField F>
bool is_birkhoff(const F& u, int scan_range, double tol = 1e-12);

struct BoxMaxResult {
  TorusField field;  // offset coordinates, inside [0, w0 - v0]
  double value = 0.0;
  double interior_residual = 0.0;  // max |residual| over unclipped sites
  int interior_sites = 0;
  int lower_clipped = 0;
  int upper_clipped = 0;
  bool lower_sign_ok = true;  // residual <= tol wherever the field sits at 0
  bool upper_sign_ok = true;  // residual >= -tol wherever it sits at w0 - v0
  long iterations = 0;
};

/// Projected gradient ascent of I_0^p over the box [0, w0 - v0]. Empty
/// seeds default to the box midpoint.
BoxMaxResult box_maximize(PotentialPtr s, const GapPair& gap, std::vector<TorusField> seeds,
                          double tol = 1e-10, long max_iterations = 2'000'000);

// ---------------------------------------------------------------------------

template <LatticeField F>
bool is_birkhoff(const F& u, int scan_range, double tol) {
  const std::size_t n = u.dimension();
  const int side = 2 * scan_range + 1;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= static_cast<std::size_t>(side);
  std::vector<LatticeIndex> window;
  window.reserve(total);
  for (std::size_t f = 0; f < total; ++f) {
    LatticeIndex i(n);
    std::size_t rest = f;
    for (std::size_t k = 0; k < n; ++k) {
      i[k] = static_cast<int>(rest % static_cast<std::size_t>(side)) - scan_range;
      rest /= static_cast<std::size_t>(side);
    }
    window.push_back(i);
  }
  for (std::size_t axis = 0; axis < n; ++axis) {
    for (int j = -scan_range; j <= scan_range; ++j) {
      for (int l = -1; l <= 1; ++l) {
        bool below = false, above = false;
        for (const auto& i : window) {
          LatticeIndex k = i;
          k[axis] += j;
          const double d = u.at(k) + l - u.at(i);
          if (d < -tol) below = true;
          if (d > tol) above = true;
          if (below && above) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace fk
