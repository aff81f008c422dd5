#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fk/field.hpp"
#include "fk/flow.hpp"
#include "fk/landscape.hpp"
#include "fk/minimax.hpp"
#include "fk/periodic.hpp"

namespace fk {

/// Window growth policy for strip computations.
struct WindowPolicy {
  int initial = 20;
  int cap = 640;
  double tail_tolerance = 1e-10;

  friend bool operator==(const WindowPolicy&, const WindowPolicy&) = default;
};

struct RenormalizationConstants {
  double c0 = 0.0;  // energy per cell of the periodic minimizers
  double c1 = 0.0;  // heteroclinic level at q = (1, ..., 1)
  double K1 = 0.0;  // empirical -min of the windowed partial layer sums of v1
  int window = 0;   // half width used for c1
  double tail_bound = 0.0;
  double doubling_change = 0.0;  // |c1 at 2W - c1 at W|
};

/// l1 + l2 norm over the window (offset coordinates; tails contribute 0).
double strip_norm(const StripField& u);

/// Strip over q with the window filled with `fill` and tails pinned to the
/// 1-periodic gap values (v0 left, w0 right).
StripField pinned_strip(const TransversePeriods& q, int half_width, const GapPair& gap0,
                        double fill);

/// Same field on a different half width; new layers read the tails.
StripField rewindow(const StripField& u, int half_width);

/// Re-tile a strip field onto transverse periods that are multiples of its own.
StripField extend_transverse(const StripField& u, const TransversePeriods& q);

/// Sum over layers [-W - r, W + r] of (layer energy - c0 * cells(q)) for an
/// absolute strip field.
double strip_energy(const SitePotential& s, const StripField& u, double c0);
/// Per-layer renormalized energies over [-W - r, W + r].
std::vector<double> layer_energies(const SitePotential& s, const StripField& u, double c0);
/// I_1^q(u) = strip_energy(u + v1); u is in offset coordinates over v1.
/// Throws SupportError when the window is narrower than 2r.
double renormalized_energy(const SitePotential& s, const StripField& u, const StripField& v1,
                           double c0);
/// Gradient of I_1^q at u on the window sites.
StripField strip_gradient(const SitePotential& s, const StripField& u, const StripField& v1);

/// Landscape of I_1^q around base (absolute, tails pinned) with box
/// [0, upper] on the window.
EnergyLandscape strip_landscape(PotentialPtr s, const StripField& base, const StripField& upper,
                                double c0);

/// Upper bound C |B| * (deviation mass of the outer 2r layers at each end
/// from the pinned tails) on the truncation error of the window.
double tail_bound(const SitePotential& s, const StripField& u);

struct HeteroMinimizeResult {
  StripField v1;  // absolute
  double c1q = 0.0;
  std::vector<StripField> limits;
  std::vector<double> limit_energies;
  std::vector<double> residuals;
  RenormalizationConstants constants;  // c1 here is c1q / prod(q)
  std::vector<std::pair<int, double>> window_history;  // (W, c1q at W)
};

/// Heteroclinic-type profiles v0 + sigma((i1 - center) / 5) (w0 - v0),
/// sigma(x) = (1 + tanh x) / 2.
StripField tanh_seed(const TransversePeriods& q, int half_width, const GapPair& gap0,
                     double center);

/// Minimizes I_1^q over the strip box [v0, w0]. Seeds default to tanh
/// profiles centred at 0, 1/4 and 1/2. The window doubles from
/// policy.initial until tail_bound < policy.tail_tolerance (SolverError
/// beyond policy.cap); the result is then re-solved on 2W and the change
/// recorded as constants.doubling_change.
HeteroMinimizeResult minimize_hetero(PotentialPtr s, const TransversePeriods& q,
                                     const GapPair& gap0, const FlowParams& params,
                                     std::vector<StripField> seeds = {},
                                     const WindowPolicy& policy = {});

struct StripFlowResult {
  StripField field;  // offset coordinates
  FlowOutcome outcome;
};

/// Negative-gradient flow of I_1^q from u0 (offset over v1, tails pinned).
StripFlowResult flow_hetero(PotentialPtr s, const StripField& u0, const StripField& v1, double c0,
                            const FlowParams& params);

struct HeteroGapPair {
  StripField v1;  // absolute
  StripField w1;  // absolute, same window
  double c0 = 0.0;
  double c1q = 0.0;
  GapPair gap0;
  GapPair::Evidence evidence;

  StripField width() const;
};

/// Looks for v1 < w1 adjacent heteroclinic minimizers, starting from the
/// axis-1 translate of v1. Returns nullopt when the translate coincides
/// with v1 or the probes keep finding minimizers in between.
std::optional<HeteroGapPair> find_gap_pair_hetero(PotentialPtr s, const HeteroMinimizeResult& min,
                                                  const GapPair& gap0, int probes,
                                                  std::uint64_t seed, const FlowParams& params);
/// Same, computing the periodic gap and the minimizer first; nullopt when
/// the periodic problem has no gap.
std::optional<HeteroGapPair> find_gap_pair_hetero(PotentialPtr s, const TransversePeriods& q,
                                                  int probes, std::uint64_t seed,
                                                  const FlowParams& params,
                                                  const WindowPolicy& policy = {});

/// Re-tile a q = (1, ..., 1) pair onto larger transverse periods.
HeteroGapPair extend_transverse(const HeteroGapPair& gap, const TransversePeriods& q);

using StripMinimaxResult = BasicMinimaxResult<StripField>;

/// Strip paths are plain window arrays (offset over v1).
struct StripPath {
  std::vector<StripField> nodes;
};

/// linear: m / (N - 1) * (w1 - v1); transverse chi: phi_k(theta, i_2) (w1 - v1).
StripPath build_strip_path(const HeteroGapPair& gap, int n_nodes, int k);

StripMinimaxResult mountain_pass_hetero(PotentialPtr s, const HeteroGapPair& gap,
                                        const MinimaxParams& params, int n_nodes,
                                        MinimaxMode mode = MinimaxMode::kNodeFlow,
                                        int chi_k = 0);

/// max over theta of I_1^q along the strip path, minus c1q.
double strip_path_witness(PotentialPtr s, const HeteroGapPair& gap, int k, int samples = 513);

struct HeteroBoundRow {
  int k = 0;
  double c1q = 0.0;
  double d1q = 0.0;
  double excess = 0.0;
  double witness = 0.0;
  double residual = 0.0;
  bool ok = false;
  std::string error;
};

struct HeteroBoundTable {
  std::vector<HeteroBoundRow> rows;
  double max_excess() const;
  double max_witness() const;
};

/// Rows k = 1..k_max on q(k) = (k, 1, ..., 1); needs n >= 2. Each row runs
/// the strip mountain pass from the transverse chi path (linear for k = 1).
HeteroBoundTable bound_scan_hetero(PotentialPtr s, int k_max, const HeteroGapPair& gap,
                                   const MinimaxParams& params);

struct AsymptoticsReport {
  std::vector<int> layers;
  std::vector<double> distance_v0;  // max over the layer of |u - v0|
  std::vector<double> distance_w0;
  std::string left;   // "v0" or "w0"
  std::string right;
  std::vector<double> decay;  // distance to the tagged asymptote, moving outwards from the centre
};

AsymptoticsReport asymptotics_report(const StripField& u, const GapPair& gap0);

}  // namespace fk
