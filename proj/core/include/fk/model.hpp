#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fk/error.hpp"
#include "fk/field.hpp"
#include "fk/potential.hpp"

namespace fk {

/// Restriction of u to the ball around j, ordered like potential.ball().
template <LatticeField F>
std::vector<double> gather_ball(const SitePotential& s, const F& u, const LatticeIndex& j) {
  std::vector<double> x(s.ball_size());
  for (std::size_t b = 0; b < x.size(); ++b) x[b] = u.at(j + s.ball()[b]);
  return x;
}

/// S_j(u) = s applied to the shifted restriction of u around site j.
template <LatticeField F>
double local_energy(const SitePotential& s, const F& u, const LatticeIndex& j) {
  if (u.dimension() != s.dimension()) throw InvalidArgument("field/potential dimension mismatch");
  return s.eval(gather_ball(s, u, j));
}

/// Euler-Lagrange residual at i: sum over ||j - i|| <= r of d_i S_j(u).
template <LatticeField F>
double el_residual(const SitePotential& s, const F& u, const LatticeIndex& i) {
  if (u.dimension() != s.dimension()) throw InvalidArgument("field/potential dimension mismatch");
  std::vector<double> g(s.ball_size());
  double r = 0.0;
  for (std::size_t b = 0; b < s.ball_size(); ++b) {
    // i sits at offset ball[b] relative to the cell j = i - ball[b].
    const LatticeIndex j = i - s.ball()[b];
    s.grad(gather_ball(s, u, j), g);
    r += g[b];
  }
  return r;
}

/// tau shift along a 1-based axis: shift(u, axis, m)(i) = u(i + m e_axis).
TorusField shift(const TorusField& u, std::size_t axis, int offset);
StripField shift(const StripField& u, std::size_t axis, int offset);

template <LatticeField F>
FunctionField shift_view(const F& u, std::size_t axis, int offset) {
  if (axis < 1 || axis > u.dimension())
    throw InvalidArgument("shift axis " + std::to_string(axis) + " out of range");
  return {u.dimension(), [u, axis, offset](const LatticeIndex& i) {
            LatticeIndex k = i;
            k[axis - 1] += offset;
            return u.at(k);
          }};
}

/// Outcome of checking one of the assumptions S1-S4 by sampling.
struct AssumptionCheck {
  std::string name;
  bool passed = true;
  bool heuristic = false;
  double worst = 0.0;  // worst violation magnitude (0 when none)
  std::vector<std::vector<double>> witnesses;
  std::string note;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;  // S1, S2, S3, S4, derivatives
  bool all_passed() const;
  const AssumptionCheck& check(const std::string& name) const;
};

/// Sampling-based validation of S1-S4 on [-3, 3]^|B| plus integer-offset
/// copies; also compares grad/hess against finite differences. S2 is
/// reported as a heuristic growth trend only.
ValidationReport validate_assumptions(const SitePotential& s, int sample_count,
                                      std::uint64_t seed);

}  // namespace fk
