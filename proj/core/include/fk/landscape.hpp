#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fk/field.hpp"
#include "fk/potential.hpp"

namespace fk {

/// Energy I(x) = sum_cells [S_cell(base + x) - cell_offset] over a finite
/// set of free sites x, with every ball member of every cell resolved
/// once into either a free site or a pinned value. Both the torus energy
/// (cells = T_0^p, offset 0) and the windowed strip energy (cells = the
/// window layers plus an r-margin, offset c0) are instances.
///
/// The order box is [0, upper] in offset coordinates.
class EnergyLandscape {
 public:
  struct Tap {
    int site;      // free-site index, or -1 for a pinned value
    double fixed;  // absolute value used when site < 0
  };

  EnergyLandscape(PotentialPtr potential, std::vector<double> base, std::vector<double> upper,
                  std::vector<Tap> taps, double cell_offset);

  /// I_0^p relative to base (usually v0), box [0, upper].
  static EnergyLandscape torus(PotentialPtr potential, const TorusField& base,
                               const TorusField& upper);
  /// Windowed I_1^q relative to base (usually v1); pinned tails come from
  /// base.left_tail / base.right_tail. `upper` is read on the window only.
  static EnergyLandscape strip(PotentialPtr potential, const StripField& base,
                               const StripField& upper, double c0);

  std::size_t size() const { return base_.size(); }
  std::size_t cells() const { return cells_; }
  const SitePotential& potential() const { return *potential_; }
  const PotentialPtr& potential_ptr() const { return potential_; }
  std::span<const double> base() const { return base_; }
  std::span<const double> upper() const { return upper_; }

  double energy(std::span<const double> x) const;
  /// Fills g with dI/dx and returns I(x).
  double energy_and_gradient(std::span<const double> x, std::span<double> g) const;
  void gradient(std::span<const double> x, std::span<double> g) const {
    energy_and_gradient(x, g);
  }
  /// Energy of a single cell (used by the strip tail estimates).
  double cell_energy(std::size_t cell, std::span<const double> x) const;
  /// Dense Hessian, row-major size() x size().
  std::vector<double> hessian(std::span<const double> x) const;

  /// Largest stable explicit step: 1 / (2 C |B|^2) from the Lipschitz
  /// bound of the gradient.
  double safe_time_step() const;

  /// Project x into the box [0, upper] sitewise.
  void clip(std::span<double> x) const;

 private:
  void gather(std::size_t cell, std::span<const double> x, double* out) const;

  PotentialPtr potential_;
  std::vector<double> base_;
  std::vector<double> upper_;
  std::vector<Tap> taps_;  // cells * ball_size
  double cell_offset_;
  std::size_t ball_;
  std::size_t cells_;
};

double l2_norm(std::span<const double> v);
double linf_norm(std::span<const double> v);

}  // namespace fk
