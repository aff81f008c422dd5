#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fk/lattice.hpp"

namespace fk {

/// Local energy s on the ball B_0^r. Configurations are passed as spans
/// ordered like ball() (origin first). Hessians are row-major |B| x |B|.
///
/// Subclasses must implement eval(); grad() and hess() fall back to
/// centered finite differences with step fd_step() (accuracy roughly
/// 1e-10 for grad and 1e-6 for hess on O(1) potentials).
class SitePotential {
 public:
  SitePotential(std::size_t dimension, int radius);
  virtual ~SitePotential() = default;

  std::size_t dimension() const { return dimension_; }
  int radius() const { return radius_; }
  const std::vector<LatticeIndex>& ball() const { return ball_; }
  std::size_t ball_size() const { return ball_.size(); }
  /// Position of offset j in ball(), or -1 when ||j|| > r.
  int ball_position(const LatticeIndex& j) const;

  virtual double eval(std::span<const double> x) const = 0;
  virtual void grad(std::span<const double> x, std::span<double> out) const;
  virtual void hess(std::span<const double> x, std::span<double> out) const;

  /// Bound C on |d^2 s / du_i du_k| (assumption S4).
  virtual double second_derivative_bound() const = 0;
  virtual std::string name() const = 0;
  virtual bool has_analytic_derivatives() const { return false; }

  static constexpr double fd_step() { return 1e-6; }

 private:
  std::size_t dimension_;
  int radius_;
  std::vector<LatticeIndex> ball_;
};

using PotentialPtr = std::shared_ptr<const SitePotential>;

enum class OnSiteKind {
  kSine,     // amplitude * sin(2 pi u(0))
  kTwoWell,  // amplitude * cos^2(2 pi u(0)), two wells per unit period
  kNone,     // free chain
};

/// Generalized classical Frenkel-Kontorova site energy, radius 1:
///   s(u) = offset + onsite(u(0)) + sum_{||j||=1} kappa_j [u(j) - u(0)]^2
class FkPotential final : public SitePotential {
 public:
  FkPotential(std::size_t dimension, OnSiteKind kind, double amplitude, double coupling,
              double offset = 0.0);

  /// Override one bond coefficient; `neighbor` must have unit norm.
  void set_bond_coupling(const LatticeIndex& neighbor, double kappa);

  double eval(std::span<const double> x) const override;
  void grad(std::span<const double> x, std::span<double> out) const override;
  void hess(std::span<const double> x, std::span<double> out) const override;
  double second_derivative_bound() const override;
  std::string name() const override { return name_; }
  bool has_analytic_derivatives() const override { return true; }

  void set_name(std::string name) { name_ = std::move(name); }
  OnSiteKind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }

 private:
  double onsite(double u) const;
  double onsite_d1(double u) const;
  double onsite_d2(double u) const;

  OnSiteKind kind_;
  double amplitude_;
  double offset_;
  std::vector<int> neighbors_;   // ball positions with norm 1
  std::vector<double> kappa_;    // same order as neighbors_
  std::string name_ = "fk";
};

/// Plug-in potential built from callables. Missing derivatives use the
/// finite-difference fallback of SitePotential.
class FunctionPotential final : public SitePotential {
 public:
  using Eval = std::function<double(std::span<const double>)>;
  using Grad = std::function<void(std::span<const double>, std::span<double>)>;

  FunctionPotential(std::string name, std::size_t dimension, int radius, double bound, Eval eval,
                    Grad grad = {}, Grad hess = {});

  double eval(std::span<const double> x) const override { return eval_(x); }
  void grad(std::span<const double> x, std::span<double> out) const override;
  void hess(std::span<const double> x, std::span<double> out) const override;
  double second_derivative_bound() const override { return bound_; }
  std::string name() const override { return name_; }
  bool has_analytic_derivatives() const override { return bool(grad_) && bool(hess_); }

 private:
  std::string name_;
  double bound_;
  Eval eval_;
  Grad grad_;
  Grad hess_;
};

/// Run-config description of a potential.
struct PotentialDescriptor {
  std::string name = "classical-fk";
  std::size_t dimension = 2;
  int radius = 1;
  std::map<std::string, double> params;

  friend bool operator==(const PotentialDescriptor&, const PotentialDescriptor&) = default;
};

/// Built-in names: classical-fk, two-well-fk, pinned-fk, free-chain,
/// flipped-bond-fk. Parameters: amplitude, coupling, offset, strength
/// (pinned-fk only). Throws InvalidArgument for unknown names/params.
PotentialPtr make_potential(const PotentialDescriptor& descriptor);

/// The classical FK example: n = 2, sin(2 pi u(0)) + 1/16 sum (u(j)-u(0))^2.
PotentialPtr classical_fk();

}  // namespace fk
