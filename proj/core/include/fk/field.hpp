#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fk/lattice.hpp"

namespace fk {

/// Any real-valued function on Z^n that can be sampled pointwise.
template <class F>
concept LatticeField = requires(const F& f, const LatticeIndex& i) {
  { f.at(i) } -> std::convertible_to<double>;
  { f.dimension() } -> std::convertible_to<std::size_t>;
};

/// Periods p of a torus field; every component >= 1.
class Periods {
 public:
  static constexpr std::size_t kMaxCells = 1u << 20;

  Periods() = default;
  explicit Periods(std::vector<int> p);
  Periods(std::initializer_list<int> p) : Periods(std::vector<int>(p)) {}

  std::size_t dimension() const { return p_.size(); }
  int operator[](std::size_t axis) const { return p_[axis]; }
  const std::vector<int>& values() const { return p_; }
  /// prod_i p_i, the number of cells of the fundamental torus.
  std::size_t cells() const { return cells_; }

  /// Row-major flattening of a torus index with axis 0 fastest; i is
  /// reduced modulo p first.
  std::size_t flatten(const LatticeIndex& i) const;
  LatticeIndex unflatten(std::size_t flat) const;

  static Periods ones(std::size_t dimension) { return Periods(std::vector<int>(dimension, 1)); }
  std::string to_string() const;

  friend bool operator==(const Periods&, const Periods&) = default;

 private:
  std::vector<int> p_;
  std::size_t cells_ = 0;
};

/// p-periodic lattice function stored on the fundamental torus T_0^p.
struct TorusField {
  Periods periods;
  std::vector<double> values;
  /// Integer subtracted from the field during lift normalization.
  int lift = 0;

  TorusField() = default;
  TorusField(Periods p, double fill);
  TorusField(Periods p, std::vector<double> v);

  std::size_t dimension() const { return periods.dimension(); }
  std::size_t size() const { return values.size(); }
  double at(const LatticeIndex& i) const { return values[periods.flatten(i)]; }
  double& ref(const LatticeIndex& i) { return values[periods.flatten(i)]; }

  double l2_norm() const;
  double linf_norm() const;
};

TorusField operator+(const TorusField& a, const TorusField& b);
TorusField operator-(const TorusField& a, const TorusField& b);
TorusField operator*(double s, const TorusField& a);

/// Re-tile a field onto a multiple of its periods (e.g. 1-periodic to p).
TorusField extend_to(const TorusField& u, const Periods& target);

/// Subtract the integer that puts u(0) into [lo, lo + 1).
TorusField lift_normalize(const TorusField& u, double lo = 0.0);

/// l-infinity distance of two periodic fields over a common multiple of
/// their periods.
double periodic_distance(const TorusField& a, const TorusField& b);

/// Transverse periods q = (q_2, ..., q_n) of a strip field.
class TransversePeriods {
 public:
  TransversePeriods() = default;
  explicit TransversePeriods(std::vector<int> q);
  TransversePeriods(std::initializer_list<int> q) : TransversePeriods(std::vector<int>(q)) {}

  std::size_t dimension() const { return q_.size(); }
  int operator[](std::size_t axis) const { return q_[axis]; }
  const std::vector<int>& values() const { return q_; }
  std::size_t cells() const { return cells_; }
  /// Periods (1, q_2, ..., q_n) of a layer viewed as a torus.
  Periods layer_periods() const;
  std::string to_string() const;

  friend bool operator==(const TransversePeriods&, const TransversePeriods&) = default;

 private:
  std::vector<int> q_;
  std::size_t cells_ = 0;
};

/// Function on Z x (Z^{n-1}/qZ^{n-1}) stored on the layers [-W, W].
/// Layers left of the window read left_tail, layers right of it read
/// right_tail (both indexed by the transverse cell).
struct StripField {
  TransversePeriods q;
  int half_width = 0;
  std::vector<double> values;      // (2W+1) * cells(q), layer-major
  std::vector<double> left_tail;   // cells(q)
  std::vector<double> right_tail;  // cells(q)

  StripField() = default;
  StripField(TransversePeriods q, int half_width, double fill);

  std::size_t dimension() const { return q.dimension() + 1; }
  std::size_t layers() const { return static_cast<std::size_t>(2 * half_width + 1); }
  std::size_t size() const { return values.size(); }
  std::size_t transverse_flat(const LatticeIndex& i) const;
  /// Flat window index of site i, or -1 outside the window.
  long flat(const LatticeIndex& i) const;
  LatticeIndex site(std::size_t flat) const;
  double at(const LatticeIndex& i) const;
  std::span<double> layer(int i1);
  std::span<const double> layer(int i1) const;
};

/// Values on a finite box of Z^n without any extension rule; reading
/// outside throws SupportError.
struct FiniteField {
  LatticeIndex lo;
  LatticeIndex hi;  // inclusive
  std::vector<double> values;

  FiniteField(LatticeIndex lo, LatticeIndex hi, double fill);
  std::size_t dimension() const { return lo.dimension(); }
  bool contains(const LatticeIndex& i) const;
  double at(const LatticeIndex& i) const;
  double& ref(const LatticeIndex& i);
};

/// Field given by a callable; useful for constants and analytic profiles.
struct FunctionField {
  std::size_t dim;
  std::function<double(const LatticeIndex&)> f;
  std::size_t dimension() const { return dim; }
  double at(const LatticeIndex& i) const { return f(i); }
};

inline FunctionField constant_field(std::size_t dimension, double c) {
  return {dimension, [c](const LatticeIndex&) { return c; }};
}

}  // namespace fk
