#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace fk {

/// A point of Z^n. Norm is the l1 norm used for the interaction radius.
class LatticeIndex {
 public:
  LatticeIndex() = default;
  explicit LatticeIndex(std::size_t dimension) : coords_(dimension, 0) {}
  LatticeIndex(std::initializer_list<int> coords) : coords_(coords) {}
  explicit LatticeIndex(std::vector<int> coords) : coords_(std::move(coords)) {}

  std::size_t dimension() const { return coords_.size(); }
  int& operator[](std::size_t axis) { return coords_[axis]; }
  int operator[](std::size_t axis) const { return coords_[axis]; }
  const std::vector<int>& coords() const { return coords_; }

  int norm() const;

  LatticeIndex& operator+=(const LatticeIndex& other);
  LatticeIndex& operator-=(const LatticeIndex& other);
  friend LatticeIndex operator+(LatticeIndex a, const LatticeIndex& b) { return a += b; }
  friend LatticeIndex operator-(LatticeIndex a, const LatticeIndex& b) { return a -= b; }
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
  friend auto operator<=>(const LatticeIndex&, const LatticeIndex&) = default;

  /// The unit vector e_axis (axis is 0-based).
  static LatticeIndex unit(std::size_t dimension, std::size_t axis);

  std::string to_string() const;

 private:
  std::vector<int> coords_;
};

/// Offsets of the ball B_0^r. The origin is always entry 0; the remaining
/// offsets follow in lexicographic order.
std::vector<LatticeIndex> ball_offsets(std::size_t dimension, int radius);

/// Floor modulus, result in [0, m).
inline int wrap(int i, int m) {
  const int r = i % m;
  return r < 0 ? r + m : r;
}

}  // namespace fk
