#include "fk/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>

namespace fk {

int LatticeIndex::norm() const {
  int s = 0;
  for (int c : coords_) s += std::abs(c);
  return s;
}

LatticeIndex& LatticeIndex::operator+=(const LatticeIndex& other) {
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] += other.coords_[k];
  return *this;
}

LatticeIndex& LatticeIndex::operator-=(const LatticeIndex& other) {
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] -= other.coords_[k];
  return *this;
}

LatticeIndex LatticeIndex::unit(std::size_t dimension, std::size_t axis) {
  LatticeIndex e(dimension);
  e[axis] = 1;
  return e;
}

std::string LatticeIndex::to_string() const {
  std::string s = "(";
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(coords_[k]);
  }
  return s + ")";
}

std::vector<LatticeIndex> ball_offsets(std::size_t dimension, int radius) {
  std::vector<LatticeIndex> out;
  LatticeIndex cur(dimension);
  std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int budget) {
    if (axis == dimension) {
      out.push_back(cur);
      return;
    }
    for (int c = -budget; c <= budget; ++c) {
      cur[axis] = c;
      rec(axis + 1, budget - std::abs(c));
    }
    cur[axis] = 0;
  };
  rec(0, radius);
  std::sort(out.begin(), out.end());
  auto origin = std::find(out.begin(), out.end(), LatticeIndex(dimension));
  std::rotate(out.begin(), origin, origin + 1);
  return out;
}

}  // namespace fk
