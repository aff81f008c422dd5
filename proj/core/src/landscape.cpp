#include "fk/landscape.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fk/error.hpp"

namespace fk {

namespace {

constexpr std::size_t kMaxBall = 64;

}  // namespace

EnergyLandscape::EnergyLandscape(PotentialPtr potential, std::vector<double> base,
                                 std::vector<double> upper, std::vector<Tap> taps,
                                 double cell_offset)
    : potential_(std::move(potential)),
      base_(std::move(base)),
      upper_(std::move(upper)),
      taps_(std::move(taps)),
      cell_offset_(cell_offset),
      ball_(potential_->ball_size()),
      cells_(taps_.size() / potential_->ball_size()) {
  if (ball_ > kMaxBall) throw InvalidArgument("interaction ball too large");
  if (upper_.size() != base_.size()) throw InvalidArgument("box size mismatch");
}

EnergyLandscape EnergyLandscape::torus(PotentialPtr potential, const TorusField& base,
                                       const TorusField& upper) {
  if (!(base.periods == upper.periods)) throw InvalidArgument("period mismatch");
  if (base.dimension() != potential->dimension())
    throw InvalidArgument("field/potential dimension mismatch");
  const Periods& p = base.periods;
  std::vector<Tap> taps;
  taps.reserve(p.cells() * potential->ball_size());
  for (std::size_t c = 0; c < p.cells(); ++c) {
    const LatticeIndex j = p.unflatten(c);
    for (const auto& b : potential->ball())
      taps.push_back({static_cast<int>(p.flatten(j + b)), 0.0});
  }
  return EnergyLandscape(std::move(potential), base.values, upper.values, std::move(taps), 0.0);
}

EnergyLandscape EnergyLandscape::strip(PotentialPtr potential, const StripField& base,
                                       const StripField& upper, double c0) {
  if (!(base.q == upper.q) || base.half_width != upper.half_width)
    throw InvalidArgument("strip shape mismatch");
  if (base.dimension() != potential->dimension())
    throw InvalidArgument("field/potential dimension mismatch");
  const int r = potential->radius();
  const int w = base.half_width;
  std::vector<Tap> taps;
  LatticeIndex j(base.dimension());
  for (int i1 = -w - r; i1 <= w + r; ++i1) {
    for (std::size_t t = 0; t < base.q.cells(); ++t) {
      LatticeIndex cell = base.site(t);  // layer -W, transverse t
      cell[0] = i1;
      for (const auto& b : potential->ball()) {
        const LatticeIndex k = cell + b;
        const long f = base.flat(k);
        if (f >= 0)
          taps.push_back({static_cast<int>(f), 0.0});
        else
          taps.push_back({-1, base.at(k)});
      }
    }
  }
  return EnergyLandscape(std::move(potential), base.values, upper.values, std::move(taps), c0);
}

void EnergyLandscape::gather(std::size_t cell, std::span<const double> x, double* out) const {
  const Tap* t = &taps_[cell * ball_];
  for (std::size_t b = 0; b < ball_; ++b) {
    const int s = t[b].site;
    out[b] = s >= 0 ? base_[static_cast<std::size_t>(s)] + x[static_cast<std::size_t>(s)]
                    : t[b].fixed;
  }
}

double EnergyLandscape::cell_energy(std::size_t cell, std::span<const double> x) const {
  std::array<double, kMaxBall> buf;
  gather(cell, x, buf.data());
  return potential_->eval(std::span<const double>(buf.data(), ball_)) - cell_offset_;
}

double EnergyLandscape::energy(std::span<const double> x) const {
  double e = 0.0;
  for (std::size_t c = 0; c < cells_; ++c) e += cell_energy(c, x);
  return e;
}

double EnergyLandscape::energy_and_gradient(std::span<const double> x,
                                            std::span<double> g) const {
  std::array<double, kMaxBall> buf, gb;
  std::fill(g.begin(), g.end(), 0.0);
  double e = 0.0;
  for (std::size_t c = 0; c < cells_; ++c) {
    gather(c, x, buf.data());
    const std::span<const double> in(buf.data(), ball_);
    e += potential_->eval(in) - cell_offset_;
    potential_->grad(in, std::span<double>(gb.data(), ball_));
    const Tap* t = &taps_[c * ball_];
    for (std::size_t b = 0; b < ball_; ++b)
      if (t[b].site >= 0) g[static_cast<std::size_t>(t[b].site)] += gb[b];
  }
  return e;
}

std::vector<double> EnergyLandscape::hessian(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> h(n * n, 0.0), hb(ball_ * ball_);
  std::array<double, kMaxBall> buf;
  for (std::size_t c = 0; c < cells_; ++c) {
    gather(c, x, buf.data());
    potential_->hess(std::span<const double>(buf.data(), ball_), hb);
    const Tap* t = &taps_[c * ball_];
    for (std::size_t a = 0; a < ball_; ++a) {
      if (t[a].site < 0) continue;
      for (std::size_t b = 0; b < ball_; ++b) {
        if (t[b].site < 0) continue;
        h[static_cast<std::size_t>(t[a].site) * n + static_cast<std::size_t>(t[b].site)] +=
            hb[a * ball_ + b];
      }
    }
  }
  return h;
}

double EnergyLandscape::safe_time_step() const {
  const double b = static_cast<double>(ball_);
  return 1.0 / (2.0 * potential_->second_derivative_bound() * b * b);
}

void EnergyLandscape::clip(std::span<double> x) const {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], 0.0, upper_[k]);
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

double linf_norm(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s = std::max(s, std::abs(a));
  return s;
}

}  // namespace fk
