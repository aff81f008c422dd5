#include "fk/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fk/error.hpp"

namespace fk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

SitePotential::SitePotential(std::size_t dimension, int radius)
    : dimension_(dimension), radius_(radius) {
  if (dimension < 1) throw InvalidArgument("potential dimension must be >= 1");
  if (radius < 1) throw InvalidArgument("potential radius must be >= 1");
  ball_ = ball_offsets(dimension, radius);
}

int SitePotential::ball_position(const LatticeIndex& j) const {
  auto it = std::find(ball_.begin(), ball_.end(), j);
  return it == ball_.end() ? -1 : static_cast<int>(it - ball_.begin());
}

void SitePotential::grad(std::span<const double> x, std::span<double> out) const {
  const double h = fd_step();
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double x0 = y[k];
    y[k] = x0 + h;
    const double fp = eval(y);
    y[k] = x0 - h;
    const double fm = eval(y);
    y[k] = x0;
    out[k] = (fp - fm) / (2.0 * h);
  }
}

void SitePotential::hess(std::span<const double> x, std::span<double> out) const {
  const double h = fd_step();
  const std::size_t m = x.size();
  std::vector<double> y(x.begin(), x.end()), gp(m), gm(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x0 = y[k];
    y[k] = x0 + h;
    grad(y, gp);
    y[k] = x0 - h;
    grad(y, gm);
    y[k] = x0;
    for (std::size_t j = 0; j < m; ++j) out[k * m + j] = (gp[j] - gm[j]) / (2.0 * h);
  }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = k + 1; j < m; ++j) {
      const double avg = 0.5 * (out[k * m + j] + out[j * m + k]);
      out[k * m + j] = out[j * m + k] = avg;
    }
}

FkPotential::FkPotential(std::size_t dimension, OnSiteKind kind, double amplitude,
                         double coupling, double offset)
    : SitePotential(dimension, 1), kind_(kind), amplitude_(amplitude), offset_(offset) {
  for (std::size_t p = 0; p < ball().size(); ++p) {
    if (ball()[p].norm() == 1) {
      neighbors_.push_back(static_cast<int>(p));
      kappa_.push_back(coupling);
    }
  }
}

void FkPotential::set_bond_coupling(const LatticeIndex& neighbor, double kappa) {
  const int pos = ball_position(neighbor);
  auto it = std::find(neighbors_.begin(), neighbors_.end(), pos);
  if (pos < 0 || it == neighbors_.end())
    throw InvalidArgument("bond neighbor must have unit norm: " + neighbor.to_string());
  kappa_[static_cast<std::size_t>(it - neighbors_.begin())] = kappa;
}

double FkPotential::onsite(double u) const {
  switch (kind_) {
    case OnSiteKind::kSine:
      return amplitude_ * std::sin(kTwoPi * u);
    case OnSiteKind::kTwoWell: {
      const double c = std::cos(kTwoPi * u);
      return amplitude_ * c * c;
    }
    case OnSiteKind::kNone:
      return 0.0;
  }
  return 0.0;
}

double FkPotential::onsite_d1(double u) const {
  switch (kind_) {
    case OnSiteKind::kSine:
      return amplitude_ * kTwoPi * std::cos(kTwoPi * u);
    case OnSiteKind::kTwoWell:
      // d/du cos^2(2 pi u) = -2 pi sin(4 pi u)
      return -amplitude_ * std::numbers::pi * 2.0 * std::sin(2.0 * kTwoPi * u);
    case OnSiteKind::kNone:
      return 0.0;
  }
  return 0.0;
}

double FkPotential::onsite_d2(double u) const {
  switch (kind_) {
    case OnSiteKind::kSine:
      return -amplitude_ * kTwoPi * kTwoPi * std::sin(kTwoPi * u);
    case OnSiteKind::kTwoWell:
      return -amplitude_ * 2.0 * kTwoPi * kTwoPi * std::cos(2.0 * kTwoPi * u);
    case OnSiteKind::kNone:
      return 0.0;
  }
  return 0.0;
}

double FkPotential::eval(std::span<const double> x) const {
  double s = offset_ + onsite(x[0]);
  for (std::size_t b = 0; b < neighbors_.size(); ++b) {
    const double d = x[static_cast<std::size_t>(neighbors_[b])] - x[0];
    s += kappa_[b] * d * d;
  }
  return s;
}

void FkPotential::grad(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[0] = onsite_d1(x[0]);
  for (std::size_t b = 0; b < neighbors_.size(); ++b) {
    const auto p = static_cast<std::size_t>(neighbors_[b]);
    const double t = 2.0 * kappa_[b] * (x[p] - x[0]);
    out[p] += t;
    out[0] -= t;
  }
}

void FkPotential::hess(std::span<const double> x, std::span<double> out) const {
  const std::size_t m = ball_size();
  std::fill(out.begin(), out.end(), 0.0);
  out[0] = onsite_d2(x[0]);
  for (std::size_t b = 0; b < neighbors_.size(); ++b) {
    const auto p = static_cast<std::size_t>(neighbors_[b]);
    const double k2 = 2.0 * kappa_[b];
    out[0] += k2;
    out[p * m + p] += k2;
    out[p] -= k2;
    out[p * m] -= k2;
  }
}

double FkPotential::second_derivative_bound() const {
  double onsite_bound = 0.0;
  switch (kind_) {
    case OnSiteKind::kSine:
      onsite_bound = std::abs(amplitude_) * kTwoPi * kTwoPi;
      break;
    case OnSiteKind::kTwoWell:
      onsite_bound = std::abs(amplitude_) * 2.0 * kTwoPi * kTwoPi;
      break;
    case OnSiteKind::kNone:
      break;
  }
  double sum = 0.0, largest = 0.0;
  for (double k : kappa_) {
    sum += 2.0 * std::abs(k);
    largest = std::max(largest, 2.0 * std::abs(k));
  }
  return std::max(onsite_bound + sum, largest);
}

FunctionPotential::FunctionPotential(std::string name, std::size_t dimension, int radius,
                                     double bound, Eval eval, Grad grad, Grad hess)
    : SitePotential(dimension, radius),
      name_(std::move(name)),
      bound_(bound),
      eval_(std::move(eval)),
      grad_(std::move(grad)),
      hess_(std::move(hess)) {
  if (!eval_) throw InvalidArgument("plug-in potential needs an eval callable");
}

void FunctionPotential::grad(std::span<const double> x, std::span<double> out) const {
  if (grad_)
    grad_(x, out);
  else
    SitePotential::grad(x, out);
}

void FunctionPotential::hess(std::span<const double> x, std::span<double> out) const {
  if (hess_)
    hess_(x, out);
  else
    SitePotential::hess(x, out);
}

PotentialPtr make_potential(const PotentialDescriptor& d) {
  auto param = [&](const std::string& key, double fallback) {
    auto it = d.params.find(key);
    return it == d.params.end() ? fallback : it->second;
  };
  std::set<std::string> allowed{"amplitude", "coupling", "offset"};
  OnSiteKind kind = OnSiteKind::kSine;
  double amplitude = 1.0;
  if (d.name == "classical-fk" || d.name == "flipped-bond-fk") {
  } else if (d.name == "pinned-fk") {
    allowed.insert("strength");
    amplitude = param("strength", 1.0);
  } else if (d.name == "two-well-fk") {
    kind = OnSiteKind::kTwoWell;
  } else if (d.name == "free-chain") {
    kind = OnSiteKind::kNone;
  } else {
    throw InvalidArgument("unknown potential '" + d.name + "'");
  }
  for (const auto& [key, value] : d.params)
    if (!allowed.contains(key))
      throw InvalidArgument("unknown parameter '" + key + "' for potential " + d.name);
  if (d.radius != 1) throw InvalidArgument("built-in FK potentials have radius 1");

  auto p = std::make_shared<FkPotential>(d.dimension, kind, amplitude * param("amplitude", 1.0),
                                         param("coupling", 1.0 / 16.0), param("offset", 0.0));
  if (d.name == "flipped-bond-fk")
    p->set_bond_coupling(LatticeIndex::unit(d.dimension, 0), -param("coupling", 1.0 / 16.0));
  p->set_name(d.name);
  return p;
}

PotentialPtr classical_fk() { return make_potential(PotentialDescriptor{}); }

}  // namespace fk
