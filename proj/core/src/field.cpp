#include "fk/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fk/error.hpp"

namespace fk {

Periods::Periods(std::vector<int> p) : p_(std::move(p)) {
  if (p_.empty()) throw InvalidArgument("periods must have at least one component");
  cells_ = 1;
  for (int v : p_) {
    if (v < 1) throw InvalidArgument("periods must be >= 1");
    cells_ *= static_cast<std::size_t>(v);
    if (cells_ > kMaxCells) throw InvalidArgument("torus cell count exceeds configured maximum");
  }
}

std::size_t Periods::flatten(const LatticeIndex& i) const {
  std::size_t flat = 0, stride = 1;
  for (std::size_t k = 0; k < p_.size(); ++k) {
    flat += static_cast<std::size_t>(wrap(i[k], p_[k])) * stride;
    stride *= static_cast<std::size_t>(p_[k]);
  }
  return flat;
}

LatticeIndex Periods::unflatten(std::size_t flat) const {
  LatticeIndex i(p_.size());
  for (std::size_t k = 0; k < p_.size(); ++k) {
    i[k] = static_cast<int>(flat % static_cast<std::size_t>(p_[k]));
    flat /= static_cast<std::size_t>(p_[k]);
  }
  return i;
}

std::string Periods::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < p_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(p_[k]);
  }
  return s;
}

TorusField::TorusField(Periods p, double fill)
    : periods(std::move(p)), values(periods.cells(), fill) {}

TorusField::TorusField(Periods p, std::vector<double> v)
    : periods(std::move(p)), values(std::move(v)) {
  if (values.size() != periods.cells()) throw InvalidArgument("torus field size mismatch");
}

double TorusField::l2_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double TorusField::linf_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

namespace {

void require_same(const TorusField& a, const TorusField& b) {
  if (!(a.periods == b.periods))
    throw InvalidArgument("period mismatch: " + a.periods.to_string() + " vs " +
                          b.periods.to_string());
}

}  // namespace

TorusField operator+(const TorusField& a, const TorusField& b) {
  require_same(a, b);
  TorusField out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += b.values[k];
  return out;
}

TorusField operator-(const TorusField& a, const TorusField& b) {
  require_same(a, b);
  TorusField out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= b.values[k];
  return out;
}

TorusField operator*(double s, const TorusField& a) {
  TorusField out = a;
  for (double& v : out.values) v *= s;
  return out;
}

TorusField extend_to(const TorusField& u, const Periods& target) {
  if (target.dimension() != u.periods.dimension())
    throw InvalidArgument("extend_to: dimension mismatch");
  for (std::size_t k = 0; k < target.dimension(); ++k)
    if (target[k] % u.periods[k] != 0)
      throw InvalidArgument("extend_to: target periods " + target.to_string() +
                            " are not multiples of " + u.periods.to_string());
  TorusField out(target, 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) out.values[f] = u.at(target.unflatten(f));
  out.lift = u.lift;
  return out;
}

TorusField lift_normalize(const TorusField& u, double lo) {
  const double shift = std::floor(u.values.front() - lo);
  TorusField out = u;
  for (double& v : out.values) v -= shift;
  out.lift = u.lift + static_cast<int>(shift);
  return out;
}

double periodic_distance(const TorusField& a, const TorusField& b) {
  if (a.dimension() != b.dimension()) throw InvalidArgument("dimension mismatch");
  std::vector<int> common(a.dimension());
  for (std::size_t k = 0; k < common.size(); ++k) common[k] = std::lcm(a.periods[k], b.periods[k]);
  const Periods lcm(common);
  double d = 0.0;
  for (std::size_t f = 0; f < lcm.cells(); ++f) {
    const LatticeIndex i = lcm.unflatten(f);
    d = std::max(d, std::abs(a.at(i) - b.at(i)));
  }
  return d;
}

TransversePeriods::TransversePeriods(std::vector<int> q) : q_(std::move(q)) {
  cells_ = 1;
  for (int v : q_) {
    if (v < 1) throw InvalidArgument("transverse periods must be >= 1");
    cells_ *= static_cast<std::size_t>(v);
  }
}

Periods TransversePeriods::layer_periods() const {
  std::vector<int> p{1};
  p.insert(p.end(), q_.begin(), q_.end());
  return Periods(p);
}

std::string TransversePeriods::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < q_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(q_[k]);
  }
  return s;
}

StripField::StripField(TransversePeriods qq, int w, double fill)
    : q(std::move(qq)),
      half_width(w),
      values(static_cast<std::size_t>(2 * w + 1) * q.cells(), fill),
      left_tail(q.cells(), fill),
      right_tail(q.cells(), fill) {
  if (w < 0) throw InvalidArgument("strip half width must be >= 0");
}

std::size_t StripField::transverse_flat(const LatticeIndex& i) const {
  std::size_t flat = 0, stride = 1;
  for (std::size_t k = 0; k < q.dimension(); ++k) {
    flat += static_cast<std::size_t>(wrap(i[k + 1], q[k])) * stride;
    stride *= static_cast<std::size_t>(q[k]);
  }
  return flat;
}

long StripField::flat(const LatticeIndex& i) const {
  if (i[0] < -half_width || i[0] > half_width) return -1;
  return static_cast<long>(static_cast<std::size_t>(i[0] + half_width) * q.cells() +
                           transverse_flat(i));
}

LatticeIndex StripField::site(std::size_t f) const {
  LatticeIndex i(dimension());
  i[0] = static_cast<int>(f / q.cells()) - half_width;
  std::size_t t = f % q.cells();
  for (std::size_t k = 0; k < q.dimension(); ++k) {
    i[k + 1] = static_cast<int>(t % static_cast<std::size_t>(q[k]));
    t /= static_cast<std::size_t>(q[k]);
  }
  return i;
}

double StripField::at(const LatticeIndex& i) const {
  if (i[0] < -half_width) return left_tail[transverse_flat(i)];
  if (i[0] > half_width) return right_tail[transverse_flat(i)];
  return values[static_cast<std::size_t>(flat(i))];
}

std::span<double> StripField::layer(int i1) {
  return std::span<double>(values).subspan(static_cast<std::size_t>(i1 + half_width) * q.cells(),
                                           q.cells());
}

std::span<const double> StripField::layer(int i1) const {
  return std::span<const double>(values).subspan(
      static_cast<std::size_t>(i1 + half_width) * q.cells(), q.cells());
}

FiniteField::FiniteField(LatticeIndex l, LatticeIndex h, double fill)
    : lo(std::move(l)), hi(std::move(h)) {
  std::size_t n = 1;
  for (std::size_t k = 0; k < lo.dimension(); ++k) {
    if (hi[k] < lo[k]) throw InvalidArgument("finite field box is empty");
    n *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
  }
  values.assign(n, fill);
}

bool FiniteField::contains(const LatticeIndex& i) const {
  for (std::size_t k = 0; k < lo.dimension(); ++k)
    if (i[k] < lo[k] || i[k] > hi[k]) return false;
  return true;
}

double& FiniteField::ref(const LatticeIndex& i) {
  if (!contains(i)) throw SupportError("site " + i.to_string() + " outside field window");
  std::size_t flat = 0, stride = 1;
  for (std::size_t k = 0; k < lo.dimension(); ++k) {
    flat += static_cast<std::size_t>(i[k] - lo[k]) * stride;
    stride *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
  }
  return values[flat];
}

double FiniteField::at(const LatticeIndex& i) const {
  return const_cast<FiniteField*>(this)->ref(i);
}

}  // namespace fk
