#include "fk/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fk {

TorusField shift(const TorusField& u, std::size_t axis, int offset) {
  if (axis < 1 || axis > u.dimension())
    throw InvalidArgument("shift axis " + std::to_string(axis) + " out of range");
  TorusField out = u;
  for (std::size_t f = 0; f < u.size(); ++f) {
    LatticeIndex i = u.periods.unflatten(f);
    i[axis - 1] += offset;
    out.values[f] = u.at(i);
  }
  return out;
}

StripField shift(const StripField& u, std::size_t axis, int offset) {
  if (axis < 1 || axis > u.dimension())
    throw InvalidArgument("shift axis " + std::to_string(axis) + " out of range");
  StripField out = u;
  for (std::size_t f = 0; f < u.size(); ++f) {
    LatticeIndex i = u.site(f);
    i[axis - 1] += offset;
    out.values[f] = u.at(i);
  }
  if (axis > 1) {
    // Tails are transverse-periodic fields; shift them too.
    for (std::size_t t = 0; t < u.q.cells(); ++t) {
      LatticeIndex i = u.site(t);
      i[axis - 1] += offset;
      const std::size_t src = u.transverse_flat(i);
      out.left_tail[t] = u.left_tail[src];
      out.right_tail[t] = u.right_tail[src];
    }
  }
  return out;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidArgument("no assumption check named " + name);
}

namespace {

void note_violation(AssumptionCheck& c, double magnitude, std::span<const double> x,
                    bool violated) {
  if (violated) c.passed = false;
  if (magnitude > c.worst) {
    c.worst = magnitude;
    if (c.witnesses.size() >= 5) c.witnesses.erase(c.witnesses.begin());
    c.witnesses.emplace_back(x.begin(), x.end());
  }
}

}  // namespace

ValidationReport validate_assumptions(const SitePotential& s, int sample_count,
                                      std::uint64_t seed) {
  if (sample_count < 1) throw InvalidArgument("sampleCount must be >= 1");
  const std::size_t m = s.ball_size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-3.0, 3.0);

  AssumptionCheck s1, s2, s3, s4, deriv;
  s1.name = "S1";
  s2.name = "S2";
  s3.name = "S3";
  s4.name = "S4";
  deriv.name = "derivatives";
  s2.heuristic = true;
  s2.note = "coercivity cannot be certified by sampling; growth trend only";
  const bool analytic = s.has_analytic_derivatives();
  if (!analytic) deriv.note = "finite-difference fallback derivatives";
  // FD Hessians carry ~1e-6 noise; analytic ones are exact.
  const double sign_tol = analytic ? 1e-12 : 1e-5;
  const double bound = s.second_derivative_bound();

  std::vector<int> unit_neighbors;
  for (std::size_t b = 0; b < m; ++b)
    if (s.ball()[b].norm() == 1) unit_neighbors.push_back(static_cast<int>(b));

  std::vector<double> x(m), y(m), g(m), h(m * m), gfd(m), hfd(m * m);
  for (int sample = 0; sample < sample_count; ++sample) {
    for (double& v : x) v = box(rng);
    const double sx = s.eval(x);

    // S1 on integer-offset copies.
    for (int k : {-2, -1, 1, 2, 3}) {
      for (std::size_t b = 0; b < m; ++b) y[b] = x[b] + k;
      const double diff = std::abs(s.eval(y) - sx);
      note_violation(s1, diff, x, diff > 1e-12 * (1.0 + std::abs(sx)));
    }

    // S2: stretching any unit bond must eventually raise the energy.
    for (int b : unit_neighbors) {
      y = x;
      double previous = -INFINITY;
      for (double stretch : {10.0, 100.0, 1000.0}) {
        y[static_cast<std::size_t>(b)] = x[0] + stretch;
        const double e = s.eval(y);
        const double deficit = previous - e;
        note_violation(s2, std::max(deficit, 0.0), y, !(e > previous));
        previous = e;
      }
    }
    if (!std::isfinite(sx)) note_violation(s2, INFINITY, x, true);

    s.hess(x, h);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        const double hv = h[a * m + b];
        note_violation(s4, std::max(0.0, std::abs(hv) - bound), x,
                       std::abs(hv) > bound * (1.0 + 1e-12));
        if (a == b) continue;
        note_violation(s3, std::max(0.0, hv), x, hv > sign_tol);
      }
    for (int b : unit_neighbors) {
      const double hv = h[static_cast<std::size_t>(b)];
      // strictness: d_{0,j} s < 0 for ||j|| = 1
      note_violation(s3, std::max(0.0, hv + sign_tol), x, hv >= -sign_tol);
    }

    // Derivatives against centered differences.
    const double fd = SitePotential::fd_step();
    s.grad(x, g);
    double gmax = 0.0, gerr = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      y = x;
      y[b] = x[b] + fd;
      const double fp = s.eval(y);
      y[b] = x[b] - fd;
      const double fm = s.eval(y);
      gfd[b] = (fp - fm) / (2.0 * fd);
      gmax = std::max(gmax, std::abs(g[b]));
      gerr = std::max(gerr, std::abs(g[b] - gfd[b]));
    }
    const double grel = gerr / std::max(1.0, gmax);
    note_violation(deriv, grel, x, grel > 1e-6);

    double hmax = 0.0, herr = 0.0;
    std::vector<double> gp(m), gm(m);
    for (std::size_t b = 0; b < m; ++b) {
      y = x;
      y[b] = x[b] + fd;
      s.grad(y, gp);
      y[b] = x[b] - fd;
      s.grad(y, gm);
      for (std::size_t a = 0; a < m; ++a) {
        const double est = (gp[a] - gm[a]) / (2.0 * fd);
        hmax = std::max(hmax, std::abs(h[b * m + a]));
        herr = std::max(herr, std::abs(h[b * m + a] - est));
      }
    }
    const double hrel = herr / std::max(1.0, hmax);
    note_violation(deriv, hrel, x, analytic && hrel > 1e-6);
  }

  ValidationReport report;
  report.checks = {s1, s2, s3, s4, deriv};
  return report;
}

}  // namespace fk
