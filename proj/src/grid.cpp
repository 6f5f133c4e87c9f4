#include "ctlopt/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ctlopt/errors.hpp"

namespace ctlopt {

std::pair<std::size_t, double> Axis::locate(double v) const noexcept {
  if (n == 1 || v <= lo) return {0, 0.0};
  const double pos = (v - lo) / step;
  if (pos >= static_cast<double>(n - 1)) return {n - 1, 0.0};
  const auto k = static_cast<std::size_t>(pos);
  return {k, pos - static_cast<double>(k)};
}

std::size_t Axis::nearest(double v) const noexcept {
  if (n == 1 || v <= lo) return 0;
  const double pos = std::round((v - lo) / step);
  return std::min(static_cast<std::size_t>(pos), n - 1);
}

Axis make_axis(double lo, double hi, std::size_t n) {
  if (n == 0) throw ConfigError("grid", "axis needs at least one node");
  if (n == 1) return {lo, 1.0, 1};
  if (!(hi > lo)) throw ConfigError("grid", "axis upper end must exceed lower end");
  return {lo, (hi - lo) / static_cast<double>(n - 1), n};
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::adapted: return "adapted";
    case Variant::linear_reduced: return "linear_reduced";
    case Variant::normalized: return "normalized";
  }
  return "?";
}

StateGrid make_grid(const SmoothingFamily& fam, Variant variant, const GridSpec& spec) {
  const MarketParams& p = fam.params();
  const PayoffSpec& ps = fam.spec();
  if (spec.nz < 3) throw ConfigError("grid.nz", "need at least 3 log-price nodes");
  if (spec.nt < 1) throw ConfigError("grid.nt", "need at least one time step");
  if (!(spec.z_width_sd > 0.0)) throw ConfigError("grid.z_width_sd", "must be > 0");

  StateGrid g;
  g.nt = spec.nt;
  g.t_horizon = p.t_horizon;
  const double half = spec.z_width_sd * p.sigma * std::sqrt(p.t_horizon);
  const double z0 = std::log(p.s0);
  g.z = make_axis(z0 - half, z0 + half, spec.nz);

  const double eps = fam.epsilon();
  if (spec.ny < 2) throw ConfigError("grid.ny", "need at least 2 nodes");
  const double y_need = variant == Variant::normalized ? ps.bounds.d1 * p.t_horizon : 1.0 + eps;
  double y_hi = y_need;
  std::size_t ny = spec.ny;
  const double shift = ps.bounds.d1 * g.dt();
  if (spec.align_y && shift > 0.0) {
    double k = std::max(1.0, std::ceil(static_cast<double>(spec.ny - 1) * shift / y_need - 1e-9));
    // d0/d1 = p/q with small q: a multiple of q puts the d0 shift on a node too.
    const double ratio = ps.bounds.d0 / ps.bounds.d1;
    for (double q = 1.0; q <= 16.0; ++q)
      if (std::abs(ratio * q - std::round(ratio * q)) < 1e-12) {
        k = q * std::ceil(k / q);
        break;
      }
    const double dy = shift / k;
    ny = static_cast<std::size_t>(std::ceil(y_need / dy - 1e-9)) + 1;
    y_hi = dy * static_cast<double>(ny - 1);
  }
  g.y = make_axis(0.0, y_hi, ny);

  if (variant == Variant::linear_reduced) {
    g.x = make_axis(0.0, 0.0, 1);
    return g;
  }
  if (spec.nx < 2) throw ConfigError("grid.nx", "need at least 2 nodes");
  const double phi_max = std::max({fam.phi(std::exp(g.z.lo), 0.0), fam.phi(std::exp(g.z.hi()), 0.0),
                                   fam.phi(std::exp(g.z.lo), p.t_horizon),
                                   fam.phi(std::exp(g.z.hi()), p.t_horizon)});
  double reach = variant == Variant::adapted ? fam.xi_mass() * phi_max
                                             : ps.bounds.d1 * p.t_horizon * phi_max;
  if (variant == Variant::adapted) reach = std::min(reach, fam.g_saturation());
  if (!(reach > 0.0)) reach = 1.0;
  g.x = make_axis(0.0, reach, spec.nx);
  return g;
}

void validate_grid(const StateGrid& grid, const SmoothingFamily& fam, Variant variant) {
  const double z0 = std::log(fam.params().s0);
  if (z0 < grid.z.lo || z0 > grid.z.hi())
    throw ConfigError("grid.z", "log-price window does not contain log s0");
  if (grid.z.n < 3) throw ConfigError("grid.nz", "need at least 3 log-price nodes");
  if (grid.nt < 1) throw ConfigError("grid.nt", "need at least one time step");
  if (grid.x.lo > 0.0 || grid.y.lo > 0.0)
    throw ConfigError("grid", "x and y windows must start at or below 0");
  if (variant != Variant::normalized) {
    const double need = 1.0 + fam.epsilon();
    if (grid.y.hi() < need * (1.0 - 1e-12))
      throw ConfigError("grid.y", "y window must reach 1 + eps to resolve the cutoff");
  }
  if (variant == Variant::linear_reduced && grid.x.n != 1)
    throw ConfigError("grid.nx", "the reduced problem has no x axis");
  if (std::abs(grid.t_horizon - fam.params().t_horizon) > 1e-12 * fam.params().t_horizon)
    throw ConfigError("grid.t_horizon", "grid horizon differs from market horizon");
}

}  // namespace ctlopt
