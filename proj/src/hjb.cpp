#include "ctlopt/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctlopt/errors.hpp"

namespace ctlopt {

namespace {

// Foot of a characteristic along an axis with spacing `step`: node offset
// `shift` plus fraction `w`. Offsets beyond the axis collapse onto its end.
void split_shift(double delta, double step, std::size_t n, std::size_t& shift, double& w) {
  if (n <= 1 || !(delta > 0.0)) {
    shift = 0;
    w = 0.0;
    return;
  }
  const double pos = delta / step;
  if (pos >= static_cast<double>(n)) {
    shift = n;
    w = 0.0;
    return;
  }
  shift = static_cast<std::size_t>(pos);
  w = pos - static_cast<double>(shift);
}

void check_finite(const std::vector<double>& v, std::size_t n) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError(n, "non-finite value in backward sweep");
}

double slice_switching(const double* J, const StateGrid& g, Variant variant,
                       const SmoothingFamily& fam, std::size_t n, std::size_t ix, std::size_t iy,
                       std::size_t iz) {
  auto diff = [&](std::size_t i, std::size_t count, double step, auto at) {
    if (count < 2) return 0.0;
    if (i == 0) return (at(1) - at(0)) / step;
    if (i + 1 == count) return (at(i) - at(i - 1)) / step;
    return (at(i + 1) - at(i - 1)) / (2.0 * step);
  };
  const double jy = diff(iy, g.y.n, g.y.step, [&](std::size_t k) { return J[g.index(ix, k, iz)]; });
  const double t = g.time(n);
  const double ph = fam.phi(std::exp(g.z.node(iz)), t);
  if (variant == Variant::linear_reduced) return jy + fam.xi(g.y.node(iy)) * ph;
  const double jx = diff(ix, g.x.n, g.x.step, [&](std::size_t k) { return J[g.index(k, iy, iz)]; });
  if (variant == Variant::adapted) return fam.xi(g.y.node(iy)) * ph * jx + jy;
  return (1.0 - fam.psi(t)) * (ph * jx + jy);
}

void record_slice(PolicyTable& table, const double* J, Variant variant, const SmoothingFamily& fam,
                  std::size_t n) {
  const StateGrid& g = table.grid;
  std::uint8_t* out = table.bits.data() + n * g.slice_size();
  for (std::size_t iz = 0; iz < g.z.n; ++iz)
    for (std::size_t iy = 0; iy < g.y.n; ++iy)
      for (std::size_t ix = 0; ix < g.x.n; ++ix)
        out[g.index(ix, iy, iz)] = slice_switching(J, g, variant, fam, n, ix, iy, iz) >= 0.0 ? 1 : 0;
}

// Control step of one backward time step for the three variants. D holds the
// diffused slice, phi the step's benefit rate per z node, out receives J^n.
using ControlStep = std::function<void(std::size_t n, const std::vector<double>& D,
                                       const std::vector<double>& phi, std::vector<double>& out)>;

// phi on the z nodes at time t. The node(s) whose cell [z - h/2, z + h/2]
// holds the strike get the cell average instead of the point value: a kink
// sampled at a node otherwise biases the lattice price by O(h^2) with a large
// constant (about h K / 8 on the node for an at-the-money call).
void sample_phi(const SmoothingFamily& fam, const Axis& z, double t, double* out) {
  for (std::size_t iz = 0; iz < z.n; ++iz) out[iz] = fam.phi(std::exp(z.node(iz)), t);
  const VanillaPayoff& h = fam.spec().f.h;
  if (h.kind == Vanilla::identity || !(h.strike > 0.0) || z.n < 2) return;
  const double k = std::log(h.strike);
  const double half = 0.5 * z.step;
  auto simpson = [&](double a, double b) {
    constexpr int m = 32;
    if (!(b > a)) return 0.0;
    const double dz = (b - a) / m;
    double acc = fam.phi(std::exp(a), t) + fam.phi(std::exp(b), t);
    for (int j = 1; j < m; ++j) acc += (j % 2 ? 4.0 : 2.0) * fam.phi(std::exp(a + j * dz), t);
    return acc * dz / 3.0;
  };
  for (std::size_t iz = 0; iz < z.n; ++iz) {
    const double a = z.node(iz) - half;
    const double b = z.node(iz) + half;
    if (k < a || k > b) continue;
    out[iz] = (simpson(a, k) + simpson(k, b)) / z.step;
  }
}

// Benefit rate over [t_n, t_{n+1}] by the trapezoid rule in time:
// (phi(z, t_n) + E[phi(Z_{n+1}, t_{n+1}) | z]) / 2, the expectation taken on
// the same z lattice. Matches the trapezoid weights of the path payoffs.
void step_phi(const SmoothingFamily& fam, const StateGrid& g, const kernels::TridiagonalLU& lu,
              std::size_t n, std::vector<double>& phi) {
  phi.resize(g.z.n);
  std::vector<double> next(g.z.n);
  const double t0 = g.time(n);
  const double t1 = g.time(n + 1);
  sample_phi(fam, g.z, t1, next.data());
  kernels::solve_lines(lu, next.data(), 1);
  sample_phi(fam, g.z, t0, phi.data());
  for (std::size_t iz = 0; iz < g.z.n; ++iz) phi[iz] = 0.5 * (phi[iz] + next[iz]);
}

ValueFunction sweep(Variant variant, const MarketParams& params, const PayoffSpec& spec,
                    const SmoothingFamily& fam, const StateGrid& grid, const SolveOptions& opt,
                    std::vector<double> terminal, const ControlStep& control) {
  validate_grid(grid, fam, variant);
  ValueFunction vf;
  vf.grid = grid;
  vf.variant = variant;
  vf.epsilon = fam.epsilon();
  vf.has_history = opt.keep_history;

  std::shared_ptr<PolicyTable> table;
  if (opt.record_policy) {
    table = std::make_shared<PolicyTable>();
    table->grid = grid;
    table->d0 = spec.bounds.d0;
    table->d1 = spec.bounds.d1;
    table->bits.assign(grid.nt * grid.slice_size(), 0);
  }

  const auto lu = build_z_operator(grid.z, params, grid.dt());
  const std::size_t lines = grid.x.n * grid.y.n;
  check_finite(terminal, grid.nt);
  if (opt.keep_history) vf.slices.assign(grid.nt + 1, {});

  std::vector<double> cur = std::move(terminal);
  std::vector<double> D(cur.size());
  std::vector<double> next(cur.size());
  std::vector<double> phi;
  for (std::size_t n = grid.nt; n-- > 0;) {
    D = cur;
    kernels::solve_lines(lu, D.data(), lines);
    step_phi(fam, grid, lu, n, phi);
    control(n, D, phi, next);
    check_finite(next, n);
    if (opt.keep_history) vf.slices[n + 1] = std::move(cur);
    cur.swap(next);
    if (next.size() != cur.size()) next.assign(cur.size(), 0.0);
    if (table) record_slice(*table, cur.data(), variant, fam, n);
  }
  if (opt.keep_history)
    vf.slices[0] = std::move(cur);
  else
    vf.slices = {std::move(cur)};
  vf.policy = std::move(table);
  return vf;
}

void require_mode(const PayoffSpec& spec, WeightMode mode, const char* who) {
  if (spec.mode != mode)
    throw ConfigError("payoff.mode", std::string(who) + " requires weight mode " + to_string(mode));
}

std::vector<double> controls(const PayoffSpec& spec) {
  if (spec.bounds.d0 == spec.bounds.d1) return {spec.bounds.d1};
  return {spec.bounds.d0, spec.bounds.d1};
}

}  // namespace

double PolicyTable::lookup(double t, double x, double y, double s) const {
  const double pos = t / grid.dt();
  std::size_t n = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos + 1e-9);
  n = std::min(n, grid.nt - 1);
  const std::size_t iz = grid.z.nearest(std::log(s));
  return at(n, grid.x.nearest(x), grid.y.nearest(y), iz) ? d1 : d0;
}

const std::vector<double>& ValueFunction::slice(std::size_t n) const {
  if (!has_slice(n))
    throw ParameterError("time slice " + std::to_string(n) + " not stored (solve without history)");
  return has_history ? slices[n] : slices[0];
}

double ValueFunction::interpolate(std::size_t n, double x, double y, double z) const {
  const auto inside = [](const Axis& a, double v) {
    const double tol = 1e-12 * std::max(1.0, std::abs(a.hi()) + std::abs(a.lo));
    return v >= a.lo - tol && v <= a.hi() + tol;
  };
  if (!inside(grid.x, x) || !inside(grid.y, y) || !inside(grid.z, z))
    throw ExtrapolationError("value query outside the grid hull");
  const auto& v = slice(n);
  const auto [kx, wx] = grid.x.locate(x);
  const auto [ky, wy] = grid.y.locate(y);
  const auto [kz, wz] = grid.z.locate(z);
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    const double fz = dz ? wz : 1.0 - wz;
    if (fz == 0.0) continue;
    for (int dy = 0; dy < 2; ++dy) {
      const double fy = dy ? wy : 1.0 - wy;
      if (fy == 0.0) continue;
      for (int dx = 0; dx < 2; ++dx) {
        const double fx = dx ? wx : 1.0 - wx;
        if (fx == 0.0) continue;
        acc += fx * fy * fz * v[grid.index(kx + dx, ky + dy, kz + dz)];
      }
    }
  }
  return acc;
}

kernels::TridiagonalLU build_z_operator(const Axis& z, const MarketParams& params, double dt) {
  const std::size_t n = z.n;
  if (n < 3) throw ConfigError("grid.nz", "need at least 3 log-price nodes");
  const double h = z.step;
  const double A = params.sigma * params.sigma / (h * h);
  double up = (params.r + A * (1.0 - std::exp(-h))) / (2.0 * std::sinh(h));
  double down = A - up;
  if (down < 0.0) {
    // Volatility too small to carry the drift on this spacing: pure up-jump,
    // still exact on e^z.
    down = 0.0;
    up = params.r / std::expm1(h);
  }
  if (!(up >= 0.0) || !(down >= 0.0))
    throw ConfigError("grid.nz", "z lattice rates are not monotone");

  std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sub[i] = -dt * down;
    diag[i] = 1.0 + dt * (down + up);
    sup[i] = -dt * up;
  }
  // Bottom node: up-jump only, at the rate that keeps e^z exact.
  const double c = params.r / std::expm1(h);
  diag[0] = 1.0 + dt * c;
  sup[0] = -dt * c;
  // Top node frozen.
  return kernels::factor_tridiagonal(sub, diag, sup);
}

ValueFunction solve_adapted(const MarketParams& params, const PayoffSpec& spec,
                            const SmoothingFamily& fam, const StateGrid& grid,
                            const SolveOptions& opt) {
  require_mode(spec, WeightMode::adapted, "the adapted solver");
  const StateGrid& g = grid;
  std::vector<double> terminal(g.slice_size());
  for (std::size_t iz = 0; iz < g.z.n; ++iz)
    for (std::size_t iy = 0; iy < g.y.n; ++iy)
      for (std::size_t ix = 0; ix < g.x.n; ++ix)
        terminal[g.index(ix, iy, iz)] = fam.g_hat(g.x.node(ix));

  const auto us = controls(spec);
  const double dt = g.dt();
  // Budget weight consumed by each control from each y node.
  std::vector<double> dxi(us.size() * g.y.n);
  std::vector<std::size_t> ky(us.size() * g.y.n);
  std::vector<double> wy(us.size() * g.y.n);
  for (std::size_t k = 0; k < us.size(); ++k)
    for (std::size_t iy = 0; iy < g.y.n; ++iy) {
      const double y = g.y.node(iy);
      const double y1 = y + us[k] * dt;
      dxi[k * g.y.n + iy] = fam.xi_integral(y1) - fam.xi_integral(y);
      const auto [c, w] = g.y.locate(y1);
      ky[k * g.y.n + iy] = c;
      wy[k * g.y.n + iy] = w;
    }

  auto control = [&](std::size_t, const std::vector<double>& D, const std::vector<double>& phi,
                     std::vector<double>& out) {
    for (std::size_t iz = 0; iz < g.z.n; ++iz) {
      const double ph = phi[iz];
      for (std::size_t iy = 0; iy < g.y.n; ++iy) {
        double* dst = out.data() + g.index(0, iy, iz);
        for (std::size_t k = 0; k < us.size(); ++k) {
          const std::size_t j = k * g.y.n + iy;
          const std::size_t c = ky[j];
          const double* row0 = D.data() + g.index(0, c, iz);
          const double* row1 = c + 1 < g.y.n ? row0 + g.x.n : row0;
          kernels::RowStencil st;
          split_shift(ph * dxi[j], g.x.step, g.x.n, st.shift, st.wx);
          st.wy = c + 1 < g.y.n ? wy[j] : 0.0;
          kernels::candidate_max(dst, row0, row1, g.x.n, st, k == 0);
        }
      }
    }
  };
  return sweep(Variant::adapted, params, spec, fam, grid, opt, std::move(terminal), control);
}

ValueFunction solve_linear_reduced(const MarketParams& params, const PayoffSpec& spec,
                                   const SmoothingFamily& fam, const StateGrid& grid,
                                   const SolveOptions& opt) {
  require_mode(spec, WeightMode::adapted, "the reduced solver");
  if (spec.g.kind != GKind::identity)
    throw ConfigError("payoff.g", "the reduced problem requires g = identity");
  const StateGrid& g = grid;
  if (g.x.n != 1) throw ConfigError("grid.nx", "the reduced problem has no x axis");

  const auto us = controls(spec);
  const double dt = g.dt();
  std::vector<double> dxi(us.size() * g.y.n);
  std::vector<std::size_t> shift(us.size());
  std::vector<double> w(us.size());
  for (std::size_t k = 0; k < us.size(); ++k) {
    split_shift(us[k] * dt, g.y.step, g.y.n, shift[k], w[k]);
    for (std::size_t iy = 0; iy < g.y.n; ++iy) {
      const double y = g.y.node(iy);
      dxi[k * g.y.n + iy] = fam.xi_integral(y + us[k] * dt) - fam.xi_integral(y);
    }
  }

  std::vector<double> add(g.y.n);
  auto control = [&](std::size_t, const std::vector<double>& D, const std::vector<double>& phi,
                     std::vector<double>& out) {
    for (std::size_t iz = 0; iz < g.z.n; ++iz) {
      const double ph = phi[iz];
      const std::size_t base = g.index(0, 0, iz);
      for (std::size_t k = 0; k < us.size(); ++k) {
        const double* dx = dxi.data() + k * g.y.n;
        for (std::size_t iy = 0; iy < g.y.n; ++iy) add[iy] = ph * dx[iy];
        kernels::candidate_max_add(out.data() + base, D.data() + base, add.data(), g.y.n, shift[k],
                                   w[k], k == 0);
      }
    }
  };
  return sweep(Variant::linear_reduced, params, spec, fam, grid, opt,
               std::vector<double>(g.slice_size(), 0.0), control);
}

ValueFunction solve_normalized(const MarketParams& params, const PayoffSpec& spec,
                               const SmoothingFamily& fam, const StateGrid& grid,
                               const SolveOptions& opt) {
  require_mode(spec, WeightMode::normalized, "the normalized solver");
  const StateGrid& g = grid;
  std::vector<double> terminal(g.slice_size());
  for (std::size_t iz = 0; iz < g.z.n; ++iz)
    for (std::size_t iy = 0; iy < g.y.n; ++iy)
      for (std::size_t ix = 0; ix < g.x.n; ++ix)
        terminal[g.index(ix, iy, iz)] = fam.g_eps(g.x.node(ix), g.y.node(iy));

  const auto us = controls(spec);
  auto control = [&](std::size_t n, const std::vector<double>& D, const std::vector<double>& phi,
                     std::vector<double>& out) {
    const double t0 = g.time(n);
    const double t1 = g.time(n + 1);
    for (std::size_t k = 0; k < us.size(); ++k) {
      const double H = fam.h_integral(us[k], t0, t1);
      for (std::size_t iz = 0; iz < g.z.n; ++iz) {
        const double ph = phi[iz];
        kernels::RowStencil st;
        split_shift(ph * H, g.x.step, g.x.n, st.shift, st.wx);
        for (std::size_t iy = 0; iy < g.y.n; ++iy) {
          const auto [c, wy] = g.y.locate(g.y.node(iy) + H);
          const double* row0 = D.data() + g.index(0, c, iz);
          const double* row1 = c + 1 < g.y.n ? row0 + g.x.n : row0;
          st.wy = c + 1 < g.y.n ? wy : 0.0;
          kernels::candidate_max(out.data() + g.index(0, iy, iz), row0, row1, g.x.n, st, k == 0);
        }
      }
    }
  };
  return sweep(Variant::normalized, params, spec, fam, grid, opt, std::move(terminal), control);
}

ValueFunction solve(Variant variant, const MarketParams& params, const PayoffSpec& spec,
                    const SmoothingFamily& fam, const StateGrid& grid, const SolveOptions& opt) {
  switch (variant) {
    case Variant::adapted: return solve_adapted(params, spec, fam, grid, opt);
    case Variant::linear_reduced: return solve_linear_reduced(params, spec, fam, grid, opt);
    case Variant::normalized: return solve_normalized(params, spec, fam, grid, opt);
  }
  throw ConfigError("method.variant", "unknown variant");
}

std::vector<double> solve_pure_diffusion(const MarketParams& params, const Axis& z, std::size_t nt,
                                         const std::function<double(double)>& terminal) {
  if (nt < 1) throw ConfigError("grid.nt", "need at least one time step");
  const auto lu = build_z_operator(z, params, params.t_horizon / static_cast<double>(nt));
  std::vector<double> v(z.n);
  for (std::size_t i = 0; i < z.n; ++i) v[i] = terminal(z.node(i));
  for (std::size_t n = nt; n-- > 0;) {
    kernels::solve_lines(lu, v.data(), 1);
    check_finite(v, n);
  }
  return v;
}

PriceEstimate price_from_value(const ValueFunction& vf, const MarketParams& params) {
  const double j = vf.interpolate(0, 0.0, 0.0, std::log(params.s0));
  PriceEstimate e;
  e.value = std::exp(-params.r * params.t_horizon) * j;
  e.method = Method::hjb;
  const StateGrid& g = vf.grid;
  e.meta = {{"variant", to_string(vf.variant)},
            {"epsilon", vf.epsilon},
            {"grid", {{"nx", g.x.n}, {"ny", g.y.n}, {"nz", g.z.n}, {"nt", g.nt}}},
            {"x_max", g.x.hi()},
            {"y_max", g.y.hi()},
            {"z_range", {g.z.lo, g.z.hi()}}};
  return e;
}

double switching_value(const ValueFunction& vf, const SmoothingFamily& fam, std::size_t n,
                       std::size_t ix, std::size_t iy, std::size_t iz) {
  return slice_switching(vf.slice(n).data(), vf.grid, vf.variant, fam, n, ix, iy, iz);
}

PolicyTable extract_policy_table(const ValueFunction& vf, const SmoothingFamily& fam) {
  if (vf.policy) return *vf.policy;
  if (!vf.has_history)
    throw ParameterError("policy extraction needs the full history or a recorded policy");
  PolicyTable table;
  table.grid = vf.grid;
  table.d0 = fam.spec().bounds.d0;
  table.d1 = fam.spec().bounds.d1;
  table.bits.assign(vf.grid.nt * vf.grid.slice_size(), 0);
  for (std::size_t n = 0; n < vf.grid.nt; ++n)
    record_slice(table, vf.slices[n].data(), vf.variant, fam, n);
  return table;
}

Policy extract_policy(const ValueFunction& vf, const SmoothingFamily& fam) {
  auto table = std::make_shared<const PolicyTable>(extract_policy_table(vf, fam));
  return Policy("hjb", [table](const PolicyState& st) {
    return table->lookup(st.t, st.x, st.y, st.s);
  });
}

}  // namespace ctlopt
