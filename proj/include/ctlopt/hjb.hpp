#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ctlopt/estimate.hpp"
#include "ctlopt/grid.hpp"
#include "ctlopt/kernels.hpp"
#include "ctlopt/policy.hpp"
#include "ctlopt/smoothing.hpp"

namespace ctlopt {

/// Bang-bang decisions on the nodes of every time slice n = 0 .. nt-1.
/// 1 means d1, 0 means d0.
struct PolicyTable {
  StateGrid grid;
  double d0 = 0.0;
  double d1 = 1.0;
  std::vector<std::uint8_t> bits;  ///< bits[n * slice_size + grid.index(ix, iy, iz)]

  std::uint8_t at(std::size_t n, std::size_t ix, std::size_t iy, std::size_t iz) const {
    return bits[n * grid.slice_size() + grid.index(ix, iy, iz)];
  }
  /// Nearest node in (x, y, log s) of the slice whose interval contains t.
  double lookup(double t, double x, double y, double s) const;
};

/// Grid-sampled value function. Slice 0 (t = 0) is always present; the
/// remaining slices only when the solve kept its history.
struct ValueFunction {
  StateGrid grid;
  Variant variant = Variant::adapted;
  double epsilon = 0.0;
  bool has_history = false;
  std::vector<std::vector<double>> slices;  ///< slices[n] at t_n when has_history
  std::shared_ptr<const PolicyTable> policy;

  bool has_slice(std::size_t n) const noexcept { return n == 0 || (has_history && n <= grid.nt); }
  const std::vector<double>& slice(std::size_t n) const;
  double at(std::size_t n, std::size_t ix, std::size_t iy, std::size_t iz) const {
    return slice(n)[grid.index(ix, iy, iz)];
  }
  /// Multilinear interpolation of slice n. Throws ExtrapolationError outside the grid hull.
  double interpolate(std::size_t n, double x, double y, double z) const;
};

struct SolveOptions {
  bool keep_history = false;
  /// Record the bang-bang decisions while sweeping (needed by extract_policy
  /// when the history is not kept).
  bool record_policy = false;
};

/// Implicit step in z: (I - dt L) v = rhs, L the martingale-fitted lattice
/// generator of log S under the pricing measure. Exact on constants and on
/// e^z, so the discrete price process is a martingale after discounting.
kernels::TridiagonalLU build_z_operator(const Axis& z, const MarketParams& params, double dt);

ValueFunction solve_adapted(const MarketParams& params, const PayoffSpec& spec,
                            const SmoothingFamily& fam, const StateGrid& grid,
                            const SolveOptions& opt = {});
ValueFunction solve_linear_reduced(const MarketParams& params, const PayoffSpec& spec,
                                   const SmoothingFamily& fam, const StateGrid& grid,
                                   const SolveOptions& opt = {});
ValueFunction solve_normalized(const MarketParams& params, const PayoffSpec& spec,
                               const SmoothingFamily& fam, const StateGrid& grid,
                               const SolveOptions& opt = {});
ValueFunction solve(Variant variant, const MarketParams& params, const PayoffSpec& spec,
                    const SmoothingFamily& fam, const StateGrid& grid, const SolveOptions& opt = {});

/// Backward heat step only (no control): v(., t_0) from terminal data on z.
std::vector<double> solve_pure_diffusion(const MarketParams& params, const Axis& z, std::size_t nt,
                                         const std::function<double(double)>& terminal);

/// e^{-rT} J(0, 0, log s0, 0).
PriceEstimate price_from_value(const ValueFunction& vf, const MarketParams& params);

/// Coefficient of u in the Hamiltonian at a node of slice n, by centered
/// differences of J (one-sided on the boundary).
double switching_value(const ValueFunction& vf, const SmoothingFamily& fam, std::size_t n,
                       std::size_t ix, std::size_t iy, std::size_t iz);

PolicyTable extract_policy_table(const ValueFunction& vf, const SmoothingFamily& fam);
Policy extract_policy(const ValueFunction& vf, const SmoothingFamily& fam);

}  // namespace ctlopt
