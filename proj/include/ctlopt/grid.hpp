#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "ctlopt/smoothing.hpp"

namespace ctlopt {

/// Uniform axis lo, lo + step, ..., lo + (n-1) step.
struct Axis {
  double lo = 0.0;
  double step = 1.0;
  std::size_t n = 1;

  double node(std::size_t i) const noexcept { return lo + step * static_cast<double>(i); }
  double hi() const noexcept { return node(n - 1); }

  /// Cell index k and weight w with v = node(k) + w * step; values beyond
  /// either end clamp to the end node (w = 0).
  std::pair<std::size_t, double> locate(double v) const noexcept;
  /// Index of the node closest to v, clamped.
  std::size_t nearest(double v) const noexcept;
};

Axis make_axis(double lo, double hi, std::size_t n);

enum class Variant {
  adapted,         ///< state (x, y, z), terminal g_hat(x)
  linear_reduced,  ///< state (y, z), running reward, terminal 0 (g identity)
  normalized,      ///< state (x, y, z), terminal g_eps(x, y)
};

std::string to_string(Variant v);

/// Tensor grid over (x, y, z = log S) with nt uniform time steps on [0, T].
/// Storage order of a slice is z-major, then y, then x (x contiguous).
struct StateGrid {
  Axis x;
  Axis y;
  Axis z;
  std::size_t nt = 1;
  double t_horizon = 1.0;

  double dt() const noexcept { return t_horizon / static_cast<double>(nt); }
  double time(std::size_t n) const noexcept {
    return n == nt ? t_horizon : t_horizon * static_cast<double>(n) / static_cast<double>(nt);
  }
  std::size_t slice_size() const noexcept { return x.n * y.n * z.n; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const noexcept {
    return (iz * y.n + iy) * x.n + ix;
  }
};

/// Node counts and the half-width of the log-price window in standard
/// deviations of log S(T).
struct GridSpec {
  std::size_t nx = 41;
  std::size_t ny = 41;
  std::size_t nz = 81;
  std::size_t nt = 200;
  double z_width_sd = 5.0;
  /// Use a y spacing of d1 dt / k (k >= 1 the smallest integer giving at
  /// least ny nodes), so that one step at u = d1 moves y by exactly k nodes.
  /// Linear interpolation of a fractional shift smears the value in y at
  /// first order in dy; with d0 = 0 every reachable y is then a node. When
  /// d0 / d1 is a ratio p / q with q <= 16, k is a multiple of q so that the
  /// d0 shift is whole too.
  bool align_y = true;
};

/// Grid covering the reachable set of the chosen problem:
///  - z: log s0 +- z_width_sd * sigma sqrt(T);
///  - y: [0, 1 + eps] (adapted, reduced) or [0, d1 T] (normalized), widened
///    to a whole number of cells when aligned;
///  - x: [0, reach], reach = (total weight) * max phi on the z window, cut at
///    the level above which the adapted terminal reward is constant.
/// The reduced variant has a single x node.
StateGrid make_grid(const SmoothingFamily& fam, Variant variant, const GridSpec& spec);

/// Throws ConfigError when the grid cannot represent the problem (log s0
/// outside the z window, y window too short, degenerate axes).
void validate_grid(const StateGrid& grid, const SmoothingFamily& fam, Variant variant);

}  // namespace ctlopt
