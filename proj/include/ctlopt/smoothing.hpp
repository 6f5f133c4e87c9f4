#pragma once

#include "ctlopt/market.hpp"
#include "ctlopt/payoffs.hpp"

namespace ctlopt {

/// Quintic smoothstep: 0 for s <= 0, 1 for s >= 1, C2 at both joins.
double smoothstep5(double s) noexcept;
/// int_0^s smoothstep5, clamped to [0, 1/2] outside the ramp (s >= 1 adds s - 1).
double smoothstep5_integral(double s) noexcept;

/// Relative half-width of the kink blends: a kink at level K is blended over
/// [K, K + 2w] (or its mirror) with w = kKinkWidth * epsilon * K.
inline constexpr double kKinkWidth = 0.05;

/// The epsilon-indexed regularization of the control problems.
///
///  - xi(y): cumulative cutoff, 1 for y <= 1-eps, 0 for y >= 1-eps+eps^2.
///  - psi(t): terminal ramp, 0 for t <= T-eps, 1 for t >= T-eps+eps^2.
///  - h(u, t) = u (1 - psi(t)) + d1 psi(t): effective control of the normalized mode.
///  - phi(s, t) <= f(s, t): kink-blended f with a smooth cap at scale / eps.
///  - g_hat(x) <= g(x): kink-blended g with a smooth cap (adapted mode).
///  - g_eps(x, y) = g_hat(x y / (y^2 + eps^4)) (normalized mode).
///
/// Every ramp has an exact antiderivative so that the transport steps of the
/// HJB solver integrate the cutoffs without resolving the eps^2 layers.
class SmoothingFamily {
 public:
  SmoothingFamily(double epsilon, const PayoffSpec& spec, const MarketParams& params);

  double epsilon() const noexcept { return eps_; }
  const PayoffSpec& spec() const noexcept { return spec_; }
  const MarketParams& params() const noexcept { return params_; }

  double xi(double y) const noexcept;
  /// int_0^y xi(s) ds.
  double xi_integral(double y) const noexcept;
  /// Total weight int_0^inf xi = 1 - eps + eps^2 / 2.
  double xi_mass() const noexcept;

  double psi(double t) const noexcept;
  /// int_0^t psi(s) ds.
  double psi_integral(double t) const noexcept;

  double h(double u, double t) const noexcept;
  /// int_{t0}^{t1} h(u, s) ds.
  double h_integral(double u, double t0, double t1) const noexcept;

  double phi(double s, double t) const noexcept;
  double g_hat(double x) const noexcept;
  double g_eps(double x, double y) const noexcept;

  /// Level of the smooth upper cap applied to phi and g_hat.
  double cap_level() const noexcept { return cap_; }
  /// Above this x the adapted-mode terminal reward is constant, or +inf.
  double g_saturation() const noexcept;

 private:
  double smooth_cap(double v) const noexcept;

  double eps_;
  PayoffSpec spec_;
  MarketParams params_;
  double cap_;
  double sharpness_;
  double f_width_;
  double g_width_;
};

/// Throws ParameterError unless 0 < epsilon < min(1/2, T/2).
SmoothingFamily build_family(double epsilon, const PayoffSpec& spec, const MarketParams& params);

}  // namespace ctlopt
