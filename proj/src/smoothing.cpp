#include "ctlopt/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctlopt/errors.hpp"

namespace ctlopt {

double smoothstep5(double s) noexcept {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return std::min(1.0, s * s * s * (s * (6.0 * s - 15.0) + 10.0));
}

double smoothstep5_integral(double s) noexcept {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 0.5 + (s - 1.0);
  const double s2 = s * s;
  return s2 * s2 * (s * (s - 3.0) + 2.5);
}

namespace {

// Lower C2 blend of max(0, a): equals it outside [0, 2w], never exceeds it.
double kink_below(double a, double w) noexcept {
  if (a <= 0.0) return 0.0;
  if (a >= 2.0 * w) return a;
  return a * smoothstep5(a / (2.0 * w));
}

// Upper C2 blend of max(0, a): equals it outside [-w, w], never below it.
double kink_above(double a, double w) noexcept {
  if (a <= -w) return 0.0;
  if (a >= w) return a;
  return 2.0 * w * smoothstep5_integral((a + w) / (2.0 * w));
}

double softplus(double d, double beta) noexcept {
  return std::max(d, 0.0) + std::log1p(std::exp(-beta * std::abs(d))) / beta;
}

}  // namespace

SmoothingFamily::SmoothingFamily(double epsilon, const PayoffSpec& spec, const MarketParams& params)
    : eps_(epsilon), spec_(spec), params_(params) {
  params_.validate();
  spec_.validate(params_);
  if (!(eps_ > 0.0) || !(eps_ < 0.5) || !(eps_ < 0.5 * params_.t_horizon))
    throw ParameterError("epsilon must lie in (0, min(1/2, T/2)), got " + std::to_string(eps_));

  double scale = params_.s0;
  if (spec_.f.h.kind != Vanilla::identity) scale = std::max(scale, spec_.f.h.strike);
  if (spec_.g.kind != GKind::identity) scale = std::max(scale, spec_.g.level);
  cap_ = scale / eps_;
  sharpness_ = 1.0 / (eps_ * eps_);
  f_width_ = kKinkWidth * eps_ * spec_.f.h.strike;
  g_width_ = kKinkWidth * eps_ * spec_.g.level;
}

double SmoothingFamily::xi(double y) const noexcept {
  return 1.0 - smoothstep5((y - (1.0 - eps_)) / (eps_ * eps_));
}

double SmoothingFamily::xi_integral(double y) const noexcept {
  const double start = 1.0 - eps_;
  const double e2 = eps_ * eps_;
  const double s = (y - start) / e2;
  if (s <= 0.0) return y;
  const double sc = std::min(s, 1.0);
  return start + e2 * (sc - smoothstep5_integral(sc));
}

double SmoothingFamily::xi_mass() const noexcept { return 1.0 - eps_ + 0.5 * eps_ * eps_; }

double SmoothingFamily::psi(double t) const noexcept {
  return smoothstep5((t - (params_.t_horizon - eps_)) / (eps_ * eps_));
}

double SmoothingFamily::psi_integral(double t) const noexcept {
  const double e2 = eps_ * eps_;
  return e2 * smoothstep5_integral((t - (params_.t_horizon - eps_)) / e2);
}

double SmoothingFamily::h(double u, double t) const noexcept {
  const double p = psi(t);
  return u * (1.0 - p) + spec_.bounds.d1 * p;
}

double SmoothingFamily::h_integral(double u, double t0, double t1) const noexcept {
  return u * (t1 - t0) + (spec_.bounds.d1 - u) * (psi_integral(t1) - psi_integral(t0));
}

double SmoothingFamily::smooth_cap(double v) const noexcept {
  return cap_ - softplus(cap_ - v, sharpness_);
}

double SmoothingFamily::phi(double s, double t) const noexcept {
  double v = s;
  switch (spec_.f.h.kind) {
    case Vanilla::call:
      v = kink_below(s - spec_.f.h.strike, f_width_);
      break;
    case Vanilla::put:
      v = kink_below(spec_.f.h.strike - s, f_width_);
      break;
    case Vanilla::identity:
      break;
  }
  if (spec_.f.timing == PaymentTiming::terminal && params_.r != 0.0)
    v *= std::exp(params_.r * (params_.t_horizon - t));
  return smooth_cap(v);
}

double SmoothingFamily::g_hat(double x) const noexcept {
  const double level = spec_.g.level;
  double v = x;
  switch (spec_.g.kind) {
    case GKind::call:
      v = kink_below(x - level, g_width_);
      break;
    case GKind::put:
      v = kink_below(level - x, g_width_);
      break;
    case GKind::cap:
      v = level - kink_above(level - x, g_width_);
      break;
    case GKind::identity:
      break;
  }
  return smooth_cap(v);
}

double SmoothingFamily::g_eps(double x, double y) const noexcept {
  const double e4 = eps_ * eps_ * eps_ * eps_;
  return g_hat(x * y / (y * y + e4));
}

double SmoothingFamily::g_saturation() const noexcept {
  switch (spec_.g.kind) {
    case GKind::cap:
      return spec_.g.level + g_width_;
    case GKind::put:
      return spec_.g.level;
    default:
      return std::numeric_limits<double>::infinity();
  }
}

SmoothingFamily build_family(double epsilon, const PayoffSpec& spec, const MarketParams& params) {
  return SmoothingFamily(epsilon, spec, params);
}

}  // namespace ctlopt
