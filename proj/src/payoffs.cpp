#include "ctlopt/payoffs.hpp"

#include <algorithm>
#include <cmath>

#include "ctlopt/errors.hpp"

namespace ctlopt {

double GSpec::operator()(double x) const noexcept {
  switch (kind) {
    case GKind::call:
      return std::max(x - level, 0.0);
    case GKind::put:
      return std::max(level - x, 0.0);
    case GKind::cap:
      return std::min(level, x);
    case GKind::identity:
      break;
  }
  return x;
}

void PayoffSpec::validate(const MarketParams& params) const {
  if (f.h.kind != Vanilla::identity && !(f.h.strike > 0.0))
    throw ParameterError("payoff.f.strike must be > 0 for call/put");
  if (g.kind != GKind::identity && !(g.level > 0.0))
    throw ParameterError("payoff.g.level must be > 0 for call/put/cap");
  if (!(bounds.d0 >= 0.0)) throw ParameterError("payoff.bounds.d0 must be >= 0");
  if (!(bounds.d0 <= bounds.d1))
    throw ParameterError("payoff.bounds.d0 must not exceed payoff.bounds.d1");
  if (!std::isfinite(bounds.d1)) throw ParameterError("payoff.bounds.d1 must be finite");
  if (mode == WeightMode::adapted) {
    const double T = params.t_horizon;
    if (!(bounds.d0 * T <= 1.0 + kAdmissibilityTol))
      throw ParameterError("payoff.bounds.d0 * T must not exceed 1 in adapted mode");
    if (!(bounds.d1 * T >= 1.0 - kAdmissibilityTol))
      throw ParameterError("payoff.bounds.d1 * T must be >= 1 in adapted mode");
  }
}

double eval_f(const PayoffSpec& spec, const MarketParams& params, double s, double t) {
  const double v = spec.f.h(s);
  if (spec.f.timing == PaymentTiming::terminal && params.r != 0.0)
    return v * std::exp(params.r * (params.t_horizon - t));
  return v;
}

double trapezoid(std::span<const double> times, std::span<const double> values) {
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  return acc;
}

double trapezoid_product(std::span<const double> times, std::span<const double> a,
                         std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) * (a[i] * b[i] + a[i - 1] * b[i - 1]);
  return acc;
}

namespace {

void check_shapes(std::span<const double> times, std::span<const double> path,
                  std::span<const double> u) {
  if (times.size() < 2 || path.size() != times.size() || u.size() != times.size())
    throw ParameterError("times, path and control must share one grid of >= 2 points");
}

double weighted_f(const PayoffSpec& spec, const MarketParams& params,
                  std::span<const double> times, std::span<const double> path,
                  std::span<const double> u) {
  double acc = 0.0;
  double prev = u[0] * eval_f(spec, params, path[0], times[0]);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double cur = u[i] * eval_f(spec, params, path[i], times[i]);
    acc += 0.5 * (times[i] - times[i - 1]) * (prev + cur);
    prev = cur;
  }
  return acc;
}

}  // namespace

double payoff_adapted(const PayoffSpec& spec, const MarketParams& params,
                      std::span<const double> times, std::span<const double> path,
                      std::span<const double> u) {
  check_shapes(times, path, u);
  const double lo = spec.bounds.d0 - 1e-12;
  const double hi = spec.bounds.d1 + 1e-12;
  for (double v : u) {
    if (v < lo || v > hi)
      throw AdmissibilityError("control value " + std::to_string(v) + " outside [d0, d1]");
  }
  const double total = trapezoid(times, u);
  if (std::abs(total - 1.0) > kAdmissibilityTol)
    throw AdmissibilityError("cumulative control " + std::to_string(total) + " differs from 1");
  return spec.g(weighted_f(spec, params, times, path, u));
}

double payoff_normalized(const PayoffSpec& spec, const MarketParams& params,
                         std::span<const double> times, std::span<const double> path,
                         std::span<const double> u) {
  check_shapes(times, path, u);
  const double total = trapezoid(times, u);
  if (total < kDegenerateWeight)
    return spec.g(eval_f(spec, params, path.back(), times.back()));
  return spec.g(weighted_f(spec, params, times, path, u) / total);
}

std::string to_string(GKind kind) {
  switch (kind) {
    case GKind::identity: return "identity";
    case GKind::call: return "call";
    case GKind::put: return "put";
    case GKind::cap: return "cap";
  }
  return "?";
}

std::string to_string(Vanilla kind) {
  switch (kind) {
    case Vanilla::identity: return "identity";
    case Vanilla::call: return "call";
    case Vanilla::put: return "put";
  }
  return "?";
}

std::string to_string(WeightMode mode) {
  return mode == WeightMode::adapted ? "adapted" : "normalized";
}

std::string to_string(PaymentTiming timing) {
  return timing == PaymentTiming::spot ? "spot" : "terminal";
}

}  // namespace ctlopt
