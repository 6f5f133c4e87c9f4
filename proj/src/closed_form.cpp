#include "ctlopt/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ctlopt/errors.hpp"

namespace ctlopt {

namespace {

constexpr double kQuadRtol = 1e-8;

void check(const TailStrategyConfig& cfg) {
  cfg.params.validate();
  if (!(cfg.L > 0.0) || !std::isfinite(cfg.L)) throw ParameterError("tail.L must be > 0");
  if (cfg.h.kind != Vanilla::identity && !(cfg.h.strike > 0.0))
    throw ParameterError("tail.h.strike must be > 0");
}

double expected_f(const TailStrategyConfig& cfg, double t) {
  const MarketParams& p = cfg.params;
  double v = bs_expected_payoff(p, cfg.h, std::clamp(t, 0.0, p.t_horizon));
  if (cfg.timing == PaymentTiming::terminal) v *= std::exp(p.r * (p.t_horizon - t));
  return v;
}

double integrate(const TailStrategyConfig& cfg, double a, double b) {
  if (!(b > a)) return 0.0;
  auto fn = [&](double t) { return expected_f(cfg, t); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(fn, a, b, 15, kQuadRtol, &err);
}

}  // namespace

TailSchedule tail_schedule(const TailStrategyConfig& cfg) {
  check(cfg);
  const double T = cfg.params.t_horizon;
  TailSchedule s;
  s.L = cfg.L;
  s.degenerate = cfg.L * T <= 1.0;
  s.switch_time = s.degenerate ? 0.0 : T - 1.0 / cfg.L;
  return s;
}

Policy tail_strategy(const TailStrategyConfig& cfg) {
  const TailSchedule sched = tail_schedule(cfg);
  const double T = cfg.params.t_horizon;
  const double L = sched.L;
  return Policy("tail", [L, T](const PolicyState& st) {
    return L * (T - st.t) <= 1.0 - st.y + 1e-12 ? L : 0.0;
  });
}

double schedule_segment_value(const TailStrategyConfig& cfg, double a, double b, double w) {
  check(cfg);
  return std::exp(-cfg.params.r * cfg.params.t_horizon) * w * integrate(cfg, a, b);
}

PriceEstimate tail_strategy_price(const TailStrategyConfig& cfg) {
  check(cfg);
  const MarketParams& p = cfg.params;
  if (cfg.h.kind == Vanilla::put && p.r > 0.0)
    throw ParameterError(
        "tail strategy pricing refused for a put with r > 0: alpha^-1 h(alpha x) is not "
        "nondecreasing and r != 0, so neither sufficient condition for optimality holds");

  const TailSchedule sched = tail_schedule(cfg);
  const double T = p.t_horizon;
  const double integral = integrate(cfg, sched.switch_time, T);
  const double disc = std::exp(-p.r * T);

  PriceEstimate e;
  e.method = Method::closed_form;
  e.value = disc * cfg.L * integral;
  const bool scale_monotone = cfg.h.kind != Vanilla::put;
  e.meta = {{"L", cfg.L},
            {"switch_time", sched.switch_time},
            {"degenerate", sched.degenerate},
            {"integral", integral},
            {"factor", "L"},
            {"value_inverse_L_factor", disc / cfg.L * integral},
            {"hypothesis_scale_monotone", scale_monotone},
            {"hypothesis_zero_rate", p.r == 0.0},
            {"quadrature", "adaptive Gauss-Kronrod 15, rtol 1e-8"}};
  return e;
}

}  // namespace ctlopt
