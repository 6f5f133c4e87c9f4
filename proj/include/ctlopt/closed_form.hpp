#pragma once

#include "ctlopt/estimate.hpp"
#include "ctlopt/market.hpp"
#include "ctlopt/payoffs.hpp"
#include "ctlopt/policy.hpp"

namespace ctlopt {

/// Deferred-use problem: u in [0, L], cumulative use at most 1, benefit
/// f(s, t) = h(s) paid at t (spot) or compounded to T (terminal).
struct TailStrategyConfig {
  double L = 2.0;
  VanillaPayoff h{Vanilla::call, 100.0};
  PaymentTiming timing = PaymentTiming::terminal;
  MarketParams params;
};

/// Open-loop form of the optimal strategy: u = L from switch_time on.
struct TailSchedule {
  double L = 0.0;
  double switch_time = 0.0;
  /// L T <= 1: the whole budget cannot be spent, u = L throughout.
  bool degenerate = false;

  double operator()(double t) const noexcept { return t >= switch_time ? L : 0.0; }
};

TailSchedule tail_schedule(const TailStrategyConfig& cfg);

/// Feedback form for path simulation: u = L once the remaining budget is at
/// least what L can spend in the remaining time, otherwise 0. From y = 0
/// this is the schedule above.
Policy tail_strategy(const TailStrategyConfig& cfg);

/// e^{-rT} L int_{T-1/L}^T E*[f(S(t), t)] dt, by adaptive Gauss-Kronrod
/// quadrature of the Black-Scholes expectations (relative tolerance 1e-8).
/// meta carries the 1/L-factor variant and the two sufficient hypotheses.
/// Throws ParameterError for a put with r > 0 (the strategy is not optimal there).
PriceEstimate tail_strategy_price(const TailStrategyConfig& cfg);

/// e^{-rT} int_a^b w E*[f(S(t), t)] dt with constant weight w: the price of
/// any deterministic piecewise-constant schedule is a sum of these.
double schedule_segment_value(const TailStrategyConfig& cfg, double a, double b, double w);

}  // namespace ctlopt
