#pragma once

#include <span>
#include <string>

#include "ctlopt/market.hpp"

namespace ctlopt {

/// When the benefit f is paid: at the current time t, or compounded to T.
enum class PaymentTiming { spot, terminal };

/// Payoff density f(s, t) = h(s) (spot) or e^{r(T-t)} h(s) (terminal).
struct FSpec {
  VanillaPayoff h;
  PaymentTiming timing = PaymentTiming::spot;
};

enum class GKind { identity, call, put, cap };

/// Outer reward g. `level` is the strike for call/put and the cap M for cap.
struct GSpec {
  GKind kind = GKind::identity;
  double level = 0.0;

  double operator()(double x) const noexcept;
  bool concave() const noexcept { return kind == GKind::identity || kind == GKind::cap; }
  bool nondecreasing() const noexcept { return kind != GKind::put; }
};

enum class WeightMode {
  adapted,     ///< adapted u in [d0, d1] with cumulative integral fixed at 1
  normalized,  ///< payoff uses v = u / int u, u in [d0, d1]
};

/// Control range [d0, d1]. d0 == d1 is allowed and pins the control.
struct ControlBounds {
  double d0 = 0.0;
  double d1 = 1.0;
};

struct PayoffSpec {
  FSpec f;
  GSpec g;
  WeightMode mode = WeightMode::adapted;
  ControlBounds bounds;

  /// Throws ParameterError naming the offending field ("payoff.bounds.d0", ...).
  void validate(const MarketParams& params) const;
};

/// Tolerance on the cumulative-weight constraint of the adapted mode.
inline constexpr double kAdmissibilityTol = 1e-9;
/// Below this cumulative weight the normalized payoff falls back to g(f(S(T), T)).
inline constexpr double kDegenerateWeight = 1e-10;

double eval_f(const PayoffSpec& spec, const MarketParams& params, double s, double t);

/// Trapezoidal integral of values over times.
double trapezoid(std::span<const double> times, std::span<const double> values);
/// Trapezoidal integral of a(t_i) * b(t_i) over times.
double trapezoid_product(std::span<const double> times, std::span<const double> a,
                         std::span<const double> b);

/// F_u = g(int_0^T u f(S, t) dt) on one discrete path. Throws AdmissibilityError
/// if u leaves [d0, d1] or its integral differs from 1 by more than kAdmissibilityTol.
double payoff_adapted(const PayoffSpec& spec, const MarketParams& params,
                      std::span<const double> times, std::span<const double> path,
                      std::span<const double> u);

/// F_u = g(int v f dt) with v = u / int u; g(f(S(T), T)) when int u < kDegenerateWeight.
double payoff_normalized(const PayoffSpec& spec, const MarketParams& params,
                         std::span<const double> times, std::span<const double> path,
                         std::span<const double> u);

std::string to_string(GKind kind);
std::string to_string(Vanilla kind);
std::string to_string(WeightMode mode);
std::string to_string(PaymentTiming timing);

}  // namespace ctlopt
