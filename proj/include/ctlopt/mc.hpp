#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ctlopt/estimate.hpp"
#include "ctlopt/market.hpp"
#include "ctlopt/payoffs.hpp"
#include "ctlopt/policy.hpp"

namespace ctlopt {

struct McSpec {
  std::size_t n_paths = 100000;
  std::size_t n_steps = 200;
  std::uint64_t seed = 12345;
  bool antithetic = true;
  /// 0 = hardware concurrency. The estimate does not depend on this.
  std::size_t threads = 0;

  void validate() const;
};

/// Pairs per reduction block. Fixed so that the summation order, and with it
/// every digit of the estimate, is independent of the worker count.
inline constexpr std::size_t kPairsPerBlock = 512;

/// Undiscounted payoff of one path given its time grid.
using PathFunctional = std::function<double(std::span<const double> times, std::span<const double> path)>;

/// e^{-rT} times the sample mean of a path functional. The statistical unit is
/// the average over a pair of paths (antithetic partners when enabled).
PriceEstimate evaluate_functional(const PathFunctional& fn, const MarketParams& params,
                                  const McSpec& mc);

/// Nodal trapezoid weights w_i with sum_i w_i dt = T (half weight at both ends).
std::vector<double> trapezoid_weights(std::size_t n_steps);

/// Runs a feedback policy along one path. u_i is decided at t_i from
/// (t_i, x_i, y_i, S(t_i)) where y_i = sum_{j<i} w_j u_j dt is the budget
/// already committed and x_i the matching committed payoff. In adapted mode
/// u_i is projected onto the values that keep sum w u dt = 1 reachable, so the
/// last node lands on the constraint exactly. Returns the number of nodes
/// where the projection changed the decision.
std::size_t run_policy(const Policy& policy, const PayoffSpec& spec, const MarketParams& params,
                       std::span<const double> times, std::span<const double> path,
                       std::span<double> u_out);

/// e^{-rT} E*[F_u] under the controls chosen by `policy`. meta.projected_paths
/// counts paths on which the feasibility projection overrode the policy.
PriceEstimate evaluate_policy(const Policy& policy, const PayoffSpec& spec,
                              const MarketParams& params, const McSpec& mc);

/// Candidate controls: uniform, tail (only when d0 = 0), threshold rules
/// u = d1 1{f > c} for a small ladder of c, and u = d0 padded to feasibility.
std::vector<Policy> builtin_policies(const PayoffSpec& spec, const MarketParams& params);

}  // namespace ctlopt
