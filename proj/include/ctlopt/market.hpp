#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ctlopt {

/// Constants of the risk-neutral Black-Scholes market. The physical drift is
/// not represented: every price is computed under the pricing measure, where
/// the stock drifts at the risk-free rate.
struct MarketParams {
  double s0 = 100.0;
  double r = 0.0;
  double sigma = 0.2;
  double t_horizon = 1.0;

  /// Throws ParameterError unless s0 > 0, sigma > 0, r >= 0, T > 0.
  void validate() const;
};

/// Scalar payoff of the stock price used inside the controlled payoffs and the
/// closed-form expectations.
enum class Vanilla { identity, call, put };

struct VanillaPayoff {
  Vanilla kind = Vanilla::identity;
  double strike = 0.0;

  double operator()(double s) const noexcept;
};

/// Standard normal cumulative distribution.
double normal_cdf(double x) noexcept;

/// E*[h(S(t))] in closed form (undiscounted). At t = 0 returns h(s0).
/// Throws ParameterError for call/put with strike <= 0 or t outside [0, T].
double bs_expected_payoff(const MarketParams& params, const VanillaPayoff& h, double t);

/// Simulated risk-neutral price paths on a uniform grid 0 = t_0 < ... < t_N = T.
/// Values are stored path-major: values[p * (n_steps + 1) + i] = S_p(t_i).
struct PathSet {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;

  std::span<const double> path(std::size_t p) const {
    return {values.data() + p * (n_steps + 1), n_steps + 1};
  }
};

/// Deterministic generator of exact log-Euler GBM paths. Path p draws its
/// normals from an independent substream keyed by (seed, p / 2); with
/// antithetic pairing the odd member of each pair reuses the negated normals
/// of its partner. Path p is the same regardless of how many paths are drawn.
class PathGenerator {
 public:
  PathGenerator(const MarketParams& params, std::size_t n_steps, std::uint64_t seed,
                bool antithetic);

  std::size_t n_steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t i) const noexcept;

  /// Writes S(t_0..t_N) of path p into out (size n_steps + 1).
  void generate(std::size_t p, std::span<double> out) const;

  /// Writes a pair of paths sharing one substream; `second` is the
  /// antithetic partner when antithetic pairing is on, otherwise the next
  /// independent path.
  void generate_pair(std::size_t pair, std::span<double> first, std::span<double> second) const;

 private:
  MarketParams params_;
  std::size_t n_steps_;
  std::uint64_t seed_;
  bool antithetic_;
  double dt_;
  double drift_;
  double vol_;
};

/// Simulates n_paths risk-neutral paths (no antithetic pairing).
PathSet simulate_paths(const MarketParams& params, std::size_t n_paths, std::size_t n_steps,
                       std::uint64_t seed);

}  // namespace ctlopt
