#include "ctlopt/market.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ctlopt/errors.hpp"

namespace ctlopt {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t key) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(key)));
}

}  // namespace

void MarketParams::validate() const {
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw ParameterError("market.s0 must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("market.sigma must be > 0");
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("market.r must be >= 0");
  if (!(t_horizon > 0.0) || !std::isfinite(t_horizon))
    throw ParameterError("market.t_horizon must be > 0");
}

double VanillaPayoff::operator()(double s) const noexcept {
  switch (kind) {
    case Vanilla::call:
      return std::max(s - strike, 0.0);
    case Vanilla::put:
      return std::max(strike - s, 0.0);
    case Vanilla::identity:
      break;
  }
  return s;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double bs_expected_payoff(const MarketParams& params, const VanillaPayoff& h, double t) {
  params.validate();
  if (h.kind != Vanilla::identity && !(h.strike > 0.0))
    throw ParameterError("strike must be > 0 for call/put payoffs");
  if (t < 0.0 || t > params.t_horizon * (1.0 + 1e-12))
    throw ParameterError("t must lie in [0, T], got " + std::to_string(t));

  if (t == 0.0) return h(params.s0);
  const double forward = params.s0 * std::exp(params.r * t);
  if (h.kind == Vanilla::identity) return forward;

  const double sd = params.sigma * std::sqrt(t);
  const double d1 = (std::log(params.s0 / h.strike) + (params.r + 0.5 * params.sigma * params.sigma) * t) / sd;
  const double d2 = d1 - sd;
  const double call = forward * normal_cdf(d1) - h.strike * normal_cdf(d2);
  if (h.kind == Vanilla::call) return std::max(call, 0.0);
  // E[(K - S)^+] = E[(S - K)^+] - (F - K)
  return std::max(call - (forward - h.strike), 0.0);
}

PathGenerator::PathGenerator(const MarketParams& params, std::size_t n_steps, std::uint64_t seed,
                             bool antithetic)
    : params_(params), n_steps_(n_steps), seed_(seed), antithetic_(antithetic) {
  params_.validate();
  if (n_steps_ < 1) throw ParameterError("n_steps must be >= 1");
  dt_ = params_.t_horizon / static_cast<double>(n_steps_);
  drift_ = (params_.r - 0.5 * params_.sigma * params_.sigma) * dt_;
  vol_ = params_.sigma * std::sqrt(dt_);
}

double PathGenerator::time(std::size_t i) const noexcept {
  if (i == n_steps_) return params_.t_horizon;
  return params_.t_horizon * static_cast<double>(i) / static_cast<double>(n_steps_);
}

void PathGenerator::generate(std::size_t p, std::span<double> out) const {
  const std::uint64_t key = antithetic_ ? p / 2 : p;
  const double sign = (antithetic_ && (p % 2 == 1)) ? -1.0 : 1.0;
  auto gen = substream(seed_, key);
  std::normal_distribution<double> normal;
  double log_s = std::log(params_.s0);
  out[0] = params_.s0;
  for (std::size_t i = 1; i <= n_steps_; ++i) {
    log_s += drift_ + vol_ * sign * normal(gen);
    out[i] = std::exp(log_s);
  }
}

void PathGenerator::generate_pair(std::size_t pair, std::span<double> first,
                                  std::span<double> second) const {
  if (!antithetic_) {
    generate(2 * pair, first);
    generate(2 * pair + 1, second);
    return;
  }
  auto gen = substream(seed_, pair);
  std::normal_distribution<double> normal;
  double log_a = std::log(params_.s0);
  double log_b = log_a;
  first[0] = second[0] = params_.s0;
  for (std::size_t i = 1; i <= n_steps_; ++i) {
    const double z = vol_ * normal(gen);
    log_a += drift_ + z;
    log_b += drift_ - z;
    first[i] = std::exp(log_a);
    second[i] = std::exp(log_b);
  }
}

PathSet simulate_paths(const MarketParams& params, std::size_t n_paths, std::size_t n_steps,
                       std::uint64_t seed) {
  if (n_paths < 1) throw ParameterError("n_paths must be >= 1");
  const PathGenerator gen(params, n_steps, seed, false);
  PathSet set;
  set.n_paths = n_paths;
  set.n_steps = n_steps;
  set.seed = seed;
  set.times.resize(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) set.times[i] = gen.time(i);
  set.values.resize(n_paths * (n_steps + 1));
  for (std::size_t p = 0; p < n_paths; ++p)
    gen.generate(p, {set.values.data() + p * (n_steps + 1), n_steps + 1});
  return set;
}

}  // namespace ctlopt
