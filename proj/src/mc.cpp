#include "ctlopt/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "ctlopt/closed_form.hpp"
#include "ctlopt/errors.hpp"

namespace ctlopt {

namespace {

// Welford accumulator, merged pairwise (Chan et al.).
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    n += 1.0;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  static Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Moments m;
    m.n = a.n + b.n;
    const double d = b.mean - a.mean;
    m.mean = a.mean + d * (b.n / m.n);
    m.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / m.n);
    return m;
  }
};

Moments reduce_pairwise(std::vector<Moments> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<Moments> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(Moments::merge(parts[i], parts[i + 1]));
    if (parts.size() % 2) next.push_back(parts.back());
    parts.swap(next);
  }
  return parts[0];
}

struct BlockResult {
  Moments m;
  std::size_t flagged = 0;
};

using PairFn = std::function<double(std::span<const double>, std::span<const double>,
                                    std::span<const double>, std::size_t&)>;

PriceEstimate run_blocks(const PairFn& fn, const MarketParams& params, const McSpec& mc,
                         std::size_t& flagged) {
  mc.validate();
  params.validate();
  const PathGenerator gen(params, mc.n_steps, mc.seed, mc.antithetic);
  std::vector<double> times(mc.n_steps + 1);
  for (std::size_t i = 0; i <= mc.n_steps; ++i) times[i] = gen.time(i);

  const std::size_t pairs = mc.n_paths / 2;
  const std::size_t n_blocks = (pairs + kPairsPerBlock - 1) / kPairsPerBlock;
  std::vector<BlockResult> results(n_blocks);
  std::atomic<std::size_t> next_block{0};

  auto worker = [&] {
    std::vector<double> a(mc.n_steps + 1), b(mc.n_steps + 1);
    for (;;) {
      const std::size_t blk = next_block.fetch_add(1);
      if (blk >= n_blocks) return;
      BlockResult res;
      const std::size_t end = std::min(pairs, (blk + 1) * kPairsPerBlock);
      for (std::size_t p = blk * kPairsPerBlock; p < end; ++p) {
        gen.generate_pair(p, a, b);
        const double v1 = fn(times, a, b, res.flagged);
        res.m.add(v1);
      }
      results[blk] = res;
    }
  };

  std::size_t threads = mc.threads ? mc.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n_blocks, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::vector<Moments> parts;
  parts.reserve(n_blocks);
  flagged = 0;
  for (const auto& r : results) {
    parts.push_back(r.m);
    flagged += r.flagged;
  }
  const Moments total = reduce_pairwise(std::move(parts));
  const double disc = std::exp(-params.r * params.t_horizon);

  PriceEstimate e;
  e.method = Method::monte_carlo;
  e.value = disc * total.mean;
  e.stderr_ = total.n > 1.0 ? disc * std::sqrt(total.m2 / (total.n - 1.0) / total.n) : 0.0;
  e.meta = {{"n_paths", mc.n_paths},
            {"n_steps", mc.n_steps},
            {"seed", mc.seed},
            {"antithetic", mc.antithetic},
            {"pairs", pairs}};
  return e;
}

}  // namespace

void McSpec::validate() const {
  if (n_paths < 2 || n_paths % 2 != 0) throw ParameterError("mc.n_paths must be even and >= 2");
  if (n_steps < 1) throw ParameterError("mc.n_steps must be >= 1");
}

PriceEstimate evaluate_functional(const PathFunctional& fn, const MarketParams& params,
                                  const McSpec& mc) {
  std::size_t flagged = 0;
  auto pair_fn = [&](std::span<const double> times, std::span<const double> a,
                     std::span<const double> b, std::size_t&) {
    return 0.5 * (fn(times, a) + fn(times, b));
  };
  return run_blocks(pair_fn, params, mc, flagged);
}

std::vector<double> trapezoid_weights(std::size_t n_steps) {
  std::vector<double> w(n_steps + 1, 1.0);
  w.front() = 0.5;
  w.back() = 0.5;
  return w;
}

std::size_t run_policy(const Policy& policy, const PayoffSpec& spec, const MarketParams& params,
                       std::span<const double> times, std::span<const double> path,
                       std::span<double> u_out) {
  const std::size_t n = times.size();
  if (n < 2 || path.size() != n || u_out.size() != n)
    throw ParameterError("times, path and control must share one grid of >= 2 points");
  const double d0 = spec.bounds.d0;
  const double d1 = spec.bounds.d1;
  const double dt = times[1] - times[0];
  const bool adapted = spec.mode == WeightMode::adapted;

  // Remaining trapezoid weight strictly after node i, in time units.
  double rest = 0.0;
  for (std::size_t i = 1; i < n; ++i) rest += (i + 1 == n ? 0.5 : 1.0) * dt;

  std::size_t changed = 0;
  double x = 0.0;
  double y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wdt = (i == 0 || i + 1 == n ? 0.5 : 1.0) * dt;
    if (i > 0) rest -= wdt;
    if (i + 1 == n) rest = 0.0;
    const double raw = policy(PolicyState{times[i], x, y, path[i]});
    double u = std::clamp(raw, d0, d1);
    if (adapted) {
      // Shifts below 1e-12 are rounding in y, not infeasibility.
      constexpr double tol = 1e-12;
      if (i + 1 == n) {
        if (std::abs(1.0 - y - wdt * u) > tol) u = (1.0 - y) / wdt;
      } else {
        const double lo = (1.0 - y - d1 * rest) / wdt;
        const double hi = (1.0 - y - d0 * rest) / wdt;
        if (u < lo - tol) u = lo;
        if (u > hi + tol) u = hi;
      }
      u = std::clamp(u, d0, d1);
    }
    if (u != raw) ++changed;
    u_out[i] = u;
    y += wdt * u;
    x += wdt * u * eval_f(spec, params, path[i], times[i]);
  }
  return changed;
}

PriceEstimate evaluate_policy(const Policy& policy, const PayoffSpec& spec,
                              const MarketParams& params, const McSpec& mc) {
  spec.validate(params);
  if (!policy) throw ParameterError("policy has no rule");
  auto one = [&](std::span<const double> times, std::span<const double> path, std::vector<double>& u,
                 std::size_t& flagged) {
    if (run_policy(policy, spec, params, times, path, u) > 0) ++flagged;
    return spec.mode == WeightMode::adapted ? payoff_adapted(spec, params, times, path, u)
                                            : payoff_normalized(spec, params, times, path, u);
  };
  auto pair_fn = [&](std::span<const double> times, std::span<const double> a,
                     std::span<const double> b, std::size_t& flagged) {
    thread_local std::vector<double> u;
    u.resize(times.size());
    const double va = one(times, a, u, flagged);
    const double vb = one(times, b, u, flagged);
    return 0.5 * (va + vb);
  };
  std::size_t flagged = 0;
  PriceEstimate e = run_blocks(pair_fn, params, mc, flagged);
  e.meta["policy"] = policy.name();
  e.meta["projected_paths"] = flagged;
  e.meta["mode"] = to_string(spec.mode);
  return e;
}

std::vector<Policy> builtin_policies(const PayoffSpec& spec, const MarketParams& params) {
  spec.validate(params);
  const double T = params.t_horizon;
  const double d0 = spec.bounds.d0;
  const double d1 = spec.bounds.d1;
  std::vector<Policy> out;

  const double uni = std::clamp(1.0 / T, d0, d1);
  out.emplace_back("uniform", [uni](const PolicyState&) { return uni; });

  if (d0 == 0.0) {
    TailStrategyConfig cfg;
    cfg.L = d1;
    cfg.h = spec.f.h;
    cfg.timing = spec.f.timing;
    cfg.params = params;
    out.push_back(tail_strategy(cfg));
  }

  // Thresholds relative to the benefit of the spot position at time 0.
  const double ref = std::max(eval_f(spec, params, params.s0, 0.0), 0.05 * params.s0);
  for (double m : {0.5, 1.0, 1.5}) {
    const double c = m * ref;
    auto name = "threshold_" + std::to_string(static_cast<int>(std::lround(100 * m)));
    PayoffSpec s = spec;
    MarketParams p = params;
    out.emplace_back(name, [s, p, c, d0, d1](const PolicyState& st) {
      return eval_f(s, p, st.s, st.t) > c ? d1 : d0;
    });
  }

  out.emplace_back("d0_padded", [d0](const PolicyState&) { return d0; });
  return out;
}

}  // namespace ctlopt
