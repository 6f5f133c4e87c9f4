#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctlopt/closed_form.hpp"
#include "ctlopt/errors.hpp"
#include "ctlopt/hjb.hpp"
#include "ctlopt/mc.hpp"
#include "ctlopt/runner.hpp"

using namespace ctlopt;

namespace {

PayoffSpec make_spec(Vanilla f, double k, GSpec g, WeightMode mode, double d0, double d1,
                     PaymentTiming timing = PaymentTiming::spot) {
  PayoffSpec s;
  s.f.h = {f, k};
  s.f.timing = timing;
  s.g = g;
  s.mode = mode;
  s.bounds = {d0, d1};
  return s;
}

GridSpec small_grid() {
  GridSpec g;
  g.nx = 21;
  g.ny = 21;
  g.nz = 41;
  g.nt = 50;
  return g;
}

double raw_price(Variant v, const MarketParams& p, const PayoffSpec& s, double eps, GridSpec gs) {
  const auto fam = build_family(eps, s, p);
  if (v == Variant::linear_reduced) gs.nx = 1;
  return price_from_value(solve(v, p, s, fam, make_grid(fam, v, gs)), p).value;
}

RunConfig ac2_config() {
  RunConfig c;
  c.market = {100.0, 0.0, 0.2, 1.0};
  c.payoff = make_spec(Vanilla::call, 100, {}, WeightMode::adapted, 0.0, 2.0, PaymentTiming::terminal);
  c.variant = VariantChoice::linear_reduced;
  return c;
}

}  // namespace

TEST(Hjb, ZeroBenefitPropagatesTerminalReward) {
  const MarketParams p{100, 0.02, 0.25, 1.0};
  const auto s = make_spec(Vanilla::call, 1e9, {GKind::cap, 3.0}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  GridSpec gs = small_grid();
  StateGrid g = make_grid(fam, Variant::adapted, gs);
  g.x = make_axis(0.0, 4.0, 21);
  const auto vf = solve_adapted(p, s, fam, g, {true, false});
  for (std::size_t n = 0; n <= g.nt; n += 10)
    for (std::size_t iz = 0; iz < g.z.n; iz += 5)
      for (std::size_t iy = 0; iy < g.y.n; iy += 3)
        for (std::size_t ix = 0; ix < g.x.n; ++ix)
          EXPECT_NEAR(vf.at(n, ix, iy, iz), fam.g_hat(g.x.node(ix)), 1e-10);
}

TEST(Hjb, ReducedZeroBenefitIsZero) {
  const MarketParams p{100, 0.02, 0.25, 1.0};
  const auto s = make_spec(Vanilla::call, 1e9, {}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  GridSpec gs = small_grid();
  gs.nx = 1;
  const auto vf = solve_linear_reduced(p, s, fam, make_grid(fam, Variant::linear_reduced, gs), {true, false});
  for (std::size_t n = 0; n <= gs.nt; ++n)
    for (double v : vf.slice(n)) EXPECT_EQ(v, 0.0);
}

TEST(Hjb, TerminalSlicesMatchTerminalData) {
  const MarketParams p{100, 0.01, 0.3, 1.0};
  {
    const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 6.0}, WeightMode::adapted, 0.0, 2.0);
    const auto fam = build_family(0.1, s, p);
    const auto g = make_grid(fam, Variant::adapted, small_grid());
    const auto vf = solve_adapted(p, s, fam, g, {true, false});
    for (std::size_t iz = 0; iz < g.z.n; ++iz)
      for (std::size_t iy = 0; iy < g.y.n; ++iy)
        for (std::size_t ix = 0; ix < g.x.n; ++ix)
          EXPECT_EQ(vf.at(g.nt, ix, iy, iz), fam.g_hat(g.x.node(ix)));
  }
  {
    const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 6.0}, WeightMode::normalized, 0.0, 2.0);
    const auto fam = build_family(0.1, s, p);
    const auto g = make_grid(fam, Variant::normalized, small_grid());
    const auto vf = solve_normalized(p, s, fam, g, {true, false});
    for (std::size_t iz = 0; iz < g.z.n; ++iz)
      for (std::size_t iy = 0; iy < g.y.n; ++iy)
        for (std::size_t ix = 0; ix < g.x.n; ++ix)
          EXPECT_EQ(vf.at(g.nt, ix, iy, iz), fam.g_eps(g.x.node(ix), g.y.node(iy)));
  }
}

TEST(Hjb, SingletonControlMatchesMonteCarlo) {
  RunConfig c;
  c.market = {100, 0.0, 0.2, 1.0};
  c.payoff = make_spec(Vanilla::call, 100, {}, WeightMode::adapted, 1.0, 1.0);
  c.variant = VariantChoice::adapted;
  c.grid.nx = 21;
  const double hjb = hjb_ladder(c).extrapolated.value;
  McSpec mc;
  const auto uniform = builtin_policies(c.payoff, c.market).front();
  const double ref = evaluate_policy(uniform, c.payoff, c.market, mc).value;
  EXPECT_NEAR(hjb, ref, 0.02 * ref);
}

TEST(Hjb, DeterministicPriceMatchesSwitchBruteForce) {
  // sigma ~ 0: S(t) = 100 e^{rt}, f = S - 90 > 0 on the whole window. The
  // budget is spent at d1 over one window of length w, d0 elsewhere.
  RunConfig c;
  c.market = {100, 0.05, 1e-12, 1.0};
  // Cap above the optimum: a cap blend right at the answer is not linear in eps.
  c.payoff = make_spec(Vanilla::call, 90, {GKind::cap, 30.0}, WeightMode::adapted, 0.5, 2.0);
  c.variant = VariantChoice::adapted;
  c.grid.z_width_sd = 1.5e11;  // log-price window +-0.15
  c.epsilon_ladder = {0.1, 0.05};
  const double hjb = hjb_ladder(c).extrapolated.value;

  const double r = 0.05, d0 = 0.5, d1 = 2.0, w = (1.0 - d0) / (d1 - d0);
  auto F = [&](double t) { return 100.0 * std::exp(r * t) / r - 90.0 * t; };  // antiderivative of f
  double best = -INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const double tau = (1.0 - w) * i / 999.0;
    const double x = d0 * (F(1.0) - F(0.0)) + (d1 - d0) * (F(tau + w) - F(tau));
    best = std::max(best, std::exp(-r) * c.payoff.g(x));
  }
  EXPECT_NEAR(hjb, best, 0.01 * best);
}

TEST(Hjb, ReducedMatchesClosedFormAtTailParameters) {
  const RunConfig c = ac2_config();
  const double hjb = hjb_ladder(c).extrapolated.value;
  const double cf = closed_form_price(c).value;
  EXPECT_NEAR(hjb, cf, 0.02 * cf);
}

TEST(Hjb, ReducedNondecreasingInUpperBound) {
  const MarketParams p{100, 0.0, 0.2, 1.0};
  double prev = -INFINITY;
  for (double d1 : {1.5, 3.0, 6.0}) {
    const auto s = make_spec(Vanilla::call, 100, {}, WeightMode::adapted, 0.0, d1, PaymentTiming::terminal);
    const double v = raw_price(Variant::linear_reduced, p, s, 0.1, small_grid());
    EXPECT_GE(v, prev) << "d1=" << d1;
    prev = v;
  }
}

TEST(Hjb, AdaptedMonotoneInControlBounds) {
  const MarketParams p{100, 0.0, 0.25, 1.0};
  const GSpec cap{GKind::cap, 8.0};
  double prev = -INFINITY;
  for (double d1 : {1.5, 2.0, 3.0}) {
    const auto s = make_spec(Vanilla::call, 100, cap, WeightMode::adapted, 0.0, d1);
    const double v = raw_price(Variant::adapted, p, s, 0.1, small_grid());
    EXPECT_GE(v, prev) << "d1=" << d1;
    prev = v;
  }
  prev = INFINITY;
  for (double d0 : {0.0, 0.3, 0.6}) {
    const auto s = make_spec(Vanilla::call, 100, cap, WeightMode::adapted, d0, 2.0);
    const double v = raw_price(Variant::adapted, p, s, 0.1, small_grid());
    EXPECT_LE(v, prev) << "d0=" << d0;
    prev = v;
  }
}

TEST(Hjb, DiscreteComparisonPrinciple) {
  const MarketParams p{100, 0.01, 0.3, 1.0};
  GridSpec gs = small_grid();
  gs.nx = 1;
  const auto sa = make_spec(Vanilla::call, 95, {}, WeightMode::adapted, 0.0, 2.0);
  const auto sb = make_spec(Vanilla::call, 110, {}, WeightMode::adapted, 0.0, 2.0);
  const auto fa = build_family(0.1, sa, p);
  const auto fb = build_family(0.1, sb, p);
  const auto g = make_grid(fa, Variant::linear_reduced, gs);
  const auto va = solve_linear_reduced(p, sa, fa, g, {true, false});
  const auto vb = solve_linear_reduced(p, sb, fb, g, {true, false});
  for (std::size_t n = 0; n <= g.nt; ++n)
    for (std::size_t i = 0; i < g.slice_size(); ++i) EXPECT_GE(va.slice(n)[i], vb.slice(n)[i]);
}

TEST(Hjb, DiscreteMaximumPrinciple) {
  const MarketParams p{100, 0.03, 0.3, 1.0};
  const auto s = make_spec(Vanilla::put, 100, {GKind::cap, 4.0}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  const auto g = make_grid(fam, Variant::adapted, small_grid());
  const auto vf = solve_adapted(p, s, fam, g, {true, false});
  double hi = -INFINITY, lo = INFINITY;
  for (std::size_t ix = 0; ix < g.x.n; ++ix) {
    hi = std::max(hi, fam.g_hat(g.x.node(ix)));
    lo = std::min(lo, fam.g_hat(g.x.node(ix)));
  }
  for (std::size_t n = 0; n <= g.nt; ++n)
    for (double v : vf.slice(n)) {
      EXPECT_LE(v, hi + 1e-12);
      EXPECT_GE(v, lo - 1e-12);
    }
}

TEST(Hjb, EpsilonPricesStayBelowFinestPlusAllowance) {
  const RunConfig c = ac2_config();
  std::vector<double> v;
  for (double e : {0.2, 0.1, 0.05}) v.push_back(hjb_price(c, e, c.grid).value);
  const double delta = std::abs(hjb_price(c, 0.05, refine(c.grid, false)).value - v.back());
  for (double x : v) EXPECT_LE(x, v.back() + delta);
}

TEST(Hjb, NormalizedConstantBenefit) {
  // f = S = 1 frozen: x / y = 1 on every path, whatever the control. Every
  // control is optimal, so J has a kink along x = y that the optimal path
  // follows; the interpolation error there scales like dx / dt.
  const MarketParams p{1.0, 0.0, 1e-12, 1.0};
  const auto s = make_spec(Vanilla::identity, 0, {}, WeightMode::normalized, 0.5, 2.0);
  const auto fam = build_family(0.05, s, p);
  GridSpec gs;
  gs.nx = 201;
  gs.nz = 41;
  gs.nt = 25;
  const auto g = make_grid(fam, Variant::normalized, gs);
  const double v = price_from_value(solve_normalized(p, s, fam, g), p).value;
  EXPECT_NEAR(v, 1.0, 0.02);
}

TEST(Hjb, NormalizedIgnoresUnreachableY) {
  const MarketParams p{100, 0.01, 0.3, 1.0};
  const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 8.0}, WeightMode::normalized, 0.4, 2.0);
  const auto fam = build_family(0.1, s, p);
  const auto g = make_grid(fam, Variant::normalized, small_grid());
  StateGrid wide = g;
  wide.y.n = g.y.n + 12;
  const auto a = solve_normalized(p, s, fam, g);
  const auto b = solve_normalized(p, s, fam, wide);
  for (std::size_t iz = 0; iz < g.z.n; ++iz)
    for (std::size_t ix = 0; ix < g.x.n; ++ix)
      EXPECT_NEAR(a.at(0, ix, 0, iz), b.at(0, ix, 0, iz), 1e-10);
}

TEST(Hjb, PriceOfConstantValueIsDiscountedConstant) {
  const MarketParams p{100, 0.04, 0.2, 1.5};
  const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 5.0}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  ValueFunction vf;
  vf.grid = make_grid(fam, Variant::adapted, small_grid());
  vf.epsilon = 0.1;
  vf.slices = {std::vector<double>(vf.grid.slice_size(), 3.25)};
  const PriceEstimate e = price_from_value(vf, p);
  EXPECT_NEAR(e.value, std::exp(-0.06) * 3.25, 1e-14);
  EXPECT_EQ(e.method, Method::hjb);
  EXPECT_EQ(e.stderr_, 0.0);
  EXPECT_EQ(e.meta["epsilon"], 0.1);
  EXPECT_EQ(e.meta["grid"]["nz"], vf.grid.z.n);

  const MarketParams p0{100, 0.0, 0.2, 1.5};
  EXPECT_EQ(price_from_value(vf, p0).value, 3.25);
}

TEST(Hjb, InterpolationOutsideHullThrows) {
  const MarketParams p{100, 0.0, 0.2, 1.0};
  const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 5.0}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  ValueFunction vf;
  vf.grid = make_grid(fam, Variant::adapted, small_grid());
  vf.slices = {std::vector<double>(vf.grid.slice_size(), 1.0)};
  EXPECT_THROW(vf.interpolate(0, -1.0, 0.0, std::log(100.0)), ExtrapolationError);
  EXPECT_THROW(vf.interpolate(0, 0.0, 0.0, std::log(1e4)), ExtrapolationError);
  EXPECT_DOUBLE_EQ(vf.interpolate(0, 0.3, 0.2, std::log(101.0)), 1.0);
}

TEST(Hjb, SolverRejectsMismatchedProblems) {
  const MarketParams p{100, 0.0, 0.2, 1.0};
  const auto capped = make_spec(Vanilla::call, 100, {GKind::cap, 5.0}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, capped, p);
  GridSpec gs = small_grid();
  const auto g = make_grid(fam, Variant::adapted, gs);
  EXPECT_THROW(solve_normalized(p, capped, fam, g), ConfigError);
  gs.nx = 1;
  EXPECT_THROW(solve_linear_reduced(p, capped, fam, make_grid(fam, Variant::linear_reduced, gs)), ConfigError);

  StateGrid shifted = g;
  shifted.z.lo += 10.0;
  EXPECT_THROW(solve_adapted(p, capped, fam, shifted), ConfigError);
  StateGrid short_y = g;
  short_y.y = make_axis(0.0, 0.9, 10);
  EXPECT_THROW(solve_adapted(p, capped, fam, short_y), ConfigError);
}

TEST(Hjb, PolicyIsBangBangEverywhere) {
  const MarketParams p{100, 0.02, 0.3, 1.0};
  const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 6.0}, WeightMode::adapted, 0.2, 2.0);
  const auto fam = build_family(0.1, s, p);
  const auto g = make_grid(fam, Variant::adapted, small_grid());
  const auto vf = solve_adapted(p, s, fam, g, {false, true});
  const Policy pol = extract_policy(vf, fam);
  EXPECT_EQ(pol.name(), "hjb");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ut(0.0, 1.0), ux(0.0, 10.0), uy(0.0, 1.2), us(40.0, 250.0);
  for (int i = 0; i < 2000; ++i) {
    const double u = pol({ut(rng), ux(rng), uy(rng), us(rng)});
    EXPECT_TRUE(u == 0.2 || u == 2.0) << u;
  }
}

TEST(Hjb, RecordedPolicyMatchesHistoryExtraction) {
  const MarketParams p{100, 0.0, 0.2, 1.0};
  const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 6.0}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  const auto g = make_grid(fam, Variant::adapted, small_grid());
  const auto recorded = extract_policy_table(solve_adapted(p, s, fam, g, {false, true}), fam);
  const auto from_history = extract_policy_table(solve_adapted(p, s, fam, g, {true, false}), fam);
  EXPECT_EQ(recorded.bits, from_history.bits);
  EXPECT_THROW(extract_policy_table(solve_adapted(p, s, fam, g), fam), ParameterError);
}

TEST(Hjb, ZeroSwitchingValueBreaksTowardUpperBound) {
  // No benefit anywhere: J = 0 and the coefficient of u vanishes.
  const MarketParams p{100, 0.0, 0.2, 1.0};
  const auto s = make_spec(Vanilla::call, 1e9, {}, WeightMode::adapted, 0.0, 2.0);
  const auto fam = build_family(0.1, s, p);
  GridSpec gs = small_grid();
  gs.nx = 1;
  const auto vf = solve_linear_reduced(p, s, fam, make_grid(fam, Variant::linear_reduced, gs), {true, false});
  EXPECT_EQ(switching_value(vf, fam, 3, 0, 2, 7), 0.0);
  for (auto b : extract_policy_table(vf, fam).bits) EXPECT_EQ(b, 1);
}

TEST(Hjb, PositiveSwitchingValueSelectsUpperBound) {
  const RunConfig c = ac2_config();
  const auto fam = build_family(0.1, c.payoff, c.market);
  GridSpec gs = small_grid();
  gs.nx = 1;
  const auto g = make_grid(fam, Variant::linear_reduced, gs);
  const auto vf = solve_linear_reduced(c.market, c.payoff, fam, g, {true, false});
  const auto table = extract_policy_table(vf, fam);
  for (std::size_t n = 0; n < g.nt; n += 7)
    for (std::size_t iz = 0; iz < g.z.n; iz += 4)
      for (std::size_t iy = 0; iy < g.y.n; iy += 3) {
        const double sv = switching_value(vf, fam, n, 0, iy, iz);
        EXPECT_EQ(table.at(n, 0, iy, iz), sv >= 0.0 ? 1 : 0);
      }
}

TEST(Hjb, ExtractedPolicyFollowsTailStrategy) {
  const RunConfig c = ac2_config();
  const double eps = 0.05;
  const auto fam = build_family(eps, c.payoff, c.market);
  GridSpec gs = c.grid;
  gs.nx = 1;
  const auto g = make_grid(fam, Variant::linear_reduced, gs);
  const Policy pol = extract_policy(solve_linear_reduced(c.market, c.payoff, fam, g, {false, true}), fam);
  std::size_t agree = 0, total = 0;
  for (std::size_t n = 0; n < g.nt; ++n)
    for (std::size_t iz = 1; iz + 1 < g.z.n; ++iz) {
      const double t = g.time(n), s = std::exp(g.z.node(iz));
      const double tail = t >= 0.5 ? 2.0 : 0.0;
      ++total;
      if (pol({t, 0.0, 0.0, s}) == tail) ++agree;
    }
  EXPECT_GE(double(agree) / double(total), 0.95);
}

TEST(Hjb, PureDiffusionPreservesConstantsAndExponential) {
  const MarketParams p{100, 0.05, 0.3, 1.0};
  const Axis z = make_axis(std::log(100.0) - 1.5, std::log(100.0) + 1.5, 61);
  const auto one = solve_pure_diffusion(p, z, 40, [](double) { return 1.0; });
  for (double v : one) EXPECT_NEAR(v, 1.0, 1e-12);
  // L e^z = r e^z, so each implicit step divides e^z by 1 - r dt; the frozen
  // top node leaks in geometrically, so check the lower third.
  const auto ez = solve_pure_diffusion(p, z, 40, [](double zz) { return std::exp(zz); });
  const double growth = std::pow(1.0 - 0.05 / 40.0, -40.0);
  for (std::size_t i = 0; i <= 20; ++i) EXPECT_NEAR(ez[i] / (growth * std::exp(z.node(i))), 1.0, 1e-9) << i;
}

TEST(Hjb, Avx2SolveMatchesScalar) {
  if (!kernels::avx2_available()) GTEST_SKIP() << "no AVX2 on this CPU";
  const MarketParams p{100, 0.02, 0.3, 1.0};
  const auto s = make_spec(Vanilla::call, 100, {GKind::cap, 6.0}, WeightMode::adapted, 0.25, 2.0);
  const auto fam = build_family(0.1, s, p);
  const auto g = make_grid(fam, Variant::adapted, small_grid());
  const kernels::Isa before = kernels::active_isa();
  kernels::set_isa(kernels::Isa::scalar);
  const auto a = solve_adapted(p, s, fam, g, {true, false});
  kernels::set_isa(kernels::Isa::avx2);
  const auto b = solve_adapted(p, s, fam, g, {true, false});
  kernels::set_isa(before);
  for (std::size_t n = 0; n <= g.nt; ++n)
    for (std::size_t i = 0; i < g.slice_size(); ++i)
      ASSERT_NEAR(a.slice(n)[i], b.slice(n)[i], 1e-12 * std::max(1.0, std::abs(a.slice(n)[i])));
  // Decisions may only differ where the switching value is rounding noise
  // (flat regions of J).
  const auto ta = extract_policy_table(a, fam), tb = extract_policy_table(b, fam);
  const std::size_t m = g.slice_size();
  for (std::size_t i = 0; i < ta.bits.size(); ++i) {
    if (ta.bits[i] == tb.bits[i]) continue;
    const std::size_t n = i / m, r = i % m;
    const std::size_t ix = r % g.x.n, iy = (r / g.x.n) % g.y.n, iz = r / (g.x.n * g.y.n);
    EXPECT_LT(std::abs(switching_value(a, fam, n, ix, iy, iz)), 1e-9);
  }
}
