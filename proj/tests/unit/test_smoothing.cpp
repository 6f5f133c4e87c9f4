#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "ctlopt/errors.hpp"
#include "ctlopt/smoothing.hpp"

using namespace ctlopt;

namespace {

const MarketParams kMarket{100, 0.03, 0.25, 1.0};

PayoffSpec spec_with(Vanilla f, GSpec g, PaymentTiming timing = PaymentTiming::spot) {
  PayoffSpec s;
  s.f.h = {f, 100.0};
  s.f.timing = timing;
  s.g = g;
  s.bounds = {0.0, 2.0};
  return s;
}

const std::vector<GSpec> kGs{{GKind::identity, 0.0}, {GKind::call, 3.0}, {GKind::put, 6.0}, {GKind::cap, 5.0}};

}  // namespace

TEST(Smoothing, RejectsEpsilonOutOfRange) {
  const auto s = spec_with(Vanilla::call, {});
  EXPECT_THROW(build_family(0.0, s, kMarket), ParameterError);
  EXPECT_THROW(build_family(0.5, s, kMarket), ParameterError);
  EXPECT_THROW(build_family(0.3, s, MarketParams{100, 0.0, 0.2, 0.5}), ParameterError);
  EXPECT_NO_THROW(build_family(0.2, s, MarketParams{100, 0.0, 0.2, 0.5}));
}

TEST(Smoothing, CutoffExamples) {
  const auto fam = build_family(0.1, spec_with(Vanilla::call, {}), kMarket);
  EXPECT_EQ(fam.xi(0.5), 1.0);
  EXPECT_EQ(fam.xi(0.9), 1.0);
  EXPECT_EQ(fam.xi(0.91), 0.0);
  EXPECT_EQ(fam.h(0.7, 0.5), 0.7);
  EXPECT_EQ(fam.h(0.7, 0.9), 0.7);
  EXPECT_EQ(fam.h(0.7, 0.95), 2.0);
}

TEST(Smoothing, RampsAreMonotoneWithExactEndpoints) {
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto fam = build_family(eps, spec_with(Vanilla::call, {}), kMarket);
    double px = 2.0, pp = -1.0;
    for (int i = 0; i <= 4000; ++i) {
      const double v = 1.2 * i / 4000.0;
      const double x = fam.xi(v), p = fam.psi(v);
      EXPECT_LE(x, px);
      EXPECT_GE(p, pp);
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      if (v <= 1.0 - eps) EXPECT_EQ(x, 1.0);
      if (v >= 1.0 - eps + eps * eps) EXPECT_EQ(x, 0.0);
      if (v <= 1.0 - eps) EXPECT_EQ(p, 0.0);
      if (v >= 1.0 - eps + eps * eps) EXPECT_EQ(p, 1.0);
      px = x;
      pp = p;
    }
  }
}

TEST(Smoothing, EffectiveControlRange) {
  const auto fam = build_family(0.1, spec_with(Vanilla::call, {}), kMarket);
  for (double u : {0.0, 0.4, 2.0})
    for (int i = 0; i <= 200; ++i) {
      const double t = i / 200.0;
      const double h = fam.h(u, t);
      EXPECT_GE(h, std::min(u, 2.0) - 1e-15);
      EXPECT_LE(h, 2.0 + 1e-15);
    }
}

TEST(Smoothing, AntiderivativesMatchQuadrature) {
  const double eps = 0.1;
  const auto fam = build_family(eps, spec_with(Vanilla::call, {}), kMarket);
  // Fine midpoint rule across the transition layers.
  auto integrate = [](auto f, double a, double b) {
    const int m = 200000;
    const double h = (b - a) / m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += f(a + (i + 0.5) * h);
    return acc * h;
  };
  for (double y : {0.5, 0.905, 0.95, 1.2})
    EXPECT_NEAR(fam.xi_integral(y), integrate([&](double s) { return fam.xi(s); }, 0.0, y), 1e-9);
  for (double t : {0.5, 0.905, 1.0})
    EXPECT_NEAR(fam.psi_integral(t), integrate([&](double s) { return fam.psi(s); }, 0.0, t), 1e-9);
  EXPECT_NEAR(fam.xi_mass(), fam.xi_integral(2.0), 1e-15);
  EXPECT_NEAR(fam.h_integral(0.3, 0.85, 1.0),
              integrate([&](double s) { return fam.h(0.3, s); }, 0.85, 1.0), 1e-9);
}

TEST(Smoothing, DominationOnLattice) {
  for (Vanilla f : {Vanilla::identity, Vanilla::call, Vanilla::put})
    for (const GSpec& g : kGs)
      for (double eps : {0.2, 0.1, 0.05}) {
        const auto spec = spec_with(f, g, PaymentTiming::terminal);
        const auto fam = build_family(eps, spec, kMarket);
        for (int i = 0; i < 200; ++i) {
          const double s = 20.0 + 400.0 * i / 199.0;
          const double x = 12.0 * i / 199.0;
          for (int j = 0; j < 200; ++j) {
            const double t = j / 199.0;
            EXPECT_LE(fam.phi(s, t), eval_f(spec, kMarket, s, t) + 1e-12);
          }
          EXPECT_LE(fam.g_hat(x), g(x) + 1e-12);
        }
      }
}

TEST(Smoothing, GHatConvergesOnLattice) {
  for (const GSpec& g : kGs) {
    double prev = INFINITY;
    for (double eps : {0.2, 0.1, 0.05}) {
      const auto fam = build_family(eps, spec_with(Vanilla::call, g), kMarket);
      double worst = 0.0;
      for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) {
          const double x = 10.0 * (i * 200 + j) / 39999.0;
          const double d = fam.g_hat(x) - g(x);
          EXPECT_LE(d, 1e-12);
          worst = std::max(worst, std::abs(d));
        }
      // Identity only differs by rounding in the cap far above the lattice.
      if (worst > 1e-9) EXPECT_LT(worst, prev) << to_string(g.kind);
      prev = worst;
    }
  }
}

TEST(Smoothing, PhiConvergesPointwise) {
  const auto spec = spec_with(Vanilla::call, {});
  for (double s : {60.0, 100.0, 100.5, 101.0, 140.0}) {
    double prev = INFINITY;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
      const double d = eval_f(spec, kMarket, s, 0.3) - build_family(eps, spec, kMarket).phi(s, 0.3);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, prev + 1e-12);
      prev = d;
    }
    EXPECT_LT(prev, 1e-2);
  }
}

TEST(Smoothing, PhiIsCappedNearScaleOverEps) {
  const auto spec = spec_with(Vanilla::identity, {});
  const auto fam = build_family(0.1, spec, kMarket);
  EXPECT_LE(fam.phi(1e6, 0.0), fam.cap_level());
  EXPECT_NEAR(fam.phi(1e6, 0.0), fam.cap_level(), 1e-6);
  EXPECT_NEAR(fam.phi(100.0, 0.0), 100.0, 1e-12);
}

TEST(Smoothing, NormalizedRewardDominated) {
  for (const GSpec& g : {kGs[0], kGs[1], kGs[3]}) {
    const auto fam = build_family(0.1, spec_with(Vanilla::call, g), kMarket);
    for (int i = 0; i <= 60; ++i)
      for (int j = 1; j <= 60; ++j) {
        const double x = 20.0 * i / 60.0, y = 2.0 * j / 60.0;
        EXPECT_LE(fam.g_eps(x, y), g(x / y) + 1e-12);
      }
  }
}

TEST(Smoothing, NormalizedRewardLimit) {
  // (x/y, y, eps) -> (c, 0, 0) gives g(c).
  const GSpec g{GKind::cap, 5.0};
  const double c = 3.0;
  double prev = INFINITY;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const auto fam = build_family(eps, spec_with(Vanilla::call, g), kMarket);
    const double y = eps;
    const double d = std::abs(fam.g_eps(c * y, y) - g(c));
    EXPECT_LE(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Smoothing, CentredDifferencesConvergeAtSecondOrder) {
  const auto fam = build_family(0.2, spec_with(Vanilla::call, {GKind::cap, 5.0}), kMarket);
  // Points inside the transition layers and the cap blend.
  const double y0 = 0.8 + 0.4 * 0.04, t0 = 0.8 + 0.6 * 0.04, x0 = 4.97;
  for (auto f : std::vector<std::function<double(double)>>{
           [&](double v) { return fam.xi(v); }, [&](double v) { return fam.psi(v); },
           [&](double v) { return fam.g_hat(v); }}) {
    for (double v0 : {y0, t0, x0}) {
      auto d = [&](double h) { return (f(v0 + h) - f(v0 - h)) / (2.0 * h); };
      const double h = 1e-3;
      const double e1 = std::abs(d(h) - d(h / 64.0));
      const double e2 = std::abs(d(h / 2.0) - d(h / 64.0));
      if (e1 < 1e-7) continue;  // linear there: only rounding noise
      EXPECT_GT(std::log2(e1 / e2), 1.8);
    }
  }
}

TEST(Smoothing, SmoothstepIsC2) {
  EXPECT_EQ(smoothstep5(0.0), 0.0);
  EXPECT_EQ(smoothstep5(1.0), 1.0);
  EXPECT_NEAR(smoothstep5(0.5), 0.5, 1e-15);
  const double h = 1e-4;
  for (double s : {0.0, 1.0}) {
    EXPECT_NEAR((smoothstep5(s + h) - smoothstep5(s - h)) / (2 * h), 0.0, 1e-6);
    EXPECT_NEAR((smoothstep5(s + h) - 2 * smoothstep5(s) + smoothstep5(s - h)) / (h * h), 0.0, 1e-2);
  }
  EXPECT_NEAR(smoothstep5_integral(1.0), 0.5, 1e-15);
}
