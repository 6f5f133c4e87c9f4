#include "ctlopt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ctlopt/closed_form.hpp"
#include "ctlopt/errors.hpp"
#include "ctlopt/mc.hpp"

namespace ctlopt {

namespace {

constexpr double kMcSigmas = 3.0;
constexpr double kHjbRel = 0.02;
constexpr double kClosedFormRel = 1e-6;

nlohmann::json grid_json(const GridSpec& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"nt", g.nt}, {"z_width_sd", g.z_width_sd}};
}

}  // namespace

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double richardson(double coarse, double eps_coarse, double fine, double eps_fine) {
  if (!(eps_coarse > eps_fine)) throw ParameterError("richardson needs eps_coarse > eps_fine");
  return fine + (fine - coarse) * eps_fine / (eps_coarse - eps_fine);
}

GridSpec refine(const GridSpec& g, bool all) {
  GridSpec r = g;
  r.nz = 2 * (g.nz - 1) + 1;
  r.nt = 2 * g.nt;
  if (all) {
    if (g.nx > 1) r.nx = 2 * (g.nx - 1) + 1;
    r.ny = 2 * (g.ny - 1) + 1;
  }
  return r;
}

PriceEstimate hjb_price(const RunConfig& cfg, double epsilon, const GridSpec& gspec,
                        const SolveOptions& opt, ValueFunction* keep) {
  const Variant v = cfg.resolved_variant();
  const SmoothingFamily fam = build_family(epsilon, cfg.payoff, cfg.market);
  GridSpec gs = gspec;
  if (v == Variant::linear_reduced) gs.nx = 1;
  const StateGrid grid = make_grid(fam, v, gs);
  ValueFunction vf = solve(v, cfg.market, cfg.payoff, fam, grid, opt);
  PriceEstimate e = price_from_value(vf, cfg.market);
  // The ramps are integrated exactly, so the eps^2 layers need not be resolved;
  // record whether they happen to be.
  const double e2 = epsilon * epsilon;
  e.meta["eps_layers_resolved"] = grid.y.step <= 0.5 * e2 && grid.dt() <= 0.5 * e2;
  if (keep) *keep = std::move(vf);
  return e;
}

LadderResult hjb_ladder(const RunConfig& cfg) {
  cfg.validate();
  LadderResult r;
  r.epsilons = cfg.epsilon_ladder;
  for (double eps : r.epsilons) r.raw.push_back(hjb_price(cfg, eps, cfg.grid));
  const std::size_t n = r.raw.size();
  r.extrapolated = r.raw.back();
  if (n >= 2)
    r.extrapolated.value = richardson(r.raw[n - 2].value, r.epsilons[n - 2], r.raw[n - 1].value,
                                      r.epsilons[n - 1]);
  nlohmann::json rungs = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i)
    rungs.push_back({{"epsilon", r.epsilons[i]}, {"price", r.raw[i].value}});
  r.extrapolated.meta = {{"variant", r.raw.back().meta["variant"]},
                         {"grid", grid_json(cfg.grid)},
                         {"ladder", rungs},
                         {"extrapolation", n >= 2 ? "richardson_linear_last_two" : "none"},
                         {"finest_raw", r.raw.back().value}};
  if (cfg.refine_grid) {
    // Same extrapolation with z and t halved.
    const GridSpec fine_grid = refine(cfg.grid, false);
    double fine = hjb_price(cfg, r.epsilons[n - 1], fine_grid).value;
    if (n >= 2)
      fine = richardson(hjb_price(cfg, r.epsilons[n - 2], fine_grid).value, r.epsilons[n - 2], fine,
                        r.epsilons[n - 1]);
    r.delta_grid = std::abs(fine - r.extrapolated.value);
    r.extrapolated.meta["delta_grid"] = r.delta_grid;
  }
  return r;
}

PriceEstimate closed_form_price(const RunConfig& cfg) {
  cfg.validate();
  const PayoffSpec& p = cfg.payoff;
  if (p.mode != WeightMode::adapted || p.bounds.d0 != 0.0 || p.g.kind != GKind::identity)
    throw ConfigError("payoff", "closed form needs adapted mode, bounds.d0 = 0 and g = identity");
  TailStrategyConfig tc;
  tc.L = p.bounds.d1;
  tc.h = p.f.h;
  tc.timing = p.f.timing;
  tc.params = cfg.market;
  try {
    return tail_strategy_price(tc);
  } catch (const ParameterError& e) {
    throw ConfigError("payoff.f", e.what());
  }
}

std::vector<Policy> select_policies(const RunConfig& cfg) {
  const auto builtins = builtin_policies(cfg.payoff, cfg.market);
  std::vector<Policy> out;
  for (const auto& name : cfg.policies) {
    if (name == "all") {
      out.insert(out.end(), builtins.begin(), builtins.end());
      continue;
    }
    if (name == "hjb") {
      const SmoothingFamily fam = build_family(cfg.epsilon_ladder.back(), cfg.payoff, cfg.market);
      ValueFunction vf;
      SolveOptions opt;
      opt.record_policy = true;
      hjb_price(cfg, cfg.epsilon_ladder.back(), cfg.grid, opt, &vf);
      out.push_back(extract_policy(vf, fam));
      continue;
    }
    bool found = false;
    for (const auto& p : builtins)
      if (p.name() == name) {
        out.push_back(p);
        found = true;
      }
    if (!found) throw ConfigError("mc.policies", "unknown or unavailable policy '" + name + "'");
  }
  if (out.empty()) throw ConfigError("mc.policies", "no policy selected");
  return out;
}

CompareResult compare(const RunConfig& cfg) {
  cfg.validate();
  std::vector<std::string> methods;
  for (const auto& m : cfg.methods) {
    const bool all = m == "all";
    for (const char* name : {"closed_form", "monte_carlo", "hjb"})
      if ((all || m == name) && std::find(methods.begin(), methods.end(), name) == methods.end())
        methods.push_back(name);
  }
  if (methods.size() < 2) throw ConfigError("compare.methods", "select at least two methods");
  CompareResult res;
  for (const auto& m : methods) {
    CompareRow row;
    row.method = m;
    if (m == "closed_form") {
      row.estimate = closed_form_price(cfg);
      row.tolerance = kClosedFormRel * std::abs(row.estimate.value);
    } else if (m == "monte_carlo") {
      // Best available candidate: the tail strategy when offered, else uniform.
      const auto pols = builtin_policies(cfg.payoff, cfg.market);
      const Policy* pick = &pols.front();
      for (const auto& p : pols)
        if (p.name() == "tail") pick = &p;
      row.estimate = evaluate_policy(*pick, cfg.payoff, cfg.market, cfg.mc);
      row.tolerance = kMcSigmas * row.estimate.stderr_;
    } else {
      const LadderResult lr = hjb_ladder(cfg);
      row.estimate = lr.extrapolated;
      row.tolerance = kHjbRel * std::abs(row.estimate.value) + std::max(lr.delta_grid, 0.0);
    }
    res.rows.push_back(std::move(row));
  }
  const std::size_t n = res.rows.size();
  res.gaps.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double tol = res.rows[i].tolerance + res.rows[j].tolerance;
      const double gap = std::abs(res.rows[i].estimate.value - res.rows[j].estimate.value);
      res.gaps[i][j] = tol > 0.0 ? gap / tol : (gap > 0.0 ? INFINITY : 0.0);
      if (res.gaps[i][j] > 1.0) res.breach = true;
    }
  return res;
}

std::string compare_csv(const CompareResult& r) {
  std::ostringstream os;
  os << "method,price,error_bar,tolerance";
  for (const auto& row : r.rows) os << ",gap_" << row.method;
  os << "\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    os << row.method << ',' << fmt12(row.estimate.value) << ',' << fmt12(row.estimate.stderr_) << ','
       << fmt12(row.tolerance);
    for (double g : r.gaps[i]) os << ',' << fmt12(g);
    os << "\n";
  }
  return os.str();
}

nlohmann::json convergence(const RunConfig& cfg, std::string& csv) {
  cfg.validate();
  std::ostringstream os;
  os << "kind,epsilon,nx,ny,nz,nt,price\n";
  nlohmann::json out;
  nlohmann::json rungs = nlohmann::json::array();
  std::vector<double> prices;
  auto row = [&](const char* kind, double eps, const GridSpec& g, double p) {
    os << kind << ',' << fmt12(eps) << ',' << g.nx << ',' << g.ny << ',' << g.nz << ',' << g.nt << ','
       << fmt12(p) << "\n";
  };
  for (double eps : cfg.epsilon_ladder) {
    const double p = hjb_price(cfg, eps, cfg.grid).value;
    prices.push_back(p);
    rungs.push_back({{"epsilon", eps}, {"price", p}});
    row("epsilon", eps, cfg.grid, p);
  }
  nlohmann::json gaps = nlohmann::json::array();
  for (std::size_t i = 1; i < prices.size(); ++i) gaps.push_back(prices[i] - prices[i - 1]);
  const double eps = cfg.epsilon_ladder.back();
  const GridSpec fine_zt = refine(cfg.grid, false);
  const GridSpec fine_all = refine(cfg.grid, true);
  const double p_zt = hjb_price(cfg, eps, fine_zt).value;
  const double p_all = hjb_price(cfg, eps, fine_all).value;
  row("refine_zt", eps, fine_zt, p_zt);
  row("refine_all", eps, fine_all, p_all);
  out["epsilon_ladder"] = rungs;
  out["gaps"] = gaps;
  out["refine_zt"] = {{"price", p_zt}, {"relative_change", std::abs(p_zt - prices.back()) / std::abs(prices.back())}};
  out["delta_grid"] = std::abs(p_all - prices.back());
  csv = os.str();
  return out;
}

void export_value(const RunConfig& cfg, std::string& value_csv, std::string& policy_csv) {
  cfg.validate();
  const double eps = cfg.epsilon_ladder.back();
  const SmoothingFamily fam = build_family(eps, cfg.payoff, cfg.market);
  ValueFunction vf;
  SolveOptions opt;
  opt.keep_history = true;
  hjb_price(cfg, eps, cfg.grid, opt, &vf);
  const StateGrid& g = vf.grid;
  const std::size_t n = cfg.export_slice;
  if (n > g.nt) throw ConfigError("output.export_slice", "slice index exceeds the number of steps");
  const PolicyTable table = extract_policy_table(vf, fam);
  const std::size_t pn = std::min(n, g.nt - 1);
  std::ostringstream v, p;
  v << "t,x,y,z,J\n";
  p << "t,x,y,z,u\n";
  for (std::size_t iz = 0; iz < g.z.n; ++iz)
    for (std::size_t iy = 0; iy < g.y.n; ++iy)
      for (std::size_t ix = 0; ix < g.x.n; ++ix) {
        const std::string coords = fmt12(g.x.node(ix)) + ',' + fmt12(g.y.node(iy)) + ',' + fmt12(g.z.node(iz));
        v << fmt12(g.time(n)) << ',' << coords << ',' << fmt12(vf.at(n, ix, iy, iz)) << "\n";
        p << fmt12(g.time(pn)) << ',' << coords << ','
          << fmt12(table.at(pn, ix, iy, iz) ? table.d1 : table.d0) << "\n";
      }
  value_csv = v.str();
  policy_csv = p.str();
}

}  // namespace ctlopt
