// Command-line front end. Exit codes: 0 ok, 2 configuration error,
// 3 numerical failure, 4 tolerance breach in compare.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctlopt/closed_form.hpp"
#include "ctlopt/errors.hpp"
#include "ctlopt/kernels.hpp"
#include "ctlopt/mc.hpp"
#include "ctlopt/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctlopt;

namespace {

struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> s0, r, sigma, t_horizon, d0, d1;
  std::optional<std::size_t> n_paths, n_steps;
  std::optional<std::string> variant;
  std::vector<std::string> policies, methods;
  std::vector<double> ladder;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Monte Carlo seed");
  sub->add_option("--out-dir", o.out_dir, "Directory for reports");
  sub->add_option("--s0", o.s0);
  sub->add_option("--r", o.r);
  sub->add_option("--sigma", o.sigma);
  sub->add_option("--T", o.t_horizon);
  sub->add_option("--d0", o.d0);
  sub->add_option("--d1", o.d1);
  sub->add_option("--n-paths", o.n_paths);
  sub->add_option("--n-steps", o.n_steps);
  sub->add_option("--variant", o.variant, "auto|adapted|linear_reduced|normalized");
  sub->add_option("--policies", o.policies, "Policies for price-mc (builtin names, hjb, all)");
  sub->add_option("--methods", o.methods, "Methods for compare");
  sub->add_option("--epsilon", o.ladder, "Epsilon ladder, coarse to fine");
}

RunConfig load(const Overrides& o) {
  json j = json::object();
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
  }
  auto set = [&](const char* sec, const char* key, const auto& v) {
    if (v) j[sec][key] = *v;
  };
  set("market", "s0", o.s0);
  set("market", "r", o.r);
  set("market", "sigma", o.sigma);
  set("market", "t_horizon", o.t_horizon);
  if (o.d0) j["payoff"]["bounds"]["d0"] = *o.d0;
  if (o.d1) j["payoff"]["bounds"]["d1"] = *o.d1;
  set("mc", "seed", o.seed);
  set("mc", "n_paths", o.n_paths);
  set("mc", "n_steps", o.n_steps);
  set("hjb", "variant", o.variant);
  set("output", "dir", o.out_dir);
  if (!o.policies.empty()) j["mc"]["policies"] = o.policies;
  if (!o.methods.empty()) j["compare"]["methods"] = o.methods;
  if (!o.ladder.empty()) j["hjb"]["epsilon_ladder"] = o.ladder;
  return config_from_json(j);
}

void write(const RunConfig& cfg, const std::string& name, const std::string& text) {
  fs::create_directories(cfg.out_dir);
  std::ofstream(fs::path(cfg.out_dir) / name) << text;
}

json report(const RunConfig& cfg, const char* command) {
  return {{"command", command}, {"config", to_json(cfg)}};
}

int price_hjb(const RunConfig& cfg) {
  const LadderResult lr = hjb_ladder(cfg);
  json rep = report(cfg, "price-hjb");
  rep["price"] = to_json(lr.extrapolated);
  rep["raw"] = json::array();
  for (const auto& e : lr.raw) rep["raw"].push_back(to_json(e));
  write(cfg, "price-hjb.json", rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int price_mc(const RunConfig& cfg) {
  json rep = report(cfg, "price-mc");
  rep["estimates"] = json::array();
  for (const auto& p : select_policies(cfg))
    rep["estimates"].push_back(to_json(evaluate_policy(p, cfg.payoff, cfg.market, cfg.mc)));
  write(cfg, "price-mc.json", rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int price_closed_form(const RunConfig& cfg) {
  json rep = report(cfg, "price-closed-form");
  const PriceEstimate e = closed_form_price(cfg);
  rep["price"] = to_json(e);
  write(cfg, "price-closed-form.json", rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  if (std::abs(e.meta["value_inverse_L_factor"].get<double>() - e.value) > 1e-12 * std::abs(e.value))
    std::cerr << "note: the 1/L-factor variant of the closed form gives "
              << fmt12(e.meta["value_inverse_L_factor"].get<double>())
              << "; the reported price uses the factor L matching the tail strategy\n";
  return 0;
}

int run_compare(const RunConfig& cfg) {
  const CompareResult r = compare(cfg);
  const std::string csv = compare_csv(r);
  json rep = report(cfg, "compare");
  rep["rows"] = json::array();
  for (const auto& row : r.rows)
    rep["rows"].push_back({{"method", row.method}, {"estimate", to_json(row.estimate)}, {"tolerance", row.tolerance}});
  rep["gaps"] = r.gaps;
  rep["breach"] = r.breach;
  write(cfg, "compare.csv", csv);
  write(cfg, "compare.json", rep.dump(2) + "\n");
  std::cout << csv;
  return r.breach ? 4 : 0;
}

int run_convergence(const RunConfig& cfg) {
  std::string csv;
  json rep = report(cfg, "convergence");
  rep["result"] = convergence(cfg, csv);
  write(cfg, "convergence.csv", csv);
  write(cfg, "convergence.json", rep.dump(2) + "\n");
  std::cout << csv;
  return 0;
}

int run_export(const RunConfig& cfg) {
  std::string v, p;
  export_value(cfg, v, p);
  write(cfg, "value.csv", v);
  write(cfg, "policy.csv", p);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "value.csv").string() << " and "
            << (fs::path(cfg.out_dir) / "policy.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pricing of controlled options: HJB, closed form, Monte Carlo"};
  app.require_subcommand(1);
  Overrides o;
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&);
  };
  const Cmd cmds[] = {
      {"price-hjb", "HJB price over the epsilon ladder, extrapolated", price_hjb},
      {"price-mc", "Monte Carlo prices of candidate policies", price_mc},
      {"price-closed-form", "Tail-strategy quadrature price", price_closed_form},
      {"compare", "Cross-method comparison table", run_compare},
      {"convergence", "Epsilon and grid sweeps", run_convergence},
      {"export-value", "Value and policy slices as CSV", run_export},
  };
  int (*selected)(const RunConfig&) = nullptr;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, o);
    sub->callback([&selected, fn = c.fn] { selected = fn; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    const RunConfig cfg = load(o);
    std::cerr << "simd: " << kernels::isa_name(kernels::active_isa()) << "\n";
    return selected(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.field() << "]: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure at slice " << e.slice() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
