#include "ctlopt/config.hpp"

#include <algorithm>

#include "ctlopt/errors.hpp"
#include "ctlopt/smoothing.hpp"

namespace ctlopt {

namespace {

using nlohmann::json;

template <class T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key, std::string("wrong type: ") + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(key, "must be an object");
  return j.at(key);
}

Vanilla parse_vanilla(const std::string& s, const std::string& field) {
  if (s == "identity") return Vanilla::identity;
  if (s == "call") return Vanilla::call;
  if (s == "put") return Vanilla::put;
  throw ConfigError(field, "unknown kind '" + s + "'");
}

GKind parse_g(const std::string& s) {
  if (s == "identity") return GKind::identity;
  if (s == "call") return GKind::call;
  if (s == "put") return GKind::put;
  if (s == "cap") return GKind::cap;
  throw ConfigError("payoff.g.kind", "unknown kind '" + s + "'");
}

VariantChoice parse_variant(const std::string& s) {
  if (s == "auto") return VariantChoice::automatic;
  if (s == "adapted") return VariantChoice::adapted;
  if (s == "linear_reduced") return VariantChoice::linear_reduced;
  if (s == "normalized") return VariantChoice::normalized;
  throw ConfigError("hjb.variant", "unknown variant '" + s + "'");
}

std::string variant_name(VariantChoice v) {
  switch (v) {
    case VariantChoice::automatic: return "auto";
    case VariantChoice::adapted: return "adapted";
    case VariantChoice::linear_reduced: return "linear_reduced";
    case VariantChoice::normalized: return "normalized";
  }
  return "?";
}

// Module validators phrase their messages as "<field> <complaint>".
[[noreturn]] void rethrow_as_config(const ParameterError& e) {
  const std::string msg = e.what();
  const auto sp = msg.find(' ');
  throw ConfigError(sp == std::string::npos ? msg : msg.substr(0, sp),
                    sp == std::string::npos ? msg : msg.substr(sp + 1));
}

}  // namespace

Variant RunConfig::resolved_variant() const {
  switch (variant) {
    case VariantChoice::adapted: return Variant::adapted;
    case VariantChoice::linear_reduced: return Variant::linear_reduced;
    case VariantChoice::normalized: return Variant::normalized;
    case VariantChoice::automatic: break;
  }
  if (payoff.mode == WeightMode::normalized) return Variant::normalized;
  return payoff.g.kind == GKind::identity ? Variant::linear_reduced : Variant::adapted;
}

void RunConfig::validate() const {
  try {
    market.validate();
    payoff.validate(market);
    mc.validate();
  } catch (const ParameterError& e) {
    rethrow_as_config(e);
  }
  if (epsilon_ladder.empty()) throw ConfigError("hjb.epsilon_ladder", "must not be empty");
  for (std::size_t i = 0; i < epsilon_ladder.size(); ++i) {
    const double e = epsilon_ladder[i];
    if (!(e > 0.0 && e < 0.5 && e < 0.5 * market.t_horizon))
      throw ConfigError("hjb.epsilon_ladder", "entries must lie in (0, min(1/2, T/2))");
    if (i > 0 && !(e < epsilon_ladder[i - 1]))
      throw ConfigError("hjb.epsilon_ladder", "entries must be strictly decreasing");
  }
  const Variant v = resolved_variant();
  if (v == Variant::normalized && payoff.mode != WeightMode::normalized)
    throw ConfigError("hjb.variant", "normalized solver needs payoff.mode = normalized");
  if (v != Variant::normalized && payoff.mode == WeightMode::normalized)
    throw ConfigError("hjb.variant", "adapted solvers need payoff.mode = adapted");
  if (v == Variant::linear_reduced && payoff.g.kind != GKind::identity)
    throw ConfigError("hjb.variant", "linear_reduced requires payoff.g.kind = identity");
  if (grid.nx < 1 || grid.ny < 2 || grid.nz < 3 || grid.nt < 1)
    throw ConfigError("grid", "need nx >= 1, ny >= 2, nz >= 3, nt >= 1");
  if (!(grid.z_width_sd > 0.0)) throw ConfigError("grid.z_width_sd", "must be > 0");
  for (const auto& m : methods)
    if (m != "hjb" && m != "monte_carlo" && m != "closed_form" && m != "all")
      throw ConfigError("compare.methods", "unknown method '" + m + "'");
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  RunConfig c;

  const json& m = section(j, "market");
  read(m, "s0", c.market.s0, "market");
  read(m, "r", c.market.r, "market");
  read(m, "sigma", c.market.sigma, "market");
  read(m, "t_horizon", c.market.t_horizon, "market");

  const json& p = section(j, "payoff");
  const json& f = section(p, "f");
  std::string s = to_string(c.payoff.f.h.kind);
  read(f, "kind", s, "payoff.f");
  c.payoff.f.h.kind = parse_vanilla(s, "payoff.f.kind");
  read(f, "strike", c.payoff.f.h.strike, "payoff.f");
  s = to_string(c.payoff.f.timing);
  read(f, "timing", s, "payoff.f");
  if (s == "spot")
    c.payoff.f.timing = PaymentTiming::spot;
  else if (s == "terminal")
    c.payoff.f.timing = PaymentTiming::terminal;
  else
    throw ConfigError("payoff.f.timing", "must be 'spot' or 'terminal'");

  const json& g = section(p, "g");
  s = to_string(c.payoff.g.kind);
  read(g, "kind", s, "payoff.g");
  c.payoff.g.kind = parse_g(s);
  read(g, "level", c.payoff.g.level, "payoff.g");

  s = to_string(c.payoff.mode);
  read(p, "mode", s, "payoff");
  if (s == "adapted")
    c.payoff.mode = WeightMode::adapted;
  else if (s == "normalized")
    c.payoff.mode = WeightMode::normalized;
  else
    throw ConfigError("payoff.mode", "must be 'adapted' or 'normalized'");
  const json& b = section(p, "bounds");
  read(b, "d0", c.payoff.bounds.d0, "payoff.bounds");
  read(b, "d1", c.payoff.bounds.d1, "payoff.bounds");

  const json& h = section(j, "hjb");
  s = variant_name(c.variant);
  read(h, "variant", s, "hjb");
  c.variant = parse_variant(s);
  read(h, "epsilon_ladder", c.epsilon_ladder, "hjb");
  read(h, "refine_grid", c.refine_grid, "hjb");

  const json& gr = section(j, "grid");
  read(gr, "nx", c.grid.nx, "grid");
  read(gr, "ny", c.grid.ny, "grid");
  read(gr, "nz", c.grid.nz, "grid");
  read(gr, "nt", c.grid.nt, "grid");
  read(gr, "z_width_sd", c.grid.z_width_sd, "grid");

  const json& mc = section(j, "mc");
  read(mc, "n_paths", c.mc.n_paths, "mc");
  read(mc, "n_steps", c.mc.n_steps, "mc");
  read(mc, "seed", c.mc.seed, "mc");
  read(mc, "antithetic", c.mc.antithetic, "mc");
  read(mc, "threads", c.mc.threads, "mc");
  read(mc, "policies", c.policies, "mc");

  const json& cmp = section(j, "compare");
  read(cmp, "methods", c.methods, "compare");

  const json& out = section(j, "output");
  read(out, "dir", c.out_dir, "output");
  read(out, "export_slice", c.export_slice, "output");

  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  return {
      {"market",
       {{"s0", c.market.s0}, {"r", c.market.r}, {"sigma", c.market.sigma}, {"t_horizon", c.market.t_horizon}}},
      {"payoff",
       {{"f",
         {{"kind", to_string(c.payoff.f.h.kind)},
          {"strike", c.payoff.f.h.strike},
          {"timing", to_string(c.payoff.f.timing)}}},
        {"g", {{"kind", to_string(c.payoff.g.kind)}, {"level", c.payoff.g.level}}},
        {"mode", to_string(c.payoff.mode)},
        {"bounds", {{"d0", c.payoff.bounds.d0}, {"d1", c.payoff.bounds.d1}}}}},
      {"hjb",
       {{"variant", variant_name(c.variant)},
        {"epsilon_ladder", c.epsilon_ladder},
        {"refine_grid", c.refine_grid}}},
      {"grid",
       {{"nx", c.grid.nx},
        {"ny", c.grid.ny},
        {"nz", c.grid.nz},
        {"nt", c.grid.nt},
        {"z_width_sd", c.grid.z_width_sd}}},
      {"mc",
       {{"n_paths", c.mc.n_paths},
        {"n_steps", c.mc.n_steps},
        {"seed", c.mc.seed},
        {"antithetic", c.mc.antithetic},
        {"threads", c.mc.threads},
        {"policies", c.policies}}},
      {"compare", {{"methods", c.methods}}},
      {"output", {{"dir", c.out_dir}, {"export_slice", c.export_slice}}},
  };
}

}  // namespace ctlopt
