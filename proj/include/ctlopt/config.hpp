#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctlopt/grid.hpp"
#include "ctlopt/market.hpp"
#include "ctlopt/mc.hpp"
#include "ctlopt/payoffs.hpp"

namespace ctlopt {

/// Which HJB problem to solve. `automatic` picks normalized for the
/// normalized mode, the reduced problem when g is the identity, else adapted.
enum class VariantChoice { automatic, adapted, linear_reduced, normalized };

struct RunConfig {
  MarketParams market;
  PayoffSpec payoff;
  VariantChoice variant = VariantChoice::automatic;
  std::vector<double> epsilon_ladder{0.2, 0.1, 0.05};
  GridSpec grid;
  /// Also solve once on the refined grid to measure delta_grid.
  bool refine_grid = false;
  McSpec mc;
  /// Policies evaluated by price-mc: builtin names, "hjb", or "all".
  std::vector<std::string> policies{"all"};
  /// Methods for compare: any of "hjb", "monte_carlo", "closed_form", or
  /// "all" for the three.
  std::vector<std::string> methods{"closed_form", "monte_carlo"};
  std::string out_dir = "out";
  std::size_t export_slice = 0;

  /// Re-validates every module invariant; throws ConfigError naming the field.
  void validate() const;
  Variant resolved_variant() const;
};

/// Missing keys keep their defaults; unknown enum strings raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
/// Complete document with every default written out.
nlohmann::json to_json(const RunConfig& c);

}  // namespace ctlopt
