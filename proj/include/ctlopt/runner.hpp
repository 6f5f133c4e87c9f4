#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ctlopt/config.hpp"
#include "ctlopt/estimate.hpp"
#include "ctlopt/hjb.hpp"

namespace ctlopt {

/// Richardson step on the last two rungs, assuming an error linear in eps:
/// P* = P_f + (P_f - P_c) eps_f / (eps_c - eps_f).
double richardson(double coarse, double eps_coarse, double fine, double eps_fine);

/// One grid refinement: z, t (and, when `all`, x and y) spacings halved.
GridSpec refine(const GridSpec& g, bool all = true);

/// One HJB solve at a given eps and grid.
PriceEstimate hjb_price(const RunConfig& cfg, double epsilon, const GridSpec& grid,
                        const SolveOptions& opt = {}, ValueFunction* keep = nullptr);

struct LadderResult {
  std::vector<double> epsilons;
  std::vector<PriceEstimate> raw;
  PriceEstimate extrapolated;
  /// Change of the extrapolated price when z and t are refined once; < 0 if not measured.
  double delta_grid = -1.0;
};

/// Solves every rung of the eps ladder and extrapolates.
LadderResult hjb_ladder(const RunConfig& cfg);

/// Closed-form tail price for the configured payoff (adapted mode, d0 = 0,
/// g identity). Throws ConfigError otherwise.
PriceEstimate closed_form_price(const RunConfig& cfg);

/// Resolves policy names ("all", builtin names, "hjb") to policies.
std::vector<Policy> select_policies(const RunConfig& cfg);

struct CompareRow {
  std::string method;
  PriceEstimate estimate;
  double tolerance = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  /// gaps[i][j] = |p_i - p_j| / (tol_i + tol_j).
  std::vector<std::vector<double>> gaps;
  bool breach = false;
};

CompareResult compare(const RunConfig& cfg);
std::string compare_csv(const CompareResult& r);

/// Eps sweep on the configured grid plus one z/t refinement at the finest eps.
nlohmann::json convergence(const RunConfig& cfg, std::string& csv);

/// CSV of slice n of the finest-eps solve: t,x,y,z,J and t,x,y,z,u.
void export_value(const RunConfig& cfg, std::string& value_csv, std::string& policy_csv);

/// Shortest-free fixed formatting used in every CSV: 12 significant digits.
std::string fmt12(double v);

}  // namespace ctlopt
