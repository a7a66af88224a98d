#pragma once

#include <optional>
#include <vector>

#include "hedonic/conjugate.hpp"
#include "hedonic/market.hpp"
#include "hedonic/matching.hpp"

namespace hedonic {

/// Aggregate envelope value: total best consumer payoff plus total best
/// producer margin at the given prices. Convex and piecewise linear in
/// the base prices; its minimum equals the best matching value.
double dual_objective(const MarketInstance& inst, const PriceSystem& p);

/// One subgradient of the objective over base prices: supply minus
/// demand mass when every agent picks the lowest extended index among
/// its exact best responses.
VectorXd dual_subgradient(const MarketInstance& inst, const PriceSystem& p);

/// One-sided directional derivative of the objective at p along a base
/// price direction: producers rotate onto the best-response point that
/// gains most, consumers onto the one that loses least.
double dual_directional_derivative(const MarketInstance& inst, const PriceSystem& p,
                                   const VectorXd& direction);

enum class StepRule {
  Polyak,       // (objective - target) / |g|^2, needs a target value
  Diminishing,  // c / sqrt(t + 1) with c the widest marketable band
};

struct DualTracePoint {
  int iteration;
  double objective;
  double gap;  // best objective so far minus target, +inf without one
  double step;
};

struct DualOptions {
  int max_iters = 50000;
  double tol = 1e-6;
  StepRule step_rule = StepRule::Polyak;
  std::optional<double> target;        // known minimum, e.g. matching value
  std::optional<VectorXd> start;       // base prices, marketable coords clamped
  std::vector<DualTracePoint>* trace = nullptr;
};

struct DualState {
  VectorXd price;       // best base prices found
  double objective;     // objective there
  VectorXd excess;      // subgradient there (supply minus demand mass)
  int iterations = 0;
  double gap_estimate;  // objective minus target, +inf when unknown
  bool converged = false;
};

/**
 * Projected subgradient descent over the box [ask, bid] on marketable
 * qualities. Non-marketable coordinates are pinned to the midpoint of
 * (bid, ask), where nobody trades and the subgradient vanishes, so only
 * the marketable box is searched. With a target value the Polyak step
 * applies and convergence is declared at relative gap tol * (1 +
 * |target|); without one the diminishing rule runs until the subgradient
 * vanishes or iterations run out. Polyak without a target throws.
 */
DualState minimize_dual(const MarketInstance& inst, const DualOptions& options = {});

/// Where a price sits relative to the bid and ask curves.
enum class QualityRegion {
  AtBid,          // ask < price = bid
  Interior,       // ask < price < bid
  AtAsk,          // ask = price < bid
  Pinched,        // ask = price = bid
  NonMarketable,  // ask > bid
};

/**
 * First-order optimality residuals for a clearing excess (supply minus
 * demand mass per base quality) at the given prices. At a minimum,
 * excess demand may only remain where the price is pinned at the bid
 * curve, excess supply only at the ask curve, and the interior and
 * non-marketable regions must clear exactly; a quality pinched between
 * equal curves is unconstrained. Violations are reported as maxima per
 * region, zero where a region is empty.
 */
struct NormalConeReport {
  std::vector<QualityRegion> region;  // size K
  double at_bid_violation = 0.0;
  double interior_violation = 0.0;
  double at_ask_violation = 0.0;
  double non_marketable_violation = 0.0;

  double max_violation() const;
};

NormalConeReport normal_cone_check(const MarketInstance& inst, const PriceSystem& p,
                                   const VectorXd& excess, double tol = 1e-9);

/**
 * Clears residual imbalance by moving the long side's surplus mass to
 * its stay-out point, proportionally across that side's entries at the
 * quality. Only qualities priced at the bid curve may shed consumer
 * mass, only those at the ask curve may shed producer mass, and pinched
 * ones may shed either; an imbalance anywhere else throws a
 * std::runtime_error naming the quality.
 */
Allocation rebalance_outside(const MarketInstance& inst, const PriceSystem& p,
                             const Allocation& alloc, double tol = 1e-9);

}  // namespace hedonic
