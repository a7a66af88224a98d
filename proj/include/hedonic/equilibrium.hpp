#pragma once

#include <vector>

#include "hedonic/conjugate.hpp"
#include "hedonic/market.hpp"
#include "hedonic/matching.hpp"

namespace hedonic {

/**
 * Residuals of the equilibrium conditions for a price system and an
 * allocation, each the maximum violation over its scope:
 *  - admissibility: prices of marketable qualities inside [ask, bid];
 *  - support: every mass-carrying choice attains its agent's envelope;
 *  - marginal: each agent's entries add up to its weight;
 *  - clearing: consumer and producer mass agree on every base quality.
 * The verdict ignores the duality gap, which is reported for context.
 */
struct EquilibriumReport {
  double admissibility_residual = 0.0;
  double support_residual = 0.0;
  double marginal_residual = 0.0;
  double clearing_residual = 0.0;
  double surplus = 0.0;      // total matched utility minus cost
  double duality_gap = 0.0;  // envelope objective minus surplus
  double tol = 0.0;
  bool pass = false;
};

EquilibriumReport verify_equilibrium(const MarketInstance& inst, const PriceSystem& p,
                                     const Allocation& alloc, double tol = 1e-9);

/// Total utility of consumed qualities minus total cost of produced
/// ones, stay-out conventions included.
double allocation_surplus(const MarketInstance& inst, const Allocation& alloc);

/**
 * Per-quality interval of prices compatible with the allocation staying
 * an equilibrium, holding every other price fixed: the envelope
 * conjugates squeezed by the bid and ask curves. Traded qualities
 * collapse to a point; a non-marketable quality reports an empty
 * interval.
 */
struct UniquenessRange {
  double lower;
  double upper;
  bool traded;
};

std::vector<UniquenessRange> uniqueness_ranges(const MarketInstance& inst, const PriceSystem& p,
                                               const Allocation& alloc, double tol = 1e-9);

/**
 * Replaces one untraded marketable quality's price by new_price and
 * verifies the original allocation at the modified prices. Throws
 * std::domain_error when the quality is not marketable or new_price
 * falls outside its admissible interval.
 */
EquilibriumReport perturb_and_recheck(const MarketInstance& inst, const PriceSystem& p,
                                      const Allocation& alloc, Index quality, double new_price,
                                      double tol = 1e-9);

struct EquilibriumPoint {
  PriceSystem price;
  Allocation allocation;
};

/**
 * Cross-checks two equilibria of one market: each side's choices under
 * either must remain best responses under the other, and no agent may
 * flip between strictly active and strictly inactive. Escaped mass is
 * measured per agent relative to its weight; the worst ratio is
 * reported.
 */
struct QuasiUniquenessReport {
  double max_escaped_mass = 0.0;
  bool activity_consistent = true;
  bool pass = false;
};

QuasiUniquenessReport quasi_uniqueness_check(const MarketInstance& inst,
                                             const EquilibriumPoint& first,
                                             const EquilibriumPoint& second, double tol = 1e-9);

/**
 * Purity asks each demand set to touch at most one base quality. The
 * optional sorting check additionally requires every agent's gradient
 * vectors to be pairwise distinct across qualities; requesting it
 * without gradients in the instance throws std::invalid_argument.
 */
struct PurityReport {
  bool consumer_pure = true;
  bool producer_pure = true;
  bool pure = true;
  bool sorting_checked = false;
  bool consumer_sorting = true;
  bool producer_sorting = true;
  bool sorting = true;
};

PurityReport purity_check(const MarketInstance& inst, const PriceSystem& p, double tol = 1e-9,
                          bool check_sorting = false);

/**
 * For a single-quality market, compares the mass strictly gaining from
 * trade on each side against the opposite side's weakly willing mass;
 * both directions must be covered for the price to clear some feasible
 * trade volume. Requires exactly one base quality.
 */
struct SingleQualityReport {
  double buyers_strict = 0.0;    // mass with utility above the price
  double buyers_marginal = 0.0;  // mass with utility at the price
  double sellers_strict = 0.0;   // mass with cost below the price
  double sellers_marginal = 0.0; // mass with cost at the price
  bool pass = false;
};

SingleQualityReport single_quality_check(const MarketInstance& inst, const PriceSystem& p,
                                         double tol = 1e-9);

}  // namespace hedonic
