#pragma once

#include "hedonic/market.hpp"

namespace hedonic {

/**
 * Prices over the extended quality set. Both stay-out points are pinned to
 * price zero, so a consumer's reservation payoff and a producer's
 * reservation margin are exactly zero.
 */
struct PriceSystem {
  VectorXd values;  // size K+2; values[no_purchase] == values[no_sale] == 0

  double operator[](Index k) const { return values[k]; }
  VectorXd base(Index base_count) const { return values.head(base_count); }
};

/// Builds a price system from base-quality prices, appending the pinned
/// stay-out entries; throws std::invalid_argument on bad size or non-finite
/// values.
PriceSystem make_price_system(const MarketInstance& inst, const VectorXd& base_prices);

/**
 * Raw conjugation kernels over any finite extended-indexed value vector
 * (not only pinned price systems, so envelopes can themselves be
 * conjugated):
 *   sharp_of(q)[i] = max_k (utility(i,k) - q[k])
 *   flat_of(q)[j]  = min_k (cost(j,k)    - q[k])
 */
VectorXd sharp_of(const MarketInstance& inst, const VectorXd& ext_values);
VectorXd flat_of(const MarketInstance& inst, const VectorXd& ext_values);

/**
 * Conjugates of type-space vectors (one value per agent), evaluated on the
 * extended quality set:
 *   consumer_conjugate(f)[k] = max_i (utility(i,k) - f[i])
 *   producer_conjugate(g)[k] = min_j (cost(j,k)    - g[j])
 */
VectorXd consumer_conjugate(const MarketInstance& inst, const VectorXd& f);
VectorXd producer_conjugate(const MarketInstance& inst, const VectorXd& g);

/**
 * The four conjugate profiles of a price system:
 *   sharp[i]  best consumer payoff, >= 0 (staying out yields 0);
 *   flat[j]   best producer margin, <= 0;
 *   sharp2[k] consumer_conjugate(sharp), a pointwise lower envelope of p;
 *   flat2[k]  producer_conjugate(flat), a pointwise upper envelope of p.
 * sharp2 <= p <= flat2 holds for every price system.
 */
struct ConjugateProfile {
  VectorXd sharp;   // m
  VectorXd flat;    // n
  VectorXd sharp2;  // K+2
  VectorXd flat2;   // K+2
};

ConjugateProfile conjugates(const MarketInstance& inst, const PriceSystem& p);

enum class Activity { Inactive, Indifferent, Active };

/**
 * Demand and supply sets at a price system: the qualities attaining each
 * agent's best payoff within a relative tolerance tol*(1+|best|), listed in
 * ascending extended-index order. The no-sale point never enters demand and
 * the no-purchase point never enters supply (each is strictly dominated for
 * the other side).
 *
 * Activity classifies the sign of the best payoff restricted to base
 * qualities with the same relative tolerance: consumers are active when
 * some base quality beats staying out, inactive when all fall short,
 * indifferent at the boundary; producers symmetrically.
 */
struct ArgmaxSets {
  std::vector<std::vector<Index>> demand;  // m rows
  std::vector<std::vector<Index>> supply;  // n rows
  std::vector<Activity> consumer_activity;
  std::vector<Activity> producer_activity;
};

ArgmaxSets argmax_sets(const MarketInstance& inst, const PriceSystem& p, double tol = 1e-9);

}  // namespace hedonic
