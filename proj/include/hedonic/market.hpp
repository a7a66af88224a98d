#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace hedonic {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/**
 * A finite hedonic market: consumer and producer types with positive masses,
 * and dense utility/cost tables over a shared quality grid.
 *
 * Consumers enjoy utilities[i][k] from one unit of quality k and pay its
 * price; producers incur costs[j][k] to supply one unit and receive its
 * price. Every agent may instead stay out of the market at zero payoff.
 */
struct MarketInstance {
  std::vector<std::string> consumer_ids;  // size m
  std::vector<std::string> producer_ids;  // size n
  std::vector<std::string> quality_ids;   // size K

  VectorXd consumer_weights;  // m, strictly positive masses
  VectorXd producer_weights;  // n, strictly positive masses

  MatrixXd utilities;  // m x K
  MatrixXd costs;      // n x K

  /// Optional coordinates of each quality (K x dz), carried for discretized
  /// continuous instances; not used by the solvers.
  std::optional<MatrixXd> quality_coords;

  /// Optional type-space gradients of utilities/costs per (agent, quality);
  /// one K x d matrix per agent. Needed only by the sorting-condition check.
  std::optional<std::vector<MatrixXd>> consumer_gradients;
  std::optional<std::vector<MatrixXd>> producer_gradients;

  Index num_consumers() const { return static_cast<Index>(consumer_ids.size()); }
  Index num_producers() const { return static_cast<Index>(producer_ids.size()); }
  Index num_qualities() const { return static_cast<Index>(quality_ids.size()); }

  double total_consumer_mass() const { return consumer_weights.sum(); }
  double total_producer_mass() const { return producer_weights.sum(); }
};

/// Checks shape, positivity and finiteness; throws std::invalid_argument
/// naming the offending field (e.g. "consumers[2].weight") on the first
/// violation found.
void validate(const MarketInstance& inst);

/**
 * The quality grid extended by the two stay-out points. Base qualities keep
 * indices 0..K-1; index K is the consumers' outside option (no purchase),
 * index K+1 the producers' (no sale). Prices are pinned to zero at both.
 */
struct ExtendedQualitySet {
  Index base_count;

  Index no_purchase() const { return base_count; }
  Index no_sale() const { return base_count + 1; }
  Index size() const { return base_count + 2; }
  bool is_base(Index k) const { return k >= 0 && k < base_count; }
};

ExtendedQualitySet extend_qualities(const MarketInstance& inst);

/**
 * Utility of consumer i at extended quality k. At the no-purchase point it
 * is 0 (the reservation payoff); at the producers' no-sale point it is -1,
 * strictly worse than staying out, so consumers never choose it.
 */
double utility_at(const MarketInstance& inst, Index i, Index k);

/**
 * Cost of producer j at extended quality k: 0 at no-sale, +1 at no-purchase
 * (strictly unprofitable at zero price, so producers never choose it).
 */
double cost_at(const MarketInstance& inst, Index j, Index k);

/// Dense m x (K+2) table of utility_at values (last two columns constant).
MatrixXd extended_utilities(const MarketInstance& inst);

/// Dense n x (K+2) table of cost_at values.
MatrixXd extended_costs(const MarketInstance& inst);

/**
 * Best bid and ask per extended quality:
 *   bid[k] = max_i utilities[i][k],  ask[k] = min_j costs[j][k].
 * A base quality is marketable when ask[k] <= bid[k] (exact comparison on
 * the stored doubles); only marketable qualities can trade at any
 * admissible price.
 */
struct BidAskCurves {
  VectorXd bid;                    // size K+2
  VectorXd ask;                    // size K+2
  std::vector<Index> marketable;   // ascending base indices with ask <= bid
  std::vector<char> is_marketable; // size K mask over base qualities
};

BidAskCurves bid_ask(const MarketInstance& inst);

}  // namespace hedonic
