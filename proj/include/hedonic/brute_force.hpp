#pragma once

#include <vector>

#include "hedonic/market.hpp"

namespace hedonic {

/// Exhaustive reference for tiny unit-weight markets: the best total
/// matched surplus and every partial matching attaining it within the
/// tie tolerance. A matching maps each consumer to a producer index or
/// -1 for unmatched; pairs with nonpositive surplus contribute zero, so
/// the score equals what an optimal plan would keep.
struct BruteForceResult {
  double value = 0.0;
  std::vector<std::vector<Index>> optimal_matchings;
};

/// Enumerates all injective partial matchings. Requires unit weights on
/// both sides and at most twelve agents in total; throws
/// std::invalid_argument otherwise.
BruteForceResult brute_force_planner(const MarketInstance& inst, double tie_tol = 1e-9);

}  // namespace hedonic
