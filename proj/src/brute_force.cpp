#include "hedonic/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hedonic {

namespace {

// Walks every injective partial matching, consumer by consumer.
template <typename Visit>
void enumerate(Index i, Index m, Index n, std::vector<Index>& assign, std::vector<char>& used,
               double score, const MatrixXd& gain, Visit&& visit) {
  if (i == m) {
    visit(assign, score);
    return;
  }
  assign[i] = -1;
  enumerate(i + 1, m, n, assign, used, score, gain, visit);
  for (Index j = 0; j < n; ++j) {
    if (used[j]) continue;
    used[j] = 1;
    assign[i] = j;
    enumerate(i + 1, m, n, assign, used, score + gain(i, j), gain, visit);
    used[j] = 0;
  }
  assign[i] = -1;
}

}  // namespace

BruteForceResult brute_force_planner(const MarketInstance& inst, double tie_tol) {
  const Index m = inst.num_consumers();
  const Index n = inst.num_producers();
  const Index K = inst.num_qualities();
  if (m + n > 12)
    throw std::invalid_argument("brute force: instance too large");
  for (Index i = 0; i < m; ++i)
    if (inst.consumer_weights[i] != 1.0)
      throw std::invalid_argument("brute force: consumer weights must be one");
  for (Index j = 0; j < n; ++j)
    if (inst.producer_weights[j] != 1.0)
      throw std::invalid_argument("brute force: producer weights must be one");

  // Independent of the flow solver on purpose: surplus is recomputed
  // here and matchings are scored by plain summation.
  MatrixXd gain(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      double best = inst.utilities(i, 0) - inst.costs(j, 0);
      for (Index k = 1; k < K; ++k)
        best = std::max(best, inst.utilities(i, k) - inst.costs(j, k));
      gain(i, j) = std::max(0.0, best);
    }

  BruteForceResult result;
  std::vector<Index> assign(m, -1);
  std::vector<char> used(n, 0);

  double best = 0.0;
  enumerate(0, m, n, assign, used, 0.0, gain,
            [&](const std::vector<Index>&, double score) { best = std::max(best, score); });
  result.value = best;

  const double cutoff = best - tie_tol * (1.0 + std::abs(best));
  enumerate(0, m, n, assign, used, 0.0, gain,
            [&](const std::vector<Index>& matching, double score) {
              if (score >= cutoff) result.optimal_matchings.push_back(matching);
            });
  return result;
}

}  // namespace hedonic
