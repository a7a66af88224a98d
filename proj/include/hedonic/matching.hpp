#pragma once

#include <vector>

#include "hedonic/market.hpp"

namespace hedonic {

using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Best joint surplus of each consumer/producer pair over the base
/// qualities, with the lowest-index quality attaining it.
struct PairSurplus {
  MatrixXd w;         // m x n
  IndexMatrix zstar;  // m x n, argmax quality per pair
};

PairSurplus pair_surplus(const MarketInstance& inst);

/// Mass assignment between the two sides. Cells carry strictly positive
/// mass and are sorted by (consumer, producer); slack is the mass each
/// agent leaves unmatched.
struct MatchingFlow {
  struct Cell {
    Index consumer;
    Index producer;
    double mass;
  };
  std::vector<Cell> cells;
  VectorXd consumer_slack;  // size m
  VectorXd producer_slack;  // size n
};

/// Nonnegative dual weights witnessing optimality of a matching:
/// phi[i] + psi[j] >= w(i,j) for every pair, with equality on cells that
/// carry mass and a zero weight for any agent left with slack.
struct Potentials {
  VectorXd phi;  // size m
  VectorXd psi;  // size n
};

struct MatchResult {
  MatchingFlow flow;
  Potentials potentials;
  double value;  // total matched surplus, equals the dual sum
};

/**
 * Maximizes total matched surplus subject to the weight caps on both
 * sides, leaving mass unmatched where no pairing is worth its cost.
 * Runs successive shortest augmentations on the assignment network, so
 * integer weights and surpluses are handled exactly. `tol` decides when
 * a pair is worth an arc, when an augmentation still improves, and when
 * residual mass counts as present.
 */
MatchResult solve_matching(const MarketInstance& inst, const PairSurplus& surplus,
                           double tol = 1e-12);

/**
 * Rebuilds base-quality prices from matching potentials. A traded
 * quality k is priced at u(i,k) - phi[i] from the first cell trading k;
 * every other cell trading k must agree, from the consumer and producer
 * side both, within tol (relative), otherwise the potentials do not
 * certify an optimum and a std::runtime_error names the quality. An
 * untraded marketable quality is priced at the midpoint of the window
 * [max(ask, max_i u - phi), min(bid, min_j v + psi)], which is nonempty
 * whenever the potentials are feasible. Non-marketable qualities sit at
 * (ask + bid) / 2, strictly between the curves, where nobody trades.
 */
VectorXd recover_prices(const MarketInstance& inst, const PairSurplus& surplus,
                        const MatchingFlow& flow, const Potentials& potentials,
                        double tol = 1e-9);

/// Mass distribution over the extended quality set, one list per side.
/// Entries carry strictly positive mass, sorted by (agent, quality).
struct Allocation {
  struct Entry {
    Index agent;
    Index quality;  // extended index
    double mass;
  };
  std::vector<Entry> alpha;  // consumer side
  std::vector<Entry> beta;   // producer side
};

/// Expands a matching into an allocation: each cell trades at its pair's
/// best quality, and slack mass goes to the corresponding stay-out point.
Allocation build_allocation(const MarketInstance& inst, const PairSurplus& surplus,
                            const MatchingFlow& flow);

/// Total consumer mass per extended quality.
VectorXd alpha_marginal(const MarketInstance& inst, const Allocation& alloc);

/// Total producer mass per extended quality.
VectorXd beta_marginal(const MarketInstance& inst, const Allocation& alloc);

}  // namespace hedonic
