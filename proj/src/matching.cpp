#include "hedonic/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <utility>

namespace hedonic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual network with paired edges: edge e and e^1 are each other's
// reverses, so the tail of e is to[e ^ 1].
struct FlowGraph {
  std::vector<int> to;
  std::vector<double> cap;
  std::vector<double> cost;
  std::vector<std::vector<int>> adj;

  explicit FlowGraph(int nodes) : adj(nodes) {}

  int add_edge(int u, int v, double capacity, double unit_cost) {
    const int id = static_cast<int>(to.size());
    adj[u].push_back(id);
    to.push_back(v);
    cap.push_back(capacity);
    cost.push_back(unit_cost);
    adj[v].push_back(id + 1);
    to.push_back(u);
    cap.push_back(0.0);
    cost.push_back(-unit_cost);
    return id;
  }
};

// Shortest distances from {source, sink} over the residual graph with
// original costs. The optimal flow leaves no negative residual cycle and
// no negative residual path between source and sink in either direction,
// which pins d(source) = d(sink) = 0 and makes the clamped distances
// valid optimal duals.
std::vector<double> residual_distances(const FlowGraph& g, int source, int sink, double tol) {
  const int nodes = static_cast<int>(g.adj.size());
  std::vector<double> d(nodes, kInf);
  std::vector<char> queued(nodes, 0);
  std::vector<int> pushes(nodes, 0);
  std::deque<int> queue;
  d[source] = d[sink] = 0.0;
  queue.push_back(source);
  queue.push_back(sink);
  queued[source] = queued[sink] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    for (int e : g.adj[u]) {
      if (g.cap[e] <= tol) continue;
      const int v = g.to[e];
      const double nd = d[u] + g.cost[e];
      if (nd < d[v] - 1e-15) {
        d[v] = nd;
        if (!queued[v]) {
          if (++pushes[v] > nodes + 1)
            throw std::logic_error("matching duals: negative residual cycle");
          queue.push_back(v);
          queued[v] = 1;
        }
      }
    }
  }
  return d;
}

}  // namespace

PairSurplus pair_surplus(const MarketInstance& inst) {
  const Index m = inst.num_consumers();
  const Index n = inst.num_producers();
  const Index K = inst.num_qualities();
  PairSurplus out;
  out.w.resize(m, n);
  out.zstar.resize(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      double best = -kInf;
      Index arg = 0;
      for (Index k = 0; k < K; ++k) {
        const double s = inst.utilities(i, k) - inst.costs(j, k);
        if (s > best) {
          best = s;
          arg = k;
        }
      }
      out.w(i, j) = best;
      out.zstar(i, j) = arg;
    }
  return out;
}

MatchResult solve_matching(const MarketInstance& inst, const PairSurplus& surplus, double tol) {
  const int m = static_cast<int>(inst.num_consumers());
  const int n = static_cast<int>(inst.num_producers());
  const int source = 0;
  const int sink = m + n + 1;
  const int nodes = m + n + 2;

  FlowGraph g(nodes);
  std::vector<int> consumer_arc(m), producer_arc(n);
  for (int i = 0; i < m; ++i)
    consumer_arc[i] = g.add_edge(source, 1 + i, inst.consumer_weights[i], 0.0);
  for (int j = 0; j < n; ++j)
    producer_arc[j] = g.add_edge(1 + m + j, sink, inst.producer_weights[j], 0.0);
  std::vector<std::vector<int>> pair_arc(m, std::vector<int>(n, -1));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (surplus.w(i, j) > -tol)
        pair_arc[i][j] = g.add_edge(1 + i, 1 + m + j, inst.consumer_weights[i], -surplus.w(i, j));

  // Start potentials that leave every reduced cost nonnegative: each
  // producer absorbs its most negative incoming arc cost, the sink the
  // minimum over producers.
  std::vector<double> pot(nodes, 0.0);
  for (int j = 0; j < n; ++j) {
    double lo = 0.0;
    for (int i = 0; i < m; ++i)
      if (pair_arc[i][j] >= 0) lo = std::min(lo, -surplus.w(i, j));
    pot[1 + m + j] = lo;
    pot[sink] = std::min(pot[sink], lo);
  }

  std::vector<double> dist(nodes);
  std::vector<int> parent(nodes);
  using Item = std::pair<double, int>;
  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    dist[source] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[u]) continue;
      for (int e : g.adj[u]) {
        if (g.cap[e] <= tol) continue;
        const int v = g.to[e];
        // Rounding in the potential updates can leave a tight arc with
        // reduced cost around -1e-16; clamping at zero keeps Dijkstra's
        // nonnegative-weight invariant, else a noise-level negative
        // cycle can spin the scan forever.
        const double step = g.cost[e] + pot[u] - pot[v];
        const double nd = du + (step > 0.0 ? step : 0.0);
        if (nd < dist[v]) {
          dist[v] = nd;
          parent[v] = e;
          heap.emplace(nd, v);
        }
      }
    }
    if (dist[sink] == kInf) break;
    if (dist[sink] + pot[sink] >= -tol) break;
    for (int v = 0; v < nodes; ++v)
      if (dist[v] < kInf) pot[v] += dist[v];
    double push = kInf;
    for (int v = sink; v != source; v = g.to[parent[v] ^ 1])
      push = std::min(push, g.cap[parent[v]]);
    for (int v = sink; v != source; v = g.to[parent[v] ^ 1]) {
      const int e = parent[v];
      g.cap[e] -= push;
      g.cap[e ^ 1] += push;
    }
  }

  MatchResult out;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const int e = pair_arc[i][j];
      if (e < 0) continue;
      const double mass = g.cap[e ^ 1];
      if (mass > tol) out.flow.cells.push_back({i, j, mass});
    }
  out.flow.consumer_slack.resize(m);
  for (int i = 0; i < m; ++i) out.flow.consumer_slack[i] = g.cap[consumer_arc[i]];
  out.flow.producer_slack.resize(n);
  for (int j = 0; j < n; ++j) out.flow.producer_slack[j] = g.cap[producer_arc[j]];

  out.value = 0.0;
  for (const auto& cell : out.flow.cells)
    out.value += cell.mass * surplus.w(cell.consumer, cell.producer);

  const std::vector<double> d = residual_distances(g, source, sink, tol);
  out.potentials.phi.resize(m);
  for (int i = 0; i < m; ++i) {
    if (d[1 + i] == kInf) throw std::logic_error("matching duals: unreachable consumer");
    out.potentials.phi[i] = std::max(0.0, d[1 + i]);
  }
  out.potentials.psi.resize(n);
  for (int j = 0; j < n; ++j)
    out.potentials.psi[j] = d[1 + m + j] == kInf ? 0.0 : std::max(0.0, -d[1 + m + j]);

  // With every unit of mass matched on both sides no slackness condition
  // pins the additive split of surplus between the two sides, so center
  // it; any slack freezes the split at zero instead.
  if (out.flow.consumer_slack.maxCoeff() <= tol && out.flow.producer_slack.maxCoeff() <= tol) {
    const double delta = 0.5 * (out.potentials.psi.minCoeff() - out.potentials.phi.minCoeff());
    out.potentials.phi.array() += delta;
    out.potentials.psi.array() -= delta;
  }
  return out;
}

VectorXd recover_prices(const MarketInstance& inst, const PairSurplus& surplus,
                        const MatchingFlow& flow, const Potentials& potentials, double tol) {
  const Index K = inst.num_qualities();
  const BidAskCurves curves = bid_ask(inst);
  VectorXd prices(K);
  std::vector<char> priced(K, 0);
  for (const auto& cell : flow.cells) {
    const Index k = surplus.zstar(cell.consumer, cell.producer);
    const double from_u = inst.utilities(cell.consumer, k) - potentials.phi[cell.consumer];
    const double from_v = inst.costs(cell.producer, k) + potentials.psi[cell.producer];
    if (!priced[k]) {
      prices[k] = from_u;
      priced[k] = 1;
    }
    const double scale = tol * (1.0 + std::abs(prices[k]));
    if (std::abs(from_u - prices[k]) > scale || std::abs(from_v - prices[k]) > scale)
      throw std::runtime_error("price recovery: inconsistent duals at quality '" +
                               inst.quality_ids[k] + "'");
  }
  for (Index k = 0; k < K; ++k) {
    if (priced[k]) continue;
    if (!curves.is_marketable[k]) {
      prices[k] = 0.5 * (curves.ask[k] + curves.bid[k]);
      continue;
    }
    double lo = curves.ask[k];
    for (Index i = 0; i < inst.num_consumers(); ++i)
      lo = std::max(lo, inst.utilities(i, k) - potentials.phi[i]);
    double hi = curves.bid[k];
    for (Index j = 0; j < inst.num_producers(); ++j)
      hi = std::min(hi, inst.costs(j, k) + potentials.psi[j]);
    if (lo > hi + tol * (1.0 + std::abs(hi)))
      throw std::runtime_error("price recovery: empty price window at quality '" +
                               inst.quality_ids[k] + "'");
    prices[k] = std::clamp(0.5 * (lo + hi), curves.ask[k], curves.bid[k]);
  }
  return prices;
}

Allocation build_allocation(const MarketInstance& inst, const PairSurplus& surplus,
                            const MatchingFlow& flow) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  std::map<std::pair<Index, Index>, double> alpha, beta;
  for (const auto& cell : flow.cells) {
    const Index k = surplus.zstar(cell.consumer, cell.producer);
    alpha[{cell.consumer, k}] += cell.mass;
    beta[{cell.producer, k}] += cell.mass;
  }
  for (Index i = 0; i < inst.num_consumers(); ++i)
    if (flow.consumer_slack[i] > 0.0) alpha[{i, ext.no_purchase()}] += flow.consumer_slack[i];
  for (Index j = 0; j < inst.num_producers(); ++j)
    if (flow.producer_slack[j] > 0.0) beta[{j, ext.no_sale()}] += flow.producer_slack[j];

  Allocation out;
  out.alpha.reserve(alpha.size());
  for (const auto& [key, mass] : alpha) out.alpha.push_back({key.first, key.second, mass});
  out.beta.reserve(beta.size());
  for (const auto& [key, mass] : beta) out.beta.push_back({key.first, key.second, mass});
  return out;
}

VectorXd alpha_marginal(const MarketInstance& inst, const Allocation& alloc) {
  VectorXd out = VectorXd::Zero(extend_qualities(inst).size());
  for (const auto& entry : alloc.alpha) out[entry.quality] += entry.mass;
  return out;
}

VectorXd beta_marginal(const MarketInstance& inst, const Allocation& alloc) {
  VectorXd out = VectorXd::Zero(extend_qualities(inst).size());
  for (const auto& entry : alloc.beta) out[entry.quality] += entry.mass;
  return out;
}

}  // namespace hedonic
