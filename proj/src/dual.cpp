#include "hedonic/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace hedonic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Objective and lowest-index subgradient in one pass over preassembled
// extended tables.
double eval_dual(const MatrixXd& u_ext, const MatrixXd& v_ext, const VectorXd& mu,
                 const VectorXd& nu, const VectorXd& p_ext, Index base_count, VectorXd& grad) {
  grad.setZero();
  double value = 0.0;
  Index k;
  for (Index i = 0; i < u_ext.rows(); ++i) {
    const double best = (u_ext.row(i).transpose() - p_ext).maxCoeff(&k);
    value += mu[i] * best;
    if (k < base_count) grad[k] -= mu[i];
  }
  for (Index j = 0; j < v_ext.rows(); ++j) {
    const double best = (v_ext.row(j).transpose() - p_ext).minCoeff(&k);
    value -= nu[j] * best;
    if (k < base_count) grad[k] += nu[j];
  }
  return value;
}

}  // namespace

double dual_objective(const MarketInstance& inst, const PriceSystem& p) {
  return inst.consumer_weights.dot(sharp_of(inst, p.values)) -
         inst.producer_weights.dot(flat_of(inst, p.values));
}

VectorXd dual_subgradient(const MarketInstance& inst, const PriceSystem& p) {
  VectorXd grad(inst.num_qualities());
  eval_dual(extended_utilities(inst), extended_costs(inst), inst.consumer_weights,
            inst.producer_weights, p.values, inst.num_qualities(), grad);
  return grad;
}

double dual_directional_derivative(const MarketInstance& inst, const PriceSystem& p,
                                   const VectorXd& direction) {
  const Index K = inst.num_qualities();
  if (direction.size() != K)
    throw std::invalid_argument("direction: dimension mismatch");
  VectorXd dir_ext = VectorXd::Zero(K + 2);
  dir_ext.head(K) = direction;
  const MatrixXd u_ext = extended_utilities(inst);
  const MatrixXd v_ext = extended_costs(inst);

  double out = 0.0;
  for (Index i = 0; i < inst.num_consumers(); ++i) {
    const VectorXd payoff = u_ext.row(i).transpose() - p.values;
    const double best = payoff.maxCoeff();
    const double cutoff = best - 1e-12 * (1.0 + std::abs(best));
    double slowest = kInf;
    for (Index k = 0; k < payoff.size(); ++k)
      if (payoff[k] >= cutoff) slowest = std::min(slowest, dir_ext[k]);
    out -= inst.consumer_weights[i] * slowest;
  }
  for (Index j = 0; j < inst.num_producers(); ++j) {
    const VectorXd margin = v_ext.row(j).transpose() - p.values;
    const double best = margin.minCoeff();
    const double cutoff = best + 1e-12 * (1.0 + std::abs(best));
    double fastest = -kInf;
    for (Index k = 0; k < margin.size(); ++k)
      if (margin[k] <= cutoff) fastest = std::max(fastest, dir_ext[k]);
    out += inst.producer_weights[j] * fastest;
  }
  return out;
}

DualState minimize_dual(const MarketInstance& inst, const DualOptions& options) {
  if (options.step_rule == StepRule::Polyak && !options.target)
    throw std::invalid_argument("minimize_dual: Polyak step needs a target value");

  const Index K = inst.num_qualities();
  const BidAskCurves curves = bid_ask(inst);
  const MatrixXd u_ext = extended_utilities(inst);
  const MatrixXd v_ext = extended_costs(inst);

  VectorXd p_ext = VectorXd::Zero(K + 2);
  for (Index k = 0; k < K; ++k) p_ext[k] = 0.5 * (curves.ask[k] + curves.bid[k]);
  if (options.start) {
    if (options.start->size() != K)
      throw std::invalid_argument("minimize_dual: start price dimension mismatch");
    for (Index k : curves.marketable)
      p_ext[k] = std::clamp((*options.start)[k], curves.ask[k], curves.bid[k]);
  }

  double band = 0.0;
  for (Index k : curves.marketable) band = std::max(band, curves.bid[k] - curves.ask[k]);

  DualState state;
  state.price = p_ext.head(K);
  state.objective = kInf;
  state.gap_estimate = kInf;
  VectorXd grad(K);
  for (int t = 0; t < options.max_iters; ++t) {
    const double value = eval_dual(u_ext, v_ext, inst.consumer_weights, inst.producer_weights,
                                   p_ext, K, grad);
    state.iterations = t + 1;
    if (value < state.objective) {
      state.objective = value;
      state.price = p_ext.head(K);
    }
    if (options.target) state.gap_estimate = state.objective - *options.target;

    double step = 0.0;
    const double grad_norm2 = grad.squaredNorm();
    const bool optimal = grad_norm2 == 0.0;
    const bool gap_closed =
        options.target && state.gap_estimate <= options.tol * (1.0 + std::abs(*options.target));
    if (!optimal && !gap_closed) {
      step = options.step_rule == StepRule::Polyak
                 ? (value - *options.target) / grad_norm2
                 : band / std::sqrt(t + 1.0);
    }
    if (options.trace)
      options.trace->push_back({t, value, state.gap_estimate, step});
    if (optimal) {
      state.converged = true;
      if (!options.target) state.gap_estimate = 0.0;
      break;
    }
    if (gap_closed) {
      state.converged = true;
      break;
    }
    for (Index k : curves.marketable)
      p_ext[k] = std::clamp(p_ext[k] - step * grad[k], curves.ask[k], curves.bid[k]);
  }

  VectorXd p_best = VectorXd::Zero(K + 2);
  p_best.head(K) = state.price;
  state.objective = eval_dual(u_ext, v_ext, inst.consumer_weights, inst.producer_weights, p_best,
                              K, grad);
  state.excess = grad;
  if (options.target) state.gap_estimate = state.objective - *options.target;
  return state;
}

double NormalConeReport::max_violation() const {
  return std::max({at_bid_violation, interior_violation, at_ask_violation,
                   non_marketable_violation});
}

NormalConeReport normal_cone_check(const MarketInstance& inst, const PriceSystem& p,
                                   const VectorXd& excess, double tol) {
  const Index K = inst.num_qualities();
  if (excess.size() != K)
    throw std::invalid_argument("excess: dimension mismatch");
  const BidAskCurves curves = bid_ask(inst);
  NormalConeReport report;
  report.region.resize(K);
  for (Index k = 0; k < K; ++k) {
    const double a = curves.ask[k];
    const double b = curves.bid[k];
    QualityRegion region;
    if (!curves.is_marketable[k]) {
      region = QualityRegion::NonMarketable;
      report.non_marketable_violation =
          std::max(report.non_marketable_violation, std::abs(excess[k]));
    } else if (b - a <= tol * (1.0 + std::abs(a) + std::abs(b))) {
      region = QualityRegion::Pinched;
    } else if (b - p[k] <= tol * (1.0 + std::abs(b))) {
      region = QualityRegion::AtBid;
      report.at_bid_violation = std::max(report.at_bid_violation, std::max(0.0, excess[k]));
    } else if (p[k] - a <= tol * (1.0 + std::abs(a))) {
      region = QualityRegion::AtAsk;
      report.at_ask_violation = std::max(report.at_ask_violation, std::max(0.0, -excess[k]));
    } else {
      region = QualityRegion::Interior;
      report.interior_violation = std::max(report.interior_violation, std::abs(excess[k]));
    }
    report.region[k] = region;
  }
  return report;
}

Allocation rebalance_outside(const MarketInstance& inst, const PriceSystem& p,
                             const Allocation& alloc, double tol) {
  const Index K = inst.num_qualities();
  const ExtendedQualitySet ext = extend_qualities(inst);
  const BidAskCurves curves = bid_ask(inst);
  const VectorXd alpha = alpha_marginal(inst, alloc);
  const VectorXd beta = beta_marginal(inst, alloc);

  // Per-quality factor by which one side's entries shrink, the shed mass
  // landing on the stay-out point.
  VectorXd keep_alpha = VectorXd::Ones(K), keep_beta = VectorXd::Ones(K);
  for (Index k = 0; k < K; ++k) {
    const double diff = alpha[k] - beta[k];
    if (std::abs(diff) <= tol * (1.0 + alpha[k] + beta[k])) continue;
    const double a = curves.ask[k];
    const double b = curves.bid[k];
    const bool at_bid =
        curves.is_marketable[k] && b - p[k] <= tol * (1.0 + std::abs(b));
    const bool at_ask =
        curves.is_marketable[k] && p[k] - a <= tol * (1.0 + std::abs(a));
    if (diff > 0.0 && at_bid)
      keep_alpha[k] = beta[k] / alpha[k];
    else if (diff < 0.0 && at_ask)
      keep_beta[k] = alpha[k] / beta[k];
    else
      throw std::runtime_error("rebalance: unmatched mass at quality '" + inst.quality_ids[k] +
                               "'");
  }

  std::map<std::pair<Index, Index>, double> amap, bmap;
  for (const auto& e : alloc.alpha) {
    if (ext.is_base(e.quality) && keep_alpha[e.quality] < 1.0) {
      const double kept = e.mass * keep_alpha[e.quality];
      if (kept > 0.0) amap[{e.agent, e.quality}] += kept;
      amap[{e.agent, ext.no_purchase()}] += e.mass - kept;
    } else {
      amap[{e.agent, e.quality}] += e.mass;
    }
  }
  for (const auto& e : alloc.beta) {
    if (ext.is_base(e.quality) && keep_beta[e.quality] < 1.0) {
      const double kept = e.mass * keep_beta[e.quality];
      if (kept > 0.0) bmap[{e.agent, e.quality}] += kept;
      bmap[{e.agent, ext.no_sale()}] += e.mass - kept;
    } else {
      bmap[{e.agent, e.quality}] += e.mass;
    }
  }

  Allocation out;
  out.alpha.reserve(amap.size());
  for (const auto& [key, mass] : amap) out.alpha.push_back({key.first, key.second, mass});
  out.beta.reserve(bmap.size());
  for (const auto& [key, mass] : bmap) out.beta.push_back({key.first, key.second, mass});
  return out;
}

}  // namespace hedonic
