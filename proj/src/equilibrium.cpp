#include "hedonic/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hedonic {

namespace {

void check_entries(const MarketInstance& inst, const Allocation& alloc) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  for (const auto& e : alloc.alpha)
    if (e.agent < 0 || e.agent >= inst.num_consumers() || e.quality < 0 ||
        e.quality >= ext.size() || !(e.mass >= 0.0))
      throw std::invalid_argument("allocation: bad consumer entry");
  for (const auto& e : alloc.beta)
    if (e.agent < 0 || e.agent >= inst.num_producers() || e.quality < 0 ||
        e.quality >= ext.size() || !(e.mass >= 0.0))
      throw std::invalid_argument("allocation: bad producer entry");
}

}  // namespace

EquilibriumReport verify_equilibrium(const MarketInstance& inst, const PriceSystem& p,
                                     const Allocation& alloc, double tol) {
  check_entries(inst, alloc);
  const ExtendedQualitySet ext = extend_qualities(inst);
  const BidAskCurves curves = bid_ask(inst);
  const ConjugateProfile conj = conjugates(inst, p);

  EquilibriumReport report;
  report.tol = tol;

  for (Index k : curves.marketable)
    report.admissibility_residual =
        std::max({report.admissibility_residual, curves.ask[k] - p[k], p[k] - curves.bid[k]});

  VectorXd consumer_mass = VectorXd::Zero(inst.num_consumers());
  VectorXd producer_mass = VectorXd::Zero(inst.num_producers());
  VectorXd alpha = VectorXd::Zero(ext.size());
  VectorXd beta = VectorXd::Zero(ext.size());
  for (const auto& e : alloc.alpha) {
    consumer_mass[e.agent] += e.mass;
    alpha[e.quality] += e.mass;
    const double payoff = utility_at(inst, e.agent, e.quality) - p[e.quality];
    report.support_residual = std::max(report.support_residual, conj.sharp[e.agent] - payoff);
    report.surplus += e.mass * utility_at(inst, e.agent, e.quality);
  }
  for (const auto& e : alloc.beta) {
    producer_mass[e.agent] += e.mass;
    beta[e.quality] += e.mass;
    const double margin = cost_at(inst, e.agent, e.quality) - p[e.quality];
    report.support_residual = std::max(report.support_residual, margin - conj.flat[e.agent]);
    report.surplus -= e.mass * cost_at(inst, e.agent, e.quality);
  }

  report.marginal_residual =
      std::max((consumer_mass - inst.consumer_weights).cwiseAbs().maxCoeff(),
               (producer_mass - inst.producer_weights).cwiseAbs().maxCoeff());
  report.clearing_residual =
      (alpha.head(ext.base_count) - beta.head(ext.base_count)).cwiseAbs().maxCoeff();

  const double objective = inst.consumer_weights.dot(conj.sharp) -
                           inst.producer_weights.dot(conj.flat);
  report.duality_gap = objective - report.surplus;
  report.pass = report.admissibility_residual <= tol && report.support_residual <= tol &&
                report.marginal_residual <= tol && report.clearing_residual <= tol;
  return report;
}

double allocation_surplus(const MarketInstance& inst, const Allocation& alloc) {
  double out = 0.0;
  for (const auto& e : alloc.alpha) out += e.mass * utility_at(inst, e.agent, e.quality);
  for (const auto& e : alloc.beta) out -= e.mass * cost_at(inst, e.agent, e.quality);
  return out;
}

std::vector<UniquenessRange> uniqueness_ranges(const MarketInstance& inst, const PriceSystem& p,
                                               const Allocation& alloc, double tol) {
  check_entries(inst, alloc);
  const ExtendedQualitySet ext = extend_qualities(inst);
  const BidAskCurves curves = bid_ask(inst);
  const ConjugateProfile conj = conjugates(inst, p);
  VectorXd alpha = VectorXd::Zero(ext.size());
  for (const auto& e : alloc.alpha) alpha[e.quality] += e.mass;

  std::vector<UniquenessRange> out(ext.base_count);
  for (Index k = 0; k < ext.base_count; ++k) {
    out[k].lower = std::max(curves.ask[k], conj.sharp2[k]);
    out[k].upper = std::min(curves.bid[k], conj.flat2[k]);
    out[k].traded = alpha[k] > tol;
  }
  return out;
}

EquilibriumReport perturb_and_recheck(const MarketInstance& inst, const PriceSystem& p,
                                      const Allocation& alloc, Index quality, double new_price,
                                      double tol) {
  const Index K = inst.num_qualities();
  if (quality < 0 || quality >= K)
    throw std::domain_error("perturb: quality index out of range");
  const BidAskCurves curves = bid_ask(inst);
  if (!curves.is_marketable[quality])
    throw std::domain_error("perturb: quality '" + inst.quality_ids[quality] +
                            "' is not marketable");
  const auto ranges = uniqueness_ranges(inst, p, alloc, tol);
  const double lo = ranges[quality].lower;
  const double hi = ranges[quality].upper;
  const double slack = tol * (1.0 + std::abs(new_price));
  if (new_price < lo - slack || new_price > hi + slack)
    throw std::domain_error("perturb: price outside the admissible interval of quality '" +
                            inst.quality_ids[quality] + "'");
  VectorXd base = p.base(K);
  base[quality] = new_price;
  return verify_equilibrium(inst, make_price_system(inst, base), alloc, tol);
}

QuasiUniquenessReport quasi_uniqueness_check(const MarketInstance& inst,
                                             const EquilibriumPoint& first,
                                             const EquilibriumPoint& second, double tol) {
  check_entries(inst, first.allocation);
  check_entries(inst, second.allocation);
  const ArgmaxSets sets_first = argmax_sets(inst, first.price, tol);
  const ArgmaxSets sets_second = argmax_sets(inst, second.price, tol);

  QuasiUniquenessReport report;
  auto escaped = [&](const std::vector<Allocation::Entry>& entries,
                     const std::vector<std::vector<Index>>& permitted, const VectorXd& weights) {
    VectorXd missed = VectorXd::Zero(weights.size());
    for (const auto& e : entries) {
      const auto& set = permitted[e.agent];
      if (!std::binary_search(set.begin(), set.end(), e.quality)) missed[e.agent] += e.mass;
    }
    for (Index a = 0; a < weights.size(); ++a)
      report.max_escaped_mass = std::max(report.max_escaped_mass, missed[a] / weights[a]);
  };
  escaped(first.allocation.alpha, sets_second.demand, inst.consumer_weights);
  escaped(second.allocation.alpha, sets_first.demand, inst.consumer_weights);
  escaped(first.allocation.beta, sets_second.supply, inst.producer_weights);
  escaped(second.allocation.beta, sets_first.supply, inst.producer_weights);

  auto flips = [](const std::vector<Activity>& a, const std::vector<Activity>& b) {
    for (size_t i = 0; i < a.size(); ++i)
      if ((a[i] == Activity::Active && b[i] == Activity::Inactive) ||
          (a[i] == Activity::Inactive && b[i] == Activity::Active))
        return true;
    return false;
  };
  report.activity_consistent =
      !flips(sets_first.consumer_activity, sets_second.consumer_activity) &&
      !flips(sets_first.producer_activity, sets_second.producer_activity);
  report.pass = report.max_escaped_mass <= tol && report.activity_consistent;
  return report;
}

PurityReport purity_check(const MarketInstance& inst, const PriceSystem& p, double tol,
                          bool check_sorting) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  const ArgmaxSets sets = argmax_sets(inst, p, tol);

  PurityReport report;
  auto base_choices = [&](const std::vector<Index>& set) {
    Index count = 0;
    for (Index k : set)
      if (ext.is_base(k)) ++count;
    return count;
  };
  for (const auto& set : sets.demand)
    if (base_choices(set) > 1) report.consumer_pure = false;
  for (const auto& set : sets.supply)
    if (base_choices(set) > 1) report.producer_pure = false;
  report.pure = report.consumer_pure && report.producer_pure;

  if (!check_sorting) return report;
  if (!inst.consumer_gradients || !inst.producer_gradients)
    throw std::invalid_argument("purity: sorting check requested but gradients are absent");
  auto distinct_rows = [tol](const MatrixXd& g) {
    for (Index r = 0; r < g.rows(); ++r)
      for (Index s = r + 1; s < g.rows(); ++s)
        if ((g.row(r) - g.row(s)).cwiseAbs().maxCoeff() <= tol) return false;
    return true;
  };
  report.sorting_checked = true;
  for (const auto& g : *inst.consumer_gradients)
    if (!distinct_rows(g)) report.consumer_sorting = false;
  for (const auto& g : *inst.producer_gradients)
    if (!distinct_rows(g)) report.producer_sorting = false;
  report.sorting = report.consumer_sorting && report.producer_sorting;
  return report;
}

SingleQualityReport single_quality_check(const MarketInstance& inst, const PriceSystem& p,
                                         double tol) {
  if (inst.num_qualities() != 1)
    throw std::invalid_argument("single-quality check needs exactly one quality");
  const double price = p[0];
  SingleQualityReport report;
  for (Index i = 0; i < inst.num_consumers(); ++i) {
    const double gap = inst.utilities(i, 0) - price;
    const double scale = tol * (1.0 + std::abs(price));
    if (gap > scale)
      report.buyers_strict += inst.consumer_weights[i];
    else if (gap >= -scale)
      report.buyers_marginal += inst.consumer_weights[i];
  }
  for (Index j = 0; j < inst.num_producers(); ++j) {
    const double gap = price - inst.costs(j, 0);
    const double scale = tol * (1.0 + std::abs(price));
    if (gap > scale)
      report.sellers_strict += inst.producer_weights[j];
    else if (gap >= -scale)
      report.sellers_marginal += inst.producer_weights[j];
  }
  const double mass_tol = tol * (1.0 + inst.total_consumer_mass() + inst.total_producer_mass());
  report.pass = report.buyers_strict <= report.sellers_strict + report.sellers_marginal + mass_tol &&
                report.sellers_strict <= report.buyers_strict + report.buyers_marginal + mass_tol;
  return report;
}

}  // namespace hedonic
