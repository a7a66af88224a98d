#include "hedonic/conjugate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hedonic {

PriceSystem make_price_system(const MarketInstance& inst, const VectorXd& base_prices) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  if (base_prices.size() != ext.base_count)
    throw std::invalid_argument("prices: dimension mismatch");
  for (Index k = 0; k < base_prices.size(); ++k)
    if (!std::isfinite(base_prices[k]))
      throw std::invalid_argument("prices[" + std::to_string(k) + "]: non-finite entry");
  PriceSystem p;
  p.values.resize(ext.size());
  p.values.head(ext.base_count) = base_prices;
  p.values[ext.no_purchase()] = 0.0;
  p.values[ext.no_sale()] = 0.0;
  return p;
}

VectorXd sharp_of(const MarketInstance& inst, const VectorXd& ext_values) {
  return (extended_utilities(inst).rowwise() - ext_values.transpose()).rowwise().maxCoeff();
}

VectorXd flat_of(const MarketInstance& inst, const VectorXd& ext_values) {
  return (extended_costs(inst).rowwise() - ext_values.transpose()).rowwise().minCoeff();
}

VectorXd consumer_conjugate(const MarketInstance& inst, const VectorXd& f) {
  return (extended_utilities(inst).colwise() - f).colwise().maxCoeff().transpose();
}

VectorXd producer_conjugate(const MarketInstance& inst, const VectorXd& g) {
  return (extended_costs(inst).colwise() - g).colwise().minCoeff().transpose();
}

ConjugateProfile conjugates(const MarketInstance& inst, const PriceSystem& p) {
  ConjugateProfile out;
  out.sharp = sharp_of(inst, p.values);
  out.flat = flat_of(inst, p.values);
  out.sharp2 = consumer_conjugate(inst, out.sharp);
  out.flat2 = producer_conjugate(inst, out.flat);
  return out;
}

namespace {

Activity classify(double base_best, double tol) {
  const double scale = tol * (1.0 + std::abs(base_best));
  if (base_best > scale) return Activity::Active;
  if (base_best < -scale) return Activity::Inactive;
  return Activity::Indifferent;
}

}  // namespace

ArgmaxSets argmax_sets(const MarketInstance& inst, const PriceSystem& p, double tol) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  const Index m = inst.num_consumers();
  const Index n = inst.num_producers();
  const MatrixXd u = extended_utilities(inst);
  const MatrixXd v = extended_costs(inst);

  ArgmaxSets out;
  out.demand.resize(static_cast<size_t>(m));
  out.supply.resize(static_cast<size_t>(n));
  out.consumer_activity.resize(static_cast<size_t>(m));
  out.producer_activity.resize(static_cast<size_t>(n));

  for (Index i = 0; i < m; ++i) {
    const VectorXd payoff = u.row(i).transpose() - p.values;
    const double best = payoff.maxCoeff();
    const double cutoff = best - tol * (1.0 + std::abs(best));
    auto& dem = out.demand[static_cast<size_t>(i)];
    for (Index k = 0; k < ext.size(); ++k)
      if (k != ext.no_sale() && payoff[k] >= cutoff) dem.push_back(k);
    out.consumer_activity[static_cast<size_t>(i)] =
        classify(payoff.head(ext.base_count).maxCoeff(), tol);
  }
  for (Index j = 0; j < n; ++j) {
    const VectorXd margin = v.row(j).transpose() - p.values;
    const double best = margin.minCoeff();
    const double cutoff = best + tol * (1.0 + std::abs(best));
    auto& sup = out.supply[static_cast<size_t>(j)];
    for (Index k = 0; k < ext.size(); ++k)
      if (k != ext.no_purchase() && margin[k] <= cutoff) sup.push_back(k);
    // producers are active when supplying some base quality beats staying
    // out, i.e. the base-restricted margin is negative
    out.producer_activity[static_cast<size_t>(j)] =
        classify(-margin.head(ext.base_count).minCoeff(), tol);
  }
  return out;
}

}  // namespace hedonic
