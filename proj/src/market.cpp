#include "hedonic/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hedonic {

namespace {

void require(bool ok, const std::string& path, const char* what) {
  if (!ok) throw std::invalid_argument(path + ": " + what);
}

void check_weights(const VectorXd& w, const char* section) {
  for (Index i = 0; i < w.size(); ++i) {
    const std::string path = std::string(section) + "[" + std::to_string(i) + "].weight";
    require(std::isfinite(w[i]), path, "non-finite entry");
    require(w[i] > 0.0, path, "non-positive weight");
  }
}

void check_table(const MatrixXd& t, Index rows, Index cols, const char* section,
                 const char* field) {
  require(t.rows() == rows && t.cols() == cols, std::string(section) + "." + field,
          "dimension mismatch");
  for (Index i = 0; i < t.rows(); ++i)
    for (Index k = 0; k < t.cols(); ++k)
      require(std::isfinite(t(i, k)),
              std::string(section) + "[" + std::to_string(i) + "]." + field + "[" +
                  std::to_string(k) + "]",
              "non-finite entry");
}

void check_gradients(const std::vector<MatrixXd>& g, Index agents, Index qualities,
                     const char* field) {
  require(static_cast<Index>(g.size()) == agents, field, "dimension mismatch");
  const Index dim = g.empty() ? 0 : g.front().cols();
  for (Index i = 0; i < agents; ++i) {
    const std::string path = std::string(field) + "[" + std::to_string(i) + "]";
    require(g[i].rows() == qualities && g[i].cols() == dim, path, "dimension mismatch");
    require(g[i].allFinite(), path, "non-finite entry");
  }
}

}  // namespace

void validate(const MarketInstance& inst) {
  const Index m = inst.num_consumers();
  const Index n = inst.num_producers();
  const Index K = inst.num_qualities();
  require(m >= 1, "consumers", "at least one consumer required");
  require(n >= 1, "producers", "at least one producer required");
  require(K >= 1, "qualities", "at least one quality required");
  require(inst.consumer_weights.size() == m, "consumers", "dimension mismatch");
  require(inst.producer_weights.size() == n, "producers", "dimension mismatch");
  check_weights(inst.consumer_weights, "consumers");
  check_weights(inst.producer_weights, "producers");
  check_table(inst.utilities, m, K, "consumers", "utilities");
  check_table(inst.costs, n, K, "producers", "costs");
  if (inst.quality_coords) {
    require(inst.quality_coords->rows() == K, "qualities.coords", "dimension mismatch");
    require(inst.quality_coords->allFinite(), "qualities.coords", "non-finite entry");
  }
  if (inst.consumer_gradients)
    check_gradients(*inst.consumer_gradients, m, K, "consumer_gradients");
  if (inst.producer_gradients)
    check_gradients(*inst.producer_gradients, n, K, "producer_gradients");
}

ExtendedQualitySet extend_qualities(const MarketInstance& inst) {
  return ExtendedQualitySet{inst.num_qualities()};
}

double utility_at(const MarketInstance& inst, Index i, Index k) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  if (ext.is_base(k)) return inst.utilities(i, k);
  if (k == ext.no_purchase()) return 0.0;
  return -1.0;  // the producers' stay-out point, dominated for consumers
}

double cost_at(const MarketInstance& inst, Index j, Index k) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  if (ext.is_base(k)) return inst.costs(j, k);
  if (k == ext.no_purchase()) return 1.0;  // dominated for producers
  return 0.0;
}

MatrixXd extended_utilities(const MarketInstance& inst) {
  const Index K = inst.num_qualities();
  MatrixXd u(inst.num_consumers(), K + 2);
  u.leftCols(K) = inst.utilities;
  u.col(K).setZero();
  u.col(K + 1).setConstant(-1.0);
  return u;
}

MatrixXd extended_costs(const MarketInstance& inst) {
  const Index K = inst.num_qualities();
  MatrixXd v(inst.num_producers(), K + 2);
  v.leftCols(K) = inst.costs;
  v.col(K).setConstant(1.0);
  v.col(K + 1).setZero();
  return v;
}

BidAskCurves bid_ask(const MarketInstance& inst) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  const Index K = ext.base_count;
  BidAskCurves out;
  out.bid.resize(ext.size());
  out.ask.resize(ext.size());
  out.bid.head(K) = inst.utilities.colwise().maxCoeff();
  out.ask.head(K) = inst.costs.colwise().minCoeff();
  out.bid[ext.no_purchase()] = 0.0;
  out.ask[ext.no_purchase()] = 1.0;
  out.bid[ext.no_sale()] = -1.0;
  out.ask[ext.no_sale()] = 0.0;
  out.is_marketable.assign(static_cast<size_t>(K), 0);
  for (Index k = 0; k < K; ++k) {
    if (out.ask[k] <= out.bid[k]) {
      out.is_marketable[static_cast<size_t>(k)] = 1;
      out.marketable.push_back(k);
    }
  }
  return out;
}

}  // namespace hedonic
