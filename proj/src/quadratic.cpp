#include "hedonic/quadratic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hedonic {

namespace {

VectorXd linspace(double lo, double hi, int n) {
  VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1.0);
  return out;
}

}  // namespace

double quad_utility(double x, double z) { return x * z - 0.5 * z * z; }

double quad_cost(double y, double z) { return 0.5 * y * z * z; }

double quad_demand(double x) { return x / (5.0 - x); }

double quad_supply(double y) { return (4.0 - y) / (1.0 + y); }

double quad_assignment(double x) { return 4.0 - x; }

double quad_traded_price(double z, double c) {
  return -0.5 * z * z + 5.0 * z - 5.0 * std::log(z + 1.0) + c;
}

double quad_indirect_consumer(double x, double c) {
  return -x + 5.0 * (std::log(5.0) - std::log(5.0 - x)) - c;
}

double quad_indirect_producer(double y, double c) {
  return (4.0 - y) * (6.0 + y) / (2.0 * (1.0 + y)) - 5.0 * (std::log(5.0) - std::log(1.0 + y)) + c;
}

std::pair<double, double> quad_price_constant_bounds() {
  const double shift = 5.0 * std::log(5.0 / 4.0);
  return {shift - 9.0 / 8.0, shift + 1.0};
}

std::pair<double, double> quad_traded_interval() { return {0.25, 2.0 / 3.0}; }

std::pair<double, double> quad_low_band(double z, double c) {
  const double shift = 5.0 * std::log(5.0 / 4.0);
  return {-0.5 * z * z + z + 1.0 - shift + c, 1.5 * z * z + 9.0 / 8.0 - shift + c};
}

std::pair<double, double> quad_high_band(double z, double c) {
  const double shift = 5.0 * std::log(5.0 / 3.0);
  return {-0.5 * z * z + 2.0 * z + 2.0 - shift + c, z * z + 8.0 / 3.0 - shift + c};
}

double quad_pinned_top_price(double z) {
  return -0.5 * z * z + 5.0 * z - 5.0 * std::log(4.0 * (z + 1.0) / 5.0) + 1.0;
}

std::pair<double, double> quad_priced_out_band(double z) {
  return {-0.5 * z * z + z, 1.5 * z * z + 17.0 / 8.0};
}

MarketInstance discretize_quadratic(const QuadraticExampleSpec& spec) {
  if (spec.grid_n < 2) throw std::invalid_argument("quadratic grid needs at least two nodes");
  if (!(spec.x_lo < spec.x_hi) || !(spec.y_lo < spec.y_hi))
    throw std::invalid_argument("quadratic grid needs nondegenerate type intervals");
  const int n = spec.grid_n;
  const VectorXd x = linspace(spec.x_lo, spec.x_hi, n);
  const VectorXd y = linspace(spec.y_lo, spec.y_hi, n);
  const VectorXd z = linspace(0.0, 1.0, n);

  MarketInstance inst;
  inst.consumer_ids.reserve(n);
  inst.producer_ids.reserve(n);
  inst.quality_ids.reserve(n);
  for (int i = 0; i < n; ++i) inst.consumer_ids.push_back("x" + std::to_string(i));
  for (int j = 0; j < n; ++j) inst.producer_ids.push_back("y" + std::to_string(j));
  for (int k = 0; k < n; ++k) inst.quality_ids.push_back("z" + std::to_string(k));
  inst.consumer_weights = VectorXd::Constant(n, (spec.x_hi - spec.x_lo) / n);
  inst.producer_weights = VectorXd::Constant(n, (spec.y_hi - spec.y_lo) / n);

  inst.utilities.resize(n, n);
  inst.costs.resize(n, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) inst.utilities(i, k) = quad_utility(x[i], z[k]);
    for (int j = 0; j < n; ++j) inst.costs(j, k) = quad_cost(y[j], z[k]);
  }

  inst.quality_coords = z;
  MatrixXd consumer_grad(n, 1), producer_grad(n, 1);
  for (int k = 0; k < n; ++k) {
    consumer_grad(k, 0) = z[k];
    producer_grad(k, 0) = 0.5 * z[k] * z[k];
  }
  inst.consumer_gradients = std::vector<MatrixXd>(n, consumer_grad);
  inst.producer_gradients = std::vector<MatrixXd>(n, producer_grad);
  return inst;
}

SolvedQuadratic summarize_quadratic_solution(const MarketInstance& inst,
                                             const QuadraticExampleSpec& spec,
                                             const PriceSystem& p, const Allocation& alloc,
                                             double tol) {
  const int n = spec.grid_n;
  const ExtendedQualitySet ext = extend_qualities(inst);
  if (inst.num_consumers() != n || inst.num_producers() != n || inst.num_qualities() != n)
    throw std::invalid_argument("solution summary: instance does not match the grid spec");

  SolvedQuadratic out;
  out.x_grid = linspace(spec.x_lo, spec.x_hi, n);
  out.y_grid = linspace(spec.y_lo, spec.y_hi, n);
  out.z_grid = linspace(0.0, 1.0, n);
  out.prices = p.base(n);

  // Mass-weighted traded quality per agent; agents mostly at their
  // stay-out point are flagged instead.
  VectorXd traded_mass = VectorXd::Zero(n), weighted_z = VectorXd::Zero(n);
  VectorXd out_mass = VectorXd::Zero(n);
  VectorXd alpha_base = VectorXd::Zero(n);
  for (const auto& e : alloc.alpha) {
    if (ext.is_base(e.quality)) {
      traded_mass[e.agent] += e.mass;
      weighted_z[e.agent] += e.mass * out.z_grid[e.quality];
      alpha_base[e.quality] += e.mass;
    } else {
      out_mass[e.agent] += e.mass;
    }
  }
  out.demand_z.resize(n);
  out.consumer_out.resize(n);
  for (int i = 0; i < n; ++i) {
    out.consumer_out[i] = out_mass[i] >= traded_mass[i];
    out.demand_z[i] = traded_mass[i] > 0.0 ? weighted_z[i] / traded_mass[i] : 0.0;
  }

  traded_mass.setZero();
  weighted_z.setZero();
  out_mass.setZero();
  for (const auto& e : alloc.beta) {
    if (ext.is_base(e.quality)) {
      traded_mass[e.agent] += e.mass;
      weighted_z[e.agent] += e.mass * out.z_grid[e.quality];
    } else {
      out_mass[e.agent] += e.mass;
    }
  }
  out.supply_z.resize(n);
  out.producer_out.resize(n);
  for (int j = 0; j < n; ++j) {
    out.producer_out[j] = out_mass[j] >= traded_mass[j];
    out.supply_z[j] = traded_mass[j] > 0.0 ? weighted_z[j] / traded_mass[j] : 0.0;
  }

  out.traded.resize(n);
  out.traded_lo = std::numeric_limits<double>::quiet_NaN();
  out.traded_hi = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < n; ++k) {
    out.traded[k] = alpha_base[k] > tol;
    if (!out.traded[k]) continue;
    if (std::isnan(out.traded_lo)) out.traded_lo = out.z_grid[k];
    out.traded_hi = out.z_grid[k];
  }
  return out;
}

QuadraticDeviation compare_to_analytic(const QuadraticExampleSpec& spec,
                                       const SolvedQuadratic& solved) {
  const int n = spec.grid_n;
  QuadraticDeviation dev;

  int traded_count = 0;
  double offset_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (!solved.traded[k]) continue;
    offset_sum += solved.prices[k] - quad_traded_price(solved.z_grid[k], 0.0);
    ++traded_count;
  }
  if (traded_count == 0) return dev;
  dev.c_hat = offset_sum / traded_count;
  const auto [c_lo, c_hi] = quad_price_constant_bounds();
  dev.c_in_bounds = dev.c_hat >= c_lo && dev.c_hat <= c_hi;

  for (int k = 0; k < n; ++k) {
    if (!solved.traded[k]) continue;
    const double err =
        std::abs(solved.prices[k] - quad_traded_price(solved.z_grid[k], dev.c_hat));
    dev.price_sup_err = std::max(dev.price_sup_err, err);
  }
  for (int i = 0; i < n; ++i) {
    if (solved.consumer_out[i]) continue;
    dev.demand_sup_err =
        std::max(dev.demand_sup_err, std::abs(solved.demand_z[i] - quad_demand(solved.x_grid[i])));
  }
  for (int j = 0; j < n; ++j) {
    if (solved.producer_out[j]) continue;
    dev.supply_sup_err =
        std::max(dev.supply_sup_err, std::abs(solved.supply_z[j] - quad_supply(solved.y_grid[j])));
  }
  const auto [z_lo, z_hi] = quad_traded_interval();
  dev.endpoint_lo_err = std::abs(solved.traded_lo - z_lo);
  dev.endpoint_hi_err = std::abs(solved.traded_hi - z_hi);
  return dev;
}

}  // namespace hedonic
