#pragma once

#include <utility>
#include <vector>

#include "hedonic/conjugate.hpp"
#include "hedonic/market.hpp"
#include "hedonic/matching.hpp"

namespace hedonic {

/**
 * Closed-form quadratic market on the unit quality interval: consumer
 * types x on [x_lo, x_hi] value quality z at xz - z^2/2, producer types
 * y on [y_lo, y_hi] make it at cost y z^2 / 2, both populations uniform.
 * With the default type ranges the solution is known in closed form up
 * to one additive price constant c, which stays free inside an interval.
 */
struct QuadraticExampleSpec {
  double x_lo = 1.0;
  double x_hi = 2.0;
  double y_lo = 2.0;
  double y_hi = 3.0;
  int grid_n = 400;
  double c = 0.0;
};

double quad_utility(double x, double z);
double quad_cost(double y, double z);

/// Quality demanded by type x at the closed-form prices.
double quad_demand(double x);

/// Quality supplied by type y at the closed-form prices.
double quad_supply(double y);

/// Producer type matched with consumer type x.
double quad_assignment(double x);

/// Price of a traded quality, up to the free constant c.
double quad_traded_price(double z, double c);

/// Equilibrium payoff of a consumer of type x: utility at its traded
/// quality minus that quality's price under constant c.
double quad_indirect_consumer(double x, double c);

/// Equilibrium payoff of a producer of type y: price received at its
/// traded quality minus the production cost, under constant c.
double quad_indirect_producer(double y, double c);

/// Interval of constants c compatible with equilibrium.
std::pair<double, double> quad_price_constant_bounds();

/// Quality interval that trades.
std::pair<double, double> quad_traded_interval();

/// Admissible price band below the traded interval, for given c.
std::pair<double, double> quad_low_band(double z, double c);

/// Admissible price band above the traded interval, for given c.
std::pair<double, double> quad_high_band(double z, double c);

/// Traded price with the constant pushed to its upper limit, where the
/// cheapest consumers become indifferent to staying out.
double quad_pinned_top_price(double z);

/// Admissible price band over the low qualities when consumers below
/// x = 1 are present and priced out of the market.
std::pair<double, double> quad_priced_out_band(double z);

/**
 * Finite instance on endpoint-inclusive uniform grids: grid_n nodes per
 * population, each weighted by interval length / grid_n, and grid_n
 * quality nodes on [0, 1]. Quality coordinates and both gradient tables
 * are filled in.
 */
MarketInstance discretize_quadratic(const QuadraticExampleSpec& spec);

/// Grid solution digested for comparison against the closed form.
struct SolvedQuadratic {
  VectorXd x_grid;
  VectorXd y_grid;
  VectorXd z_grid;
  VectorXd prices;              // base prices per quality node
  VectorXd demand_z;            // mass-weighted traded quality per consumer
  VectorXd supply_z;            // mass-weighted traded quality per producer
  std::vector<char> consumer_out;  // mostly at the stay-out point
  std::vector<char> producer_out;
  std::vector<char> traded;     // per quality node
  double traded_lo = 0.0;       // lowest and highest traded quality
  double traded_hi = 0.0;
};

SolvedQuadratic summarize_quadratic_solution(const MarketInstance& inst,
                                             const QuadraticExampleSpec& spec,
                                             const PriceSystem& p, const Allocation& alloc,
                                             double tol = 1e-9);

/// Gap between a grid solution and the closed form, with the price
/// constant fitted as the mean offset over traded qualities.
struct QuadraticDeviation {
  double c_hat = 0.0;
  bool c_in_bounds = false;
  double price_sup_err = 0.0;   // traded qualities, after the c_hat shift
  double demand_sup_err = 0.0;  // active consumers only
  double supply_sup_err = 0.0;  // active producers only
  double endpoint_lo_err = 0.0;
  double endpoint_hi_err = 0.0;
};

QuadraticDeviation compare_to_analytic(const QuadraticExampleSpec& spec,
                                       const SolvedQuadratic& solved);

}  // namespace hedonic
