#pragma once

#include <stdexcept>
#include <string>

#include "hedonic/market.hpp"
#include "hedonic/matching.hpp"

namespace hedonic {

/// Malformed or inconsistent content; the message names the offending
/// field by its JSON path.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (missing file, unwritable path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Instance document: "consumers" and "producers" are arrays of
 * {id, weight, utilities|costs}, "qualities" an array of ids or of
 * {id, coords}; optional "consumer_gradients" / "producer_gradients"
 * carry one matrix per agent (quality rows by type dimension).
 */
MarketInstance parse_instance(const std::string& text);
MarketInstance load_instance(const std::string& path);
std::string serialize_instance(const MarketInstance& inst);

/**
 * Solution document: "prices" lists one number per base quality;
 * "alpha" and "beta" list [agent, quality, mass] rows with quality -1
 * standing for the row's own stay-out point.
 */
struct SolutionData {
  VectorXd prices;
  Allocation allocation;
};

SolutionData parse_solution(const MarketInstance& inst, const std::string& text);
SolutionData load_solution(const MarketInstance& inst, const std::string& path);
std::string serialize_solution(const MarketInstance& inst, const VectorXd& prices,
                               const Allocation& alloc);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hedonic
