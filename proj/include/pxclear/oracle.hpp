// Brute-force reference computations: welfare-optimal commitment vectors
// admitting European-like prices, and the price grid for uplift minimality.
// These do not use the pricing rules they are compared against.

#ifndef PXCLEAR_ORACLE_HPP_
#define PXCLEAR_ORACLE_HPP_

#include <map>
#include <vector>

#include "pxclear/model.hpp"
#include "pxclear/pricing.hpp"

namespace pxclear {

struct EuOracleResult {
  bool feasible = false;
  double welfare = 0.0;
  std::map<int, int> commitments;
  long restrictions_checked = 0;  // vectors passed to eu_price_feasibility
};

/// Best restriction welfare over all commitment vectors for which
/// eu_price_feasibility succeeds. Exponential in the non-convex count.
EuOracleResult eu_enumeration_oracle(const Instance& instance, const ClearingOptions& options = {});

/// True for one period, one location and no lines.
bool is_single_market(const Instance& instance);

/// Closed-form best commodity-only response of participant `c` at price
/// `pi` in a single market. Throws std::invalid_argument otherwise.
double single_market_self_dispatch(const Instance& instance, int c, double pi);

/// Sum of uplifts at `pi` for the given dispatch, in closed form.
double single_market_total_uplift(const Instance& instance, const DispatchSolution& dispatch,
                                  double pi);

struct GridResult {
  double price = 0.0;
  double total_uplift = 0.0;
  long points = 0;
};

/// Minimum total uplift over pi on a grid of `step` spanning the bid prices
/// widened by `margin` on both sides.
GridResult grid_min_uplift(const Instance& instance, const DispatchSolution& dispatch,
                           double step = 0.01, double margin = 10.0);

}  // namespace pxclear

#endif  // PXCLEAR_ORACLE_HPP_
