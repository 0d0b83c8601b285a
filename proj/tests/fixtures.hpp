// Worked-example instances shared by the test binaries.

#ifndef PXCLEAR_TESTS_FIXTURES_HPP_
#define PXCLEAR_TESTS_FIXTURES_HPP_

#include <string>

#include "pxclear/model.hpp"

namespace pxclear::testing {

inline BidGroup simple_bid(std::string id, Side side, double quantity, double price,
                           bool convex = true, double fixed_cost = 0.0,
                           double min_ratio = 0.0) {
  BidGroup g;
  g.id = std::move(id);
  g.side = side;
  g.convex = convex;
  g.fixed_cost = fixed_cost;
  g.location = "Z";
  g.steps.push_back(BidStep{"1", 1, quantity, price, min_ratio});
  return g;
}

inline Instance single_zone() {
  Instance inst;
  inst.periods = 1;
  inst.locations = {"Z"};
  return inst;
}

// Four bids, one period; C carries a minimum acceptance ratio of 11/12.
inline Instance example_1_1() {
  Instance inst = single_zone();
  inst.participants = {
      simple_bid("A", Side::kDemand, 10, 300),
      simple_bid("B", Side::kDemand, 14, 10),
      simple_bid("C", Side::kSupply, 12, 40, false, 0.0, 11.0 / 12.0),
      simple_bid("D", Side::kSupply, 13, 100),
  };
  return inst;
}

// Same bids, but C has a start-up cost of 200 instead of a ratio.
inline Instance example_1_2() {
  Instance inst = example_1_1();
  inst.participants[2] = simple_bid("C", Side::kSupply, 12, 40, false, 200.0, 0.0);
  return inst;
}

// Two block orders (D, E) fully or not at all.
inline Instance example_2() {
  Instance inst = single_zone();
  inst.participants = {
      simple_bid("A", Side::kSupply, 50, 30),
      simple_bid("B", Side::kDemand, 50, 130),
      simple_bid("C", Side::kSupply, 40, 40),
      simple_bid("D", Side::kSupply, 200, 60, false, 0.0, 1.0),
      simple_bid("E", Side::kDemand, 200, 90, false, 0.0, 1.0),
  };
  return inst;
}

}  // namespace pxclear::testing

#endif  // PXCLEAR_TESTS_FIXTURES_HPP_
