// Test-only reference computations. Nothing here calls the pricing rules
// being checked.

#ifndef PXCLEAR_TESTS_ORACLES_HPP_
#define PXCLEAR_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "pxclear/formulation.hpp"
#include "pxclear/model.hpp"
#include "pxclear/oracle.hpp"
#include "pxclear/pricing.hpp"
#include "pxclear/solver.hpp"

namespace pxclear::testing {

// One-period, one-location EU check by scanning prices. For fixed
// commitments the market clears at any pi consistent with the step-wise
// marginal conditions, and the commitment price of an accepted group at pi
// is its best committed profit. So u is admissible iff some clearing pi
// leaves every accepted group with a non-negative committed profit.
inline EuOracleResult single_market_eu_oracle(const Instance& inst, double tol = 1e-6) {
  constexpr double kFar = 1e6;
  constexpr double kEps = 1e-7;
  EuOracleResult best;
  for_each_commitment(inst, {}, [&](const std::map<int, int>& u, const LinearProblem& fixed,
                                    const SolveResult& r) {
    if (!r.optimal()) return;
    if (best.feasible && r.objective <= best.welfare) return;
    DispatchSolution d = dispatch_from(inst, fixed, r.primal);
    double lo = -kFar;
    double hi = kFar;
    std::vector<double> breaks;
    std::vector<int> accepted;
    for (size_t c = 0; c < inst.participants.size(); ++c) {
      const BidGroup& g = inst.participants[c];
      const bool on = g.convex || u.at(static_cast<int>(c)) == 1;
      if (!g.convex && on) accepted.push_back(static_cast<int>(c));
      if (!on) continue;
      for (size_t i = 0; i < g.steps.size(); ++i) {
        const BidStep& s = g.steps[i];
        breaks.push_back(s.price);
        const double x = d.x[c][i];
        const double floor = g.convex ? 0.0 : s.min_ratio;
        const bool below_cap = x < 1.0 - kEps;
        const bool above_floor = x > floor + kEps;
        // below the cap the margin is <= 0, above the floor it is >= 0
        bool price_at_least = g.side == Side::kDemand ? below_cap : above_floor;
        bool price_at_most = g.side == Side::kDemand ? above_floor : below_cap;
        if (price_at_least) lo = std::max(lo, s.price);
        if (price_at_most) hi = std::min(hi, s.price);
      }
    }
    if (lo > hi + 1e-9) return;
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> pts;
    for (double b : breaks) {
      if (b >= lo && b <= hi) pts.push_back(b);
    }
    auto profit = [&](int c, double pi) {
      const BidGroup& g = inst.participants[c];
      double v = -g.fixed_cost;
      for (const auto& s : g.steps) {
        double m = signed_quantity(s, g.side) * (s.price - pi);
        v += std::max(m, m * s.min_ratio);
      }
      return v;
    };
    // Profits are linear between breakpoints; intersect the sub-intervals
    // where each accepted group breaks even.
    bool ok = false;
    for (size_t k = 0; k + 1 < pts.size() && !ok; ++k) {
      double a = pts[k], b = pts[k + 1];
      double left = a, right = b;
      bool empty = false;
      for (int c : accepted) {
        double fa = profit(c, a) + tol, fb = profit(c, b) + tol;
        if (fa < 0 && fb < 0) {
          empty = true;
          break;
        }
        if (fa < 0) left = std::max(left, a + (b - a) * (-fa) / (fb - fa));
        if (fb < 0) right = std::min(right, a + (b - a) * fa / (fa - fb));
      }
      ok = !empty && left <= right + 1e-12;
    }
    if (pts.size() == 1) {
      ok = std::all_of(accepted.begin(), accepted.end(),
                       [&](int c) { return profit(c, pts[0]) >= -tol; });
    }
    if (ok) {
      best.feasible = true;
      best.welfare = r.objective;
      best.commitments = u;
    }
  });
  return best;
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace pxclear::testing

#endif  // PXCLEAR_TESTS_ORACLES_HPP_
