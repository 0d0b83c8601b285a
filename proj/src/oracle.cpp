#include "pxclear/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pxclear/solver.hpp"

namespace pxclear {

namespace {

// Surplus of a step per unit of acceptance: Q (P - pi).
double margin(const BidGroup& g, const BidStep& s, double pi) {
  return signed_quantity(s, g.side) * (s.price - pi);
}

void require_single_market(const Instance& instance) {
  if (!is_single_market(instance)) {
    throw std::invalid_argument("closed-form uplift needs one period, one location and no lines");
  }
}

}  // namespace

EuOracleResult eu_enumeration_oracle(const Instance& instance, const ClearingOptions& options) {
  EuOracleResult best;
  long checked = 0;
  for_each_commitment(instance, options.solver,
                      [&](const std::map<int, int>& u, const LinearProblem&, const SolveResult& r) {
                        if (!r.optimal()) return;
                        if (best.feasible && r.objective <= best.welfare) return;
                        ++checked;
                        if (!eu_price_feasibility(instance, u, r.objective, options).feasible) {
                          return;
                        }
                        best.feasible = true;
                        best.welfare = r.objective;
                        best.commitments = u;
                      });
  best.restrictions_checked = checked;
  return best;
}

bool is_single_market(const Instance& instance) {
  return instance.periods == 1 && instance.locations.size() == 1 && instance.lines.empty();
}

double single_market_self_dispatch(const Instance& instance, int c, double pi) {
  require_single_market(instance);
  const BidGroup& g = instance.participants.at(c);
  double value = 0.0;
  for (const auto& s : g.steps) {
    double m = margin(g, s, pi);
    // a started group runs each step anywhere in [r, 1]
    value += g.convex ? std::max(0.0, m) : std::max(m, m * s.min_ratio);
  }
  return g.convex ? value : std::max(0.0, value - g.fixed_cost);
}

double single_market_total_uplift(const Instance& instance, const DispatchSolution& dispatch,
                                  double pi) {
  require_single_market(instance);
  double total = 0.0;
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    const BidGroup& g = instance.participants[c];
    double realized = g.convex ? 0.0 : -g.fixed_cost * dispatch.u[c];
    for (size_t i = 0; i < g.steps.size(); ++i) {
      realized += margin(g, g.steps[i], pi) * dispatch.x[c][i];
    }
    total += single_market_self_dispatch(instance, static_cast<int>(c), pi) - realized;
  }
  return total;
}

GridResult grid_min_uplift(const Instance& instance, const DispatchSolution& dispatch, double step,
                           double margin_width) {
  require_single_market(instance);
  if (!(step > 0)) throw std::invalid_argument("grid step must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& g : instance.participants) {
    for (const auto& s : g.steps) {
      lo = std::min(lo, s.price);
      hi = std::max(hi, s.price);
    }
  }
  GridResult best;
  best.total_uplift = std::numeric_limits<double>::infinity();
  if (!std::isfinite(lo)) return {0.0, 0.0, 0};
  const long n = std::lround((hi - lo + 2 * margin_width) / step);
  for (long k = 0; k <= n; ++k) {
    const double pi = lo - margin_width + step * k;
    const double u = single_market_total_uplift(instance, dispatch, pi);
    if (u < best.total_uplift) {
      best.total_uplift = u;
      best.price = pi;
    }
  }
  best.points = n + 1;
  return best;
}

}  // namespace pxclear
