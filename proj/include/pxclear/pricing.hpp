// Pricing rules: convex hull prices from the continuous relaxation, IP
// prices from the fixed-commitment restriction, and European-like prices
// found by no-good cut generation over commitment vectors.

#ifndef PXCLEAR_PRICING_HPP_
#define PXCLEAR_PRICING_HPP_

#include <map>
#include <optional>
#include <string>

#include "pxclear/formulation.hpp"
#include "pxclear/model.hpp"
#include "pxclear/solver.hpp"

namespace pxclear {

enum class Rule { kChp, kIp, kEu };

const char* to_string(Rule rule);
/// Parses "chp", "ip" or "eu". Throws std::invalid_argument otherwise.
Rule rule_from_string(const std::string& name);

struct ClearingOptions {
  SolverOptions solver;
  const SolverBackend* backend = nullptr;  // nullptr = backend_from_env()
  int eu_cut_budget = 10'000;              // master problems solved before giving up
  double eu_tolerance = 1e-6;              // accepted commitment price must be >= -this

  const SolverBackend& solver_backend() const;
};

/// Thrown when the welfare program or a required restriction cannot be solved.
class ClearingError : public std::runtime_error {
 public:
  ClearingError(const std::string& what, SolveStatus status)
      : std::runtime_error(what), status_(status) {}
  SolveStatus status() const { return status_; }

 private:
  SolveStatus status_;
};

struct RuleDiagnostics {
  // chp
  double relaxation_objective = 0.0;
  double duality_gap = 0.0;
  // ip: largest absolute residuals over accepted non-convex participants, and
  // the smallest slack of the missed-profit bound over rejected ones.
  double profit_residual = 0.0;
  double decomposition_residual = 0.0;
  double missed_profit_slack = 0.0;
  // eu
  int cut_count = 0;
  int iterations = 0;
  bool budget_exhausted = false;
  // all
  long milp_nodes = 0;
  long lp_iterations = 0;
};

struct RuleOutcome {
  Rule rule = Rule::kChp;
  DispatchSolution dispatch;
  std::map<int, int> commitments;  // non-convex participant -> 0/1
  PriceSystem prices;
  RuleDiagnostics diagnostics;
  /// False only for eu when no admissible commitment vector was found
  /// within the cut budget; dispatch and prices are then empty.
  bool feasible = true;
};

/// Dispatch of the welfare program together with its commitment vector.
struct WelfareOptimum {
  LinearProblem swp;
  SolveResult result;
  DispatchSolution dispatch;
  std::map<int, int> commitments;
};

/// Solves the welfare program. Throws ClearingError if it is not optimal.
WelfareOptimum solve_welfare(const Instance& instance, const ClearingOptions& options = {});

RuleOutcome chp_clear(const Instance& instance, const ClearingOptions& options = {});
RuleOutcome ip_clear(const Instance& instance, const ClearingOptions& options = {});
RuleOutcome eu_clear(const Instance& instance, const ClearingOptions& options = {});

RuleOutcome clear(const Instance& instance, Rule rule, const ClearingOptions& options = {});

/// Fixed-commitment dual quantities of one non-convex participant, read from
/// an optimal solve of the restriction.
struct CommitmentDuals {
  double delta = 0.0;         // fix-row dual
  double step_terms = 0.0;    // sum (s_max - r s_min)
  double ramp_terms = 0.0;    // sum (RU g_up + RD g_down)
  double trade_profit = 0.0;  // sum (pi - P)(-Q) x
};

CommitmentDuals commitment_duals(const Instance& instance, const LinearProblem& fixed,
                                 const SolveResult& result, int participant);

struct PriceFeasibility {
  bool feasible = false;
  double shortfall = 0.0;  // min sum of max(0, -delta) over accepted groups
  PriceSystem prices;      // witness when feasible
};

/// Decides whether some optimal dual of the restriction at `u_star` gives
/// every accepted non-convex participant a non-negative commitment price.
/// `welfare_fixed` is the optimal value of that restriction.
PriceFeasibility eu_price_feasibility(const Instance& instance, const std::map<int, int>& u_star,
                                      double welfare_fixed, const ClearingOptions& options = {});

}  // namespace pxclear

#endif  // PXCLEAR_PRICING_HPP_
