// Uplifts, IP settlement payments, paradoxical bid classification and the
// cross-rule comparison report.

#ifndef PXCLEAR_SETTLEMENT_HPP_
#define PXCLEAR_SETTLEMENT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "pxclear/model.hpp"
#include "pxclear/pricing.hpp"

namespace pxclear {

enum class Classification { kNormal, kPab, kPrb };

const char* to_string(Classification c);

inline constexpr double kClassificationTolerance = 1e-6;

struct ParticipantSettlement {
  int participant = -1;
  std::string id;
  bool non_convex = false;
  int committed = 1;  // 1 for convex participants
  double realized_surplus = 0.0;       // at the operator's dispatch
  double self_dispatch_surplus = 0.0;  // best own response, commodity prices only
  double uplift = 0.0;                 // self_dispatch - realized
  double make_whole = 0.0;             // loss of an accepted non-convex bid
  std::optional<double> payment;       // IP only: received amount (negative = pays)
  Classification classification = Classification::kNormal;
};

/// Best commodity-only self-dispatch surplus minus the realized surplus.
double uplift(const Instance& instance, int participant, const DispatchSolution& dispatch,
              const PriceSystem& prices, const ClearingOptions& options = {});

/// Optimum of the participant's own profit problem.
double self_dispatch_surplus(const Instance& instance, int participant, const PriceSystem& prices,
                             SettlementRule rule, const ClearingOptions& options = {});

/// Most a line's owner could collect at the given prices minus what the
/// dispatch collects; zero without price differences across lines.
double transmission_uplift(const Instance& instance, const DispatchSolution& dispatch,
                           const PriceSystem& prices);

/// IP settlement: every participant receives sum pi (-Q x) - delta u.
/// Throws std::invalid_argument if a non-convex participant has no delta.
std::vector<ParticipantSettlement> settle_ip(const Instance& instance,
                                             const DispatchSolution& dispatch,
                                             const PriceSystem& prices,
                                             const ClearingOptions& options = {});

/// Settlement rows for any rule. Under IP the rejected-bid test uses the
/// participant problem that includes the commitment price, so that a
/// rejected bid is paradoxical only if it misses profit under the payment
/// rule actually applied.
std::vector<ParticipantSettlement> settle(const Instance& instance, const RuleOutcome& outcome,
                                          const ClearingOptions& options = {});

struct PabPrbCounts {
  int pab = 0;
  int prb = 0;
};

PabPrbCounts classify_pab_prb(const std::vector<ParticipantSettlement>& settlements);

struct RuleReport {
  Rule rule = Rule::kChp;
  bool ok = false;
  std::string error;
  double welfare = 0.0;
  double welfare_loss = 0.0;
  double total_uplift = 0.0;
  double transmission_uplift = 0.0;  // chp only, included in total_uplift
  int pab = 0;
  int prb = 0;
  double runtime_s = 0.0;  // quantities and prices
  RuleOutcome outcome;
  std::vector<ParticipantSettlement> settlements;
};

struct ClearingReport {
  std::string instance;
  bool swp_ok = false;
  std::string swp_error;
  double swp_welfare = 0.0;
  double swp_runtime_s = 0.0;
  std::vector<RuleReport> rules;
};

/// Runs each rule; a failing rule is recorded and the others still run.
ClearingReport compare(const Instance& instance, const std::vector<Rule>& rules,
                       const ClearingOptions& options = {}, const std::string& name = "instance");

}  // namespace pxclear

#endif  // PXCLEAR_SETTLEMENT_HPP_
