#include "pxclear/settlement.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pxclear {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kNormal:
      return "normal";
    case Classification::kPab:
      return "PAB";
    case Classification::kPrb:
      return "PRB";
  }
  return "unknown";
}

double self_dispatch_surplus(const Instance& instance, int participant, const PriceSystem& prices,
                             SettlementRule rule, const ClearingOptions& options) {
  LinearProblem lp = build_participant_problem(instance, participant, prices, rule);
  SolveResult r = options.solver_backend().solve_milp(lp, options.solver);
  if (!r.optimal()) {
    throw ClearingError("self-dispatch problem of " + instance.participants.at(participant).id +
                            " is " + to_string(r.status),
                        r.status);
  }
  return r.objective;
}

double uplift(const Instance& instance, int participant, const DispatchSolution& dispatch,
              const PriceSystem& prices, const ClearingOptions& options) {
  return self_dispatch_surplus(instance, participant, prices, SettlementRule::kCommodityOnly,
                               options) -
         participant_surplus(instance, participant, dispatch, prices);
}

double transmission_uplift(const Instance& instance, const DispatchSolution& dispatch,
                           const PriceSystem& prices) {
  double best = 0.0;
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    const auto& line = instance.lines[l];
    int from = instance.location_index(line.from);
    int to = instance.location_index(line.to);
    for (int t = 1; t <= instance.periods; ++t) {
      best += std::abs(prices.price(t, to) - prices.price(t, from)) * line.capacity_mw;
    }
  }
  return best - congestion_rent(instance, dispatch, prices);
}

namespace {

double commitment_of(const Instance& instance, const DispatchSolution& dispatch, int c) {
  if (instance.participants[c].convex) return 1.0;
  return dispatch.u.at(c) > 0.5 ? 1.0 : 0.0;
}

ParticipantSettlement base_settlement(const Instance& instance, int c,
                                      const DispatchSolution& dispatch, const PriceSystem& prices,
                                      const ClearingOptions& options) {
  const auto& g = instance.participants[c];
  ParticipantSettlement s;
  s.participant = c;
  s.id = g.id;
  s.non_convex = !g.convex;
  s.committed = static_cast<int>(commitment_of(instance, dispatch, c));
  s.realized_surplus = participant_surplus(instance, c, dispatch, prices);
  s.self_dispatch_surplus =
      self_dispatch_surplus(instance, c, prices, SettlementRule::kCommodityOnly, options);
  s.uplift = s.self_dispatch_surplus - s.realized_surplus;
  if (s.non_convex && s.committed == 1) s.make_whole = std::max(0.0, -s.realized_surplus);
  return s;
}

double ip_payment(const Instance& instance, int c, const DispatchSolution& dispatch,
                  const PriceSystem& prices) {
  const auto& g = instance.participants[c];
  const int loc = instance.location_index(g.location);
  double pay = 0.0;
  for (size_t i = 0; i < g.steps.size(); ++i) {
    const auto& step = g.steps[i];
    pay += prices.price(step.period, loc) * -signed_quantity(step, g.side) * dispatch.x[c][i];
  }
  if (!g.convex) pay -= prices.delta.at(c) * commitment_of(instance, dispatch, c);
  return pay;
}

void classify(ParticipantSettlement& s, double rejected_surplus) {
  if (!s.non_convex) return;
  if (s.committed == 1 && s.realized_surplus < -kClassificationTolerance) {
    s.classification = Classification::kPab;
  } else if (s.committed == 0 && rejected_surplus > kClassificationTolerance) {
    s.classification = Classification::kPrb;
  }
}

}  // namespace

std::vector<ParticipantSettlement> settle_ip(const Instance& instance,
                                             const DispatchSolution& dispatch,
                                             const PriceSystem& prices,
                                             const ClearingOptions& options) {
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    if (!instance.participants[c].convex && !prices.delta.count(static_cast<int>(c))) {
      throw std::invalid_argument("settle_ip: no commitment price for participant " +
                                  instance.participants[c].id);
    }
  }
  std::vector<ParticipantSettlement> out;
  for (size_t i = 0; i < instance.participants.size(); ++i) {
    const int c = static_cast<int>(i);
    ParticipantSettlement s = base_settlement(instance, c, dispatch, prices, options);
    s.payment = ip_payment(instance, c, dispatch, prices);
    double rejected = 0.0;
    if (s.non_convex && s.committed == 0) {
      rejected = self_dispatch_surplus(instance, c, prices, SettlementRule::kIpRule, options);
    }
    classify(s, rejected);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ParticipantSettlement> settle(const Instance& instance, const RuleOutcome& outcome,
                                          const ClearingOptions& options) {
  if (outcome.rule == Rule::kIp) {
    return settle_ip(instance, outcome.dispatch, outcome.prices, options);
  }
  std::vector<ParticipantSettlement> out;
  for (size_t i = 0; i < instance.participants.size(); ++i) {
    ParticipantSettlement s =
        base_settlement(instance, static_cast<int>(i), outcome.dispatch, outcome.prices, options);
    classify(s, s.self_dispatch_surplus);
    out.push_back(std::move(s));
  }
  return out;
}

PabPrbCounts classify_pab_prb(const std::vector<ParticipantSettlement>& settlements) {
  PabPrbCounts n;
  for (const auto& s : settlements) {
    if (s.classification == Classification::kPab) ++n.pab;
    if (s.classification == Classification::kPrb) ++n.prb;
  }
  return n;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

ClearingReport compare(const Instance& instance, const std::vector<Rule>& rules,
                       const ClearingOptions& options, const std::string& name) {
  ClearingReport report;
  report.instance = name;
  try {
    auto start = Clock::now();
    WelfareOptimum w = solve_welfare(instance, options);
    report.swp_runtime_s = seconds_since(start);
    report.swp_welfare = evaluate_welfare(instance, w.dispatch);
    report.swp_ok = true;
  } catch (const std::exception& e) {
    report.swp_error = e.what();
  }

  for (Rule rule : rules) {
    RuleReport rr;
    rr.rule = rule;
    try {
      auto start = Clock::now();
      rr.outcome = clear(instance, rule, options);
      rr.runtime_s = seconds_since(start);
      if (!rr.outcome.feasible) {
        throw ClearingError("no admissible commitment vector within the cut budget",
                            SolveStatus::kIterationLimit);
      }
      rr.settlements = settle(instance, rr.outcome, options);
      rr.welfare = evaluate_welfare(instance, rr.outcome.dispatch);
      rr.welfare_loss = report.swp_ok ? report.swp_welfare - rr.welfare : 0.0;
      auto counts = classify_pab_prb(rr.settlements);
      rr.pab = counts.pab;
      rr.prb = counts.prb;
      for (const auto& s : rr.settlements) {
        rr.total_uplift += rule == Rule::kChp ? s.uplift : s.make_whole;
      }
      if (rule == Rule::kChp) {
        rr.transmission_uplift =
            transmission_uplift(instance, rr.outcome.dispatch, rr.outcome.prices);
        rr.total_uplift += rr.transmission_uplift;
      }
      rr.ok = true;
    } catch (const std::exception& e) {
      rr.ok = false;
      rr.error = e.what();
    }
    report.rules.push_back(std::move(rr));
  }
  return report;
}

}  // namespace pxclear
