#include "pxclear/pricing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace pxclear {

const char* to_string(Rule rule) {
  switch (rule) {
    case Rule::kChp:
      return "chp";
    case Rule::kIp:
      return "ip";
    case Rule::kEu:
      return "eu";
  }
  return "unknown";
}

Rule rule_from_string(const std::string& name) {
  if (name == "chp") return Rule::kChp;
  if (name == "ip") return Rule::kIp;
  if (name == "eu") return Rule::kEu;
  throw std::invalid_argument("unknown pricing rule '" + name + "' (expected chp, ip or eu)");
}

const SolverBackend& ClearingOptions::solver_backend() const {
  return backend != nullptr ? *backend : backend_from_env();
}

namespace {

void require_optimal(const SolveResult& r, const std::string& what) {
  if (!r.optimal()) {
    throw ClearingError(what + " is " + to_string(r.status), r.status);
  }
}

std::vector<int> non_convex_groups(const Instance& instance) {
  std::vector<int> out;
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    if (!instance.participants[c].convex) out.push_back(static_cast<int>(c));
  }
  return out;
}

// Best self-dispatch profit of a non-convex participant when forced on.
double committed_self_dispatch(const Instance& instance, int c, const PriceSystem& prices,
                               const ClearingOptions& options) {
  LinearProblem lp =
      relax(build_participant_problem(instance, c, prices, SettlementRule::kCommodityOnly));
  int u = lp.find_column({ColumnKind::kCommitment, c, -1});
  if (u >= 0) {
    lp.column(u).lower = 1.0;
    lp.column(u).upper = 1.0;
  }
  SolveResult r = options.solver_backend().solve_lp(lp, options.solver, nullptr);
  require_optimal(r, "committed self-dispatch problem of " + instance.participants[c].id);
  return r.objective;
}

}  // namespace

WelfareOptimum solve_welfare(const Instance& instance, const ClearingOptions& options) {
  WelfareOptimum w;
  w.swp = build_swp(instance);
  w.result = options.solver_backend().solve_milp(w.swp, options.solver);
  require_optimal(w.result, "welfare program");
  w.dispatch = dispatch_from(instance, w.swp, w.result.primal);
  w.commitments = commitments_from(w.swp, w.result.primal);
  return w;
}

RuleOutcome chp_clear(const Instance& instance, const ClearingOptions& options) {
  RuleOutcome out;
  out.rule = Rule::kChp;
  WelfareOptimum w = solve_welfare(instance, options);
  SolveResult lp = options.solver_backend().solve_lp(relax(w.swp), options.solver, nullptr);
  require_optimal(lp, "continuous relaxation");
  out.dispatch = std::move(w.dispatch);
  out.commitments = std::move(w.commitments);
  out.prices = prices_from(instance, w.swp, lp.duals);
  out.diagnostics.relaxation_objective = lp.objective;
  out.diagnostics.duality_gap = lp.objective - w.result.objective;
  out.diagnostics.milp_nodes = w.result.node_count;
  out.diagnostics.lp_iterations = w.result.iteration_count + lp.iteration_count;
  return out;
}

CommitmentDuals commitment_duals(const Instance& instance, const LinearProblem& fixed,
                                 const SolveResult& result, int participant) {
  const auto& g = instance.participants.at(participant);
  const int loc = instance.location_index(g.location);
  CommitmentDuals d;
  auto dual = [&](const RowKey& key) {
    int i = fixed.find_row(key);
    return i < 0 ? 0.0 : result.duals.at(i);
  };
  d.delta = dual({RowKind::kFix, participant, -1});
  for (size_t i = 0; i < g.steps.size(); ++i) {
    const auto& s = g.steps[i];
    const int step = static_cast<int>(i);
    double s_max = dual({RowKind::kCap, participant, step});
    double s_min = -dual({RowKind::kMinCap, participant, step});
    d.step_terms += s_max - s.min_ratio * s_min;
    double pi = dual({RowKind::kBalance, s.period, loc});
    int col = fixed.find_column({ColumnKind::kAcceptance, participant, step});
    d.trade_profit += (pi - s.price) * -signed_quantity(s, g.side) * result.primal.at(col);
  }
  for (int t = 1; t < instance.periods; ++t) {
    if (g.ramp_up_mw) d.ramp_terms += *g.ramp_up_mw * dual({RowKind::kRampUp, participant, t});
    if (g.ramp_down_mw) {
      d.ramp_terms += *g.ramp_down_mw * dual({RowKind::kRampDown, participant, t});
    }
  }
  return d;
}

RuleOutcome ip_clear(const Instance& instance, const ClearingOptions& options) {
  RuleOutcome out;
  out.rule = Rule::kIp;
  WelfareOptimum w = solve_welfare(instance, options);
  LinearProblem fixed = fix_commitments(w.swp, w.commitments);
  SolveResult lp = options.solver_backend().solve_lp(fixed, options.solver, nullptr);
  require_optimal(lp, "fixed-commitment restriction");

  out.dispatch = dispatch_from(instance, fixed, lp.primal);
  out.commitments = w.commitments;
  out.prices = prices_from(instance, fixed, lp.duals);
  auto& diag = out.diagnostics;
  diag.missed_profit_slack = std::numeric_limits<double>::infinity();
  for (int c : non_convex_groups(instance)) {
    CommitmentDuals d = commitment_duals(instance, fixed, lp, c);
    out.prices.delta[c] = d.delta;
    if (w.commitments.at(c) == 1) {
      double fixed_cost = instance.participants[c].fixed_cost;
      diag.profit_residual =
          std::max(diag.profit_residual, std::abs(d.delta - (d.trade_profit - fixed_cost)));
      diag.decomposition_residual = std::max(
          diag.decomposition_residual, std::abs(d.trade_profit - (d.step_terms + d.ramp_terms)));
    } else {
      double missed = committed_self_dispatch(instance, c, out.prices, options);
      diag.missed_profit_slack = std::min(diag.missed_profit_slack, d.delta - missed);
    }
  }
  if (!std::isfinite(diag.missed_profit_slack)) diag.missed_profit_slack = 0.0;
  diag.milp_nodes = w.result.node_count;
  diag.lp_iterations = w.result.iteration_count + lp.iteration_count;
  return out;
}

namespace {

PriceFeasibility price_feasibility(const Instance& instance, const LinearProblem& fixed,
                                   const SolveResult& solved, const std::map<int, int>& u_star,
                                   const ClearingOptions& options) {
  const DualProblem base = build_dual(fixed);
  const std::vector<double>& x = solved.primal;

  // Loss variables z_c >= -delta_c for the accepted groups; the objective
  // maximizes -sum z_c over the optimal dual face.
  auto add_losses = [&](DualProblem& d) {
    LinearProblem& lp = d.problem;
    for (int j = 0; j < lp.num_columns(); ++j) lp.column(j).objective = 0.0;
    lp.set_objective_constant(0.0);
    int k = 0;
    for (const auto& [c, u] : u_star) {
      if (u != 1) continue;
      int fix_row = fixed.find_row({RowKind::kFix, c, -1});
      if (fix_row < 0) continue;
      int z = lp.add_column({{ColumnKind::kAuxiliary, c, -1},
                             "loss_" + std::to_string(c), 0.0, kInfinity, -1.0, false});
      lp.add_row({{RowKind::kAuxiliary, 1, k++},
                  "no_loss_" + std::to_string(c),
                  {{z, 1.0}, {d.row_dual[fix_row], 1.0}},
                  RowSense::kGreaterEqual,
                  0.0});
    }
  };

  // Optimal duals are exactly the feasible duals complementary to x: rows
  // and bounds that are slack at x get a zero multiplier.
  auto complementary = [&]() {
    DualProblem d = base;
    constexpr double kSlack = 1e-6;
    for (int i = 0; i < fixed.num_rows(); ++i) {
      const Row& row = fixed.row(i);
      if (row.sense == RowSense::kEqual) continue;
      double activity = 0.0;
      for (const Entry& e : row.entries) activity += e.value * x[e.column];
      if (std::abs(activity - row.rhs) > kSlack * std::max(1.0, std::abs(row.rhs))) {
        Column& y = d.problem.column(d.row_dual[i]);
        y.lower = y.upper = 0.0;
      }
    }
    for (int j = 0; j < fixed.num_columns(); ++j) {
      const Column& col = fixed.column(j);
      if (base.lower_dual[j] >= 0 && x[j] > col.lower + kSlack) {
        Column& y = d.problem.column(base.lower_dual[j]);
        y.lower = y.upper = 0.0;
      }
      if (base.upper_dual[j] >= 0 && x[j] < col.upper - kSlack) {
        Column& y = d.problem.column(base.upper_dual[j]);
        y.lower = y.upper = 0.0;
      }
    }
    add_losses(d);
    SolveResult r = options.solver_backend().solve_lp(d.problem, options.solver, nullptr);
    return std::make_pair(std::move(d), std::move(r));
  };

  // Fallback when rounding makes the complementary face empty: bound the
  // dual objective by the primal optimum instead.
  std::vector<Entry> objective_row;
  for (int j = 0; j < base.problem.num_columns(); ++j) {
    double c = base.problem.column(j).objective;
    if (c != 0.0) objective_row.push_back({j, c});
  }
  auto near_optimal = [&](double slack) {
    DualProblem d = base;
    d.problem.add_row({{RowKind::kAuxiliary, 0, -1}, "dual_value", objective_row,
                       RowSense::kGreaterEqual,
                       -solved.objective - slack - base.problem.objective_constant()});
    add_losses(d);
    SolveResult r = options.solver_backend().solve_lp(d.problem, options.solver, nullptr);
    return std::make_pair(std::move(d), std::move(r));
  };

  const double scale = std::max(1.0, std::abs(solved.objective));
  auto [d, r] = complementary();
  if (r.status == SolveStatus::kInfeasible) std::tie(d, r) = near_optimal(1e-9 * scale);
  if (r.status == SolveStatus::kInfeasible) std::tie(d, r) = near_optimal(1e-6 * scale);
  require_optimal(r, "price feasibility problem");

  PriceFeasibility out;
  out.shortfall = std::max(0.0, -r.objective);
  out.feasible = out.shortfall <= options.eu_tolerance;
  out.prices.pi.assign(instance.periods, std::vector<double>(instance.locations.size(), 0.0));
  for (int t = 1; t <= instance.periods; ++t) {
    for (size_t k = 0; k < instance.locations.size(); ++k) {
      int row = fixed.find_row({RowKind::kBalance, t, static_cast<int>(k)});
      out.prices.pi[t - 1][k] = r.primal.at(d.row_dual.at(row));
    }
  }
  for (const auto& [c, u] : u_star) {
    int row = fixed.find_row({RowKind::kFix, c, -1});
    if (row >= 0) out.prices.delta[c] = r.primal.at(d.row_dual.at(row));
  }
  return out;
}

}  // namespace

PriceFeasibility eu_price_feasibility(const Instance& instance, const std::map<int, int>& u_star,
                                      double welfare_fixed, const ClearingOptions& options) {
  LinearProblem fixed = fix_commitments(build_swp(instance), u_star);
  SolveResult solved = options.solver_backend().solve_lp(fixed, options.solver, nullptr);
  require_optimal(solved, "fixed-commitment restriction");
  if (std::abs(solved.objective - welfare_fixed) >
      1e-6 * std::max(1.0, std::abs(welfare_fixed))) {
    throw std::invalid_argument("eu_price_feasibility: welfare_fixed is not the optimum of the "
                                "restriction");
  }
  return price_feasibility(instance, fixed, solved, u_star, options);
}

RuleOutcome eu_clear(const Instance& instance, const ClearingOptions& options) {
  RuleOutcome out;
  out.rule = Rule::kEu;
  const LinearProblem swp = build_swp(instance);
  LinearProblem master = swp;
  const SolverBackend& backend = options.solver_backend();
  auto& diag = out.diagnostics;

  bool exhausted = true;
  while (diag.iterations < options.eu_cut_budget) {
    ++diag.iterations;
    SolveResult r = backend.solve_milp(master, options.solver);
    diag.milp_nodes += r.node_count;
    diag.lp_iterations += r.iteration_count;
    if (r.status == SolveStatus::kInfeasible) {  // every commitment vector cut off
      exhausted = false;
      break;
    }
    require_optimal(r, "eu master problem");
    std::map<int, int> u_star = commitments_from(master, r.primal);

    LinearProblem fixed = fix_commitments(swp, u_star);
    SolveResult lp = backend.solve_lp(fixed, options.solver, nullptr);
    require_optimal(lp, "fixed-commitment restriction");
    diag.lp_iterations += lp.iteration_count;

    PriceFeasibility pf = price_feasibility(instance, fixed, lp, u_star, options);
    if (pf.feasible) {
      out.dispatch = dispatch_from(instance, fixed, lp.primal);
      out.commitments = std::move(u_star);
      out.prices = std::move(pf.prices);
      out.feasible = true;
      return out;
    }

    // No-good cut: at least one commitment must differ from u_star.
    Row cut{{RowKind::kCut, diag.cut_count, -1},
            "nogood_" + std::to_string(diag.cut_count),
            {},
            RowSense::kGreaterEqual,
            1.0};
    for (const auto& [c, u] : u_star) {
      int col = master.find_column({ColumnKind::kCommitment, c, -1});
      cut.entries.push_back({col, u == 1 ? -1.0 : 1.0});
      if (u == 1) cut.rhs -= 1.0;
    }
    if (cut.entries.empty()) {  // nothing left to enumerate
      exhausted = false;
      break;
    }
    master.add_row(std::move(cut));
    ++diag.cut_count;
  }
  diag.budget_exhausted = exhausted;
  out.feasible = false;
  out.dispatch = DispatchSolution::zero(instance);
  return out;
}

RuleOutcome clear(const Instance& instance, Rule rule, const ClearingOptions& options) {
  switch (rule) {
    case Rule::kChp:
      return chp_clear(instance, options);
    case Rule::kIp:
      return ip_clear(instance, options);
    case Rule::kEu:
      return eu_clear(instance, options);
  }
  throw std::invalid_argument("unknown rule");
}

}  // namespace pxclear
