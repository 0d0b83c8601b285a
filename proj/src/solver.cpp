#include "pxclear/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>

#include "simplex.hpp"

namespace pxclear {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kIterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SolveResult solve_lp(const LinearProblem& problem, const SolverOptions& options,
                     const Basis* warm_start) {
  if (problem.has_integers()) {
    throw std::invalid_argument("solve_lp: problem has integer columns; relax it first");
  }
  auto start = Clock::now();
  internal::BoundedSimplex simplex(problem, options);
  SolveResult result = simplex.solve(warm_start);
  result.wall_time = seconds_since(start);
  return result;
}

namespace {

struct Node {
  double bound = 0.0;
  long id = 0;
  std::vector<double> lower;  // per integer column
  std::vector<double> upper;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // larger bound first
    return a.id > b.id;                                // then lower id
  }
};

}  // namespace

SolveResult solve_milp(const LinearProblem& problem, const SolverOptions& options) {
  if (!problem.has_integers()) {
    SolveResult r = solve_lp(problem, options);
    r.node_count = 1;
    return r;
  }
  auto start = Clock::now();
  LinearProblem relaxed = relax(problem);
  internal::BoundedSimplex simplex(relaxed, options);

  std::vector<int> int_cols;
  for (int j = 0; j < problem.num_columns(); ++j) {
    if (problem.column(j).integer) int_cols.push_back(j);
  }
  const int k = static_cast<int>(int_cols.size());

  SolveResult best;
  best.status = SolveStatus::kInfeasible;
  double incumbent = -std::numeric_limits<double>::infinity();
  std::vector<double> incumbent_lower, incumbent_upper;
  std::shared_ptr<const Basis> incumbent_basis;
  long iterations = 0;
  long nodes = 0;
  long next_id = 0;
  bool limit_hit = false;

  auto gap_abs = [&]() { return options.tol_gap * std::max(1.0, std::abs(incumbent)); };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  {
    Node root;
    root.bound = std::numeric_limits<double>::infinity();
    root.id = next_id++;
    for (int j : int_cols) {
      root.lower.push_back(std::ceil(problem.column(j).lower - options.tol_int));
      root.upper.push_back(std::floor(problem.column(j).upper + options.tol_int));
    }
    open.push(std::move(root));
  }

  bool root_unbounded = false;
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound <= incumbent + gap_abs()) break;  // best-bound: nothing better remains
    if (nodes >= options.node_limit || iterations >= options.iteration_limit) {
      limit_hit = true;
      break;
    }
    ++nodes;
    for (int t = 0; t < k; ++t) simplex.set_column_bounds(int_cols[t], node.lower[t], node.upper[t]);
    SolveResult lp = simplex.solve(node.basis.get());
    iterations += lp.iteration_count;
    if (lp.status == SolveStatus::kUnbounded) {
      if (nodes == 1) root_unbounded = true;
      break;
    }
    if (lp.status == SolveStatus::kIterationLimit) {
      limit_hit = true;
      break;
    }
    if (lp.status != SolveStatus::kOptimal) continue;
    if (lp.objective <= incumbent + gap_abs()) continue;

    int branch = -1;
    double best_frac = 1.0;
    for (int t = 0; t < k; ++t) {
      double v = lp.primal[int_cols[t]];
      double frac = v - std::floor(v);
      if (frac < options.tol_int || frac > 1.0 - options.tol_int) continue;
      double dist = std::abs(frac - 0.5);
      if (dist < best_frac) {
        best_frac = dist;
        branch = t;
      }
    }
    auto basis = std::make_shared<const Basis>(std::move(lp.basis));
    if (branch < 0) {
      incumbent = lp.objective;
      incumbent_lower = node.lower;
      incumbent_upper = node.upper;
      for (int t = 0; t < k; ++t) {
        double v = std::round(lp.primal[int_cols[t]]);
        incumbent_lower[t] = incumbent_upper[t] = v;
      }
      incumbent_basis = basis;
      best = std::move(lp);
      continue;
    }
    double v = lp.primal[int_cols[branch]];
    Node down{lp.objective, next_id++, node.lower, node.upper, basis};
    down.upper[branch] = std::floor(v);
    Node up{lp.objective, next_id++, node.lower, node.upper, basis};
    up.lower[branch] = std::ceil(v);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  SolveResult result;
  if (root_unbounded) {
    result.status = SolveStatus::kUnbounded;
  } else if (std::isfinite(incumbent)) {
    // Polish: re-solve with the integer columns fixed at their rounded values
    // so that continuous values are consistent with exact integers.
    for (int t = 0; t < k; ++t) {
      simplex.set_column_bounds(int_cols[t], incumbent_lower[t], incumbent_upper[t]);
    }
    SolveResult polished = simplex.solve(incumbent_basis.get());
    iterations += polished.iteration_count;
    result.status = limit_hit ? SolveStatus::kIterationLimit : SolveStatus::kOptimal;
    if (polished.status == SolveStatus::kOptimal) {
      result.primal = std::move(polished.primal);
    } else {
      result.primal = std::move(best.primal);
    }
    for (int t = 0; t < k; ++t) result.primal[int_cols[t]] = incumbent_lower[t];
    result.objective = problem.evaluate(result.primal);
  } else {
    result.status = limit_hit ? SolveStatus::kIterationLimit : SolveStatus::kInfeasible;
  }
  result.node_count = nodes;
  result.iteration_count = iterations;
  result.wall_time = seconds_since(start);
  return result;
}

double dual_objective(const LinearProblem& problem, const SolveResult& result) {
  double v = problem.objective_constant();
  for (int i = 0; i < problem.num_rows(); ++i) v += problem.row(i).rhs * result.duals.at(i);
  for (int j = 0; j < problem.num_columns(); ++j) {
    double rc = result.reduced_costs.at(j);
    if (rc == 0.0) continue;
    const auto& col = problem.column(j);
    v += rc * (rc > 0 ? col.upper : col.lower);
  }
  return v;
}

namespace {

class ReferenceBackend final : public SolverBackend {
 public:
  std::string name() const override { return "simplex"; }
  SolveResult solve_lp(const LinearProblem& problem, const SolverOptions& options,
                       const Basis* warm_start) const override {
    return pxclear::solve_lp(problem, options, warm_start);
  }
  SolveResult solve_milp(const LinearProblem& problem,
                         const SolverOptions& options) const override {
    return pxclear::solve_milp(problem, options);
  }
};

}  // namespace

const SolverBackend& reference_backend() {
  static const ReferenceBackend backend;
  return backend;
}

const SolverBackend& backend_by_name(std::string_view name) {
  if (name.empty() || name == "simplex" || name == "reference") return reference_backend();
  throw std::invalid_argument("unknown solver backend '" + std::string(name) +
                              "' (available: simplex)");
}

const SolverBackend& backend_from_env() {
  const char* env = std::getenv("PXCLEAR_SOLVER");
  return backend_by_name(env == nullptr ? std::string_view{} : std::string_view{env});
}

void for_each_commitment(
    const Instance& instance, const SolverOptions& options,
    const std::function<void(const std::map<int, int>& u, const LinearProblem& fixed,
                             const SolveResult& result)>& visit) {
  std::vector<int> groups;
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    if (!instance.participants[c].convex) groups.push_back(static_cast<int>(c));
  }
  if (groups.size() > static_cast<size_t>(kMaxEnumeratedCommitments)) {
    throw std::length_error("enumeration supports at most " +
                            std::to_string(kMaxEnumeratedCommitments) +
                            " non-convex participants, instance has " +
                            std::to_string(groups.size()));
  }
  const LinearProblem swp = build_swp(instance);
  Basis warm;
  const unsigned long count = 1ul << groups.size();
  for (unsigned long mask = 0; mask < count; ++mask) {
    std::map<int, int> u;
    for (size_t g = 0; g < groups.size(); ++g) u[groups[g]] = (mask >> g) & 1ul;
    LinearProblem fixed = fix_commitments(swp, u);
    SolveResult r = solve_lp(fixed, options, warm.empty() ? nullptr : &warm);
    if (r.optimal()) warm = r.basis;
    visit(u, fixed, r);
  }
}

OracleResult enumerate_oracle(const Instance& instance, const SolverOptions& options) {
  OracleResult best;
  const LinearProblem swp = build_swp(instance);
  for_each_commitment(instance, options,
                      [&](const std::map<int, int>& u, const LinearProblem& fixed,
                          const SolveResult& r) {
                        ++best.lp_solves;
                        if (!r.optimal()) return;
                        double tie = 1e-9 * std::max(1.0, std::abs(best.welfare));
                        if (best.feasible && r.objective <= best.welfare + tie) return;
                        best.feasible = true;
                        best.welfare = r.objective;
                        best.commitments = u;
                        best.dispatch = dispatch_from(instance, fixed, r.primal);
                      });
  return best;
}

}  // namespace pxclear
