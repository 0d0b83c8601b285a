// LP and MILP solving behind a small backend interface. The reference
// backend is a bounded-variable primal simplex with dual extraction and a
// best-bound branch-and-bound on top of it.

#ifndef PXCLEAR_SOLVER_HPP_
#define PXCLEAR_SOLVER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pxclear/formulation.hpp"
#include "pxclear/model.hpp"

namespace pxclear {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(SolveStatus status);

enum class BasisStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kZero };

/// Basis statuses in terms of the original problem: one entry per column and
/// one per row (the row's logical variable). Rows appended after the basis
/// was taken are treated as basic.
struct Basis {
  std::vector<BasisStatus> columns;
  std::vector<BasisStatus> rows;
  bool empty() const { return columns.empty() && rows.empty(); }
};

struct SolverOptions {
  double tol_feas = 1e-7;   // absolute row violation accepted in results
  double tol_comp = 1e-6;   // complementary slackness residual
  double tol_gap = 1e-9;    // relative MILP gap
  double tol_int = 1e-6;    // integrality
  long iteration_limit = 2'000'000;
  long node_limit = 200'000;
  int stall_threshold = 50;       // degenerate pivots before Bland's rule
  int refactor_interval = 100;    // pivots between basis reinversions
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> primal;         // per column
  double objective = 0.0;
  std::vector<double> duals;          // per row, LP only
  std::vector<double> reduced_costs;  // per column, LP only
  long node_count = 0;
  long iteration_count = 0;
  double wall_time = 0.0;  // seconds
  Basis basis;             // final basis, LP only

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

/// Solves a continuous maximization problem. Duals follow the maximization
/// convention: >= 0 on <= rows, <= 0 on >= rows, free on equalities, and
/// c_j - sum_i a_ij y_i - reduced_cost_j = 0 for every column.
/// Throws std::invalid_argument if the problem has integer columns.
SolveResult solve_lp(const LinearProblem& problem, const SolverOptions& options = {},
                     const Basis* warm_start = nullptr);

/// Best-bound branch-and-bound on the most fractional integer column; ties
/// go to the lowest column index. No duals are reported.
SolveResult solve_milp(const LinearProblem& problem, const SolverOptions& options = {});

/// Dual objective b'y + sum of active bound terms, from a solve result.
double dual_objective(const LinearProblem& problem, const SolveResult& result);

/// Backend contract: adapters receive a LinearProblem and must return row
/// duals and reduced costs indexed like the problem they were given.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve_lp(const LinearProblem& problem, const SolverOptions& options,
                               const Basis* warm_start) const = 0;
  virtual SolveResult solve_milp(const LinearProblem& problem,
                                 const SolverOptions& options) const = 0;
};

/// The built-in simplex / branch-and-bound backend.
const SolverBackend& reference_backend();

/// Looks up a backend by name ("simplex" is built in). Throws
/// std::invalid_argument for unknown names.
const SolverBackend& backend_by_name(std::string_view name);

/// Backend named by the PXCLEAR_SOLVER environment variable, or the
/// reference backend when unset.
const SolverBackend& backend_from_env();

inline constexpr int kMaxEnumeratedCommitments = 20;

struct OracleResult {
  DispatchSolution dispatch;
  std::map<int, int> commitments;
  double welfare = 0.0;
  long lp_solves = 0;
  bool feasible = false;
};

/// Calls `visit` for every commitment vector over the non-convex
/// participants with the solved restriction (u fixed). Throws
/// std::length_error above kMaxEnumeratedCommitments non-convex groups.
void for_each_commitment(
    const Instance& instance, const SolverOptions& options,
    const std::function<void(const std::map<int, int>& u, const LinearProblem& fixed,
                             const SolveResult& result)>& visit);

/// Brute-force welfare maximization over all commitment vectors.
OracleResult enumerate_oracle(const Instance& instance, const SolverOptions& options = {});

}  // namespace pxclear

#endif  // PXCLEAR_SOLVER_HPP_
