// Internal bounded-variable revised primal simplex.

#ifndef PXCLEAR_SRC_SIMPLEX_HPP_
#define PXCLEAR_SRC_SIMPLEX_HPP_

#include <vector>

#include "pxclear/formulation.hpp"
#include "pxclear/solver.hpp"

namespace pxclear::internal {

/// Works on  min c'z  s.t. [A -I] z = 0,  lo <= z <= hi,  where the last m
/// variables are the row activities (logicals). Rows with a single nonzero
/// are folded into column bounds; their duals are recovered from reduced
/// costs. The basis inverse is kept dense and updated in product form.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProblem& problem, const SolverOptions& options);

  /// Overrides the problem bounds of a structural column.
  void set_column_bounds(int column, double lower, double upper);

  SolveResult solve(const Basis* warm_start);

 private:
  enum class Phase { kOne, kTwo };

  void apply_bounds();
  void slack_basis();
  bool load_basis(const Basis& basis);
  bool reinvert();
  void compute_basic_values();
  double infeasibility_direction(int var) const;  // -1 below, +1 above, 0
  bool any_infeasible() const;
  void compute_duals(Phase phase);
  double reduced_cost(int var, Phase phase) const;
  void ftran(int var, std::vector<double>& out) const;
  void pivot(int position, int entering, const std::vector<double>& alpha);
  SolveStatus iterate();
  void fill_result(SolveResult& result) const;
  Basis export_basis() const;

  const LinearProblem& problem_;
  SolverOptions options_;

  int n_ = 0;  // structural columns
  int m_ = 0;  // rows kept after folding singleton rows
  std::vector<int> kept_rows_;  // internal row -> original row
  std::vector<int> row_map_;    // original row -> internal row or -1

  // CSC for structural columns over internal rows.
  std::vector<int> col_start_;
  std::vector<int> row_index_;
  std::vector<double> values_;

  std::vector<double> native_lower_, native_upper_;  // structural, as given
  struct FoldedBound {
    double value;
    int row;  // original row index
    double coef;
  };
  std::vector<std::vector<FoldedBound>> folded_lower_, folded_upper_;
  std::vector<int> lower_source_, upper_source_;  // original row or -1
  std::vector<double> lower_coef_, upper_coef_;
  std::vector<int> empty_rows_;
  bool bound_conflict_ = false;

  std::vector<double> lower_, upper_, cost_;  // all n_ + m_ variables
  double cost_scale_ = 1.0;

  std::vector<int> head_;  // position -> variable
  std::vector<int> position_;  // variable -> position or -1
  std::vector<BasisStatus> status_;
  std::vector<double> x_;
  std::vector<double> binv_;  // column-major m x m, (position, row)
  std::vector<double> y_;     // duals of internal rows
  std::vector<double> phase_cost_;

  long iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace pxclear::internal

#endif  // PXCLEAR_SRC_SIMPLEX_HPP_
