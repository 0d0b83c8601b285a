#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pxclear::internal {

namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kSingularTolerance = 1e-11;
constexpr double kPrimalTolerance = 1e-9;
constexpr double kPhaseOneDualTolerance = 1e-9;
constexpr double kDualTolerance = 1e-9;  // relative to the cost scale
constexpr double kNullColumn = 1e-7;     // largest |alpha| of a numerically empty column
constexpr double kDegenerateStep = 1e-12;

double primal_tol(double bound) { return kPrimalTolerance * std::max(1.0, std::abs(bound)); }

void row_bounds(const Row& row, double& lo, double& hi) {
  lo = row.sense == RowSense::kLessEqual ? -kInfinity : row.rhs;
  hi = row.sense == RowSense::kGreaterEqual ? kInfinity : row.rhs;
}

}  // namespace

BoundedSimplex::BoundedSimplex(const LinearProblem& problem, const SolverOptions& options)
    : problem_(problem), options_(options) {
  n_ = problem.num_columns();
  native_lower_.resize(n_);
  native_upper_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    native_lower_[j] = problem.column(j).lower;
    native_upper_[j] = problem.column(j).upper;
  }
  folded_lower_.resize(n_);
  folded_upper_.resize(n_);
  row_map_.assign(problem.num_rows(), -1);

  std::vector<std::vector<std::pair<int, double>>> col_entries(n_);
  for (int i = 0; i < problem.num_rows(); ++i) {
    const Row& row = problem.row(i);
    std::map<int, double> merged;
    for (const auto& e : row.entries) merged[e.column] += e.value;
    std::erase_if(merged, [](const auto& kv) { return kv.second == 0.0; });
    double lo, hi;
    row_bounds(row, lo, hi);
    if (merged.empty()) {
      empty_rows_.push_back(i);
      continue;
    }
    if (merged.size() == 1) {
      auto [j, a] = *merged.begin();
      double blo = a > 0 ? lo / a : hi / a;
      double bhi = a > 0 ? hi / a : lo / a;
      if (std::isfinite(blo)) folded_lower_[j].push_back({blo, i, a});
      if (std::isfinite(bhi)) folded_upper_[j].push_back({bhi, i, a});
      continue;
    }
    int r = static_cast<int>(kept_rows_.size());
    kept_rows_.push_back(i);
    row_map_[i] = r;
    for (auto [j, a] : merged) col_entries[j].push_back({r, a});
  }
  m_ = static_cast<int>(kept_rows_.size());
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) {
    col_start_[j + 1] = col_start_[j] + static_cast<int>(col_entries[j].size());
    for (auto [r, a] : col_entries[j]) {
      row_index_.push_back(r);
      values_.push_back(a);
    }
  }

  const int total = n_ + m_;
  lower_.resize(total);
  upper_.resize(total);
  cost_.assign(total, 0.0);
  lower_source_.assign(n_, -1);
  upper_source_.assign(n_, -1);
  lower_coef_.assign(n_, 0.0);
  upper_coef_.assign(n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = -problem.column(j).objective;
    cost_scale_ = std::max(cost_scale_, std::abs(cost_[j]));
  }
  for (int r = 0; r < m_; ++r) row_bounds(problem.row(kept_rows_[r]), lower_[n_ + r], upper_[n_ + r]);
  apply_bounds();
}

void BoundedSimplex::set_column_bounds(int column, double lower, double upper) {
  native_lower_.at(column) = lower;
  native_upper_.at(column) = upper;
  apply_bounds();
}

void BoundedSimplex::apply_bounds() {
  bound_conflict_ = false;
  for (int j = 0; j < n_; ++j) {
    double lo = native_lower_[j];
    int lo_src = -1;
    for (const auto& fb : folded_lower_[j]) {
      if (lo_src < 0 ? fb.value >= lo : fb.value > lo) {
        lo = fb.value;
        lo_src = fb.row;
        lower_coef_[j] = fb.coef;
      }
    }
    double hi = native_upper_[j];
    int hi_src = -1;
    for (const auto& fb : folded_upper_[j]) {
      if (hi_src < 0 ? fb.value <= hi : fb.value < hi) {
        hi = fb.value;
        hi_src = fb.row;
        upper_coef_[j] = fb.coef;
      }
    }
    if (lo > hi) {
      if (lo - hi > primal_tol(lo)) bound_conflict_ = true;
      hi = lo;
    }
    lower_[j] = lo;
    upper_[j] = hi;
    lower_source_[j] = lo_src;
    upper_source_[j] = hi_src;
  }
}

namespace {

BasisStatus resting_status(double lo, double hi) {
  if (std::isfinite(lo)) return BasisStatus::kAtLower;
  if (std::isfinite(hi)) return BasisStatus::kAtUpper;
  return BasisStatus::kZero;
}

double resting_value(BasisStatus s, double lo, double hi) {
  switch (s) {
    case BasisStatus::kAtLower:
      return lo;
    case BasisStatus::kAtUpper:
      return hi;
    default:
      return 0.0;
  }
}

}  // namespace

void BoundedSimplex::slack_basis() {
  const int total = n_ + m_;
  status_.assign(total, BasisStatus::kBasic);
  x_.assign(total, 0.0);
  position_.assign(total, -1);
  head_.resize(m_);
  for (int j = 0; j < n_; ++j) {
    status_[j] = resting_status(lower_[j], upper_[j]);
    x_[j] = resting_value(status_[j], lower_[j], upper_[j]);
  }
  for (int r = 0; r < m_; ++r) {
    head_[r] = n_ + r;
    position_[n_ + r] = r;
  }
  binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
  for (int r = 0; r < m_; ++r) binv_[static_cast<size_t>(r) * m_ + r] = -1.0;
  pivots_since_refactor_ = 0;
  compute_basic_values();
}

bool BoundedSimplex::load_basis(const Basis& basis) {
  if (static_cast<int>(basis.columns.size()) != n_) return false;
  const int total = n_ + m_;
  status_.assign(total, BasisStatus::kBasic);
  for (int j = 0; j < n_; ++j) status_[j] = basis.columns[j];
  for (int r = 0; r < m_; ++r) {
    int orig = kept_rows_[r];
    status_[n_ + r] =
        orig < static_cast<int>(basis.rows.size()) ? basis.rows[orig] : BasisStatus::kBasic;
  }
  int basics = 0;
  for (auto s : status_) basics += s == BasisStatus::kBasic;
  if (basics != m_) return false;

  x_.assign(total, 0.0);
  position_.assign(total, -1);
  head_.clear();
  for (int v = 0; v < total; ++v) {
    if (status_[v] == BasisStatus::kBasic) {
      position_[v] = static_cast<int>(head_.size());
      head_.push_back(v);
      continue;
    }
    double lo = lower_[v], hi = upper_[v];
    BasisStatus s = status_[v];
    if ((s == BasisStatus::kAtLower && !std::isfinite(lo)) ||
        (s == BasisStatus::kAtUpper && !std::isfinite(hi)) ||
        (s == BasisStatus::kZero && (std::isfinite(lo) || std::isfinite(hi)))) {
      s = resting_status(lo, hi);
    }
    status_[v] = s;
    x_[v] = resting_value(s, lo, hi);
  }
  if (!reinvert()) return false;
  compute_basic_values();
  return true;
}

bool BoundedSimplex::reinvert() {
  pivots_since_refactor_ = 0;
  const int m = m_;
  binv_.assign(static_cast<size_t>(m) * m, 0.0);
  if (m == 0) return true;

  std::vector<int> structural_pos;  // positions holding structural columns
  std::vector<char> covered(m, 0);  // row has its logical in the basis
  for (int p = 0; p < m; ++p) {
    int v = head_[p];
    if (v >= n_) {
      covered[v - n_] = 1;
    } else {
      structural_pos.push_back(p);
    }
  }
  std::vector<int> open_rows;
  std::vector<int> open_index(m, -1);
  for (int r = 0; r < m; ++r) {
    if (!covered[r]) {
      open_index[r] = static_cast<int>(open_rows.size());
      open_rows.push_back(r);
    }
  }
  const int k = static_cast<int>(structural_pos.size());
  if (static_cast<int>(open_rows.size()) != k) return false;

  // Dense k x k block of structural columns over uncovered rows, inverted by
  // Gauss-Jordan with partial pivoting into minv (row-major).
  std::vector<double> mat(static_cast<size_t>(k) * k, 0.0);
  for (int b = 0; b < k; ++b) {
    int j = head_[structural_pos[b]];
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
      int a = open_index[row_index_[e]];
      if (a >= 0) mat[static_cast<size_t>(a) * k + b] = values_[e];
    }
  }
  std::vector<double> minv(static_cast<size_t>(k) * k, 0.0);
  for (int a = 0; a < k; ++a) minv[static_cast<size_t>(a) * k + a] = 1.0;
  // Row operations on [mat | minv]; after elimination mat = P and minv = mat^-1
  // with columns of mat mapped to structural positions.
  std::vector<int> pivot_row_of_col(k, -1);
  std::vector<char> row_used(k, 0);
  for (int col = 0; col < k; ++col) {
    int best = -1;
    double best_abs = kSingularTolerance;
    for (int a = 0; a < k; ++a) {
      if (row_used[a]) continue;
      double v = std::abs(mat[static_cast<size_t>(a) * k + col]);
      if (v > best_abs) {
        best_abs = v;
        best = a;
      }
    }
    if (best < 0) return false;
    row_used[best] = 1;
    pivot_row_of_col[col] = best;
    double* prow = &mat[static_cast<size_t>(best) * k];
    double* pinv = &minv[static_cast<size_t>(best) * k];
    double inv = 1.0 / prow[col];
    for (int c = 0; c < k; ++c) {
      prow[c] *= inv;
      pinv[c] *= inv;
    }
    for (int a = 0; a < k; ++a) {
      if (a == best) continue;
      double f = mat[static_cast<size_t>(a) * k + col];
      if (f == 0.0) continue;
      double* arow = &mat[static_cast<size_t>(a) * k];
      double* ainv = &minv[static_cast<size_t>(a) * k];
      for (int c = 0; c < k; ++c) {
        arow[c] -= f * prow[c];
        ainv[c] -= f * pinv[c];
      }
    }
  }
  // mat is now a permutation: column `col` has its 1 in row pivot_row_of_col[col],
  // so z_S[col] = (minv v_open)[pivot_row_of_col[col]].
  auto binv = [&](int p, int r) -> double& { return binv_[static_cast<size_t>(r) * m + p]; };
  for (int b = 0; b < k; ++b) {
    const double* irow = &minv[static_cast<size_t>(pivot_row_of_col[b]) * k];
    int p = structural_pos[b];
    for (int a = 0; a < k; ++a) binv(p, open_rows[a]) = irow[a];
  }
  // Logical at covered row i: z_pos(i) = sum_b A[i][S_b] z_S[b] - v_i.
  for (int r = 0; r < m; ++r) {
    if (covered[r]) binv(position_[n_ + r], r) = -1.0;
  }
  for (int b = 0; b < k; ++b) {
    int j = head_[structural_pos[b]];
    const double* irow = &minv[static_cast<size_t>(pivot_row_of_col[b]) * k];
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
      int r = row_index_[e];
      if (!covered[r]) continue;
      int p = position_[n_ + r];
      double v = values_[e];
      for (int a = 0; a < k; ++a) binv(p, open_rows[a]) += v * irow[a];
    }
  }
  return true;
}

void BoundedSimplex::compute_basic_values() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == BasisStatus::kBasic || x_[j] == 0.0) continue;
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) rhs[row_index_[e]] -= values_[e] * x_[j];
  }
  for (int r = 0; r < m_; ++r) {
    if (status_[n_ + r] != BasisStatus::kBasic) rhs[r] += x_[n_ + r];
  }
  std::vector<double> xb(m_, 0.0);
  for (int r = 0; r < m_; ++r) {
    if (rhs[r] == 0.0) continue;
    const double* col = &binv_[static_cast<size_t>(r) * m_];
    for (int p = 0; p < m_; ++p) xb[p] += col[p] * rhs[r];
  }
  for (int p = 0; p < m_; ++p) x_[head_[p]] = xb[p];
}

double BoundedSimplex::infeasibility_direction(int var) const {
  double v = x_[var];
  if (v < lower_[var] - primal_tol(lower_[var])) return -1.0;
  if (v > upper_[var] + primal_tol(upper_[var])) return 1.0;
  return 0.0;
}

bool BoundedSimplex::any_infeasible() const {
  for (int p = 0; p < m_; ++p) {
    if (infeasibility_direction(head_[p]) != 0.0) return true;
  }
  return false;
}

void BoundedSimplex::compute_duals(Phase phase) {
  phase_cost_.assign(m_, 0.0);
  for (int p = 0; p < m_; ++p) {
    int v = head_[p];
    phase_cost_[p] = phase == Phase::kOne ? infeasibility_direction(v) : cost_[v];
  }
  y_.assign(m_, 0.0);
  for (int r = 0; r < m_; ++r) {
    const double* col = &binv_[static_cast<size_t>(r) * m_];
    double s = 0.0;
    for (int p = 0; p < m_; ++p) s += phase_cost_[p] * col[p];
    y_[r] = s;
  }
}

double BoundedSimplex::reduced_cost(int var, Phase phase) const {
  double c = phase == Phase::kOne ? 0.0 : cost_[var];
  if (var >= n_) return c + y_[var - n_];
  for (int e = col_start_[var]; e < col_start_[var + 1]; ++e) c -= y_[row_index_[e]] * values_[e];
  return c;
}

void BoundedSimplex::ftran(int var, std::vector<double>& out) const {
  out.assign(m_, 0.0);
  auto axpy = [&](int r, double a) {
    const double* col = &binv_[static_cast<size_t>(r) * m_];
    for (int p = 0; p < m_; ++p) out[p] += a * col[p];
  };
  if (var >= n_) {
    axpy(var - n_, -1.0);
  } else {
    for (int e = col_start_[var]; e < col_start_[var + 1]; ++e) axpy(row_index_[e], values_[e]);
  }
}

void BoundedSimplex::pivot(int position, int entering, const std::vector<double>& alpha) {
  const double ar = alpha[position];
  for (int r = 0; r < m_; ++r) {
    double* col = &binv_[static_cast<size_t>(r) * m_];
    double piv = col[position] / ar;
    if (piv == 0.0) continue;
    for (int p = 0; p < m_; ++p) col[p] -= alpha[p] * piv;
    col[position] = piv;
  }
  int leaving = head_[position];
  position_[leaving] = -1;
  head_[position] = entering;
  position_[entering] = position;
  status_[entering] = BasisStatus::kBasic;
  ++pivots_since_refactor_;
}

SolveStatus BoundedSimplex::iterate() {
  std::vector<double> alpha;
  int degenerate_run = 0;
  int phase_one_stuck = 0;
  bool fresh = false;  // basic values recomputed since the last step
  const int total = n_ + m_;
  // Candidates whose updated column vanished numerically; they cannot move
  // the objective and are skipped until the next step.
  std::vector<char> skipped(total, 0);
  bool any_skipped = false;
  while (true) {
    if (iterations_ >= options_.iteration_limit) return SolveStatus::kIterationLimit;
    if (pivots_since_refactor_ >= options_.refactor_interval) {
      if (!reinvert()) {
        slack_basis();
      } else {
        compute_basic_values();
      }
    }
    const Phase phase = any_infeasible() ? Phase::kOne : Phase::kTwo;
    compute_duals(phase);
    const double tol_d =
        phase == Phase::kOne ? kPhaseOneDualTolerance : kDualTolerance * cost_scale_;
    const bool bland = degenerate_run > options_.stall_threshold;

    int entering = -1;
    double direction = 0.0;
    double best_score = 0.0;
    for (int v = 0; v < total; ++v) {
      BasisStatus s = status_[v];
      if (s == BasisStatus::kBasic || lower_[v] == upper_[v] || skipped[v]) continue;
      double d = reduced_cost(v, phase);
      double dir = 0.0;
      if ((s == BasisStatus::kAtLower || s == BasisStatus::kZero) && d < -tol_d) {
        dir = 1.0;
      } else if ((s == BasisStatus::kAtUpper || s == BasisStatus::kZero) && d > tol_d) {
        dir = -1.0;
      } else {
        continue;
      }
      if (bland) {
        entering = v;
        direction = dir;
        break;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        entering = v;
        direction = dir;
      }
    }

    if (entering < 0) {
      if (!fresh) {
        if (pivots_since_refactor_ > 0 && !reinvert()) {
          slack_basis();
        } else {
          compute_basic_values();
        }
        fresh = true;
        continue;
      }
      return phase == Phase::kOne ? SolveStatus::kInfeasible : SolveStatus::kOptimal;
    }

    ftran(entering, alpha);
    double theta = kInfinity;
    int leave_pos = -1;
    bool leave_at_upper = false;
    double leave_alpha = 0.0;
    for (int p = 0; p < m_; ++p) {
      double a = alpha[p];
      if (std::abs(a) < kPivotTolerance) continue;
      double rate = -direction * a;
      int v = head_[p];
      double xv = x_[v];
      double bound;
      bool at_upper;
      double inf_dir = phase == Phase::kOne ? infeasibility_direction(v) : 0.0;
      if (inf_dir < 0.0) {
        if (rate <= 0.0) continue;
        bound = lower_[v];
        at_upper = false;
      } else if (inf_dir > 0.0) {
        if (rate >= 0.0) continue;
        bound = upper_[v];
        at_upper = true;
      } else if (rate > 0.0) {
        bound = upper_[v];
        at_upper = true;
      } else {
        bound = lower_[v];
        at_upper = false;
      }
      if (!std::isfinite(bound)) continue;
      double ratio = std::max(0.0, (bound - xv) / rate);
      bool take = false;
      if (leave_pos < 0 || ratio < theta - 1e-11 * std::max(1.0, theta)) {
        take = true;
      } else if (ratio <= theta + 1e-11 * std::max(1.0, theta)) {
        take = bland ? v < head_[leave_pos] : std::abs(a) > std::abs(leave_alpha);
      }
      if (take) {
        theta = ratio;
        leave_pos = p;
        leave_at_upper = at_upper;
        leave_alpha = a;
      }
    }
    const double range = upper_[entering] - lower_[entering];
    const bool flip = std::isfinite(range) && range <= theta;
    if (!flip && leave_pos < 0) {
      double largest = 0.0;
      for (int p = 0; p < m_; ++p) largest = std::max(largest, std::abs(alpha[p]));
      const bool negligible = phase == Phase::kOne ||
                              std::abs(reduced_cost(entering, phase)) < 1e-6 * cost_scale_;
      if (largest < kNullColumn && negligible) {
        skipped[entering] = 1;
        any_skipped = true;
        continue;
      }
      if (phase == Phase::kTwo) return SolveStatus::kUnbounded;
      // Numerically stuck in phase one; refresh the factorization and retry.
      if (++phase_one_stuck > 5) return SolveStatus::kInfeasible;
      if (!reinvert()) slack_basis();
      compute_basic_values();
      continue;
    }
    const double step = flip ? range : theta;
    x_[entering] += direction * step;
    for (int p = 0; p < m_; ++p) {
      if (alpha[p] != 0.0) x_[head_[p]] -= direction * alpha[p] * step;
    }
    if (flip) {
      status_[entering] = direction > 0 ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
    } else {
      int leaving = head_[leave_pos];
      pivot(leave_pos, entering, alpha);
      if (lower_[leaving] == upper_[leaving]) {
        status_[leaving] = BasisStatus::kAtLower;
        x_[leaving] = lower_[leaving];
      } else {
        status_[leaving] = leave_at_upper ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
        x_[leaving] = leave_at_upper ? upper_[leaving] : lower_[leaving];
      }
    }
    fresh = false;
    if (any_skipped) {
      std::fill(skipped.begin(), skipped.end(), 0);
      any_skipped = false;
    }
    degenerate_run = step <= kDegenerateStep ? degenerate_run + 1 : 0;
    ++iterations_;
  }
}

SolveResult BoundedSimplex::solve(const Basis* warm_start) {
  SolveResult result;
  iterations_ = 0;
  bool infeasible = bound_conflict_;
  for (int i : empty_rows_) {
    double lo, hi;
    row_bounds(problem_.row(i), lo, hi);
    if (lo > primal_tol(lo) || hi < -primal_tol(hi)) infeasible = true;
  }
  if (infeasible) {
    result.status = SolveStatus::kInfeasible;
    result.primal.assign(n_, 0.0);
    return result;
  }
  if (warm_start == nullptr || warm_start->empty() || !load_basis(*warm_start)) slack_basis();
  result.status = iterate();
  fill_result(result);
  return result;
}

Basis BoundedSimplex::export_basis() const {
  Basis b;
  b.columns.assign(status_.begin(), status_.begin() + n_);
  b.rows.assign(problem_.num_rows(), BasisStatus::kBasic);
  for (int r = 0; r < m_; ++r) b.rows[kept_rows_[r]] = status_[n_ + r];
  return b;
}

void BoundedSimplex::fill_result(SolveResult& result) const {
  result.iteration_count = iterations_;
  result.primal.assign(x_.begin(), x_.begin() + n_);
  result.objective = problem_.evaluate(result.primal);
  if (result.status != SolveStatus::kOptimal) return;

  result.duals.assign(problem_.num_rows(), 0.0);
  result.reduced_costs.assign(n_, 0.0);
  // y_ holds phase-two duals of the minimization; negate for maximization.
  for (int r = 0; r < m_; ++r) result.duals[kept_rows_[r]] = -y_[r];
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == BasisStatus::kBasic) continue;
    double d = cost_[j];
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) d -= y_[row_index_[e]] * values_[e];
    double rc = -d;
    if (rc > 0.0 && upper_source_[j] >= 0) {
      result.duals[upper_source_[j]] = rc / upper_coef_[j];
      rc = 0.0;
    } else if (rc < 0.0 && lower_source_[j] >= 0) {
      result.duals[lower_source_[j]] = rc / lower_coef_[j];
      rc = 0.0;
    }
    result.reduced_costs[j] = rc;
  }
  result.basis = export_basis();
}

}  // namespace pxclear::internal
