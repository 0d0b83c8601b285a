// Sparse LP/MILP structures and the builders for the welfare maximization
// program, its relaxation, the fixed-commitment restriction and the
// participant profit problems.

#ifndef PXCLEAR_FORMULATION_HPP_
#define PXCLEAR_FORMULATION_HPP_

#include <compare>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pxclear/model.hpp"

namespace pxclear {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ColumnKind {
  kAcceptance,  // x(participant, step)
  kCommitment,  // u(participant)
  kFlow,        // flow(line, period)
  kRowDual,     // dual of primal row `first`
  kUpperDual,   // dual of upper bound of primal column `first`
  kLowerDual,   // dual of lower bound of primal column `first`
  kAuxiliary,
};

enum class RowKind {
  kBalance,   // (period, location)
  kCap,       // x <= u, (participant, step)
  kMinCap,    // x >= r u, (participant, step)
  kRampUp,    // (participant, period t in 1..T-1)
  kRampDown,  // (participant, period t in 1..T-1)
  kFix,       // u = u*, (participant)
  kCut,       // (cut index)
  kStationarity,  // dual row of primal column `first`
  kAuxiliary,
};

struct ColumnKey {
  ColumnKind kind = ColumnKind::kAuxiliary;
  int first = -1;
  int second = -1;
  auto operator<=>(const ColumnKey&) const = default;
};

struct RowKey {
  RowKind kind = RowKind::kAuxiliary;
  int first = -1;
  int second = -1;
  auto operator<=>(const RowKey&) const = default;
};

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

struct Column {
  ColumnKey key;
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double objective = 0.0;
  bool integer = false;
};

struct Entry {
  int column = 0;
  double value = 0.0;
};

struct Row {
  RowKey key;
  std::string name;
  std::vector<Entry> entries;
  RowSense sense = RowSense::kEqual;
  double rhs = 0.0;
};

/// A maximization problem with sparse rows. Row and column keys are unique.
class LinearProblem {
 public:
  int add_column(Column column);
  int add_row(Row row);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<Row>& rows() const { return rows_; }
  Column& column(int j) { return columns_.at(j); }
  const Column& column(int j) const { return columns_.at(j); }
  Row& row(int i) { return rows_.at(i); }
  const Row& row(int i) const { return rows_.at(i); }
  int num_columns() const { return static_cast<int>(columns_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  int find_column(const ColumnKey& key) const;  // -1 if absent
  int find_row(const RowKey& key) const;        // -1 if absent
  int count_rows(RowKind kind) const;
  int count_columns(ColumnKind kind) const;

  bool has_integers() const;
  double objective_constant() const { return objective_constant_; }
  void set_objective_constant(double value) { objective_constant_ = value; }

  /// Objective value of a column vector (including the constant term).
  double evaluate(const std::vector<double>& values) const;

 private:
  std::vector<Column> columns_;
  std::vector<Row> rows_;
  std::map<ColumnKey, int> column_index_;
  std::map<RowKey, int> row_index_;
  double objective_constant_ = 0.0;
};

/// Social welfare program: stepwise bids, start-up costs, minimum acceptance
/// ratios, ramp limits and an ATC network. Convex participants get no
/// commitment column. Throws InstanceError on invalid input.
LinearProblem build_swp(const Instance& instance);

/// Drops every integrality flag; bounds are kept.
LinearProblem relax(LinearProblem problem);

/// Appends u_c = u*_c rows for every commitment column and frees the
/// commitment bounds so that the fix rows carry the commitment prices.
/// Throws std::invalid_argument if a commitment column has no entry.
LinearProblem fix_commitments(LinearProblem problem, const std::map<int, int>& u_star);

/// Commitment vector {participant -> 0/1} read from column values.
std::map<int, int> commitments_from(const LinearProblem& problem, const std::vector<double>& values);

enum class SettlementRule { kCommodityOnly, kIpRule };

/// Self-dispatch profit program of one participant facing `prices`:
/// max sum (pi - P)(-Q) x - F u [- delta u]. Only the participant's own
/// technical constraints appear; u is integral for non-convex groups.
LinearProblem build_participant_problem(const Instance& instance, int participant,
                                        const PriceSystem& prices, SettlementRule rule);

/// Reads a dispatch (u, x, flows) out of SWP column values.
DispatchSolution dispatch_from(const Instance& instance, const LinearProblem& swp,
                               const std::vector<double>& values);

/// Reads commodity prices from balance-row duals.
PriceSystem prices_from(const Instance& instance, const LinearProblem& swp,
                        const std::vector<double>& row_duals);

/// Explicit dual of a continuous maximization problem:
///   min sum_i b_i y_i + sum_j (u_j w+_j - l_j w-_j)
///   s.t. sum_i a_ij y_i + w+_j - w-_j = c_j   (one stationarity row per column)
/// with y_i >= 0 for <= rows, y_i <= 0 for >= rows and free for equalities.
/// The result is stated as a maximization of the negated dual objective.
struct DualProblem {
  LinearProblem problem;
  std::vector<int> row_dual;    // primal row -> dual column
  std::vector<int> upper_dual;  // primal column -> dual column or -1
  std::vector<int> lower_dual;  // primal column -> dual column or -1
};

DualProblem build_dual(const LinearProblem& primal);

/// Writes the problem in CPLEX LP text format.
void write_lp_format(const LinearProblem& problem, std::ostream& out);

}  // namespace pxclear

#endif  // PXCLEAR_FORMULATION_HPP_
