#include "pxclear/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "fixtures.hpp"
#include "random_instances.hpp"

namespace pxclear {
namespace {

// ---------------------------------------------------------------------------
// Vertex enumeration: every choice of n active constraints (rows at their
// rhs, columns at a bound) is solved densely; the best feasible point wins.
// Only for bounded problems with a handful of columns.

std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> a,
                                               std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (std::abs(a[piv][k]) < 1e-12) return std::nullopt;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      double f = a[i][k] / a[k][k];
      for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  for (int k = 0; k < n; ++k) b[k] /= a[k][k];
  return b;
}

struct VertexOptimum {
  bool feasible = false;
  double objective = -kInfinity;
};

VertexOptimum vertex_oracle(const LinearProblem& lp) {
  const int n = lp.num_columns();
  const int m = lp.num_rows();
  // Candidate hyperplanes: rows, then lower and upper bounds.
  std::vector<std::vector<double>> planes;
  std::vector<double> rhs;
  for (int i = 0; i < m; ++i) {
    std::vector<double> r(n, 0.0);
    for (const auto& e : lp.row(i).entries) r[e.column] += e.value;
    planes.push_back(r);
    rhs.push_back(lp.row(i).rhs);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> r(n, 0.0);
    r[j] = 1.0;
    planes.push_back(r);
    rhs.push_back(lp.column(j).lower);
    planes.push_back(r);
    rhs.push_back(lp.column(j).upper);
  }
  VertexOptimum best;
  const int p = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int depth, int from) {
    if (depth == n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (int k : pick) {
        if (!std::isfinite(rhs[k])) return;
        a.push_back(planes[k]);
        b.push_back(rhs[k]);
      }
      auto x = solve_dense(a, b);
      if (!x) return;
      for (int j = 0; j < n; ++j) {
        if ((*x)[j] < lp.column(j).lower - 1e-9 || (*x)[j] > lp.column(j).upper + 1e-9) return;
      }
      for (int i = 0; i < m; ++i) {
        double act = 0.0;
        for (int j = 0; j < n; ++j) act += planes[i][j] * (*x)[j];
        const auto& row = lp.row(i);
        if (row.sense != RowSense::kGreaterEqual && act > row.rhs + 1e-9) return;
        if (row.sense != RowSense::kLessEqual && act < row.rhs - 1e-9) return;
      }
      double obj = lp.evaluate(*x);
      best.feasible = true;
      best.objective = std::max(best.objective, obj);
      return;
    }
    for (int k = from; k < p; ++k) {
      pick[depth] = k;
      rec(depth + 1, k + 1);
    }
  };
  if (n == 0) {
    best.feasible = true;
    best.objective = lp.objective_constant();
    for (int i = 0; i < m; ++i) {
      const auto& row = lp.row(i);
      if ((row.sense != RowSense::kGreaterEqual && 0 > row.rhs) ||
          (row.sense != RowSense::kLessEqual && 0 < row.rhs)) {
        best.feasible = false;
      }
    }
    return best;
  }
  rec(0, 0);
  return best;
}

LinearProblem random_lp(std::mt19937_64& rng, bool with_free) {
  auto uni = [&](int lo, int hi) { return lo + static_cast<int>(rng() % (hi - lo + 1)); };
  LinearProblem lp;
  const int n = uni(1, 4);
  const int m = uni(0, 4);
  for (int j = 0; j < n; ++j) {
    double lo = uni(-4, 1);
    double hi = lo + uni(0, 5);
    if (with_free && rng() % 4 == 0) {
      lo = -kInfinity;  // free or half-free, but kept bounded through a box row below
    }
    lp.add_column({{ColumnKind::kAuxiliary, j, -1}, "c" + std::to_string(j), lo, hi,
                   static_cast<double>(uni(-5, 5)), false});
  }
  for (int i = 0; i < m; ++i) {
    Row r{{RowKind::kAuxiliary, i, -1}, "r" + std::to_string(i), {}, RowSense::kLessEqual, 0};
    for (int j = 0; j < n; ++j) {
      int a = uni(-3, 3);
      if (a != 0) r.entries.push_back({j, static_cast<double>(a)});
    }
    int s = uni(0, 2);
    r.sense = s == 0 ? RowSense::kLessEqual : s == 1 ? RowSense::kGreaterEqual : RowSense::kEqual;
    r.rhs = uni(-4, 4);
    lp.add_row(std::move(r));
  }
  if (with_free) {
    // Keep the feasible set bounded: -10 <= x_j for every column, as rows.
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lp.column(j).lower)) continue;
      lp.add_row({{RowKind::kAuxiliary, 100 + j, -1}, "box" + std::to_string(j), {{j, 1.0}},
                  RowSense::kGreaterEqual, -10.0});
    }
  }
  return lp;
}

void expect_optimality_certificate(const LinearProblem& lp, const SolveResult& r, double tol) {
  ASSERT_EQ(r.duals.size(), static_cast<size_t>(lp.num_rows()));
  ASSERT_EQ(r.reduced_costs.size(), static_cast<size_t>(lp.num_columns()));
  std::vector<double> activity(lp.num_rows(), 0.0);
  std::vector<double> aty(lp.num_columns(), 0.0);
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.row(i);
    for (const auto& e : row.entries) {
      activity[i] += e.value * r.primal[e.column];
      aty[e.column] += e.value * r.duals[i];
    }
    // Primal feasibility and dual sign.
    if (row.sense != RowSense::kGreaterEqual) EXPECT_LE(activity[i], row.rhs + tol);
    if (row.sense != RowSense::kLessEqual) EXPECT_GE(activity[i], row.rhs - tol);
    if (row.sense == RowSense::kLessEqual) EXPECT_GE(r.duals[i], -tol);
    if (row.sense == RowSense::kGreaterEqual) EXPECT_LE(r.duals[i], tol);
    // Complementary slackness.
    EXPECT_NEAR(r.duals[i] * (activity[i] - row.rhs), 0.0, tol);
  }
  for (int j = 0; j < lp.num_columns(); ++j) {
    const auto& col = lp.column(j);
    EXPECT_NEAR(col.objective - aty[j] - r.reduced_costs[j], 0.0, tol) << "column " << col.name;
    double rc = r.reduced_costs[j];
    if (rc > tol) EXPECT_NEAR(r.primal[j], col.upper, tol);
    if (rc < -tol) EXPECT_NEAR(r.primal[j], col.lower, tol);
    EXPECT_GE(r.primal[j], col.lower - tol);
    EXPECT_LE(r.primal[j], col.upper + tol);
  }
  EXPECT_NEAR(dual_objective(lp, r), r.objective, tol * std::max(1.0, std::abs(r.objective)));
}

TEST(SolveLp, MatchesVertexEnumerationOnRandomLps) {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    LinearProblem lp = random_lp(rng, trial % 2 == 1);
    VertexOptimum oracle = vertex_oracle(lp);
    SolveResult r = solve_lp(lp);
    if (!oracle.feasible) {
      EXPECT_EQ(r.status, SolveStatus::kInfeasible) << "trial " << trial;
      continue;
    }
    ++feasible;
    ASSERT_EQ(r.status, SolveStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, oracle.objective, 1e-7 * std::max(1.0, std::abs(oracle.objective)))
        << "trial " << trial;
    expect_optimality_certificate(lp, r, 1e-7);
  }
  EXPECT_GT(feasible, 100);
}

TEST(SolveLp, EmptyProblem) {
  LinearProblem lp;
  SolveResult r = solve_lp(lp);
  EXPECT_TRUE(r.optimal());
  EXPECT_EQ(r.objective, 0.0);
}

TEST(SolveLp, Unbounded) {
  LinearProblem lp;
  lp.add_column({{ColumnKind::kAuxiliary, 0, -1}, "x", 0, kInfinity, 1, false});
  lp.add_column({{ColumnKind::kAuxiliary, 1, -1}, "y", 0, kInfinity, 0, false});
  lp.add_row({{RowKind::kAuxiliary, 0, -1}, "r", {{0, 1}, {1, -1}}, RowSense::kLessEqual, 1});
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::kUnbounded);
}

TEST(SolveLp, Infeasible) {
  LinearProblem lp;
  lp.add_column({{ColumnKind::kAuxiliary, 0, -1}, "x", 0, 1, 1, false});
  lp.add_column({{ColumnKind::kAuxiliary, 1, -1}, "y", 0, 1, 1, false});
  lp.add_row({{RowKind::kAuxiliary, 0, -1}, "r", {{0, 1}, {1, 1}}, RowSense::kGreaterEqual, 3});
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::kInfeasible);
}

TEST(SolveLp, IterationLimitIsReported) {
  SolverOptions options;
  options.iteration_limit = 1;
  LinearProblem lp = relax(build_swp(testing::small_instance(3)));
  EXPECT_EQ(solve_lp(lp, options).status, SolveStatus::kIterationLimit);
}

TEST(SolveLp, RejectsIntegerColumns) {
  EXPECT_THROW(solve_lp(build_swp(testing::example_1_1())), std::invalid_argument);
}

// Beale's example cycles under the textbook rule without anti-cycling.
TEST(SolveLp, DegenerateCyclingExampleTerminates) {
  LinearProblem lp;
  double obj[] = {0.75, -150, 0.02, -6};
  for (int j = 0; j < 4; ++j) {
    lp.add_column({{ColumnKind::kAuxiliary, j, -1}, "x" + std::to_string(j), 0, kInfinity, obj[j],
                   false});
  }
  lp.add_row({{RowKind::kAuxiliary, 0, -1}, "a", {{0, 0.25}, {1, -60}, {2, -0.04}, {3, 9}},
              RowSense::kLessEqual, 0});
  lp.add_row({{RowKind::kAuxiliary, 1, -1}, "b", {{0, 0.5}, {1, -90}, {2, -0.02}, {3, 3}},
              RowSense::kLessEqual, 0});
  lp.add_row({{RowKind::kAuxiliary, 2, -1}, "c", {{2, 1}}, RowSense::kLessEqual, 1});
  SolverOptions options;
  options.stall_threshold = 2;
  SolveResult r = solve_lp(lp, options);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.objective, 0.05, 1e-9);
  expect_optimality_certificate(lp, r, 1e-9);
}

TEST(SolveLp, WorkedExampleRelaxations) {
  struct Case {
    Instance inst;
    double objective;
    double price;
  } cases[] = {{testing::example_1_1(), 2600.0, 40.0},
               {testing::example_1_2(), 7300.0 / 3.0, 170.0 / 3.0},
               {testing::example_2(), 11800.0, 60.0}};
  for (const auto& c : cases) {
    LinearProblem lp = relax(build_swp(c.inst));
    SolveResult r = solve_lp(lp);
    ASSERT_TRUE(r.optimal());
    EXPECT_NEAR(r.objective, c.objective, 1e-7);
    EXPECT_NEAR(r.duals[lp.find_row({RowKind::kBalance, 1, 0})], c.price, 1e-7);
    expect_optimality_certificate(lp, r, 1e-7);
  }
}

TEST(SolveLp, WarmStartAgreesWithColdStart) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Instance inst = testing::small_instance(seed);
    LinearProblem swp = build_swp(inst);
    std::map<int, int> ones, zeros;
    for (size_t c = 0; c < inst.participants.size(); ++c) {
      if (inst.participants[c].convex) continue;
      ones[static_cast<int>(c)] = 1;
      zeros[static_cast<int>(c)] = c % 2;
    }
    SolveResult first = solve_lp(fix_commitments(swp, ones));
    LinearProblem second = fix_commitments(swp, zeros);
    SolveResult cold = solve_lp(second);
    SolveResult warm = solve_lp(second, {}, &first.basis);
    ASSERT_EQ(cold.status, warm.status);
    if (cold.optimal()) {
      EXPECT_NEAR(cold.objective, warm.objective, 1e-7 * std::max(1.0, std::abs(cold.objective)));
      expect_optimality_certificate(second, warm, 1e-6);
    }
  }
}

TEST(SolveLp, CertificatesOnRestrictions) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = testing::small_instance(seed);
    OracleResult best = enumerate_oracle(inst);
    ASSERT_TRUE(best.feasible);
    LinearProblem fixed = fix_commitments(build_swp(inst), best.commitments);
    SolveResult r = solve_lp(fixed);
    ASSERT_TRUE(r.optimal());
    expect_optimality_certificate(fixed, r, 1e-6);
    // Acceptance columns are free, so their rows alone must price them.
    for (int j = 0; j < fixed.num_columns(); ++j) {
      if (fixed.column(j).key.kind == ColumnKind::kAcceptance) {
        EXPECT_NEAR(r.reduced_costs[j], 0.0, 1e-9);
      }
    }
  }
}

TEST(SolveMilp, WorkedExamples) {
  SolveResult a = solve_milp(build_swp(testing::example_1_1()));
  ASSERT_TRUE(a.optimal());
  EXPECT_NEAR(a.objective, 2570.0, 1e-6);
  LinearProblem swp12 = build_swp(testing::example_1_2());
  SolveResult b = solve_milp(swp12);
  ASSERT_TRUE(b.optimal());
  EXPECT_NEAR(b.objective, 2400.0, 1e-6);
  EXPECT_EQ(b.primal[swp12.find_column({ColumnKind::kCommitment, 2, -1})], 1.0);
  EXPECT_NEAR(b.primal[swp12.find_column({ColumnKind::kAcceptance, 2, 0})], 10.0 / 12.0, 1e-9);
  SolveResult c = solve_milp(build_swp(testing::example_2()));
  ASSERT_TRUE(c.optimal());
  EXPECT_NEAR(c.objective, 11000.0, 1e-6);
}

TEST(SolveMilp, ContinuousProblemMatchesLp) {
  Instance inst = testing::example_1_1();
  inst.participants[2].convex = true;
  inst.participants[2].steps[0].min_ratio = 0;
  LinearProblem lp = build_swp(inst);
  SolveResult a = solve_milp(lp);
  SolveResult b = solve_lp(lp);
  ASSERT_TRUE(a.optimal());
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.primal, b.primal);
}

TEST(SolveMilp, MatchesBruteForceOnRandomIntegerPrograms) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 150; ++trial) {
    LinearProblem lp = random_lp(rng, false);
    std::vector<int> ints;
    for (int j = 0; j < lp.num_columns(); ++j) {
      if (rng() % 2 == 0) {
        lp.column(j).integer = true;
        ints.push_back(j);
      }
    }
    // Brute force over integer assignments, LP over the rest.
    double best = -kInfinity;
    std::vector<double> assign(ints.size());
    std::function<void(size_t)> rec = [&](size_t k) {
      if (k == ints.size()) {
        LinearProblem sub = relax(lp);
        for (size_t t = 0; t < ints.size(); ++t) {
          sub.column(ints[t]).lower = sub.column(ints[t]).upper = assign[t];
        }
        SolveResult r = solve_lp(sub);
        if (r.optimal()) best = std::max(best, r.objective);
        return;
      }
      const auto& col = lp.column(ints[k]);
      for (double v = std::ceil(col.lower); v <= col.upper; v += 1.0) {
        assign[k] = v;
        rec(k + 1);
      }
    };
    rec(0);
    SolveResult r = solve_milp(lp);
    if (!std::isfinite(best)) {
      EXPECT_EQ(r.status, SolveStatus::kInfeasible) << "trial " << trial;
      continue;
    }
    ASSERT_TRUE(r.optimal()) << "trial " << trial;
    EXPECT_NEAR(r.objective, best, 1e-7 * std::max(1.0, std::abs(best))) << "trial " << trial;
    for (int j : ints) EXPECT_EQ(r.primal[j], std::round(r.primal[j]));
  }
}

TEST(SolveMilp, MatchesEnumerationOracleOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = testing::small_instance(seed);
    OracleResult oracle = enumerate_oracle(inst);
    SolveResult r = solve_milp(build_swp(inst));
    ASSERT_TRUE(r.optimal());
    EXPECT_NEAR(r.objective, oracle.welfare, 1e-7 * std::max(1.0, std::abs(oracle.welfare)))
        << "seed " << seed;
  }
}

TEST(SolveMilp, NodeLimitIsReported) {
  SolverOptions options;
  options.node_limit = 1;
  // Example 1.1 needs branching: the root relaxation has u_C fractional.
  SolveResult r = solve_milp(build_swp(testing::example_1_1()), options);
  EXPECT_EQ(r.status, SolveStatus::kIterationLimit);
}

TEST(EnumerateOracle, WorkedExamples) {
  OracleResult a = enumerate_oracle(testing::example_1_1());
  EXPECT_NEAR(a.welfare, 2570.0, 1e-9);
  EXPECT_NEAR(a.dispatch.x[0][0], 1.0, 1e-12);
  EXPECT_NEAR(a.dispatch.x[1][0], 1.0 / 14.0, 1e-12);
  EXPECT_NEAR(a.dispatch.x[2][0], 11.0 / 12.0, 1e-12);
  EXPECT_EQ(a.lp_solves, 2);
  EXPECT_NEAR(enumerate_oracle(testing::example_1_2()).welfare, 2400.0, 1e-9);
}

TEST(EnumerateOracle, SingleLpWithoutNonConvexBids) {
  Instance inst = testing::single_zone();
  inst.participants = {testing::simple_bid("S", Side::kSupply, 5, 10),
                       testing::simple_bid("B", Side::kDemand, 5, 50)};
  OracleResult r = enumerate_oracle(inst);
  EXPECT_EQ(r.lp_solves, 1);
  EXPECT_NEAR(r.welfare, 200.0, 1e-9);
}

TEST(EnumerateOracle, SizeGuard) {
  Instance inst = testing::single_zone();
  for (int i = 0; i < kMaxEnumeratedCommitments + 1; ++i) {
    inst.participants.push_back(
        testing::simple_bid("N" + std::to_string(i), Side::kSupply, 1, 10, false, 1.0));
  }
  EXPECT_THROW(enumerate_oracle(inst), std::length_error);
}

TEST(Backend, LookupByName) {
  EXPECT_EQ(backend_by_name("simplex").name(), "simplex");
  EXPECT_EQ(&backend_by_name(""), &reference_backend());
  EXPECT_THROW(backend_by_name("cplex"), std::invalid_argument);
}

}  // namespace
}  // namespace pxclear
