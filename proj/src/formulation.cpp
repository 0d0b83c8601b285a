#include "pxclear/formulation.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pxclear {

int LinearProblem::add_column(Column column) {
  int j = num_columns();
  if (!column_index_.emplace(column.key, j).second) {
    throw std::invalid_argument("duplicate column key: " + column.name);
  }
  columns_.push_back(std::move(column));
  return j;
}

int LinearProblem::add_row(Row row) {
  int i = num_rows();
  for (const auto& e : row.entries) {
    if (e.column < 0 || e.column >= num_columns()) {
      throw std::invalid_argument("row " + row.name + " references unknown column");
    }
  }
  if (!row_index_.emplace(row.key, i).second) {
    throw std::invalid_argument("duplicate row key: " + row.name);
  }
  rows_.push_back(std::move(row));
  return i;
}

int LinearProblem::find_column(const ColumnKey& key) const {
  auto it = column_index_.find(key);
  return it == column_index_.end() ? -1 : it->second;
}

int LinearProblem::find_row(const RowKey& key) const {
  auto it = row_index_.find(key);
  return it == row_index_.end() ? -1 : it->second;
}

int LinearProblem::count_rows(RowKind kind) const {
  int n = 0;
  for (const auto& r : rows_) n += r.key.kind == kind;
  return n;
}

int LinearProblem::count_columns(ColumnKind kind) const {
  int n = 0;
  for (const auto& c : columns_) n += c.key.kind == kind;
  return n;
}

bool LinearProblem::has_integers() const {
  for (const auto& c : columns_) {
    if (c.integer) return true;
  }
  return false;
}

double LinearProblem::evaluate(const std::vector<double>& values) const {
  double v = objective_constant_;
  for (size_t j = 0; j < columns_.size(); ++j) v += columns_[j].objective * values.at(j);
  return v;
}

namespace {

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
              ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  return out;
}

// Column and row builders shared by the welfare program and the
// participant problems. `u_column` < 0 means the group is convex and u is
// the constant 1 (moved to the right-hand side).
struct GroupColumns {
  std::vector<int> x;
  int u = -1;
};

void add_group_rows(LinearProblem& lp, const Instance& instance, int c, const GroupColumns& cols) {
  const auto& g = instance.participants[c];
  const std::string pid = sanitize(g.id);
  for (size_t i = 0; i < g.steps.size(); ++i) {
    const std::string sid = pid + "_" + sanitize(g.steps[i].id);
    Row cap{{RowKind::kCap, c, static_cast<int>(i)}, "cap_" + sid, {{cols.x[i], 1.0}},
            RowSense::kLessEqual, 0.0};
    if (cols.u >= 0) {
      cap.entries.push_back({cols.u, -1.0});
    } else {
      cap.rhs = 1.0;
    }
    lp.add_row(std::move(cap));

    Row mincap{{RowKind::kMinCap, c, static_cast<int>(i)}, "mincap_" + sid, {{cols.x[i], 1.0}},
               RowSense::kGreaterEqual, 0.0};
    double r = g.steps[i].min_ratio;
    if (r != 0.0) {
      if (cols.u >= 0) {
        mincap.entries.push_back({cols.u, -r});
      } else {
        mincap.rhs = r;
      }
    }
    lp.add_row(std::move(mincap));
  }

  auto add_ramp = [&](RowKind kind, double limit, int t, double sign) {
    // sign = +1: output(t+1) - output(t) <= RU u ; sign = -1: reverse.
    Row row{{kind, c, t}, (kind == RowKind::kRampUp ? "rampup_" : "rampdown_") + pid + "_" +
                              std::to_string(t),
            {}, RowSense::kLessEqual, 0.0};
    for (size_t i = 0; i < g.steps.size(); ++i) {
      double output = -signed_quantity(g.steps[i], g.side);
      if (g.steps[i].period == t + 1) row.entries.push_back({cols.x[i], sign * output});
      if (g.steps[i].period == t) row.entries.push_back({cols.x[i], -sign * output});
    }
    if (cols.u >= 0) {
      row.entries.push_back({cols.u, -limit});
    } else {
      row.rhs = limit;
    }
    lp.add_row(std::move(row));
  };
  for (int t = 1; t < instance.periods; ++t) {
    if (g.ramp_up_mw) add_ramp(RowKind::kRampUp, *g.ramp_up_mw, t, 1.0);
    if (g.ramp_down_mw) add_ramp(RowKind::kRampDown, *g.ramp_down_mw, t, -1.0);
  }
}

}  // namespace

LinearProblem build_swp(const Instance& instance) {
  require_valid(instance);
  LinearProblem lp;
  const int n_groups = static_cast<int>(instance.participants.size());
  std::vector<GroupColumns> cols(n_groups);

  for (int c = 0; c < n_groups; ++c) {
    const auto& g = instance.participants[c];
    for (size_t i = 0; i < g.steps.size(); ++i) {
      const auto& s = g.steps[i];
      cols[c].x.push_back(lp.add_column({{ColumnKind::kAcceptance, c, static_cast<int>(i)},
                                         "x_" + sanitize(g.id) + "_" + sanitize(s.id),
                                         -kInfinity,
                                         kInfinity,
                                         s.price * signed_quantity(s, g.side),
                                         false}));
    }
  }
  for (int c = 0; c < n_groups; ++c) {
    const auto& g = instance.participants[c];
    if (g.convex) continue;
    cols[c].u = lp.add_column(
        {{ColumnKind::kCommitment, c, -1}, "u_" + sanitize(g.id), 0.0, 1.0, -g.fixed_cost, true});
  }
  std::vector<std::vector<int>> flow(instance.lines.size());
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    double cap = instance.lines[l].capacity_mw;
    for (int t = 1; t <= instance.periods; ++t) {
      flow[l].push_back(lp.add_column({{ColumnKind::kFlow, static_cast<int>(l), t},
                                       "f_" + std::to_string(l) + "_" + std::to_string(t), -cap,
                                       cap, 0.0, false}));
    }
  }

  // Balance: sum Q x + outgoing - incoming = 0 at every (t, location).
  const int n_loc = static_cast<int>(instance.locations.size());
  std::vector<std::vector<Row>> balance(instance.periods, std::vector<Row>(n_loc));
  for (int t = 1; t <= instance.periods; ++t) {
    for (int k = 0; k < n_loc; ++k) {
      balance[t - 1][k] = Row{{RowKind::kBalance, t, k},
                              "bal_" + std::to_string(t) + "_" + sanitize(instance.locations[k]),
                              {},
                              RowSense::kEqual,
                              0.0};
    }
  }
  for (int c = 0; c < n_groups; ++c) {
    const auto& g = instance.participants[c];
    int k = instance.location_index(g.location);
    for (size_t i = 0; i < g.steps.size(); ++i) {
      balance[g.steps[i].period - 1][k].entries.push_back(
          {cols[c].x[i], signed_quantity(g.steps[i], g.side)});
    }
  }
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    int from = instance.location_index(instance.lines[l].from);
    int to = instance.location_index(instance.lines[l].to);
    for (int t = 1; t <= instance.periods; ++t) {
      balance[t - 1][from].entries.push_back({flow[l][t - 1], 1.0});
      balance[t - 1][to].entries.push_back({flow[l][t - 1], -1.0});
    }
  }
  for (auto& per_t : balance) {
    for (auto& row : per_t) lp.add_row(std::move(row));
  }
  for (int c = 0; c < n_groups; ++c) add_group_rows(lp, instance, c, cols[c]);
  return lp;
}

LinearProblem relax(LinearProblem problem) {
  for (int j = 0; j < problem.num_columns(); ++j) problem.column(j).integer = false;
  return problem;
}

LinearProblem fix_commitments(LinearProblem problem, const std::map<int, int>& u_star) {
  const int n = problem.num_columns();
  for (int j = 0; j < n; ++j) {
    auto& col = problem.column(j);
    col.integer = false;
    if (col.key.kind != ColumnKind::kCommitment) continue;
    auto it = u_star.find(col.key.first);
    if (it == u_star.end()) {
      throw std::invalid_argument("fix_commitments: no commitment given for column " + col.name);
    }
    col.lower = -kInfinity;
    col.upper = kInfinity;
    problem.add_row({{RowKind::kFix, col.key.first, -1},
                     "fix_" + col.name.substr(2),
                     {{j, 1.0}},
                     RowSense::kEqual,
                     static_cast<double>(it->second)});
  }
  return problem;
}

std::map<int, int> commitments_from(const LinearProblem& problem,
                                    const std::vector<double>& values) {
  std::map<int, int> u;
  for (int j = 0; j < problem.num_columns(); ++j) {
    const auto& col = problem.column(j);
    if (col.key.kind == ColumnKind::kCommitment) u[col.key.first] = values.at(j) > 0.5 ? 1 : 0;
  }
  return u;
}

LinearProblem build_participant_problem(const Instance& instance, int participant,
                                        const PriceSystem& prices, SettlementRule rule) {
  const auto& g = instance.participants.at(participant);
  const int loc = instance.location_index(g.location);
  if (loc < 0) throw std::invalid_argument("participant " + g.id + " has an unknown location");
  LinearProblem lp;
  GroupColumns cols;
  for (size_t i = 0; i < g.steps.size(); ++i) {
    const auto& s = g.steps[i];
    if (s.period < 1 || s.period > static_cast<int>(prices.pi.size()) ||
        loc >= static_cast<int>(prices.pi[s.period - 1].size())) {
      throw std::invalid_argument("missing price for participant " + g.id + " at period " +
                                  std::to_string(s.period));
    }
    double margin = (prices.price(s.period, loc) - s.price) * -signed_quantity(s, g.side);
    cols.x.push_back(lp.add_column({{ColumnKind::kAcceptance, participant, static_cast<int>(i)},
                                    "x_" + sanitize(g.id) + "_" + sanitize(s.id),
                                    -kInfinity,
                                    kInfinity,
                                    margin,
                                    false}));
  }
  if (!g.convex) {
    double cost = g.fixed_cost;
    if (rule == SettlementRule::kIpRule) {
      auto it = prices.delta.find(participant);
      if (it == prices.delta.end()) {
        throw std::invalid_argument("missing commitment price for participant " + g.id);
      }
      cost += it->second;
    }
    cols.u = lp.add_column({{ColumnKind::kCommitment, participant, -1}, "u_" + sanitize(g.id), 0.0,
                            1.0, -cost, true});
  }
  add_group_rows(lp, instance, participant, cols);
  return lp;
}

DispatchSolution dispatch_from(const Instance& instance, const LinearProblem& swp,
                               const std::vector<double>& values) {
  DispatchSolution d = DispatchSolution::zero(instance);
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    if (instance.participants[c].convex) d.u[c] = 1.0;
  }
  for (int j = 0; j < swp.num_columns(); ++j) {
    const auto& key = swp.column(j).key;
    double v = values.at(j);
    switch (key.kind) {
      case ColumnKind::kAcceptance:
        d.x[key.first][key.second] = v;
        break;
      case ColumnKind::kCommitment:
        d.u[key.first] = v;
        break;
      case ColumnKind::kFlow:
        d.flows[key.first][key.second - 1] = v;
        break;
      default:
        break;
    }
  }
  d.welfare = evaluate_welfare(instance, d);
  return d;
}

PriceSystem prices_from(const Instance& instance, const LinearProblem& swp,
                        const std::vector<double>& row_duals) {
  PriceSystem p;
  p.pi.assign(instance.periods, std::vector<double>(instance.locations.size(), 0.0));
  for (int t = 1; t <= instance.periods; ++t) {
    for (size_t k = 0; k < instance.locations.size(); ++k) {
      int i = swp.find_row({RowKind::kBalance, t, static_cast<int>(k)});
      if (i < 0) throw std::invalid_argument("problem has no balance row for a market");
      p.pi[t - 1][k] = row_duals.at(i);
    }
  }
  return p;
}

DualProblem build_dual(const LinearProblem& primal) {
  DualProblem d;
  LinearProblem& lp = d.problem;
  const int m = primal.num_rows();
  const int n = primal.num_columns();
  d.row_dual.resize(m);
  d.upper_dual.assign(n, -1);
  d.lower_dual.assign(n, -1);

  std::vector<std::vector<Entry>> by_column(n);
  for (int i = 0; i < m; ++i) {
    const auto& row = primal.row(i);
    double lo = row.sense == RowSense::kLessEqual ? 0.0 : -kInfinity;
    double hi = row.sense == RowSense::kGreaterEqual ? 0.0 : kInfinity;
    d.row_dual[i] = lp.add_column(
        {{ColumnKind::kRowDual, i, -1}, "y_" + row.name, lo, hi, -row.rhs, false});
    for (const auto& e : row.entries) by_column[e.column].push_back({d.row_dual[i], e.value});
  }
  for (int j = 0; j < n; ++j) {
    const auto& col = primal.column(j);
    if (std::isfinite(col.upper)) {
      d.upper_dual[j] = lp.add_column(
          {{ColumnKind::kUpperDual, j, -1}, "wu_" + col.name, 0.0, kInfinity, -col.upper, false});
      by_column[j].push_back({d.upper_dual[j], 1.0});
    }
    if (std::isfinite(col.lower)) {
      d.lower_dual[j] = lp.add_column(
          {{ColumnKind::kLowerDual, j, -1}, "wl_" + col.name, 0.0, kInfinity, col.lower, false});
      by_column[j].push_back({d.lower_dual[j], -1.0});
    }
  }
  for (int j = 0; j < n; ++j) {
    const auto& col = primal.column(j);
    lp.add_row({{RowKind::kStationarity, j, -1}, "st_" + col.name, std::move(by_column[j]),
                RowSense::kEqual, col.objective});
  }
  lp.set_objective_constant(-primal.objective_constant());
  return d;
}

void write_lp_format(const LinearProblem& problem, std::ostream& out) {
  auto term = [&](double v, const std::string& name, bool first) {
    if (v < 0) {
      out << " - " << -v << " " << name;
    } else {
      out << (first ? " " : " + ") << v << " " << name;
    }
  };
  out.precision(17);
  out << "\\ generated by pxclear\n";
  if (problem.objective_constant() != 0.0) {
    out << "\\ objective constant " << problem.objective_constant() << "\n";
  }
  out << "Maximize\n obj:";
  bool first = true;
  for (const auto& col : problem.columns()) {
    if (col.objective == 0.0) continue;
    term(col.objective, col.name, first);
    first = false;
  }
  if (first) out << " 0 " << (problem.num_columns() > 0 ? problem.column(0).name : "");
  out << "\nSubject To\n";
  for (const auto& row : problem.rows()) {
    out << " " << row.name << ":";
    if (row.entries.empty()) {
      out << " 0 " << (problem.num_columns() > 0 ? problem.column(0).name : "");
    }
    bool f = true;
    for (const auto& e : row.entries) {
      term(e.value, problem.column(e.column).name, f);
      f = false;
    }
    const char* op = row.sense == RowSense::kLessEqual    ? "<="
                     : row.sense == RowSense::kGreaterEqual ? ">="
                                                            : "=";
    out << " " << op << " " << row.rhs << "\n";
  }
  out << "Bounds\n";
  for (const auto& col : problem.columns()) {
    bool lo_inf = std::isinf(col.lower);
    bool hi_inf = std::isinf(col.upper);
    if (lo_inf && hi_inf) {
      out << " " << col.name << " free\n";
    } else if (lo_inf) {
      out << " -inf <= " << col.name << " <= " << col.upper << "\n";
    } else if (hi_inf) {
      out << " " << col.name << " >= " << col.lower << "\n";
    } else {
      out << " " << col.lower << " <= " << col.name << " <= " << col.upper << "\n";
    }
  }
  bool any_int = false;
  for (const auto& col : problem.columns()) {
    if (!col.integer) continue;
    if (!any_int) out << "Generals\n";
    any_int = true;
    out << " " << col.name << "\n";
  }
  out << "End\n";
}

}  // namespace pxclear
