#include "pxclear/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace pxclear {

const char* to_string(Side side) { return side == Side::kSupply ? "supply" : "demand"; }

int Instance::location_index(const std::string& id) const {
  auto it = std::find(locations.begin(), locations.end(), id);
  return it == locations.end() ? -1 : static_cast<int>(it - locations.begin());
}

int Instance::participant_index(const std::string& id) const {
  for (size_t c = 0; c < participants.size(); ++c) {
    if (participants[c].id == id) return static_cast<int>(c);
  }
  return -1;
}

int Instance::non_convex_count() const {
  return static_cast<int>(std::count_if(participants.begin(), participants.end(),
                                        [](const BidGroup& g) { return !g.convex; }));
}

int Instance::step_count() const {
  int n = 0;
  for (const auto& g : participants) n += static_cast<int>(g.steps.size());
  return n;
}

double signed_quantity(const BidStep& step, Side side) {
  return side == Side::kDemand ? step.quantity_mw : -step.quantity_mw;
}

namespace {

std::string step_subject(const BidGroup& g, const BidStep& s) {
  return "participant " + g.id + " / step " + s.id;
}

void check_monotone(const BidGroup& g, int periods, std::vector<Violation>& out) {
  for (int t = 1; t <= periods; ++t) {
    const BidStep* prev = nullptr;
    for (const auto& s : g.steps) {
      if (s.period != t) continue;
      if (prev != nullptr) {
        bool ok = g.side == Side::kSupply ? s.price >= prev->price : s.price <= prev->price;
        if (!ok) {
          out.push_back({step_subject(g, s), "monotonicity",
                         std::string(g.side == Side::kSupply ? "supply" : "demand") +
                             " step prices must be " +
                             (g.side == Side::kSupply ? "non-decreasing" : "non-increasing") +
                             " within period " + std::to_string(t)});
        }
      }
      prev = &s;
    }
  }
}

}  // namespace

std::vector<Violation> validate_instance(const Instance& instance) {
  std::vector<Violation> out;
  if (instance.periods < 1) {
    out.push_back({"instance", "periods", "periods must be at least 1"});
  }
  if (instance.locations.empty()) {
    out.push_back({"instance", "locations", "at least one location is required"});
  }
  std::set<std::string> seen_locations;
  for (const auto& loc : instance.locations) {
    if (!seen_locations.insert(loc).second) {
      out.push_back({"location " + loc, "duplicate_id", "location ids must be unique"});
    }
  }
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    const auto& line = instance.lines[l];
    std::string subject = "line " + std::to_string(l) + " (" + line.from + "->" + line.to + ")";
    if (instance.location_index(line.from) < 0 || instance.location_index(line.to) < 0) {
      out.push_back({subject, "unknown_location", "line endpoints must be listed locations"});
    }
    if (line.from == line.to) {
      out.push_back({subject, "self_loop", "line endpoints must differ"});
    }
    if (!(line.capacity_mw >= 0.0) || !std::isfinite(line.capacity_mw)) {
      out.push_back({subject, "capacity", "capacity_mw must be finite and non-negative"});
    }
  }

  std::set<std::string> seen_participants;
  for (const auto& g : instance.participants) {
    std::string subject = "participant " + g.id;
    if (!seen_participants.insert(g.id).second) {
      out.push_back({subject, "duplicate_id", "participant ids must be unique"});
    }
    if (instance.location_index(g.location) < 0) {
      out.push_back({subject, "unknown_location", "location '" + g.location + "' is not listed"});
    }
    if (!(g.fixed_cost >= 0.0) || !std::isfinite(g.fixed_cost)) {
      out.push_back({subject, "fixed_cost", "fixed_cost must be finite and non-negative"});
    }
    for (const auto* ramp : {&g.ramp_up_mw, &g.ramp_down_mw}) {
      if (ramp->has_value() && (!(**ramp >= 0.0) || !std::isfinite(**ramp))) {
        out.push_back({subject, "ramp", "ramp limits must be finite and non-negative"});
      }
    }
    if (g.convex) {
      if (g.fixed_cost != 0.0) {
        out.push_back({subject, "convex_fixed_cost", "convex participants cannot have a fixed cost"});
      }
      if (g.has_ramps()) {
        out.push_back({subject, "convex_ramp", "convex participants cannot have ramp limits"});
      }
    }
    std::set<std::string> seen_steps;
    for (const auto& s : g.steps) {
      std::string ss = step_subject(g, s);
      if (!seen_steps.insert(s.id).second) {
        out.push_back({ss, "duplicate_id", "step ids must be unique within a participant"});
      }
      if (s.period < 1 || s.period > instance.periods) {
        out.push_back({ss, "period", "period " + std::to_string(s.period) + " outside [1, " +
                                         std::to_string(instance.periods) + "]"});
      }
      if (!(s.quantity_mw > 0.0) || !std::isfinite(s.quantity_mw)) {
        out.push_back({ss, "quantity", "quantity_mw must be positive"});
      }
      if (!std::isfinite(s.price)) {
        out.push_back({ss, "price", "price must be finite"});
      }
      if (!(s.min_ratio >= 0.0 && s.min_ratio <= 1.0)) {
        out.push_back({ss, "min_ratio", "min_ratio out of [0,1]"});
      } else if (g.convex && s.min_ratio != 0.0) {
        out.push_back({ss, "convex_min_ratio", "convex participants cannot have a min_ratio"});
      }
    }
    check_monotone(g, instance.periods, out);
  }
  return out;
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << "invalid instance (" << violations.size() << " violation"
     << (violations.size() == 1 ? "" : "s") << ")";
  for (const auto& v : violations) os << "\n  " << v.subject << ": " << v.message;
  return os.str();
}

}  // namespace

InstanceError::InstanceError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

void require_valid(const Instance& instance) {
  auto violations = validate_instance(instance);
  if (!violations.empty()) throw InstanceError(std::move(violations));
}

DispatchSolution DispatchSolution::zero(const Instance& instance) {
  DispatchSolution d;
  d.u.assign(instance.participants.size(), 0.0);
  d.x.resize(instance.participants.size());
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    d.x[c].assign(instance.participants[c].steps.size(), 0.0);
  }
  d.flows.assign(instance.lines.size(), std::vector<double>(instance.periods, 0.0));
  return d;
}

double evaluate_welfare(const Instance& instance, const DispatchSolution& dispatch) {
  double w = 0.0;
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    const auto& g = instance.participants[c];
    for (size_t i = 0; i < g.steps.size(); ++i) {
      w += g.steps[i].price * signed_quantity(g.steps[i], g.side) * dispatch.x[c][i];
    }
    w -= g.fixed_cost * dispatch.u[c];
  }
  return w;
}

double participant_surplus(const Instance& instance, int participant,
                           const DispatchSolution& dispatch, const PriceSystem& prices) {
  const auto& g = instance.participants.at(participant);
  int loc = instance.location_index(g.location);
  double surplus = 0.0;
  for (size_t i = 0; i < g.steps.size(); ++i) {
    const auto& s = g.steps[i];
    surplus += (prices.price(s.period, loc) - s.price) * -signed_quantity(s, g.side) *
               dispatch.x[participant][i];
  }
  return surplus - g.fixed_cost * dispatch.u[participant];
}

double congestion_rent(const Instance& instance, const DispatchSolution& dispatch,
                       const PriceSystem& prices) {
  double rent = 0.0;
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    int from = instance.location_index(instance.lines[l].from);
    int to = instance.location_index(instance.lines[l].to);
    for (int t = 1; t <= instance.periods; ++t) {
      rent += (prices.price(t, to) - prices.price(t, from)) * dispatch.flows[l][t - 1];
    }
  }
  return rent;
}

std::vector<std::string> check_dispatch(const Instance& instance, const DispatchSolution& dispatch,
                                        double tol) {
  std::vector<std::string> out;
  const int T = instance.periods;
  std::vector<std::vector<double>> net(T, std::vector<double>(instance.locations.size(), 0.0));
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    const auto& g = instance.participants[c];
    double u = g.convex ? 1.0 : dispatch.u[c];
    if (u < -tol || u > 1.0 + tol) out.push_back("u of " + g.id + " outside [0,1]");
    if (g.convex && dispatch.u[c] != 0.0 && std::abs(dispatch.u[c] - 1.0) > tol) {
      out.push_back("convex participant " + g.id + " must have u = 1");
    }
    std::vector<double> output(T, 0.0);
    for (size_t i = 0; i < g.steps.size(); ++i) {
      const auto& s = g.steps[i];
      double x = dispatch.x[c][i];
      if (x > u + tol) out.push_back("x of " + g.id + "/" + s.id + " exceeds u");
      if (x < s.min_ratio * u - tol) out.push_back("x of " + g.id + "/" + s.id + " below min ratio");
      double q = signed_quantity(s, g.side);
      net[s.period - 1][instance.location_index(g.location)] += q * x;
      output[s.period - 1] += -q * x;
    }
    for (int t = 0; t + 1 < T; ++t) {
      double delta = output[t + 1] - output[t];
      if (g.ramp_up_mw && delta > *g.ramp_up_mw * u + tol) {
        out.push_back("ramp-up of " + g.id + " violated at period " + std::to_string(t + 1));
      }
      if (g.ramp_down_mw && -delta > *g.ramp_down_mw * u + tol) {
        out.push_back("ramp-down of " + g.id + " violated at period " + std::to_string(t + 1));
      }
    }
  }
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    int from = instance.location_index(instance.lines[l].from);
    int to = instance.location_index(instance.lines[l].to);
    for (int t = 0; t < T; ++t) {
      double f = dispatch.flows[l][t];
      if (std::abs(f) > instance.lines[l].capacity_mw + tol) {
        out.push_back("flow on line " + std::to_string(l) + " exceeds capacity");
      }
      net[t][from] += f;
      net[t][to] -= f;
    }
  }
  for (int t = 0; t < T; ++t) {
    for (size_t k = 0; k < instance.locations.size(); ++k) {
      if (std::abs(net[t][k]) > tol) {
        out.push_back("balance violated at period " + std::to_string(t + 1) + ", location " +
                      instance.locations[k]);
      }
    }
  }
  return out;
}

}  // namespace pxclear
