#include "pxclear/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

namespace pxclear {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed,
                    std::initializer_list<const char*> required) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ParseError(where + ": unknown field '" + key + "'");
  }
  for (const char* r : required) {
    if (!j.contains(r)) throw ParseError(where + ": missing field '" + std::string(r) + "'");
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

double get_number(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::optional<double> get_ramp(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, where, 0.0);
}

const json& get_array(const json& j, const char* key, const std::string& where) {
  static const json kEmpty = json::array();
  if (!j.contains(key)) return kEmpty;
  if (!j.at(key).is_array()) throw ParseError(where + ": field '" + key + "' must be an array");
  return j.at(key);
}

}  // namespace

Instance instance_from_json(const json& j) {
  require_object(j, "instance", {"periods", "locations", "lines", "participants"},
                 {"periods", "locations", "participants"});
  Instance inst;
  if (!j.at("periods").is_number_integer()) throw ParseError("instance: periods must be an integer");
  inst.periods = j.at("periods").get<int>();
  for (const auto& loc : get_array(j, "locations", "instance")) {
    if (!loc.is_string()) throw ParseError("instance: locations must be strings");
    inst.locations.push_back(loc.get<std::string>());
  }
  int l = 0;
  for (const auto& jl : get_array(j, "lines", "instance")) {
    const std::string where = "lines[" + std::to_string(l++) + "]";
    require_object(jl, where, {"from", "to", "capacity_mw"}, {"from", "to", "capacity_mw"});
    inst.lines.push_back({get_field<std::string>(jl, "from", where, ""),
                          get_field<std::string>(jl, "to", where, ""),
                          get_number(jl, "capacity_mw", where, 0.0)});
  }
  int p = 0;
  for (const auto& jp : get_array(j, "participants", "instance")) {
    std::string where = "participants[" + std::to_string(p++) + "]";
    require_object(jp, where,
                   {"id", "side", "convex", "fixed_cost", "ramp_up_mw", "ramp_down_mw", "location",
                    "steps"},
                   {"id", "side", "location", "steps"});
    BidGroup g;
    g.id = get_field<std::string>(jp, "id", where, "");
    where += " (" + g.id + ")";
    const std::string side = get_field<std::string>(jp, "side", where, "");
    if (side == "supply") {
      g.side = Side::kSupply;
    } else if (side == "demand") {
      g.side = Side::kDemand;
    } else {
      throw ParseError(where + ": side must be \"supply\" or \"demand\"");
    }
    g.convex = get_field<bool>(jp, "convex", where, true);
    g.fixed_cost = get_number(jp, "fixed_cost", where, 0.0);
    g.ramp_up_mw = get_ramp(jp, "ramp_up_mw", where);
    g.ramp_down_mw = get_ramp(jp, "ramp_down_mw", where);
    g.location = get_field<std::string>(jp, "location", where, "");
    int s = 0;
    for (const auto& js : get_array(jp, "steps", where)) {
      const std::string sw = where + ".steps[" + std::to_string(s++) + "]";
      require_object(js, sw, {"id", "period", "quantity_mw", "price", "min_ratio"},
                     {"id", "period", "quantity_mw", "price"});
      if (!js.at("period").is_number_integer()) throw ParseError(sw + ": period must be an integer");
      g.steps.push_back({get_field<std::string>(js, "id", sw, ""), js.at("period").get<int>(),
                         get_number(js, "quantity_mw", sw, 0.0), get_number(js, "price", sw, 0.0),
                         get_number(js, "min_ratio", sw, 0.0)});
    }
    inst.participants.push_back(std::move(g));
  }
  return inst;
}

json instance_to_json(const Instance& instance) {
  json j;
  j["periods"] = instance.periods;
  j["locations"] = instance.locations;
  j["lines"] = json::array();
  for (const auto& l : instance.lines) {
    j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"capacity_mw", l.capacity_mw}});
  }
  j["participants"] = json::array();
  for (const auto& g : instance.participants) {
    json jp;
    jp["id"] = g.id;
    jp["side"] = to_string(g.side);
    jp["convex"] = g.convex;
    jp["fixed_cost"] = g.fixed_cost;
    jp["ramp_up_mw"] = g.ramp_up_mw ? json(*g.ramp_up_mw) : json(nullptr);
    jp["ramp_down_mw"] = g.ramp_down_mw ? json(*g.ramp_down_mw) : json(nullptr);
    jp["location"] = g.location;
    jp["steps"] = json::array();
    for (const auto& s : g.steps) {
      jp["steps"].push_back({{"id", s.id},
                             {"period", s.period},
                             {"quantity_mw", s.quantity_mw},
                             {"price", s.price},
                             {"min_ratio", s.min_ratio}});
    }
    j["participants"].push_back(std::move(jp));
  }
  return j;
}

Instance parse_instance_unchecked(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": malformed JSON: " + e.what());
  }
  return instance_from_json(j);
}

Instance parse_instance(const std::string& path) {
  Instance inst = parse_instance_unchecked(path);
  require_valid(inst);
  return inst;
}

void write_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << instance_to_json(instance).dump(2) << "\n";
}

double report_round(double value) {
  if (!std::isfinite(value)) return value;
  double r = std::round(value * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

namespace {

json prices_to_json(const Instance& instance, const PriceSystem& prices) {
  json j;
  j["pi"] = json::array();
  for (int t = 1; t <= instance.periods; ++t) {
    for (size_t k = 0; k < instance.locations.size(); ++k) {
      j["pi"].push_back({{"period", t},
                         {"location", instance.locations[k]},
                         {"price", report_round(prices.price(t, static_cast<int>(k)))}});
    }
  }
  j["delta"] = json::object();
  for (const auto& [c, d] : prices.delta) j["delta"][instance.participants[c].id] = report_round(d);
  return j;
}

json dispatch_to_json(const Instance& instance, const DispatchSolution& d) {
  json j;
  j["welfare"] = report_round(evaluate_welfare(instance, d));
  j["participants"] = json::array();
  for (size_t c = 0; c < instance.participants.size(); ++c) {
    const auto& g = instance.participants[c];
    json jp{{"id", g.id}, {"u", report_round(d.u.at(c))}, {"steps", json::array()}};
    for (size_t i = 0; i < g.steps.size(); ++i) {
      jp["steps"].push_back({{"id", g.steps[i].id}, {"x", report_round(d.x.at(c).at(i))}});
    }
    j["participants"].push_back(std::move(jp));
  }
  j["flows"] = json::array();
  for (size_t l = 0; l < instance.lines.size(); ++l) {
    for (int t = 1; t <= instance.periods; ++t) {
      j["flows"].push_back({{"from", instance.lines[l].from},
                            {"to", instance.lines[l].to},
                            {"period", t},
                            {"flow_mw", report_round(d.flows.at(l).at(t - 1))}});
    }
  }
  return j;
}

json diagnostics_to_json(Rule rule, const RuleDiagnostics& d) {
  json j{{"milp_nodes", d.milp_nodes}, {"lp_iterations", d.lp_iterations}};
  switch (rule) {
    case Rule::kChp:
      j["relaxation_objective"] = report_round(d.relaxation_objective);
      j["duality_gap"] = report_round(d.duality_gap);
      break;
    case Rule::kIp:
      j["profit_residual"] = d.profit_residual;
      j["decomposition_residual"] = d.decomposition_residual;
      j["missed_profit_slack"] = report_round(d.missed_profit_slack);
      break;
    case Rule::kEu:
      j["cut_count"] = d.cut_count;
      j["iterations"] = d.iterations;
      j["budget_exhausted"] = d.budget_exhausted;
      break;
  }
  return j;
}

json settlement_to_json(const ParticipantSettlement& s) {
  json j{{"id", s.id},
         {"non_convex", s.non_convex},
         {"committed", s.committed},
         {"realized_surplus", report_round(s.realized_surplus)},
         {"self_dispatch_surplus", report_round(s.self_dispatch_surplus)},
         {"uplift", report_round(s.uplift)},
         {"make_whole", report_round(s.make_whole)},
         {"classification", to_string(s.classification)}};
  j["payment"] = s.payment ? json(report_round(*s.payment)) : json(nullptr);
  return j;
}

std::string fixed6(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", report_round(v));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json outcome_to_json(const Instance& instance, const RuleOutcome& outcome) {
  json j;
  j["rule"] = to_string(outcome.rule);
  j["feasible"] = outcome.feasible;
  j["welfare"] = report_round(evaluate_welfare(instance, outcome.dispatch));
  j["prices"] = prices_to_json(instance, outcome.prices);
  j["dispatch"] = dispatch_to_json(instance, outcome.dispatch);
  j["diagnostics"] = diagnostics_to_json(outcome.rule, outcome.diagnostics);
  return j;
}

json report_to_json(const Instance& instance, const ClearingReport& report) {
  json j;
  j["instance"] = report.instance;
  j["swp"] = {{"ok", report.swp_ok},
              {"welfare", report_round(report.swp_welfare)},
              {"runtime_s", report_round(report.swp_runtime_s)}};
  if (!report.swp_ok) j["swp"]["error"] = report.swp_error;
  j["rules"] = json::array();
  for (const auto& r : report.rules) {
    json jr{{"rule", to_string(r.rule)}, {"ok", r.ok}};
    if (!r.ok) {
      jr["error"] = r.error;
      j["rules"].push_back(std::move(jr));
      continue;
    }
    jr["welfare"] = report_round(r.welfare);
    jr["welfare_loss"] = report_round(r.welfare_loss);
    jr["total_uplift"] = report_round(r.total_uplift);
    jr["transmission_uplift"] = report_round(r.transmission_uplift);
    jr["pab"] = r.pab;
    jr["prb"] = r.prb;
    jr["runtime_s"] = report_round(r.runtime_s);
    jr["outcome"] = outcome_to_json(instance, r.outcome);
    jr["settlements"] = json::array();
    for (const auto& s : r.settlements) jr["settlements"].push_back(settlement_to_json(s));
    j["rules"].push_back(std::move(jr));
  }
  return j;
}

void write_report_csv_rows(const ClearingReport& report, std::ostream& out) {
  const std::string name = csv_field(report.instance);
  if (report.swp_ok) {
    out << name << ",swp," << fixed6(report.swp_welfare) << "," << fixed6(0.0) << ","
        << fixed6(0.0) << ",0,0," << fixed6(report.swp_runtime_s) << "\n";
  } else {
    out << name << ",swp,nan,nan,nan,,,nan\n";
  }
  for (const auto& r : report.rules) {
    out << name << "," << to_string(r.rule) << ",";
    if (!r.ok) {
      out << "nan,nan,nan,,,nan\n";
      continue;
    }
    out << fixed6(r.welfare) << "," << fixed6(r.welfare_loss) << "," << fixed6(r.total_uplift)
        << "," << r.pab << "," << r.prb << "," << fixed6(r.runtime_s) << "\n";
  }
}

}  // namespace pxclear
