// pxclear: command line front end.
//
//   pxclear validate --instance F
//   pxclear clear    --rule chp|ip|eu --instance F [--out D] [--tol T] [--eu-cut-budget N]
//   pxclear compare  --instance F [--rules all|chp,ip,eu] [--out D] [--tol T] [--eu-cut-budget N]
//   pxclear generate --out F [--seed N ...]
//   pxclear oracle   --instance F [--out D]
//
// Exit status: 0 success, 1 invalid input, 2 solver failure, 64 usage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pxclear/io.hpp"
#include "pxclear/oracle.hpp"
#include "pxclear/settlement.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pxclear;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kSolverFailure = 2;
constexpr int kUsage = 64;

// Carries an exit status out of a subcommand.
struct Exit {
  int code;
  std::string message;
};

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw Exit{kSolverFailure, "cannot write " + path};
}

// Writes `j` to DIR/NAME, or to stdout when no directory was given.
void emit(const json& j, const std::string& dir, const std::string& name) {
  const std::string text = j.dump(2) + "\n";
  if (dir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  write_text(path, text);
  std::cerr << "wrote " << path << "\n";
}

Instance load(const std::string& path) {
  try {
    return parse_instance(path);
  } catch (const ParseError& e) {
    throw Exit{kInvalid, e.what()};
  } catch (const InstanceError& e) {
    std::ostringstream msg;
    msg << path << ": invalid instance";
    for (const auto& v : e.violations()) {
      msg << "\n  " << v.subject << " [" << v.rule << "] " << v.message;
    }
    throw Exit{kInvalid, msg.str()};
  }
}

int g_cut_budget = 0;  // 0 keeps the library default

ClearingOptions options_with(double tol) {
  ClearingOptions options;
  if (tol >= 0) options.eu_tolerance = tol;
  if (g_cut_budget > 0) options.eu_cut_budget = g_cut_budget;
  try {
    options.backend = &backend_from_env();
  } catch (const std::invalid_argument& e) {
    throw Exit{kUsage, e.what()};
  }
  return options;
}

std::vector<Rule> parse_rules(const std::string& text) {
  if (text == "all") return {Rule::kChp, Rule::kIp, Rule::kEu};
  std::vector<Rule> rules;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      rules.push_back(rule_from_string(item));
    } catch (const std::invalid_argument&) {
      throw Exit{kUsage, "unknown rule '" + item + "' (expected chp, ip, eu or all)"};
    }
  }
  return rules;
}

int run_validate(const std::string& path) {
  Instance inst;
  try {
    inst = parse_instance_unchecked(path);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  }
  auto violations = validate_instance(inst);
  if (violations.empty()) {
    std::cout << path << ": valid (" << inst.participants.size() << " participants, "
              << inst.non_convex_count() << " non-convex, " << inst.step_count() << " steps, "
              << inst.periods << " periods)\n";
    return kOk;
  }
  for (const auto& v : violations) {
    std::cout << path << ": " << v.subject << " [" << v.rule << "] " << v.message << "\n";
  }
  return kInvalid;
}

int run_clear(const std::string& rule_name, const std::string& path, const std::string& out,
              double tol) {
  Rule rule;
  try {
    rule = rule_from_string(rule_name);
  } catch (const std::invalid_argument&) {
    throw Exit{kUsage, "unknown rule '" + rule_name + "' (expected chp, ip or eu)"};
  }
  Instance inst = load(path);
  RuleOutcome outcome;
  try {
    outcome = clear(inst, rule, options_with(tol));
  } catch (const ClearingError& e) {
    throw Exit{kSolverFailure, std::string(e.what()) + " (" + to_string(e.status()) + ")"};
  }
  emit(outcome_to_json(inst, outcome), out, stem(path) + "." + to_string(rule) + ".json");
  if (!outcome.feasible) {
    throw Exit{kSolverFailure, "no admissible commitment vector within the cut budget"};
  }
  return kOk;
}

int run_compare(const std::string& path, const std::string& rules_text, const std::string& out,
                double tol) {
  std::vector<Rule> rules = parse_rules(rules_text);
  Instance inst = load(path);
  ClearingReport report = compare(inst, rules, options_with(tol), stem(path));
  emit(report_to_json(inst, report), out, stem(path) + ".report.json");
  std::ostringstream csv;
  csv << kReportCsvHeader << "\n";
  write_report_csv_rows(report, csv);
  if (out.empty()) {
    std::cerr << csv.str();
  } else {
    const std::string csv_path = (fs::path(out) / (stem(path) + ".report.csv")).string();
    write_text(csv_path, csv.str());
    std::cerr << "wrote " << csv_path << "\n";
  }
  bool ok = report.swp_ok;
  for (const auto& r : report.rules) ok = ok && r.ok;
  return ok ? kOk : kSolverFailure;
}

int run_generate(const GeneratorConfig& config, const std::string& out) {
  Instance inst;
  try {
    inst = generate(config);
  } catch (const std::invalid_argument& e) {
    throw Exit{kUsage, e.what()};
  }
  if (out.empty()) {
    std::cout << instance_to_json(inst).dump(2) << "\n";
  } else {
    write_instance(inst, out);
    std::cerr << "wrote " << out << " (" << inst.step_count() << " steps)\n";
  }
  return kOk;
}

json commitments_json(const Instance& inst, const std::map<int, int>& u) {
  json j = json::object();
  for (const auto& [c, v] : u) j[inst.participants[c].id] = v;
  return j;
}

int run_oracle(const std::string& path, const std::string& out) {
  Instance inst = load(path);
  ClearingOptions options = options_with(-1);
  json j;
  j["instance"] = stem(path);
  try {
    OracleResult swp = enumerate_oracle(inst, options.solver);
    j["swp"] = {{"feasible", swp.feasible},
                {"welfare", report_round(swp.welfare)},
                {"commitments", commitments_json(inst, swp.commitments)},
                {"lp_solves", swp.lp_solves}};
    EuOracleResult eu = eu_enumeration_oracle(inst, options);
    j["eu"] = {{"feasible", eu.feasible},
               {"welfare", report_round(eu.welfare)},
               {"commitments", commitments_json(inst, eu.commitments)},
               {"restrictions_checked", eu.restrictions_checked}};
    if (is_single_market(inst) && swp.feasible) {
      RuleOutcome chp = chp_clear(inst, options);
      GridResult grid = grid_min_uplift(inst, swp.dispatch);
      j["uplift_grid"] = {
          {"points", grid.points},
          {"best_price", report_round(grid.price)},
          {"best_total_uplift", report_round(grid.total_uplift)},
          {"chp_price", report_round(chp.prices.price(1, 0))},
          {"chp_total_uplift",
           report_round(single_market_total_uplift(inst, swp.dispatch, chp.prices.price(1, 0)))}};
    } else {
      j["uplift_grid"] = nullptr;  // only defined for a single market
    }
  } catch (const std::length_error& e) {
    throw Exit{kUsage, e.what()};
  } catch (const ClearingError& e) {
    throw Exit{kSolverFailure, e.what()};
  }
  emit(j, out, stem(path) + ".oracle.json");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead market clearing with convex hull, IP and European-like pricing",
               "pxclear"};
  app.require_subcommand(1);

  std::string instance, out, rule, rules = "all";
  double tol = -1;

  auto* validate = app.add_subcommand("validate", "check an instance file");
  validate->add_option("--instance", instance, "instance JSON")->required();

  auto* clear_cmd = app.add_subcommand("clear", "clear one pricing rule");
  clear_cmd->add_option("--rule", rule, "chp, ip or eu")->required();
  clear_cmd->add_option("--instance", instance, "instance JSON")->required();
  clear_cmd->add_option("--out", out, "output directory (default: stdout)");
  clear_cmd->add_option("--tol", tol, "largest accepted loss of a block under eu")
      ->check(CLI::NonNegativeNumber);
  clear_cmd->add_option("--eu-cut-budget", g_cut_budget, "master problems solved before eu gives up")
      ->check(CLI::PositiveNumber);

  auto* compare_cmd = app.add_subcommand("compare", "clear several rules and report");
  compare_cmd->add_option("--instance", instance, "instance JSON")->required();
  compare_cmd->add_option("--rules", rules, "all or a comma list of chp, ip, eu");
  compare_cmd->add_option("--out", out, "output directory for JSON and CSV (default: stdout)");
  compare_cmd->add_option("--tol", tol, "largest accepted loss of a block under eu")
      ->check(CLI::NonNegativeNumber);
  compare_cmd->add_option("--eu-cut-budget", g_cut_budget, "master problems solved before eu gives up")
      ->check(CLI::PositiveNumber);

  GeneratorConfig config;
  auto* gen = app.add_subcommand("generate", "write a synthetic instance");
  gen->add_option("--out", out, "output file (default: stdout)");
  gen->add_option("--seed", config.seed, "random seed");
  gen->add_option("--periods", config.periods, "number of periods");
  gen->add_option("--locations", config.locations, "number of locations in a chain");
  gen->add_option("--line-capacity", config.line_capacity_mw, "capacity of each line in MW");
  gen->add_option("--non-convex", config.non_convex_count, "number of non-convex groups");
  gen->add_option("--steps", config.steps_total, "target number of steps");
  gen->add_option("--ramped-share", config.ramped_share, "share of ramped non-convex supply");

  auto* oracle = app.add_subcommand("oracle", "brute-force reference values");
  oracle->add_option("--instance", instance, "instance JSON")->required();
  oracle->add_option("--out", out, "output directory (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*validate) return run_validate(instance);
    if (*clear_cmd) return run_clear(rule, instance, out, tol);
    if (*compare_cmd) return run_compare(instance, rules, out, tol);
    if (*gen) return run_generate(config, out);
    if (*oracle) return run_oracle(instance, out);
  } catch (const Exit& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
