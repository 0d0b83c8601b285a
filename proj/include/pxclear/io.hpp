// JSON instance files, result/report serialization and the synthetic
// instance generator.

#ifndef PXCLEAR_IO_HPP_
#define PXCLEAR_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pxclear/model.hpp"
#include "pxclear/pricing.hpp"
#include "pxclear/settlement.hpp"

namespace pxclear {

/// Malformed JSON or a schema violation (unknown field, wrong type, missing
/// required field). Semantic problems are reported by InstanceError.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema check only; call validate_instance for the model invariants.
Instance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const Instance& instance);

/// Reads, schema-checks and validates an instance file. Throws ParseError
/// or InstanceError.
Instance parse_instance(const std::string& path);
/// Like parse_instance but skips validate_instance.
Instance parse_instance_unchecked(const std::string& path);
void write_instance(const Instance& instance, const std::string& path);

/// Currency and MW values are rounded to 6 decimals in every report.
double report_round(double value);

nlohmann::json outcome_to_json(const Instance& instance, const RuleOutcome& outcome);
nlohmann::json report_to_json(const Instance& instance, const ClearingReport& report);

inline constexpr const char* kReportCsvHeader =
    "instance,rule,welfare,welfare_loss,total_uplift,pab,prb,runtime_s";

/// One row per rule plus the swp row; no header.
void write_report_csv_rows(const ClearingReport& report, std::ostream& out);

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int periods = 24;
  int locations = 2;
  double line_capacity_mw = 250.0;
  int non_convex_count = 20;
  int steps_total = 500;
  int convex_supply_per_location = 2;
  int convex_demand_per_location = 2;
  double load_min_mw = 600.0;  // convex demand volume per market
  double load_max_mw = 1200.0;
  double supply_share_min = 0.55;  // convex supply volume as a share of load
  double supply_share_max = 0.85;
  double supply_price_min = 10.0;
  double supply_price_max = 150.0;
  double demand_price_min = 20.0;
  double demand_price_max = 300.0;
  double non_convex_capacity_min_mw = 40.0;
  double non_convex_capacity_max_mw = 200.0;
  double non_convex_price_min = 40.0;
  double non_convex_price_max = 110.0;
  double startup_cost_min = 200.0;
  double startup_cost_max = 5000.0;
  double min_ratio_min = 0.2;
  double min_ratio_max = 0.6;
  double ramp_fraction_min = 0.3;  // of the group's per-period capacity
  double ramp_fraction_max = 1.0;
  double ramped_share = 0.5;       // of non-convex supply groups
  double demand_share = 0.2;       // of non-convex groups
  int window_min = 1;              // periods a non-convex group is active
  int window_max = 12;
};

/// Throws std::invalid_argument for inverted ranges or non-positive sizes.
void check_config(const GeneratorConfig& config);

/// Deterministic in (config): identical configs give identical instances.
Instance generate(const GeneratorConfig& config);

}  // namespace pxclear

#endif  // PXCLEAR_IO_HPP_
