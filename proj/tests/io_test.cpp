#include "pxclear/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

namespace pxclear {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string data(const std::string& name) { return std::string(PXCLEAR_DATA_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("pxclear_io_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal() {
  return json::parse(R"({
    "periods": 1,
    "locations": ["Z"],
    "participants": [
      {"id": "A", "side": "demand", "location": "Z",
       "steps": [{"id": "1", "period": 1, "quantity_mw": 10, "price": 300}]}
    ]
  })");
}

TEST(ParseInstance, BundledExamplesMatchFixtures) {
  EXPECT_EQ(parse_instance(data("example_1_1.json")), testing::example_1_1());
  EXPECT_EQ(parse_instance(data("example_1_2.json")), testing::example_1_2());
  EXPECT_EQ(parse_instance(data("example_2.json")), testing::example_2());
}

TEST(ParseInstance, OptionalFieldsTakeDefaults) {
  Instance inst = instance_from_json(minimal());
  ASSERT_EQ(inst.participants.size(), 1u);
  const BidGroup& g = inst.participants[0];
  EXPECT_TRUE(g.convex);
  EXPECT_EQ(g.fixed_cost, 0.0);
  EXPECT_FALSE(g.has_ramps());
  EXPECT_EQ(g.steps[0].min_ratio, 0.0);
  EXPECT_TRUE(inst.lines.empty());
}

TEST(ParseInstance, RejectsUnknownFields) {
  json j = minimal();
  j["particpants"] = json::array();
  EXPECT_THROW(instance_from_json(j), ParseError);
  j = minimal();
  j["participants"][0]["steps"][0]["qty"] = 3;
  try {
    instance_from_json(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("qty"), std::string::npos);
  }
}

TEST(ParseInstance, RejectsSchemaViolations) {
  json missing = minimal();
  missing["participants"][0].erase("steps");
  EXPECT_THROW(instance_from_json(missing), ParseError);
  json wrong_type = minimal();
  wrong_type["participants"][0]["steps"][0]["price"] = "cheap";
  EXPECT_THROW(instance_from_json(wrong_type), ParseError);
  json bad_side = minimal();
  bad_side["participants"][0]["side"] = "buyer";
  EXPECT_THROW(instance_from_json(bad_side), ParseError);
  json fractional = minimal();
  fractional["periods"] = 1.5;
  EXPECT_THROW(instance_from_json(fractional), ParseError);
  EXPECT_THROW(instance_from_json(json::array()), ParseError);
}

TEST(ParseInstance, MalformedFileAndValidationFailure) {
  const std::string bad = temp_path("malformed.json");
  std::ofstream(bad) << "{\"periods\": 1,";
  EXPECT_THROW(parse_instance(bad), ParseError);
  EXPECT_THROW(parse_instance(temp_path("does_not_exist.json")), ParseError);

  json j = minimal();
  j["participants"][0]["steps"][0]["min_ratio"] = 2.0;
  const std::string invalid = temp_path("invalid.json");
  std::ofstream(invalid) << j.dump();
  EXPECT_THROW(parse_instance(invalid), InstanceError);
  EXPECT_NO_THROW(parse_instance_unchecked(invalid));
  std::remove(bad.c_str());
  std::remove(invalid.c_str());
}

TEST(WriteInstance, RoundTrip) {
  GeneratorConfig config;
  config.seed = 7;
  config.periods = 4;
  config.non_convex_count = 5;
  config.steps_total = 60;
  Instance inst = generate(config);
  const std::string path = temp_path("round_trip.json");
  write_instance(inst, path);
  EXPECT_EQ(parse_instance(path), inst);
  std::remove(path.c_str());
}

TEST(Generate, DefaultsEchoConfig) {
  Instance inst = generate({});
  EXPECT_EQ(inst.periods, 24);
  EXPECT_EQ(inst.locations.size(), 2u);
  EXPECT_EQ(inst.lines.size(), 1u);
  EXPECT_EQ(inst.non_convex_count(), 20);
  EXPECT_NEAR(inst.step_count(), 500, 50);
  EXPECT_TRUE(validate_instance(inst).empty());
}

TEST(Generate, SameSeedGivesByteIdenticalFiles) {
  GeneratorConfig config;
  config.seed = 1;
  const std::string a = temp_path("gen_a.json");
  const std::string b = temp_path("gen_b.json");
  write_instance(generate(config), a);
  write_instance(generate(config), b);
  EXPECT_EQ(slurp(a), slurp(b));
  config.seed = 2;
  EXPECT_NE(generate(config), generate(GeneratorConfig{}));
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST(Generate, MinRatioOnlyOnFirstSupplyStep) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorConfig config;
    config.seed = seed;
    Instance inst = generate(config);
    EXPECT_TRUE(validate_instance(inst).empty());
    for (const auto& g : inst.participants) {
      for (const auto& s : g.steps) {
        if (s.min_ratio == 0.0) continue;
        EXPECT_FALSE(g.convex);
        EXPECT_EQ(g.side, Side::kSupply);
        EXPECT_EQ(s.id.substr(s.id.size() - 2), "s1") << g.id << "/" << s.id;
      }
    }
  }
}

TEST(Generate, LargeScaleConfig) {
  GeneratorConfig config;
  config.non_convex_count = 90;
  config.steps_total = 14300;
  Instance inst = generate(config);
  EXPECT_EQ(inst.non_convex_count(), 90);
  EXPECT_NEAR(inst.step_count(), 14300, 200);
  EXPECT_TRUE(validate_instance(inst).empty());
}

TEST(Generate, InvalidConfigThrows) {
  GeneratorConfig inverted;
  inverted.supply_price_min = 200;
  inverted.supply_price_max = 100;
  EXPECT_THROW(generate(inverted), std::invalid_argument);
  GeneratorConfig no_periods;
  no_periods.periods = 0;
  EXPECT_THROW(generate(no_periods), std::invalid_argument);
  GeneratorConfig ratio;
  ratio.min_ratio_max = 1.5;
  EXPECT_THROW(check_config(ratio), std::invalid_argument);
}

TEST(ReportRound, SixDecimalsWithoutNegativeZero) {
  EXPECT_DOUBLE_EQ(report_round(170.0 / 3.0), 56.666667);
  EXPECT_FALSE(std::signbit(report_round(-1e-9)));
}

TEST(OutcomeJson, ChpExample12) {
  Instance inst = testing::example_1_2();
  json j = outcome_to_json(inst, chp_clear(inst));
  EXPECT_EQ(j["rule"], "chp");
  EXPECT_TRUE(j["feasible"].get<bool>());
  ASSERT_EQ(j["prices"]["pi"].size(), 1u);
  EXPECT_NEAR(j["prices"]["pi"][0]["price"].get<double>(), 56.666667, 1e-4);
  EXPECT_EQ(j["prices"]["pi"][0]["location"], "Z");
  EXPECT_NEAR(j["dispatch"]["welfare"].get<double>(), 2400.0, 1e-6);
  EXPECT_EQ(j["dispatch"]["participants"].size(), 4u);
}

TEST(OutcomeJson, IpCarriesCommitmentPrices) {
  Instance inst = testing::example_1_1();
  json j = outcome_to_json(inst, ip_clear(inst));
  EXPECT_NEAR(j["prices"]["delta"]["C"].get<double>(), -330.0, 1e-6);
}

TEST(ReportCsv, OneRowPerRulePlusWelfare) {
  Instance inst = testing::example_1_1();
  ClearingReport rep = compare(inst, {Rule::kChp, Rule::kIp, Rule::kEu}, {}, "example_1_1");
  std::ostringstream out;
  write_report_csv_rows(rep, out);
  std::istringstream lines(out.str());
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("example_1_1,swp,2570.000000,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("example_1_1,eu,2000.000000,570.000000,", 0), 0u);
  EXPECT_EQ(std::string(kReportCsvHeader),
            "instance,rule,welfare,welfare_loss,total_uplift,pab,prb,runtime_s");
  json j = report_to_json(inst, rep);
  EXPECT_EQ(j["rules"].size(), 3u);
  EXPECT_EQ(j["rules"][1]["pab"], 1);
}

}  // namespace
}  // namespace pxclear
