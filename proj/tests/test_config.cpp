// Copyright 2026 The eprmux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "eprmux/config.hpp"
#include "eprmux/errors.hpp"
#include "eprmux/report.hpp"

namespace {

using namespace eprmux;
using Json = nlohmann::ordered_json;

std::string bundled(const std::string& name) {
  return std::string(EPRMUX_SOURCE_DIR) + "/configs/" + name;
}

Json minimal() { return Json::parse(R"({"source": {"pump_parameter": 0.3}})"); }

TEST(Parse, MinimalConfigTakesDefaults) {
  const ScenarioConfig c = parse_config(minimal());
  EXPECT_EQ(c.scenario.source.pump_parameter, 0.3);
  EXPECT_EQ(c.scenario.source.convention, BandwidthConvention::fwhm);
  EXPECT_FALSE(c.scenario.fbs.has_value());
  EXPECT_EQ(c.scenario.f1, 6.8e6);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.montecarlo.duration, 10.0);
  EXPECT_FALSE(c.scenario.alice.demod_phase.has_value());
}

TEST(Parse, UnknownKeyIsConfigError) {
  Json j = minimal();
  j["source"]["pump"] = 0.5;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = minimal();
  j["extra"] = 1;
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Parse, WrongTypesAndRangesAreConfigErrors) {
  Json j = minimal();
  j["source"]["efficiency"] = "high";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = minimal();
  j["source"]["efficiency"] = 1.2;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = minimal();
  j["alice"] = {{"path_loss", -0.1}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = minimal();
  j["schema"] = "eprmux-config/2";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = minimal();
  j["montecarlo"] = {{"sample_rate", 5e5}};  // aliasing
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Parse, PumpAndDecibelsAreExclusive) {
  Json j = minimal();
  j["source"]["squeezing_db"] = 3.0;
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Parse, DecibelsConvertedOnce) {
  const ScenarioConfig c = parse_config(Json::parse(R"({"source": {"squeezing_db": 5.5}})"));
  ASSERT_TRUE(c.squeezing_db.has_value());
  EXPECT_NEAR(squeezing_spectrum(c.scenario.source, 5e6).squeezed, variance_from_db(5.5), 1e-12);
  // The emitted config carries the pump parameter only.
  const Json out = config_to_json(c);
  EXPECT_TRUE(out["source"].contains("pump_parameter"));
  EXPECT_FALSE(out["source"].contains("squeezing_db"));
}

TEST(Parse, PhysicsErrorsPropagate) {
  Json j = minimal();
  j["source"]["pump_parameter"] = 1.2;
  EXPECT_THROW(parse_config(j), AboveThreshold);
  j = minimal();
  j["sidebands"] = {{"f1", 6.8e6}, {"f2", 7.2e6}, {"rbw", 5e5}};
  EXPECT_THROW(parse_config(j), LabelCollision);
}

TEST(Parse, CavityFromGeometry) {
  const ScenarioConfig c = parse_config(Json::parse(R"({
    "source": {"pump_parameter": 0.3},
    "splitter": {"type": "cavity", "detuning": -7e6, "round_trip_length": 0.52, "finesse": 370},
    "bob_filter": {"detuning": 7e6, "linewidth": 1.5e6},
    "alice": {"demod_phase": 0.25}
  })"));
  ASSERT_TRUE(c.scenario.fbs.has_value());
  EXPECT_DOUBLE_EQ(c.scenario.fbs->linewidth, linewidth_from_finesse(0.52, 370));
  ASSERT_TRUE(c.scenario.bob_filter.has_value());
  EXPECT_EQ(c.scenario.bob_filter->linewidth, 1.5e6);
  EXPECT_EQ(c.scenario.alice.demod_phase, std::optional<double>(0.25));
}

TEST(Parse, RoundTripThroughJson) {
  const ScenarioConfig a = load_config(bundled("reference-fbs.config"));
  const ScenarioConfig b = parse_config(config_to_json(a));
  EXPECT_EQ(config_to_json(a).dump(), config_to_json(b).dump());
  EXPECT_EQ(analyze(a.scenario).i_insep, analyze(b.scenario).i_insep);
}

TEST(Load, CommentsAllowedAndMissingFileIsConfigError) {
  const auto path = std::filesystem::temp_directory_path() / "eprmux_test_comments.config";
  std::ofstream(path) << "// vacuum\n{\"source\": {\"pump_parameter\": 0} /* none */}\n";
  EXPECT_EQ(load_config(path.string()).scenario.source.pump_parameter, 0.0);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config("/nonexistent/eprmux.config"), ConfigError);
  const auto bad = std::filesystem::temp_directory_path() / "eprmux_test_bad.config";
  std::ofstream(bad) << "{\"source\": ";
  EXPECT_THROW(load_config(bad.string()), ConfigError);
  std::filesystem::remove(bad);
}

TEST(Bundled, FittedConfigReproducesMeasuredValues) {
  const auto r = analyze(load_config(bundled("paper-n1.config")).scenario);
  EXPECT_NEAR(r.i_insep, 0.41, 1e-3);
  EXPECT_NEAR(r.e_epr, 0.64, 1e-3);
}

TEST(Bundled, VacuumConfig) {
  const auto r = analyze(load_config(bundled("vacuum.config")).scenario);
  EXPECT_NEAR(r.i_insep, 1.0, 1e-12);
  EXPECT_NEAR(r.e_epr, 1.0, 1e-12);
  EXPECT_FALSE(report_to_json(r)["inseparable"].get<bool>());
  EXPECT_FALSE(report_to_json(r)["epr_paradox"].get<bool>());
}

TEST(Bundled, ReferenceFbsConfig) {
  const ScenarioConfig c = load_config(bundled("reference-fbs.config"));
  const ChainScenario ref = reference_scenario();
  EXPECT_NEAR(c.scenario.source.pump_parameter, ref.source.pump_parameter, 1e-12);
  EXPECT_NEAR(analyze(c.scenario).i_insep, analyze(ref).i_insep, 1e-12);
}

TEST(Template, HwhmIdealSplitter) {
  const ChainScenario t = fit_template();
  EXPECT_EQ(t.source.convention, BandwidthConvention::hwhm);
  EXPECT_EQ(t.source.bandwidth, 25e6);
  EXPECT_FALSE(t.fbs.has_value());
}

TEST(Report, FieldNames) {
  const auto r = analyze(load_config(bundled("paper-n1.config")).scenario);
  const Json j = report_to_json(r);
  for (const char* key : {"I_insep", "E_epr", "g_opt", "g_perp_opt", "theta_A", "theta_B",
                          "conditional_X", "conditional_Xp", "inseparable", "epr_paradox", "moments"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["inseparable"].get<bool>());
  EXPECT_TRUE(j["epr_paradox"].get<bool>());
  EXPECT_NE(report_csv(r).find("I_insep,"), std::string::npos);
}

TEST(Report, PlanCarriesChannelCount) {
  const auto plan = plan_multiplex(4e6, 10e6, 5e5, 0.0, 2e5);
  const Json j = plan_to_json(plan);
  EXPECT_EQ(j["N"].get<int>(), 6);
  EXPECT_EQ(j["channels"].size(), 6u);
}

}  // namespace
