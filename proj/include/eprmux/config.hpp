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


// Scenario configuration files (JSON; grammar in docs/config.md).

#ifndef EPRMUX_CONFIG_HPP
#define EPRMUX_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "eprmux/montecarlo.hpp"
#include "eprmux/optics.hpp"

namespace eprmux {

inline constexpr const char* kConfigSchemaId = "eprmux-config/1";

struct ScenarioConfig {
  ChainScenario scenario;
  /// Set when the source strength was given in dB; echoed back.
  std::optional<double> squeezing_db;
  double squeezing_reference_frequency = 5e6;
  std::uint64_t seed = 1;
  int trials = 1;
  MonteCarloOptions montecarlo;
  std::optional<std::string> output;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
/// Physical infeasibility (a pump at or above threshold, colliding labels)
/// surfaces as the corresponding library error.
ScenarioConfig parse_config(const nlohmann::ordered_json& document);
ScenarioConfig load_config(const std::string& path);

/// Complete config, every default spelled out.
nlohmann::ordered_json config_to_json(const ScenarioConfig& config);

/// Fit template: the reference channel geometry with a 25 MHz HWHM source
/// and the ideal sideband splitter, so that all losses sit in the lumped
/// source efficiency.
ChainScenario fit_template();

}  // namespace eprmux

#endif  // EPRMUX_CONFIG_HPP
