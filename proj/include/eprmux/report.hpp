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


// Machine-readable run reports. Field names are part of the CLI contract and
// are listed in docs/report.schema.json.

#ifndef EPRMUX_REPORT_HPP
#define EPRMUX_REPORT_HPP

#include <string>

#include <json.hpp>

#include "eprmux/criteria.hpp"
#include "eprmux/montecarlo.hpp"
#include "eprmux/multiplex.hpp"

namespace eprmux {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchemaId = "eprmux-report/1";
/// The boolean verdicts need I or E below 1 by more than this, so that
/// round-off on a vacuum state does not read as entanglement.
inline constexpr double kVerdictMargin = 1e-9;

nlohmann::ordered_json versions_json();
nlohmann::ordered_json moments_to_json(const JointSecondMoments& moments);
nlohmann::ordered_json report_to_json(const EntanglementReport& report);
nlohmann::ordered_json plan_to_json(const MultiplexPlan& plan,
                                    const PlanValidation* validation = nullptr);
nlohmann::ordered_json montecarlo_to_json(const MonteCarloSummary& summary);

/// "key,value" lines.
std::string report_csv(const EntanglementReport& report);
/// One row per channel.
std::string plan_csv(const MultiplexPlan& plan, const PlanValidation* validation = nullptr);
/// One row per trial.
std::string montecarlo_csv(const MonteCarloSummary& summary);

}  // namespace eprmux

#endif  // EPRMUX_REPORT_HPP
