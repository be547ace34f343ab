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


#include "eprmux/report.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <sstream>

namespace eprmux {

namespace {

using Json = nlohmann::ordered_json;

std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

Json versions_json() {
  Json j;
  j["eprmux"] = kVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  j["fftw"] = std::string(fftw_version);
  j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  return j;
}

Json moments_to_json(const JointSecondMoments& m) {
  Json j;
  j["V_XA"] = m.v_xa;
  j["V_XB"] = m.v_xb;
  j["V_XpA"] = m.v_xpa;
  j["V_XpB"] = m.v_xpb;
  j["C_X"] = m.c_x;
  j["C_Xp"] = m.c_xp;
  return j;
}

Json report_to_json(const EntanglementReport& r) {
  Json j;
  j["I_insep"] = r.i_insep;
  j["E_epr"] = r.e_epr;
  j["g_opt"] = r.g_opt;
  j["g_perp_opt"] = r.g_perp_opt;
  j["theta_A"] = r.theta_a;
  j["theta_B"] = r.theta_b;
  j["conditional_X"] = r.conditional_x;
  j["conditional_Xp"] = r.conditional_x_perp;
  j["inseparable"] = r.i_insep < 1.0 - kVerdictMargin;
  j["epr_paradox"] = r.e_epr < 1.0 - kVerdictMargin;
  j["moments"] = moments_to_json(r.moments);
  return j;
}

Json plan_to_json(const MultiplexPlan& plan, const PlanValidation* validation) {
  Json j;
  j["band"] = Json::array({plan.band_min, plan.band_max});
  j["detection_bandwidth"] = plan.detection_bandwidth;
  j["guard_band"] = plan.guard_band;
  j["demod_freq"] = plan.demod_freq;
  j["N"] = plan.channels.size();
  Json channels = Json::array();
  for (std::size_t i = 0; i < plan.channels.size(); ++i) {
    const auto& c = plan.channels[i];
    Json cj;
    cj["center"] = c.center;
    cj["lo_pair"] = Json::array({c.lo_pair[0], c.lo_pair[1]});
    cj["sidebands"] = Json::array({c.sidebands[0], c.sidebands[1], c.sidebands[2], c.sidebands[3]});
    cj["filter_detunings"] = Json::array({c.filter_detunings[0], c.filter_detunings[1]});
    if (validation) cj["report"] = report_to_json(validation->channels.at(i).report);
    channels.push_back(cj);
  }
  j["channels"] = channels;
  if (validation) j["max_cross_channel_covariance"] = validation->max_cross_channel_covariance;
  return j;
}

Json montecarlo_to_json(const MonteCarloSummary& s) {
  Json j;
  j["analytic"] = report_to_json(s.spectra.analytic);
  j["demod_phase_A"] = s.spectra.demod_phase_a;
  j["demod_phase_B"] = s.spectra.demod_phase_b;
  j["trials"] = s.trials.size();
  j["mean_I"] = s.mean_i;
  j["mean_E"] = s.mean_e;
  j["I_within_3sigma"] = s.i_within_3sigma;
  j["E_within_3sigma"] = s.e_within_3sigma;
  Json runs = Json::array();
  for (const auto& t : s.trials) {
    Json r;
    r["index"] = t.index;
    r["seed"] = t.seed;
    r["I_insep"] = t.estimate.report.i_insep;
    r["sigma_I"] = t.estimate.sigma_i;
    r["E_epr"] = t.estimate.report.e_epr;
    r["sigma_E"] = t.estimate.sigma_e;
    r["samples"] = t.estimate.samples;
    r["blocks"] = t.estimate.blocks;
    r["vacuum_variance_A"] = t.estimate.vacuum_a;
    r["vacuum_variance_B"] = t.estimate.vacuum_b;
    r["moments"] = moments_to_json(t.estimate.report.moments);
    runs.push_back(r);
  }
  j["runs"] = runs;
  return j;
}

std::string report_csv(const EntanglementReport& r) {
  std::ostringstream s;
  s << "key,value\n";
  const std::pair<const char*, double> rows[] = {
      {"I_insep", r.i_insep},         {"E_epr", r.e_epr},
      {"g_opt", r.g_opt},             {"g_perp_opt", r.g_perp_opt},
      {"theta_A", r.theta_a},         {"theta_B", r.theta_b},
      {"conditional_X", r.conditional_x}, {"conditional_Xp", r.conditional_x_perp},
      {"V_XA", r.moments.v_xa},       {"V_XB", r.moments.v_xb},
      {"V_XpA", r.moments.v_xpa},     {"V_XpB", r.moments.v_xpb},
      {"C_X", r.moments.c_x},         {"C_Xp", r.moments.c_xp},
  };
  for (const auto& [k, v] : rows) s << k << "," << csv_number(v) << "\n";
  return s.str();
}

std::string plan_csv(const MultiplexPlan& plan, const PlanValidation* validation) {
  std::ostringstream s;
  s << "channel,center,lo_minus,lo_plus,sb0,sb1,sb2,sb3,filter_A,filter_B";
  if (validation) s << ",I_insep,E_epr";
  s << "\n";
  for (std::size_t i = 0; i < plan.channels.size(); ++i) {
    const auto& c = plan.channels[i];
    s << i + 1 << "," << csv_number(c.center) << "," << csv_number(c.lo_pair[0]) << ","
      << csv_number(c.lo_pair[1]);
    for (double f : c.sidebands) s << "," << csv_number(f);
    s << "," << csv_number(c.filter_detunings[0]) << "," << csv_number(c.filter_detunings[1]);
    if (validation) {
      const auto& r = validation->channels.at(i).report;
      s << "," << csv_number(r.i_insep) << "," << csv_number(r.e_epr);
    }
    s << "\n";
  }
  return s.str();
}

std::string montecarlo_csv(const MonteCarloSummary& summary) {
  std::ostringstream s;
  s << "trial,seed,I_insep,sigma_I,E_epr,sigma_E,I_analytic,E_analytic\n";
  for (const auto& t : summary.trials) {
    s << t.index << "," << t.seed << "," << csv_number(t.estimate.report.i_insep) << ","
      << csv_number(t.estimate.sigma_i) << "," << csv_number(t.estimate.report.e_epr) << ","
      << csv_number(t.estimate.sigma_e) << "," << csv_number(summary.spectra.analytic.i_insep)
      << "," << csv_number(summary.spectra.analytic.e_epr) << "\n";
  }
  return s.str();
}

}  // namespace eprmux
