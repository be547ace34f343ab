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


// eprmux command line: simulate, plan, montecarlo, fit.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 physics or
// numeric failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eprmux/config.hpp"
#include "eprmux/criteria.hpp"
#include "eprmux/errors.hpp"
#include "eprmux/montecarlo.hpp"
#include "eprmux/multiplex.hpp"
#include "eprmux/report.hpp"

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPhysics = 3;

struct Common {
  std::string out;
  std::string format = "structured";
  bool timing = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Write the report here instead of stdout");
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"structured", "csv"}));
  cmd->add_flag("--timing", c.timing, "Include wall time (reports stop being byte-stable)");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path);
  if (!f) throw eprmux::ConfigError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw eprmux::ConfigError("failed writing " + path);
}

Json envelope(const std::string& command) {
  Json j;
  j["schema"] = eprmux::kReportSchemaId;
  j["command"] = command;
  j["versions"] = eprmux::versions_json();
  return j;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string output_path(const Common& c, const eprmux::ScenarioConfig* cfg) {
  if (!c.out.empty()) return c.out;
  if (cfg && cfg->output) return *cfg->output;
  return {};
}

// simulate ------------------------------------------------------------------

int run_simulate(const std::string& config_path, const Common& c) {
  const auto t0 = Clock::now();
  const eprmux::ScenarioConfig cfg = eprmux::load_config(config_path);
  const eprmux::ChainResult chain = eprmux::run_chain(cfg.scenario);
  const eprmux::EntanglementReport report = eprmux::evaluate_chain(chain, cfg.scenario);
  const auto bob_modes = chain.state.modes_on(chain.bob_path);
  const double ppt = eprmux::ppt_min_symplectic_eigenvalue(chain.state, bob_modes);
  for (const auto& w : chain.warnings) std::cerr << "warning: " << w << "\n";

  if (c.format == "csv") {
    std::string text = eprmux::report_csv(report);
    text += "ppt_min_symplectic_eigenvalue," + std::to_string(ppt) + "\n";
    emit(text, output_path(c, &cfg));
    return kExitOk;
  }
  Json j = envelope("simulate");
  j["config"] = eprmux::config_to_json(cfg);
  if (cfg.squeezing_db) j["source_squeezing_db"] = *cfg.squeezing_db;
  j["report"] = eprmux::report_to_json(report);
  Json ch;
  ch["alice_demod_phase"] = chain.alice_demod_phase;
  ch["bob_demod_phase"] = chain.bob_demod_phase;
  ch["ppt_min_symplectic_eigenvalue"] = ppt;
  ch["warnings"] = chain.warnings;
  j["chain"] = ch;
  if (c.timing) j["wall_time_s"] = seconds_since(t0);
  emit(j.dump(2) + "\n", output_path(c, &cfg));
  return kExitOk;
}

// plan ----------------------------------------------------------------------

std::pair<double, double> parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw eprmux::ConfigError("--band expects LO:HI in Hz");
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double lo = std::stod(a, &used_a);
    const double hi = std::stod(b, &used_b);
    if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing");
    return {lo, hi};
  } catch (const std::exception&) {
    throw eprmux::ConfigError("--band expects LO:HI in Hz, got \"" + text + "\"");
  }
}

struct PlanArgs {
  std::string band;
  double detbw = 0.0;
  double guard = 0.0;
  double demod = 2e5;
  bool validate = false;
  std::string config;
};

int run_plan(const PlanArgs& a, const Common& c) {
  const auto t0 = Clock::now();
  const auto [lo, hi] = parse_band(a.band);
  std::optional<eprmux::ScenarioConfig> cfg;
  if (!a.config.empty()) cfg = eprmux::load_config(a.config);
  const eprmux::MultiplexPlan plan = eprmux::plan_multiplex(lo, hi, a.detbw, a.guard, a.demod);
  std::optional<eprmux::PlanValidation> validation;
  if (a.validate) {
    const eprmux::OpaSource source =
        cfg ? cfg->scenario.source : eprmux::reference_scenario().source;
    validation = eprmux::validate_plan(plan, source);
  }
  const eprmux::PlanValidation* v = validation ? &*validation : nullptr;
  if (c.format == "csv") {
    emit(eprmux::plan_csv(plan, v), c.out);
    return kExitOk;
  }
  Json j = envelope("plan");
  j["plan"] = eprmux::plan_to_json(plan, v);
  if (c.timing) j["wall_time_s"] = seconds_since(t0);
  emit(j.dump(2) + "\n", c.out);
  return kExitOk;
}

// montecarlo ----------------------------------------------------------------

struct MonteCarloArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> duration;
  std::string export_records;
  std::string export_streams;
};

int run_montecarlo(const MonteCarloArgs& a, const Common& c) {
  const auto t0 = Clock::now();
  eprmux::ScenarioConfig cfg = eprmux::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) {
    if (*a.trials < 1) throw eprmux::ConfigError("--trials must be at least 1");
    cfg.trials = *a.trials;
  }
  if (a.duration) {
    if (!(*a.duration > 0.0)) throw eprmux::ConfigError("--duration must be positive");
    cfg.montecarlo.duration = *a.duration;
  }

  namespace fs = std::filesystem;
  for (const std::string* dir : {&a.export_records, &a.export_streams}) {
    if (!dir->empty()) fs::create_directories(*dir);
  }
  std::mutex io;
  std::map<std::uint64_t, std::map<std::string, eprmux::DemodulatedSet>> pending;
  eprmux::TrialHooks hooks;
  if (!a.export_records.empty()) {
    hooks.on_records = [&](std::uint64_t trial, const std::string& setting,
                           const eprmux::RecordPair& r) {
      const std::string stem = "trial" + std::to_string(trial) + "_" + setting;
      eprmux::write_raw_record((fs::path(a.export_records) / (stem + "_alice.raw")).string(),
                               r.alice, r.sample_rate, r.seed, stem + "_alice");
      eprmux::write_raw_record((fs::path(a.export_records) / (stem + "_bob.raw")).string(),
                               r.bob, r.sample_rate, r.seed, stem + "_bob");
    };
  }
  if (!a.export_streams.empty()) {
    hooks.on_streams = [&](std::uint64_t trial, const std::string& setting,
                           const eprmux::DemodulatedSet& s, double rate) {
      std::lock_guard<std::mutex> lock(io);
      auto& sets = pending[trial];
      sets[setting] = s;
      if (sets.size() < 3) return;
      std::vector<std::string> names;
      std::vector<const std::vector<double>*> streams;
      for (const char* name : {"x", "x_perp", "vacuum"}) {
        names.push_back(std::string("alice_") + name);
        streams.push_back(&sets.at(name).alice);
        names.push_back(std::string("bob_") + name);
        streams.push_back(&sets.at(name).bob);
      }
      eprmux::write_streams_csv(
          (fs::path(a.export_streams) / ("trial" + std::to_string(trial) + "_streams.csv")).string(),
          names, streams, rate);
      pending.erase(trial);
    };
  }

  const eprmux::MonteCarloSummary summary =
      eprmux::run_montecarlo(cfg.scenario, cfg.montecarlo, cfg.seed, cfg.trials, &hooks);
  if (c.format == "csv") {
    emit(eprmux::montecarlo_csv(summary), output_path(c, &cfg));
    return kExitOk;
  }
  Json j = envelope("montecarlo");
  j["config"] = eprmux::config_to_json(cfg);
  if (cfg.squeezing_db) j["source_squeezing_db"] = *cfg.squeezing_db;
  j["montecarlo"] = eprmux::montecarlo_to_json(summary);
  if (c.timing) j["wall_time_s"] = seconds_since(t0);
  emit(j.dump(2) + "\n", output_path(c, &cfg));
  return kExitOk;
}

// fit -----------------------------------------------------------------------

struct FitArgs {
  double target_i = 0.0;
  double target_e = 0.0;
  std::string tmpl;
};

int run_fit(const FitArgs& a, const Common& c) {
  if (!(a.target_i > 0.0) || !(a.target_e > 0.0) || !std::isfinite(a.target_i) ||
      !std::isfinite(a.target_e)) {
    throw eprmux::ConfigError("targets must be positive and finite");
  }
  eprmux::ScenarioConfig cfg;
  if (!a.tmpl.empty()) {
    cfg = eprmux::load_config(a.tmpl);
  } else {
    cfg.scenario = eprmux::fit_template();
  }
  const eprmux::FitResult fit = eprmux::fit_to_measurements(a.target_i, a.target_e, cfg.scenario);
  cfg.scenario = fit.scenario;
  cfg.squeezing_db.reset();
  std::cerr << "fit: pump_parameter=" << fit.scenario.source.pump_parameter
            << " efficiency=" << fit.scenario.source.efficiency << " I=" << fit.report.i_insep
            << " E=" << fit.report.e_epr << " residual=" << fit.residual << "\n";
  emit(eprmux::config_to_json(cfg).dump(2) + "\n", c.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EPR channel multiplexing simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", eprmux::kVersion);

  Common sim_common, plan_common, mc_common, fit_common;

  std::string sim_config;
  auto* sim = app.add_subcommand("simulate", "Evaluate I and E for a scenario config");
  sim->add_option("config", sim_config, "Scenario config")->required();
  add_common(sim, sim_common);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Pack EPR channels into a squeezed band");
  plan->add_option("--band", plan_args.band, "Usable band LO:HI in Hz")->required();
  plan->add_option("--detbw", plan_args.detbw, "Detection bandwidth B (per-channel half-width), Hz")
      ->required();
  plan->add_option("--guard", plan_args.guard, "Guard band between channels, Hz");
  plan->add_option("--demod", plan_args.demod, "Demodulation frequency, Hz");
  plan->add_flag("--validate", plan_args.validate, "Predict (I, E) per channel");
  plan->add_option("--config", plan_args.config, "Take the source for --validate from this config");
  add_common(plan, plan_common);

  MonteCarloArgs mc_args;
  auto* mc = app.add_subcommand("montecarlo", "Time-domain estimate of I and E with error bars");
  mc->add_option("config", mc_args.config, "Scenario config")->required();
  mc->add_option("--seed", mc_args.seed, "Base seed, overrides the config");
  mc->add_option("--trials", mc_args.trials, "Number of trials, overrides the config");
  mc->add_option("--duration", mc_args.duration, "Record length in s, overrides the config");
  mc->add_option("--export-records", mc_args.export_records, "Directory for raw records");
  mc->add_option("--export-streams", mc_args.export_streams,
                 "Directory for CSV demodulated streams");
  add_common(mc, mc_common);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit pump and lumped efficiency to measured I and E");
  fit->add_option("--target-i", fit_args.target_i, "Measured inseparability")->required();
  fit->add_option("--target-e", fit_args.target_e, "Measured EPR product")->required();
  fit->add_option("--template", fit_args.tmpl, "Config whose geometry is kept");
  add_common(fit, fit_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return run_simulate(sim_config, sim_common);
    if (*plan) return run_plan(plan_args, plan_common);
    if (*mc) return run_montecarlo(mc_args, mc_common);
    if (*fit) return run_fit(fit_args, fit_common);
  } catch (const eprmux::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const eprmux::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
