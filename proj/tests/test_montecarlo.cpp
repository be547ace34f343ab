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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "eprmux/config.hpp"
#include "eprmux/errors.hpp"
#include "eprmux/montecarlo.hpp"

namespace {

using namespace eprmux;
namespace fs = std::filesystem;

ChainScenario fitted() {
  ChainScenario s = fit_template();
  s.source.pump_parameter = 0.784036512595607;
  s.source.efficiency = 0.613534564408786;
  return s;
}

MonteCarloOptions short_run(double duration) {
  MonteCarloOptions o;
  o.duration = duration;
  return o;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eprmux_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Spectra, ReproduceAnalyticMoments) {
  const ChainScenario s = fitted();
  const ChannelSpectra sp = channel_spectra(s);
  const auto& m = sp.analytic.moments;
  const std::complex<double> turn = std::polar(1.0, -(sp.demod_phase_a - sp.demod_phase_b));
  EXPECT_NEAR(sp.x.s_aa, m.v_xa, 1e-12);
  EXPECT_NEAR(sp.x.s_bb, m.v_xb, 1e-12);
  EXPECT_NEAR(sp.x_perp.s_aa, m.v_xpa, 1e-12);
  EXPECT_NEAR(sp.x_perp.s_bb, m.v_xpb, 1e-12);
  EXPECT_NEAR((sp.x.s_ab * turn).real(), m.c_x, 1e-12);
  EXPECT_NEAR((sp.x_perp.s_ab * turn).real(), m.c_xp, 1e-12);
  EXPECT_NEAR(sp.analytic.i_insep, analyze(s).i_insep, 1e-12);
  // Each setting's 2x2 spectrum is positive semidefinite.
  for (const auto* set : {&sp.x, &sp.x_perp}) {
    EXPECT_LE(std::norm(set->s_ab), set->s_aa * set->s_bb * (1 + 1e-12));
  }
}

TEST(Trial, VacuumGivesUnitCriteria) {
  ChainScenario s = fit_template();
  s.source.pump_parameter = 0.0;
  const ChannelSpectra sp = channel_spectra(s);
  const TrialResult r = run_trial(sp, short_run(2.0), 11, 0);
  const auto& e = r.estimate;
  EXPECT_LE(std::abs(e.report.i_insep - 1.0), 3 * e.sigma_i) << e.report.i_insep << " +- " << e.sigma_i;
  EXPECT_LE(std::abs(e.report.e_epr - 1.0), 3 * e.sigma_e) << e.report.e_epr << " +- " << e.sigma_e;
  // Raw vacuum variance: PSD unit times the low-pass ENBW.
  const double enbw = ButterworthLowPass(4, 5e4, 2e6).equivalent_noise_bandwidth();
  EXPECT_NEAR(e.vacuum_a / (kPsdUnit * enbw), 1.0, 0.03);
}

TEST(Trial, FittedScenarioCloses) {
  const ChannelSpectra sp = channel_spectra(fitted());
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto e = run_trial(sp, short_run(1.0), 1000, k).estimate;
    EXPECT_LE(std::abs(e.report.i_insep - sp.analytic.i_insep), 3 * e.sigma_i) << k;
    EXPECT_LE(std::abs(e.report.e_epr - sp.analytic.e_epr), 3 * e.sigma_e) << k;
  }
}

TEST(Trial, ErrorShrinksWithDuration) {
  // Average over a few seeds to tame the scatter of the jackknife itself.
  const ChannelSpectra sp = channel_spectra(fitted());
  double short_sigma = 0, long_sigma = 0;
  for (std::uint64_t k = 0; k < 4; ++k) {
    short_sigma += run_trial(sp, short_run(1.0), 500, k).estimate.sigma_i;
    long_sigma += run_trial(sp, short_run(2.0), 600, k).estimate.sigma_i;
  }
  EXPECT_NEAR(short_sigma / long_sigma, std::sqrt(2.0), 0.15);
}

TEST(Trial, SeedRule) {
  const TrialSeeds s = trial_seeds(100, 7);
  EXPECT_EQ(s.trial, 107u);
  std::uint64_t state = 107;
  EXPECT_EQ(s.x, splitmix64(state));
  EXPECT_EQ(s.x_perp, splitmix64(state));
  EXPECT_EQ(s.vacuum, splitmix64(state));
}

TEST(Run, IndependentOfThreadCount) {
  MonteCarloOptions one = short_run(0.2), three = short_run(0.2);
  three.threads = 3;
  const auto a = run_montecarlo(fitted(), one, 9, 4);
  const auto b = run_montecarlo(fitted(), three, 9, 4);
  ASSERT_EQ(a.trials.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a.trials[k].index, k);
    EXPECT_EQ(a.trials[k].seed, 9 + k);
    EXPECT_EQ(a.trials[k].estimate.report.i_insep, b.trials[k].estimate.report.i_insep);
    EXPECT_EQ(a.trials[k].estimate.sigma_e, b.trials[k].estimate.sigma_e);
  }
  EXPECT_EQ(a.mean_i, b.mean_i);
}

TEST(Run, HooksSeeEverySetting) {
  std::mutex m;
  std::set<std::string> seen;
  TrialHooks hooks;
  hooks.on_records = [&](std::uint64_t, const std::string& setting, const RecordPair& r) {
    std::lock_guard lock(m);
    seen.insert("records:" + setting);
    EXPECT_EQ(r.alice.size(), r.bob.size());
  };
  hooks.on_streams = [&](std::uint64_t, const std::string& setting, const DemodulatedSet&, double rate) {
    std::lock_guard lock(m);
    seen.insert("streams:" + setting);
    EXPECT_DOUBLE_EQ(rate, 2e5);
  };
  run_montecarlo(fitted(), short_run(0.1), 1, 1, &hooks);
  EXPECT_EQ(seen, (std::set<std::string>{"records:x", "records:x_perp", "records:vacuum",
                                          "streams:x", "streams:x_perp", "streams:vacuum"}));
}

TEST(Estimate, MismatchedLengthsRejected) {
  DemodulatedSet a{std::vector<double>(1000, 0.1), std::vector<double>(1000, 0.2)};
  DemodulatedSet b{std::vector<double>(1000, 0.1), std::vector<double>(999, 0.2)};
  EXPECT_THROW(estimate_from_streams(a, b, a, 10), InvalidArgument);
  EXPECT_THROW(estimate_from_streams(a, a, a, 1), InvalidArgument);
  EXPECT_THROW(estimate_from_streams(a, a, a, 600), InvalidArgument);
}

TEST(Options, Validation) {
  MonteCarloOptions o;
  EXPECT_NO_THROW(o.validate());
  o.blocks = 1;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.threads = 0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.sample_rate = 5e5;
  EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(Raw, RoundTrip) {
  const fs::path dir = temp_dir("raw");
  const std::vector<double> x{1.0, -2.5, 3.25, 1e-300};
  write_raw_record((dir / "a.raw").string(), x, 2e6, 12345678901234567890ull, "trial0_x_alice");
  const RawRecord r = read_raw_record((dir / "a.raw").string());
  EXPECT_EQ(r.samples, x);
  EXPECT_EQ(r.sample_rate, 2e6);
  EXPECT_EQ(r.seed, 12345678901234567890ull);
  EXPECT_EQ(r.label, "trial0_x_alice");

  std::ifstream in(dir / "a.raw", std::ios::binary);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("eprmux-raw sample_rate=", 0), 0u) << header;
  EXPECT_EQ(fs::file_size(dir / "a.raw"), header.size() + 1 + 8 * x.size());
  fs::remove_all(dir);
}

TEST(Raw, TruncatedAndMalformedRejected) {
  const fs::path dir = temp_dir("raw_bad");
  const std::vector<double> x(10, 1.0);
  write_raw_record((dir / "a.raw").string(), x, 2e6, 1, "a");
  fs::resize_file(dir / "a.raw", fs::file_size(dir / "a.raw") - 8);
  EXPECT_THROW(read_raw_record((dir / "a.raw").string()), InvalidArgument);
  std::ofstream(dir / "b.raw") << "not a header\n";
  EXPECT_THROW(read_raw_record((dir / "b.raw").string()), InvalidArgument);
  fs::remove_all(dir);
}

TEST(Csv, StreamsHaveTimeColumn) {
  const fs::path dir = temp_dir("csv");
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  write_streams_csv((dir / "s.csv").string(), {"a", "b"}, {&a, &b}, 10.0);
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,a,b");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  fs::remove_all(dir);
}

}  // namespace
