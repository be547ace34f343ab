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


// Monte Carlo verification of the criteria: synthesize homodyne records with
// the cross-spectra predicted by the optical chain, run them through the
// demodulation pipeline and estimate I and E with error bars.
//
// Records are in vacuum units per MHz over the band
// [demod_freq - 4 lpf_bandwidth, demod_freq + 4 lpf_bandwidth]; the spectra
// are taken flat across it. Every trial also synthesizes a vacuum pair with
// the same DSP settings and divides all moments by its variances.
//
// Seeds: trial k of a run with base seed s uses t = s + k. Three
// splitmix64 draws from t seed the X setting, the Xp setting and the vacuum
// pair, in that order; each pair's generator is mt19937_64 seeded by one
// more splitmix64 draw from its own seed.

#ifndef EPRMUX_MONTECARLO_HPP
#define EPRMUX_MONTECARLO_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eprmux/criteria.hpp"
#include "eprmux/dsp.hpp"
#include "eprmux/optics.hpp"

namespace eprmux {

inline constexpr double kPsdUnit = 1e-6;  ///< record PSD of one vacuum unit, 1/Hz

/// Flat (Alice, Bob) cross-spectrum of one LO setting, vacuum units.
struct SettingSpectrum {
  double s_aa = 1.0;
  double s_bb = 1.0;
  std::complex<double> s_ab{};
};

struct ChannelSpectra {
  SettingSpectrum x;       ///< LOs at the optimal angles
  SettingSpectrum x_perp;  ///< both LOs advanced by pi/2
  double demod_freq = 2e5;
  double demod_phase_a = 0.0;
  double demod_phase_b = 0.0;
  EntanglementReport analytic;
};

/// Spectra that reproduce, after demodulation at the chain's demod phases,
/// the covariances of the chain's demodulated quadratures.
ChannelSpectra channel_spectra(const ChainScenario& scenario);

struct MonteCarloOptions {
  double sample_rate = 2e6;  ///< Hz
  double duration = 10.0;    ///< s per record
  DspConfig dsp;             ///< demod frequency and phases come from the chain
  int blocks = 100;          ///< jackknife blocks
  double electronic_noise = 0.0;  ///< flat, vacuum units, added to every record
  double band_factor = 4.0;  ///< synthesis half-band in units of lpf_bandwidth
  int threads = 1;

  void validate() const;
};

/// Cosine-channel streams of one setting.
struct DemodulatedSet {
  std::vector<double> alice;
  std::vector<double> bob;
};

struct StatisticalEstimate {
  EntanglementReport report;
  double sigma_i = 0.0;
  double sigma_e = 0.0;
  double vacuum_a = 0.0;  ///< raw vacuum variance used for normalization
  double vacuum_b = 0.0;
  std::size_t samples = 0;
  int blocks = 0;
};

/// Sample moments normalized to the vacuum streams, criteria on them, and
/// block-jackknife standard errors (blocks longer than the filter memory
/// absorb the autocorrelation). Throws InvalidArgument on mismatched
/// lengths or fewer than two samples per block.
StatisticalEstimate estimate_from_streams(const DemodulatedSet& x, const DemodulatedSet& x_perp,
                                          const DemodulatedSet& vacuum, int blocks);

/// Demodulates the cosine channels of raw record pairs and estimates.
StatisticalEstimate estimate_entanglement(const RecordPair& x, const RecordPair& x_perp,
                                          const RecordPair& vacuum, const DspConfig& config,
                                          int blocks);

struct TrialSeeds {
  std::uint64_t trial = 0;
  std::uint64_t x = 0;
  std::uint64_t x_perp = 0;
  std::uint64_t vacuum = 0;
};

TrialSeeds trial_seeds(std::uint64_t base_seed, std::uint64_t trial_index);

/// Observers for export; called once per setting ("x", "x_perp", "vacuum")
/// and trial, possibly from worker threads.
struct TrialHooks {
  std::function<void(std::uint64_t trial, const std::string& setting, const RecordPair&)>
      on_records;
  std::function<void(std::uint64_t trial, const std::string& setting, const DemodulatedSet&,
                     double rate)>
      on_streams;
};

struct TrialResult {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  StatisticalEstimate estimate;
};

TrialResult run_trial(const ChannelSpectra& spectra, const MonteCarloOptions& options,
                      std::uint64_t base_seed, std::uint64_t trial_index,
                      const TrialHooks* hooks = nullptr);

struct MonteCarloSummary {
  ChannelSpectra spectra;
  std::vector<TrialResult> trials;  ///< in trial order
  double mean_i = 0.0;
  double mean_e = 0.0;
  int i_within_3sigma = 0;
  int e_within_3sigma = 0;
};

/// Runs `trials` independent trials; results do not depend on `threads`.
MonteCarloSummary run_montecarlo(const ChainScenario& scenario, const MonteCarloOptions& options,
                                 std::uint64_t base_seed, int trials,
                                 const TrialHooks* hooks = nullptr);

/// Raw export: one ASCII header line
///   eprmux-raw sample_rate=<Hz> length=<n> seed=<u64> label=<text>
/// followed by n little-endian IEEE-754 float64 samples.
void write_raw_record(const std::string& path, std::span<const double> samples,
                      double sample_rate, std::uint64_t seed, const std::string& label);

struct RawRecord {
  double sample_rate = 0.0;
  std::uint64_t seed = 0;
  std::string label;
  std::vector<double> samples;
};

/// Throws InvalidArgument on a malformed header or a length mismatch.
RawRecord read_raw_record(const std::string& path);

/// CSV with a time column and one column per named stream.
void write_streams_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& streams, double rate);

}  // namespace eprmux

#endif  // EPRMUX_MONTECARLO_HPP
