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

// Frequency-domain models of the optical chain: a broadband below-threshold
// squeezer, detuned filter cavities acting as frequency beam splitters, and
// homodyne detection with frequency-shifted local oscillators followed by
// electronic demodulation.

#ifndef EPRMUX_OPTICS_HPP
#define EPRMUX_OPTICS_HPP

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eprmux/gaussian_state.hpp"

namespace eprmux {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// How a quoted cavity bandwidth maps to the half linewidth gamma.
enum class BandwidthConvention { fwhm, hwhm };

std::string to_string(BandwidthConvention convention);
BandwidthConvention bandwidth_convention_from_string(const std::string& name);

/// Below-threshold parametric squeezer.
struct OpaSource {
  double pump_parameter = 0.0;  ///< x, pump amplitude relative to threshold, [0, 1)
  double bandwidth = 25e6;      ///< quoted cavity bandwidth, Hz
  BandwidthConvention convention = BandwidthConvention::fwhm;
  double efficiency = 1.0;      ///< lumped escape x detection efficiency
  double added_noise = 0.0;     ///< flat excess variance below noise_cutoff
  double noise_cutoff = 4e6;    ///< Hz

  /// gamma in Hz.
  double half_linewidth() const;
  void validate() const;
};

struct QuadratureVariances {
  double squeezed = 1.0;
  double antisqueezed = 1.0;
};

/// V-/+(f) = 1 -/+ eta*4x / ((1 +/- x)^2 + (f/gamma)^2), plus the excess
/// noise when f lies below the cutoff.
QuadratureVariances squeezing_spectrum(const OpaSource& source, double fourier_frequency);

/// Pump parameter giving `squeezed_variance` at `fourier_frequency` with the
/// other source parameters held fixed.
double pump_for_squeezing(const OpaSource& source, double squeezed_variance,
                          double fourier_frequency);

/// 10^(-dB/10); positive dB means below vacuum.
double variance_from_db(double squeezing_db);
double db_from_variance(double variance);

/// Two-mode squeezed sideband pairs (+f, -f) for every f in `frequencies`.
/// Labels are ordered by offset. Each pair has
///   V((X+ + X-)/sqrt2) = V((P+ - P-)/sqrt2) = V_sq(f)
///   V((X+ - X-)/sqrt2) = V((P+ + P-)/sqrt2) = V_anti(f)
/// and distinct pairs are uncorrelated.
GaussianState build_sideband_pairs(const OpaSource& source, std::span<const double> frequencies,
                                   double rbw);

/// The four-mode state over {-f2, -f1, +f1, +f2}.
GaussianState build_four_mode_state(const OpaSource& source, double f1, double f2, double rbw);

/// Detuned single-pole filter cavity.
struct FilterCavity {
  double detuning = 0.0;   ///< Hz, signed
  double linewidth = 0.0;  ///< full width at half maximum, Hz
  double loss = 0.0;       ///< fractional power lost on resonance

  static FilterCavity from_geometry(double detuning, double round_trip_length, double finesse,
                                    double loss = 0.0);
  double half_linewidth() const { return linewidth / 2.0; }
  void validate() const;
};

double free_spectral_range(double round_trip_length);
/// c / (round_trip_length * finesse), the FWHM.
double linewidth_from_finesse(double round_trip_length, double finesse);
/// 2*pi / sum(T) for a low-loss ring of mirrors with power transmissions T.
double finesse_from_transmissions(std::span<const double> transmissions);

struct CavityResponse {
  std::complex<double> transmission;
  std::complex<double> reflection;
  double loss_share = 0.0;  ///< 1 - |t|^2 - |r|^2
};

/// Lorentzian response at signed Fourier offset `offset`:
///   t = sqrt(1 - loss) k / (k + i d),  r = i d / (k + i d),  d = offset - detuning.
CavityResponse cavity_transfer(const FilterCavity& filter, double offset);

/// Output of a sideband splitter. Every source mode appears twice, once per
/// output path; the pre-existing vacuum of the open port is mixed in.
struct SplitResult {
  GaussianState state;
  std::vector<std::size_t> transmitted;
  std::vector<std::size_t> reflected;
  std::vector<std::string> warnings;
};

/// Sends every source-path mode through a detuned cavity.
SplitResult apply_frequency_beam_splitter(const GaussianState& state, const FilterCavity& filter);

/// Perfect splitter: negative offsets are transmitted, positive reflected.
SplitResult apply_ideal_sideband_splitter(const GaussianState& state);

/// Filters the modes on `path` in transmission and discards the rest.
GaussianState apply_filter_transmission(const GaussianState& state, const FilterCavity& filter,
                                        Path path);

/// Homodyne detector with a frequency-shifted local oscillator and an
/// electronic demodulator.
struct HomodyneChannel {
  double lo_shift = 0.0;    ///< LO offset from the carrier, Hz
  double lo_phase = 0.0;    ///< rad
  double demod_freq = 2e5;  ///< Hz
  /// rad; unset means "compensate the filter phases of the addressed modes".
  std::optional<double> demod_phase;
  double efficiency = 1.0;

  void validate() const;
  double upper_offset() const { return lo_shift + demod_freq; }
  double lower_offset() const { return lo_shift - demod_freq; }
};

enum class DemodSign { cosine, sine };

/// Coefficients (length 2n) of the demodulated quadrature
///   (X_{lo+phi}(upper) + X_{lo-phi}(lower)) / sqrt2            (cosine)
/// with phi -> phi + pi/2 for the sine channel. Unit norm, so the vacuum
/// variance is 1.
Eigen::VectorXd demod_projection(const GaussianState& state, const HomodyneChannel& channel,
                                 DemodSign sign, Path path);

/// Same with explicit LO and demodulation phases.
Eigen::VectorXd demod_projection(const GaussianState& state, double lo_shift, double demod_freq,
                                 double lo_phase, double demod_phase, DemodSign sign, Path path);

struct ChainScenario {
  OpaSource source;
  /// Frequency beam splitter; unset selects the ideal sideband splitter.
  std::optional<FilterCavity> fbs;
  /// Optional second filter in Bob's path, in transmission.
  std::optional<FilterCavity> bob_filter;
  double f1 = 6.8e6;
  double f2 = 7.2e6;
  double rbw = 1e5;
  HomodyneChannel alice{-7e6, 0.0, 2e5, std::nullopt, 1.0};
  HomodyneChannel bob{7e6, 0.0, 2e5, std::nullopt, 1.0};
  double alice_loss = 0.0;  ///< path loss, fraction of power
  double bob_loss = 0.0;

  void validate() const;
};

/// Projection vectors of one site for the LO phase and the orthogonal one.
struct SiteProjections {
  Eigen::VectorXd x;
  Eigen::VectorXd x_perp;
};

struct ChainResult {
  GaussianState state;
  SiteProjections alice;
  SiteProjections bob;
  double alice_demod_phase = 0.0;  ///< resolved value
  double bob_demod_phase = 0.0;
  Path alice_path = Path::transmitted;
  Path bob_path = Path::reflected;
  std::vector<std::string> warnings;
};

/// Source -> splitter -> path losses -> projections. Pure function.
ChainResult run_chain(const ChainScenario& scenario);

/// Single-channel reference geometry: 6.8/7.2 MHz sidebands, LOs at
/// -/+7 MHz, 200 kHz demodulation, a 52 cm ring of finesse 370 detuned to
/// -7 MHz as splitter, and a source squeezing 5.5 dB at 5 MHz.
ChainScenario reference_scenario();

}  // namespace eprmux

#endif  // EPRMUX_OPTICS_HPP
