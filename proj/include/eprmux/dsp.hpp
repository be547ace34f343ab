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


// Time-domain signal chain: colored Gaussian noise synthesis from a 2x2
// cross-spectral density, lock-in demodulation with a Butterworth low pass,
// and Welch cross-spectrum estimation.

#ifndef EPRMUX_DSP_HPP
#define EPRMUX_DSP_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace eprmux {

/// One-sided spectral densities of two real records at one frequency,
/// per Hz. s_ab = E[X_a X_b^*] in the forward-transform convention.
struct CrossSpectrum {
  double s_aa = 0.0;
  double s_bb = 0.0;
  std::complex<double> s_ab{};
};

using CsdFunction = std::function<CrossSpectrum(double frequency)>;

struct NoiseSynthesisSpec {
  double sample_rate = 2e6;  ///< Hz
  double duration = 1.0;     ///< s
  CsdFunction csd;
  /// Only bins with band_lo <= f <= band_hi are populated. The DC and
  /// Nyquist bins are always zero.
  double band_lo = 0.0;
  double band_hi = 1e300;
  std::uint64_t seed = 0;

  std::size_t samples() const;
  void validate() const;
};

struct RecordPair {
  std::vector<double> alice;
  std::vector<double> bob;
  double sample_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Draws a complex Gaussian pair per positive-frequency bin, colored by the
/// lower Cholesky factor of csd(f) * df / 2, and inverse transforms. Throws
/// InvalidArgument naming the bin if the CSD is not positive semidefinite.
RecordPair synthesize_records(const NoiseSynthesisSpec& spec);

/// splitmix64 step; used to derive independent sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  ///< denominator 1 + a1 z^-1 + a2 z^-2
};

/// Digital Butterworth low pass by the bilinear transform with frequency
/// prewarping, as cascaded second-order sections (plus one first-order
/// section for odd orders). Unity DC gain.
class ButterworthLowPass {
 public:
  ButterworthLowPass(int order, double cutoff, double sample_rate);

  int order() const { return order_; }
  double cutoff() const { return cutoff_; }
  double sample_rate() const { return sample_rate_; }
  const std::vector<Biquad>& sections() const { return sections_; }

  std::complex<double> response(double frequency) const;
  /// Integral of |H(f)|^2 over [0, fs/2] divided by |H(0)|^2, Hz.
  double equivalent_noise_bandwidth() const;
  /// Group delay at DC, samples.
  double dc_group_delay() const;

  /// Zero initial state.
  std::vector<double> filter(std::span<const double> input) const;
  void filter_in_place(std::span<double> data) const;

 private:
  int order_;
  double cutoff_;
  double sample_rate_;
  std::vector<Biquad> sections_;
};

struct DspConfig {
  double demod_freq = 2e5;     ///< Hz
  double demod_phase_a = 0.0;  ///< rad, Alice's demodulator
  double demod_phase_b = 0.0;  ///< rad, Bob's demodulator
  double lpf_bandwidth = 5e4;  ///< Hz, -3 dB point
  int lpf_order = 4;
  int decimation = 10;
  /// Filter settling time discarded at the start, in units of 1/lpf_bandwidth.
  double settle_periods = 10.0;

  /// Throws InvalidArgument if lpf_bandwidth >= demod_freq, the decimated
  /// rate is not above 2 lpf_bandwidth, or the sample rate is not above
  /// 4 (demod_freq + lpf_bandwidth).
  void validate(double sample_rate) const;
};

struct DemodOutput {
  std::vector<double> in_phase;    ///< LPF(sqrt2 x cos(2 pi f t + phi))
  std::vector<double> quadrature;  ///< LPF(sqrt2 x sin(2 pi f t + phi)); empty if not requested
  double output_rate = 0.0;
  std::size_t first_sample = 0;    ///< input index of output sample 0
};

enum class DemodChannels { both, in_phase_only };

/// Mixes, low-pass filters and decimates. The DC group delay and the
/// settling transient are removed, so streams demodulated with the same
/// config stay aligned.
DemodOutput demodulate_and_filter(std::span<const double> record, double sample_rate,
                                  const DspConfig& config, double demod_phase,
                                  DemodChannels channels = DemodChannels::both);

struct WelchEstimate {
  std::vector<double> frequency;
  std::vector<double> s_xx;
  std::vector<double> s_yy;
  std::vector<std::complex<double>> s_xy;
  std::size_t segments = 0;
};

/// Hann-windowed averaged periodogram, one-sided, per Hz.
WelchEstimate welch_csd(std::span<const double> x, std::span<const double> y, double sample_rate,
                        std::size_t segment_length, double overlap = 0.5);

}  // namespace eprmux

#endif  // EPRMUX_DSP_HPP
