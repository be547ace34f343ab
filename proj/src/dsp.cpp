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


#include "eprmux/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

constexpr double kPi = std::numbers::pi;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
    if (!data) throw NumericError("FFTW allocation failed");
    std::fill_n(reinterpret_cast<double*>(data), 2 * n, 0.0);
  }
  ~ComplexBuffer() { fftw_free(data); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* data;
  std::size_t size;
};

// Plans depend only on the size; kept for the life of the process.
fftw_plan c2r_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  ComplexBuffer in(n / 2 + 1);
  double* out = fftw_alloc_real(n);
  const fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in.data, out,
                                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(out);
  if (!plan) throw NumericError("FFTW could not plan the inverse transform");
  cache.emplace(n, plan);
  return plan;
}

void inverse_real(ComplexBuffer& spectrum, std::vector<double>& out) {
  fftw_execute_dft_c2r(c2r_plan(out.size()), spectrum.data, out.data());
}

// Lower factor L of [[a, c], [conj c, b]] with L L^H equal to it.
struct Factor {
  double l11;
  std::complex<double> l21;
  double l22;
};

bool factorize(double a, double b, std::complex<double> c, Factor& f) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c.real()) ||
      !std::isfinite(c.imag())) {
    return false;
  }
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  const double tol = 1e-12 * scale;
  if (a < -tol || b < -tol) return false;
  a = std::max(a, 0.0);
  b = std::max(b, 0.0);
  const double det = a * b - std::norm(c);
  if (det < -1e-10 * std::max(a * b, 1e-300) && std::norm(c) > tol * tol) return false;
  if (a <= tol) {
    if (std::abs(c) > tol) return false;
    f = {0.0, 0.0, std::sqrt(b)};
    return true;
  }
  f.l11 = std::sqrt(a);
  f.l21 = std::conj(c) / f.l11;
  f.l22 = std::sqrt(std::max(0.0, b - std::norm(f.l21)));
  return true;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t NoiseSynthesisSpec::samples() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

void NoiseSynthesisSpec::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw InvalidArgument("sample rate must be positive");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("duration must be positive");
  }
  if (samples() < 4) throw InvalidArgument("record shorter than four samples");
  if (samples() > (std::size_t{1} << 31)) throw InvalidArgument("record too long");
  if (!csd) throw InvalidArgument("cross-spectral density not set");
  if (!(band_lo <= band_hi)) throw InvalidArgument("synthesis band is empty");
}

RecordPair synthesize_records(const NoiseSynthesisSpec& spec) {
  spec.validate();
  const std::size_t n = spec.samples();
  const std::size_t bins = n / 2 + 1;
  const double df = spec.sample_rate / static_cast<double>(n);
  const std::size_t last = (n % 2 == 0) ? bins - 2 : bins - 1;  // skip Nyquist

  ComplexBuffer sa(bins), sb(bins);
  std::uint64_t state = spec.seed;
  std::mt19937_64 rng(splitmix64(state));
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

  for (std::size_t k = 1; k <= last; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < spec.band_lo || f > spec.band_hi) continue;
    const CrossSpectrum s = spec.csd(f);
    Factor l{};
    if (!factorize(s.s_aa * df / 2.0, s.s_bb * df / 2.0, s.s_ab * (df / 2.0), l)) {
      std::ostringstream msg;
      msg << "cross-spectral density is not positive semidefinite at bin " << k << " (f = " << f
          << " Hz)";
      throw InvalidArgument(msg.str());
    }
    const std::complex<double> z1(normal(rng), normal(rng));
    const std::complex<double> z2(normal(rng), normal(rng));
    const std::complex<double> a = l.l11 * z1;
    const std::complex<double> b = l.l21 * z1 + l.l22 * z2;
    sa.data[k][0] = a.real();
    sa.data[k][1] = a.imag();
    sb.data[k][0] = b.real();
    sb.data[k][1] = b.imag();
  }

  RecordPair out;
  out.sample_rate = spec.sample_rate;
  out.seed = spec.seed;
  out.alice.resize(n);
  out.bob.resize(n);
  inverse_real(sa, out.alice);
  inverse_real(sb, out.bob);
  return out;
}

ButterworthLowPass::ButterworthLowPass(int order, double cutoff, double sample_rate)
    : order_(order), cutoff_(cutoff), sample_rate_(sample_rate) {
  if (order < 1 || order > 16) throw InvalidArgument("filter order must be in [1, 16]");
  if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
  if (!(cutoff > 0.0) || !(cutoff < sample_rate / 2.0)) {
    throw InvalidArgument("cutoff must lie in (0, fs/2)");
  }
  const double k = 2.0 * sample_rate;
  const double wc = k * std::tan(kPi * cutoff / sample_rate);
  for (int i = 0; i < order / 2; ++i) {
    const std::complex<double> pole =
        wc * std::exp(std::complex<double>(0.0, kPi * (2.0 * i + order + 1) / (2.0 * order)));
    const double a = k * k, b = -2.0 * pole.real() * k, c = wc * wc;
    const double a0 = a + b + c;
    sections_.push_back({c / a0, 2.0 * c / a0, c / a0, (2.0 * c - 2.0 * a) / a0, (a - b + c) / a0});
  }
  if (order % 2 == 1) {
    const double a0 = k + wc;
    sections_.push_back({wc / a0, wc / a0, 0.0, (wc - k) / a0, 0.0});
  }
}

std::complex<double> ButterworthLowPass::response(double frequency) const {
  const std::complex<double> z1 = std::exp(std::complex<double>(0.0, -2.0 * kPi * frequency / sample_rate_));
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : sections_) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

double ButterworthLowPass::equivalent_noise_bandwidth() const {
  // Simpson on [0, fs/2].
  const int intervals = 1 << 18;
  const double h = sample_rate_ / 2.0 / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::norm(response(i * h));
  }
  return sum * h / 3.0 / std::norm(response(0.0));
}

double ButterworthLowPass::dc_group_delay() const {
  const double eps = 1e-7 * sample_rate_;
  const double w = 2.0 * kPi * eps / sample_rate_;
  return -std::arg(response(eps)) / w;
}

std::vector<double> ButterworthLowPass::filter(std::span<const double> input) const {
  std::vector<double> out(input.begin(), input.end());
  filter_in_place(out);
  return out;
}

void ButterworthLowPass::filter_in_place(std::span<double> data) const {
  for (const auto& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : data) {
      const double x = v;
      const double y = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * y + z2;
      z2 = s.b2 * x - s.a2 * y;
      v = y;
    }
  }
}

void DspConfig::validate(double sample_rate) const {
  if (!(demod_freq > 0.0)) throw InvalidArgument("demodulation frequency must be positive");
  if (!(lpf_bandwidth > 0.0)) throw InvalidArgument("low-pass bandwidth must be positive");
  if (lpf_bandwidth >= demod_freq) {
    throw InvalidArgument("low-pass bandwidth must be below the demodulation frequency");
  }
  if (lpf_order < 1 || lpf_order > 16) throw InvalidArgument("low-pass order must be in [1, 16]");
  if (decimation < 1) throw InvalidArgument("decimation must be at least 1");
  if (!(settle_periods >= 0.0)) throw InvalidArgument("settle time must be non-negative");
  if (!(sample_rate > 4.0 * (demod_freq + lpf_bandwidth))) {
    throw InvalidArgument("aliasing: sample rate must exceed 4 (demod_freq + lpf_bandwidth)");
  }
  if (!(sample_rate / decimation > 2.0 * lpf_bandwidth)) {
    throw InvalidArgument("aliasing: decimated rate must exceed twice the low-pass bandwidth");
  }
}

DemodOutput demodulate_and_filter(std::span<const double> record, double sample_rate,
                                  const DspConfig& config, double demod_phase,
                                  DemodChannels channels) {
  const bool want_q = channels == DemodChannels::both;
  config.validate(sample_rate);
  const ButterworthLowPass lpf(config.lpf_order, config.lpf_bandwidth, sample_rate);
  const std::size_t delay = static_cast<std::size_t>(std::lround(lpf.dc_group_delay()));
  const std::size_t settle =
      static_cast<std::size_t>(std::ceil(config.settle_periods * sample_rate / config.lpf_bandwidth));
  if (record.size() <= settle + delay) {
    throw InvalidArgument("record shorter than the filter settling time");
  }

  // Oscillator, tabulated over one period when the ratio is rational enough.
  const double ratio = config.demod_freq / sample_rate;
  std::size_t period = 0;
  for (std::size_t p = 1; p <= 4096; ++p) {
    if (std::abs(ratio * p - std::round(ratio * p)) < 1e-12) {
      period = p;
      break;
    }
  }
  auto cycles = [&](std::size_t n) { return std::fmod(static_cast<double>(n) * ratio, 1.0); };
  std::vector<double> cos_table, sin_table;
  if (period) {
    for (std::size_t n = 0; n < period; ++n) {
      const double arg = 2.0 * kPi * cycles(n) + demod_phase;
      cos_table.push_back(std::sqrt(2.0) * std::cos(arg));
      sin_table.push_back(std::sqrt(2.0) * std::sin(arg));
    }
  }

  std::vector<double> mixed_i(record.size()), mixed_q(want_q ? record.size() : 0);
  for (std::size_t n = 0, k = 0; n < record.size(); ++n) {
    double c, s;
    if (period) {
      c = cos_table[k];
      s = sin_table[k];
      if (++k == period) k = 0;
    } else {
      const double arg = 2.0 * kPi * cycles(n) + demod_phase;
      c = std::sqrt(2.0) * std::cos(arg);
      s = std::sqrt(2.0) * std::sin(arg);
    }
    mixed_i[n] = record[n] * c;
    if (want_q) mixed_q[n] = record[n] * s;
  }
  lpf.filter_in_place(mixed_i);
  if (want_q) lpf.filter_in_place(mixed_q);

  DemodOutput out;
  out.output_rate = sample_rate / config.decimation;
  out.first_sample = settle;
  for (std::size_t n = settle + delay; n < record.size(); n += config.decimation) {
    out.in_phase.push_back(mixed_i[n]);
    if (want_q) out.quadrature.push_back(mixed_q[n]);
  }
  return out;
}

WelchEstimate welch_csd(std::span<const double> x, std::span<const double> y, double sample_rate,
                        std::size_t segment_length, double overlap) {
  if (x.size() != y.size()) throw InvalidArgument("records differ in length");
  if (segment_length < 8 || segment_length > x.size()) {
    throw InvalidArgument("segment length must be in [8, record length]");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidArgument("overlap must be in [0, 1)");
  const std::size_t step =
      std::max<std::size_t>(1, static_cast<std::size_t>(segment_length * (1.0 - overlap)));
  const std::size_t bins = segment_length / 2 + 1;

  std::vector<double> window(segment_length);
  double power = 0.0;
  for (std::size_t n = 0; n < segment_length; ++n) {
    window[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / segment_length));
    power += window[n] * window[n];
  }

  std::vector<double> buf(segment_length);
  ComplexBuffer fx(bins), fy(bins);
  fftw_plan px, py;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    px = fftw_plan_dft_r2c_1d(static_cast<int>(segment_length), buf.data(), fx.data, FFTW_ESTIMATE);
    py = fftw_plan_dft_r2c_1d(static_cast<int>(segment_length), buf.data(), fy.data, FFTW_ESTIMATE);
  }

  WelchEstimate out;
  out.s_xx.assign(bins, 0.0);
  out.s_yy.assign(bins, 0.0);
  out.s_xy.assign(bins, 0.0);
  for (std::size_t start = 0; start + segment_length <= x.size(); start += step) {
    for (std::size_t n = 0; n < segment_length; ++n) buf[n] = window[n] * x[start + n];
    fftw_execute(px);
    for (std::size_t n = 0; n < segment_length; ++n) buf[n] = window[n] * y[start + n];
    fftw_execute(py);
    for (std::size_t k = 0; k < bins; ++k) {
      const std::complex<double> a(fx.data[k][0], fx.data[k][1]);
      const std::complex<double> b(fy.data[k][0], fy.data[k][1]);
      out.s_xx[k] += std::norm(a);
      out.s_yy[k] += std::norm(b);
      out.s_xy[k] += a * std::conj(b);
    }
    ++out.segments;
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(px);
    fftw_destroy_plan(py);
  }

  out.frequency.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = (k == 0) || (segment_length % 2 == 0 && k == bins - 1);
    const double scale = (edge ? 1.0 : 2.0) / (sample_rate * power * out.segments);
    out.frequency[k] = k * sample_rate / segment_length;
    out.s_xx[k] *= scale;
    out.s_yy[k] *= scale;
    out.s_xy[k] *= scale;
  }
  return out;
}

}  // namespace eprmux
