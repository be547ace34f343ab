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

#include "eprmux/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

// Unnormalized Lorentzian denominators of the squeezing spectrum.
double squeeze_gain(double x, double w) { return 4.0 * x / ((1.0 + x) * (1.0 + x) + w * w); }
double antisqueeze_gain(double x, double w) { return 4.0 * x / ((1.0 - x) * (1.0 - x) + w * w); }

// Applies the same complex gain to every mode on `path`.
template <class Gain>
GaussianState filter_path(const GaussianState& state, Path path, Gain gain) {
  const auto modes = state.modes_on(path);
  if (modes.empty()) return state;
  Eigen::MatrixXcd transfer = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(modes.size()),
                                                      static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    transfer(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) =
        gain(state.labels()[modes[k]].offset);
  }
  return apply_passive(state, modes, transfer);
}

// Shared splitter plumbing: `response(offset)` returns (t, r) for a mode.
template <class Response>
SplitResult split(const GaussianState& state, Response response) {
  const auto inputs = state.modes_on(Path::source);
  if (inputs.empty()) throw InvalidArgument("splitter needs modes on the source path");

  auto labels = state.labels();
  std::vector<SidebandLabel> open_port;
  for (auto k : inputs) {
    labels[k].path = Path::transmitted;
    SidebandLabel reflected = state.labels()[k];
    reflected.path = Path::reflected;
    open_port.push_back(reflected);
  }
  const GaussianState relabelled(labels, state.mean(), state.cov());
  const GaussianState widened = append_vacuum(relabelled, open_port);

  // (a, v) -> (t a - r* v, r a + t* v); the vacuum column only fixes the
  // added noise, which apply_passive derives from the contraction anyway.
  const auto k = static_cast<Eigen::Index>(inputs.size());
  std::vector<std::size_t> modes;
  for (auto m : inputs) modes.push_back(m);
  for (Eigen::Index i = 0; i < k; ++i) modes.push_back(state.modes() + static_cast<std::size_t>(i));
  Eigen::MatrixXcd transfer = Eigen::MatrixXcd::Zero(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto [t, r] = response(state.labels()[inputs[static_cast<std::size_t>(i)]].offset);
    transfer(i, i) = t;
    transfer(i, k + i) = -std::conj(r);
    transfer(k + i, i) = r;
    transfer(k + i, k + i) = std::conj(t);
  }
  SplitResult result{apply_passive(widened, modes, transfer), {}, {}, {}};
  result.transmitted.assign(inputs.begin(), inputs.end());
  for (Eigen::Index i = 0; i < k; ++i) {
    result.reflected.push_back(state.modes() + static_cast<std::size_t>(i));
  }
  return result;
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

std::string to_string(BandwidthConvention convention) {
  return convention == BandwidthConvention::fwhm ? "fwhm" : "hwhm";
}

BandwidthConvention bandwidth_convention_from_string(const std::string& name) {
  if (name == "fwhm") return BandwidthConvention::fwhm;
  if (name == "hwhm") return BandwidthConvention::hwhm;
  throw InvalidArgument("bandwidth convention must be \"fwhm\" or \"hwhm\", got \"" + name + "\"");
}

double OpaSource::half_linewidth() const {
  return convention == BandwidthConvention::fwhm ? bandwidth / 2.0 : bandwidth;
}

void OpaSource::validate() const {
  if (!(pump_parameter >= 0.0) || !std::isfinite(pump_parameter)) {
    throw InvalidArgument("pump parameter must be non-negative");
  }
  if (pump_parameter >= 1.0) {
    std::ostringstream msg;
    msg << "pump parameter " << pump_parameter << " is at or above threshold (must be < 1)";
    throw AboveThreshold(msg.str());
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("source bandwidth must be positive");
  }
  if (!in_unit_interval(efficiency)) throw InvalidArgument("source efficiency must lie in [0, 1]");
  if (!(added_noise >= 0.0)) throw InvalidArgument("added noise must be non-negative");
  if (!(noise_cutoff >= 0.0)) throw InvalidArgument("noise cutoff must be non-negative");
}

QuadratureVariances squeezing_spectrum(const OpaSource& source, double fourier_frequency) {
  source.validate();
  if (!(fourier_frequency >= 0.0)) throw InvalidArgument("Fourier frequency must be >= 0");
  const double w = fourier_frequency / source.half_linewidth();
  const double x = source.pump_parameter;
  QuadratureVariances v;
  v.squeezed = 1.0 - source.efficiency * squeeze_gain(x, w);
  v.antisqueezed = 1.0 + source.efficiency * antisqueeze_gain(x, w);
  if (fourier_frequency < source.noise_cutoff) {
    v.squeezed += source.added_noise;
    v.antisqueezed += source.added_noise;
  }
  return v;
}

double pump_for_squeezing(const OpaSource& source, double squeezed_variance,
                          double fourier_frequency) {
  OpaSource probe = source;
  probe.pump_parameter = 0.0;
  probe.validate();
  if (!(squeezed_variance > 0.0 && squeezed_variance <= 1.0)) {
    throw InvalidArgument("target squeezed variance must lie in (0, 1]");
  }
  // V_sq decreases monotonically in x on [0, 1).
  const double w = fourier_frequency / source.half_linewidth();
  const double excess = fourier_frequency < source.noise_cutoff ? source.added_noise : 0.0;
  const double target_gain = (1.0 + excess - squeezed_variance) / source.efficiency;
  if (target_gain <= 0.0) return 0.0;
  if (target_gain >= squeeze_gain(1.0, w)) {
    throw NoSolution("requested squeezing is not reachable below threshold at this frequency");
  }
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (squeeze_gain(mid, w) < target_gain ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double variance_from_db(double squeezing_db) { return std::pow(10.0, -squeezing_db / 10.0); }

double db_from_variance(double variance) { return -10.0 * std::log10(variance); }

GaussianState build_sideband_pairs(const OpaSource& source, std::span<const double> frequencies,
                                   double rbw) {
  if (frequencies.empty()) throw InvalidArgument("need at least one sideband frequency");
  std::vector<double> sorted(frequencies.begin(), frequencies.end());
  std::sort(sorted.begin(), sorted.end());

  // Modes ordered by offset: -f_max ... -f_min, +f_min ... +f_max.
  const std::size_t pairs = sorted.size();
  std::vector<SidebandLabel> labels;
  for (std::size_t i = pairs; i-- > 0;) labels.push_back({-sorted[i], rbw, Path::source});
  for (std::size_t i = 0; i < pairs; ++i) labels.push_back({sorted[i], rbw, Path::source});

  const auto dim = static_cast<Eigen::Index>(4 * pairs);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < pairs; ++i) {
    if (!(sorted[i] > 0.0)) throw InvalidArgument("sideband frequencies must be positive");
    const auto v = squeezing_spectrum(source, sorted[i]);
    const double local = 0.5 * (v.squeezed + v.antisqueezed);
    const double cross = 0.5 * (v.antisqueezed - v.squeezed);
    const auto lower = static_cast<Eigen::Index>(2 * (pairs - 1 - i));
    const auto upper = static_cast<Eigen::Index>(2 * (pairs + i));
    cov.block<2, 2>(lower, lower) = local * Eigen::Matrix2d::Identity();
    cov.block<2, 2>(upper, upper) = local * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d c = Eigen::Vector2d(-cross, cross).asDiagonal();
    cov.block<2, 2>(upper, lower) = c;
    cov.block<2, 2>(lower, upper) = c;
  }
  return GaussianState(std::move(labels), Eigen::VectorXd::Zero(dim), std::move(cov));
}

GaussianState build_four_mode_state(const OpaSource& source, double f1, double f2, double rbw) {
  if (f1 == f2) throw InvalidArgument("the two sideband frequencies must differ");
  const double freqs[] = {f1, f2};
  return build_sideband_pairs(source, freqs, rbw);
}

FilterCavity FilterCavity::from_geometry(double detuning, double round_trip_length, double finesse,
                                         double loss) {
  return FilterCavity{detuning, linewidth_from_finesse(round_trip_length, finesse), loss};
}

void FilterCavity::validate() const {
  if (!(linewidth > 0.0)) throw InvalidArgument("filter linewidth must be positive");
  if (!std::isfinite(detuning)) throw InvalidArgument("filter detuning must be finite");
  if (!(loss >= 0.0 && loss < 1.0)) throw InvalidArgument("filter loss must lie in [0, 1)");
}

double free_spectral_range(double round_trip_length) {
  if (!(round_trip_length > 0.0)) throw InvalidArgument("round-trip length must be positive");
  return kSpeedOfLight / round_trip_length;
}

double linewidth_from_finesse(double round_trip_length, double finesse) {
  if (!(finesse > 0.0)) throw InvalidArgument("finesse must be positive");
  return free_spectral_range(round_trip_length) / finesse;
}

double finesse_from_transmissions(std::span<const double> transmissions) {
  double total = 0.0;
  for (double t : transmissions) {
    if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("mirror transmission must lie in [0, 1)");
    total += t;
  }
  if (!(total > 0.0)) throw InvalidArgument("total round-trip transmission must be positive");
  return 2.0 * std::numbers::pi / total;
}

CavityResponse cavity_transfer(const FilterCavity& filter, double offset) {
  filter.validate();
  const double kappa = filter.half_linewidth();
  const double d = offset - filter.detuning;
  const std::complex<double> denom(kappa, d);
  CavityResponse out;
  out.transmission = std::sqrt(1.0 - filter.loss) * kappa / denom;
  out.reflection = std::complex<double>(0.0, d) / denom;
  out.loss_share = filter.loss * kappa * kappa / (kappa * kappa + d * d);
  return out;
}

SplitResult apply_frequency_beam_splitter(const GaussianState& state, const FilterCavity& filter) {
  filter.validate();
  SplitResult result = split(state, [&](double offset) {
    const auto resp = cavity_transfer(filter, offset);
    return std::pair{resp.transmission, resp.reflection};
  });
  for (auto k : state.modes_on(Path::source)) {
    const auto& l = state.labels()[k];
    if (l.rbw >= filter.linewidth / 5.0) {
      std::ostringstream msg;
      msg << "mode at " << l.offset << " Hz has rbw " << l.rbw
          << " Hz, not narrow against the filter linewidth " << filter.linewidth
          << " Hz; scalar transfer is approximate";
      result.warnings.push_back(msg.str());
    }
  }
  return result;
}

SplitResult apply_ideal_sideband_splitter(const GaussianState& state) {
  return split(state, [](double offset) {
    using C = std::complex<double>;
    return offset < 0.0 ? std::pair{C(1.0), C(0.0)} : std::pair{C(0.0), C(1.0)};
  });
}

GaussianState apply_filter_transmission(const GaussianState& state, const FilterCavity& filter,
                                        Path path) {
  filter.validate();
  return filter_path(state, path,
                     [&](double offset) { return cavity_transfer(filter, offset).transmission; });
}

void HomodyneChannel::validate() const {
  if (!(demod_freq > 0.0)) throw InvalidArgument("demodulation frequency must be positive");
  if (!std::isfinite(lo_shift) || !std::isfinite(lo_phase)) {
    throw InvalidArgument("LO shift and phase must be finite");
  }
  if (demod_phase && !std::isfinite(*demod_phase)) {
    throw InvalidArgument("demodulation phase must be finite");
  }
  if (!in_unit_interval(efficiency)) throw InvalidArgument("detector efficiency must lie in [0, 1]");
}

Eigen::VectorXd demod_projection(const GaussianState& state, double lo_shift, double demod_freq,
                                 double lo_phase, double demod_phase, DemodSign sign, Path path) {
  const auto upper = state.find(lo_shift + demod_freq, path);
  const auto lower = state.find(lo_shift - demod_freq, path);
  if (!upper || !lower) {
    std::ostringstream msg;
    msg << "no " << to_string(path) << " sideband at " << (upper ? lo_shift - demod_freq
                                                                   : lo_shift + demod_freq)
        << " Hz for the LO at " << lo_shift << " Hz";
    throw InvalidArgument(msg.str());
  }
  const double phi = sign == DemodSign::cosine ? demod_phase : demod_phase + std::numbers::pi / 2;
  const double a_up = lo_phase + phi;
  const double a_low = lo_phase - phi;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * state.modes()));
  const double s = 1.0 / std::numbers::sqrt2;
  coeffs(static_cast<Eigen::Index>(2 * *upper)) = s * std::cos(a_up);
  coeffs(static_cast<Eigen::Index>(2 * *upper + 1)) = s * std::sin(a_up);
  coeffs(static_cast<Eigen::Index>(2 * *lower)) = s * std::cos(a_low);
  coeffs(static_cast<Eigen::Index>(2 * *lower + 1)) = s * std::sin(a_low);
  return coeffs;
}

Eigen::VectorXd demod_projection(const GaussianState& state, const HomodyneChannel& channel,
                                 DemodSign sign, Path path) {
  channel.validate();
  return demod_projection(state, channel.lo_shift, channel.demod_freq, channel.lo_phase,
                          channel.demod_phase.value_or(0.0), sign, path);
}

void ChainScenario::validate() const {
  source.validate();
  if (fbs) fbs->validate();
  if (bob_filter) bob_filter->validate();
  alice.validate();
  bob.validate();
  if (!(f1 > 0.0 && f2 > 0.0) || f1 == f2) {
    throw InvalidArgument("sideband frequencies must be positive and distinct");
  }
  if (!(rbw > 0.0)) throw InvalidArgument("rbw must be positive");
  if (!in_unit_interval(alice_loss) || !in_unit_interval(bob_loss)) {
    throw InvalidArgument("path losses must lie in [0, 1]");
  }
  const bool same_pair = std::abs(alice.upper_offset() - bob.upper_offset()) < rbw / 2 ||
                         std::abs(alice.lower_offset() - bob.lower_offset()) < rbw / 2 ||
                         std::abs(alice.upper_offset() - bob.lower_offset()) < rbw / 2 ||
                         std::abs(alice.lower_offset() - bob.upper_offset()) < rbw / 2;
  if (same_pair) throw InvalidArgument("Alice and Bob must address disjoint sideband pairs");
}

ChainResult run_chain(const ChainScenario& scenario) {
  scenario.validate();
  const GaussianState source = build_four_mode_state(scenario.source, scenario.f1, scenario.f2,
                                                     scenario.rbw);
  SplitResult split = scenario.fbs ? apply_frequency_beam_splitter(source, *scenario.fbs)
                                   : apply_ideal_sideband_splitter(source);
  GaussianState state = std::move(split.state);
  if (scenario.bob_filter) {
    state = apply_filter_transmission(state, *scenario.bob_filter, Path::reflected);
  }
  const double eta_a = scenario.alice.efficiency * (1.0 - scenario.alice_loss);
  const double eta_b = scenario.bob.efficiency * (1.0 - scenario.bob_loss);
  state = filter_path(state, Path::transmitted,
                      [&](double) { return std::complex<double>(std::sqrt(eta_a)); });
  state = filter_path(state, Path::reflected,
                      [&](double) { return std::complex<double>(std::sqrt(eta_b)); });

  // Net transfer phase seen by a mode on each path.
  auto alice_phase = [&](double offset) {
    return scenario.fbs ? std::arg(cavity_transfer(*scenario.fbs, offset).transmission) : 0.0;
  };
  auto bob_phase = [&](double offset) {
    double a = scenario.fbs ? std::arg(cavity_transfer(*scenario.fbs, offset).reflection) : 0.0;
    if (scenario.bob_filter) a += std::arg(cavity_transfer(*scenario.bob_filter, offset).transmission);
    return a;
  };
  // A gain with phase a turns X_b into X_{b-a}, so phi = (a_up - a_low)/2
  // restores equal angles on both addressed sidebands.
  auto resolve = [](const HomodyneChannel& ch, auto phase_of) {
    if (ch.demod_phase) return *ch.demod_phase;
    return wrap_angle(0.5 * (phase_of(ch.upper_offset()) - phase_of(ch.lower_offset())));
  };

  ChainResult result{state, {}, {}, 0.0, 0.0, Path::transmitted, Path::reflected,
                     std::move(split.warnings)};
  result.alice_demod_phase = resolve(scenario.alice, alice_phase);
  result.bob_demod_phase = resolve(scenario.bob, bob_phase);
  const auto& a = scenario.alice;
  const auto& b = scenario.bob;
  const double quarter = std::numbers::pi / 2;
  result.alice.x = demod_projection(state, a.lo_shift, a.demod_freq, a.lo_phase,
                                    result.alice_demod_phase, DemodSign::cosine, Path::transmitted);
  result.alice.x_perp = demod_projection(state, a.lo_shift, a.demod_freq, a.lo_phase + quarter,
                                         result.alice_demod_phase, DemodSign::cosine,
                                         Path::transmitted);
  result.bob.x = demod_projection(state, b.lo_shift, b.demod_freq, b.lo_phase,
                                  result.bob_demod_phase, DemodSign::cosine, Path::reflected);
  result.bob.x_perp = demod_projection(state, b.lo_shift, b.demod_freq, b.lo_phase + quarter,
                                       result.bob_demod_phase, DemodSign::cosine, Path::reflected);
  return result;
}

ChainScenario reference_scenario() {
  ChainScenario s;
  s.source.bandwidth = 25e6;
  s.source.convention = BandwidthConvention::fwhm;
  s.source.efficiency = 1.0;
  s.source.pump_parameter = pump_for_squeezing(s.source, variance_from_db(5.5), 5e6);
  s.fbs = FilterCavity::from_geometry(-7e6, 0.52, 370.0, 0.0);
  return s;
}

}  // namespace eprmux
