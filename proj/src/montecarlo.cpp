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


#include "eprmux/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

constexpr double kPi = std::numbers::pi;

SettingSpectrum setting_spectrum(const ChainResult& chain, const ChainScenario& s, double theta_a,
                                 double theta_b) {
  const auto& a = s.alice;
  const auto& b = s.bob;
  auto pa = [&](double phi) {
    return demod_projection(chain.state, a.lo_shift, a.demod_freq, theta_a, phi,
                            DemodSign::cosine, chain.alice_path);
  };
  auto pb = [&](double phi) {
    return demod_projection(chain.state, b.lo_shift, b.demod_freq, theta_b, phi,
                            DemodSign::cosine, chain.bob_path);
  };
  const double phi_a = chain.alice_demod_phase, phi_b = chain.bob_demod_phase;
  const Eigen::VectorXd va = pa(phi_a), vb = pb(phi_b), vb_q = pb(phi_b - kPi / 2);
  SettingSpectrum out;
  out.s_aa = bilinear_form(chain.state, va, va);
  out.s_bb = bilinear_form(chain.state, vb, vb);
  // Demodulated covariance is Re[s_ab exp(-i (phi_a - phi_b))].
  const std::complex<double> k(bilinear_form(chain.state, va, vb),
                               bilinear_form(chain.state, va, vb_q));
  out.s_ab = k * std::polar(1.0, phi_a - phi_b);
  return out;
}

// Running sums of one stream pair.
struct Sums {
  double n = 0, a = 0, b = 0, aa = 0, bb = 0, ab = 0;

  Sums& operator+=(const Sums& o) {
    n += o.n; a += o.a; b += o.b; aa += o.aa; bb += o.bb; ab += o.ab;
    return *this;
  }
  Sums operator-(const Sums& o) const {
    return {n - o.n, a - o.a, b - o.b, aa - o.aa, bb - o.bb, ab - o.ab};
  }
  double var_a() const { return (aa - a * a / n) / (n - 1); }
  double var_b() const { return (bb - b * b / n) / (n - 1); }
  double cov() const { return (ab - a * b / n) / (n - 1); }
};

Sums block_sums(const DemodulatedSet& s, std::size_t begin, std::size_t end) {
  Sums out;
  for (std::size_t i = begin; i < end; ++i) {
    const double a = s.alice[i], b = s.bob[i];
    out.n += 1;
    out.a += a;
    out.b += b;
    out.aa += a * a;
    out.bb += b * b;
    out.ab += a * b;
  }
  return out;
}

struct Estimate {
  JointSecondMoments moments;
  ReidResult reid;
  double i = 0;
};

Estimate estimate(const Sums& x, const Sums& xp, const Sums& vac) {
  const double va = vac.var_a(), vb = vac.var_b();
  if (!(va > 0.0) || !(vb > 0.0)) throw NumericError("vacuum streams have zero variance");
  const double vab = std::sqrt(va * vb);
  Estimate e;
  e.moments.v_xa = x.var_a() / va;
  e.moments.v_xb = x.var_b() / vb;
  e.moments.c_x = x.cov() / vab;
  e.moments.v_xpa = xp.var_a() / va;
  e.moments.v_xpb = xp.var_b() / vb;
  e.moments.c_xp = xp.cov() / vab;
  e.i = duan_inseparability(e.moments);
  e.reid = reid_epr(e.moments);
  return e;
}

void check_set(const DemodulatedSet& s, std::size_t n, const char* name) {
  if (s.alice.size() != n || s.bob.size() != n) {
    throw InvalidArgument(std::string("stream lengths differ (") + name + ")");
  }
}

DemodulatedSet demodulate_pair(const RecordPair& r, const DspConfig& config) {
  if (r.alice.size() != r.bob.size()) throw InvalidArgument("record lengths differ");
  return {demodulate_and_filter(r.alice, r.sample_rate, config, config.demod_phase_a,
                                DemodChannels::in_phase_only)
              .in_phase,
          demodulate_and_filter(r.bob, r.sample_rate, config, config.demod_phase_b,
                                DemodChannels::in_phase_only)
              .in_phase};
}

}  // namespace

ChannelSpectra channel_spectra(const ChainScenario& scenario) {
  if (scenario.alice.demod_freq != scenario.bob.demod_freq) {
    throw InvalidArgument("Alice and Bob must demodulate at the same frequency");
  }
  const ChainResult chain = run_chain(scenario);
  const AngleOptimum opt =
      optimize_duan_angles(reference_covariance(chain.state, chain.alice, chain.bob));
  const double ta = scenario.alice.lo_phase + opt.theta_a;
  const double tb = scenario.bob.lo_phase + opt.theta_b;
  ChannelSpectra out;
  out.x = setting_spectrum(chain, scenario, ta, tb);
  out.x_perp = setting_spectrum(chain, scenario, ta + kPi / 2, tb + kPi / 2);
  out.demod_freq = scenario.alice.demod_freq;
  out.demod_phase_a = chain.alice_demod_phase;
  out.demod_phase_b = chain.bob_demod_phase;
  out.analytic = report_from_moments(opt.moments, std::remainder(ta, 2 * kPi),
                                     std::remainder(tb, 2 * kPi));
  return out;
}

void MonteCarloOptions::validate() const {
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  if (blocks < 2) throw InvalidArgument("at least two jackknife blocks are needed");
  if (!(electronic_noise >= 0.0)) throw InvalidArgument("electronic noise must be non-negative");
  if (!(band_factor > 0.0)) throw InvalidArgument("band factor must be positive");
  if (threads < 1) throw InvalidArgument("threads must be at least 1");
  dsp.validate(sample_rate);
}

StatisticalEstimate estimate_from_streams(const DemodulatedSet& x, const DemodulatedSet& x_perp,
                                          const DemodulatedSet& vacuum, int blocks) {
  const std::size_t n = x.alice.size();
  check_set(x, n, "X setting");
  check_set(x_perp, n, "Xp setting");
  check_set(vacuum, n, "vacuum");
  if (blocks < 2) throw InvalidArgument("at least two jackknife blocks are needed");
  const std::size_t len = n / static_cast<std::size_t>(blocks);
  if (len < 2) throw InvalidArgument("streams too short for the requested blocks");

  std::vector<Sums> bx(blocks), bp(blocks), bv(blocks);
  Sums tx, tp, tv;
  for (int k = 0; k < blocks; ++k) {
    const std::size_t lo = k * len, hi = lo + len;
    bx[k] = block_sums(x, lo, hi);
    bp[k] = block_sums(x_perp, lo, hi);
    bv[k] = block_sums(vacuum, lo, hi);
    tx += bx[k];
    tp += bp[k];
    tv += bv[k];
  }

  const Estimate full = estimate(tx, tp, tv);
  std::vector<double> ji(blocks), je(blocks);
  for (int k = 0; k < blocks; ++k) {
    const Estimate e = estimate(tx - bx[k], tp - bp[k], tv - bv[k]);
    ji[k] = e.i;
    je[k] = e.reid.e_epr;
  }
  auto spread = [blocks](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= blocks;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss * (blocks - 1) / blocks);
  };

  StatisticalEstimate out;
  out.report = report_from_moments(full.moments, 0.0, 0.0);
  out.sigma_i = spread(ji);
  out.sigma_e = spread(je);
  out.vacuum_a = tv.var_a();
  out.vacuum_b = tv.var_b();
  out.samples = len * blocks;
  out.blocks = blocks;
  return out;
}

StatisticalEstimate estimate_entanglement(const RecordPair& x, const RecordPair& x_perp,
                                          const RecordPair& vacuum, const DspConfig& config,
                                          int blocks) {
  const std::size_t n = x.alice.size();
  for (const RecordPair* r : {&x, &x_perp, &vacuum}) {
    if (r->alice.size() != n || r->bob.size() != n) {
      throw InvalidArgument("record sets differ in length");
    }
    if (r->sample_rate != x.sample_rate) throw InvalidArgument("record sets differ in rate");
  }
  return estimate_from_streams(demodulate_pair(x, config), demodulate_pair(x_perp, config),
                               demodulate_pair(vacuum, config), blocks);
}

TrialSeeds trial_seeds(std::uint64_t base_seed, std::uint64_t trial_index) {
  TrialSeeds s;
  s.trial = base_seed + trial_index;
  std::uint64_t state = s.trial;
  s.x = splitmix64(state);
  s.x_perp = splitmix64(state);
  s.vacuum = splitmix64(state);
  return s;
}

TrialResult run_trial(const ChannelSpectra& spectra, const MonteCarloOptions& options,
                      std::uint64_t base_seed, std::uint64_t trial_index,
                      const TrialHooks* hooks) {
  MonteCarloOptions opt = options;
  opt.dsp.demod_freq = spectra.demod_freq;
  opt.dsp.demod_phase_a = spectra.demod_phase_a;
  opt.dsp.demod_phase_b = spectra.demod_phase_b;
  opt.validate();
  const TrialSeeds seeds = trial_seeds(base_seed, trial_index);

  auto run_setting = [&](const std::string& name, const SettingSpectrum& s, std::uint64_t seed) {
    NoiseSynthesisSpec spec;
    spec.sample_rate = opt.sample_rate;
    spec.duration = opt.duration;
    spec.seed = seed;
    spec.band_lo = std::max(0.0, opt.dsp.demod_freq - opt.band_factor * opt.dsp.lpf_bandwidth);
    spec.band_hi = opt.dsp.demod_freq + opt.band_factor * opt.dsp.lpf_bandwidth;
    const CrossSpectrum flat{(s.s_aa + opt.electronic_noise) * kPsdUnit,
                             (s.s_bb + opt.electronic_noise) * kPsdUnit, s.s_ab * kPsdUnit};
    spec.csd = [flat](double) { return flat; };
    DemodulatedSet streams;
    {
      const RecordPair records = synthesize_records(spec);
      if (hooks && hooks->on_records) hooks->on_records(trial_index, name, records);
      streams = demodulate_pair(records, opt.dsp);
    }
    if (hooks && hooks->on_streams) {
      hooks->on_streams(trial_index, name, streams, opt.sample_rate / opt.dsp.decimation);
    }
    return streams;
  };

  const DemodulatedSet x = run_setting("x", spectra.x, seeds.x);
  const DemodulatedSet xp = run_setting("x_perp", spectra.x_perp, seeds.x_perp);
  const DemodulatedSet vac = run_setting("vacuum", SettingSpectrum{}, seeds.vacuum);

  TrialResult out;
  out.index = trial_index;
  out.seed = seeds.trial;
  out.estimate = estimate_from_streams(x, xp, vac, opt.blocks);
  out.estimate.report.theta_a = spectra.analytic.theta_a;
  out.estimate.report.theta_b = spectra.analytic.theta_b;
  return out;
}

MonteCarloSummary run_montecarlo(const ChainScenario& scenario, const MonteCarloOptions& options,
                                 std::uint64_t base_seed, int trials, const TrialHooks* hooks) {
  if (trials < 1) throw InvalidArgument("at least one trial is needed");
  options.validate();
  MonteCarloSummary out;
  out.spectra = channel_spectra(scenario);
  out.trials.resize(trials);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int k; (k = next.fetch_add(1)) < trials;) {
      try {
        out.trials[k] = run_trial(out.spectra, options, base_seed, k, hooks);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min(options.threads, trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const double ai = out.spectra.analytic.i_insep, ae = out.spectra.analytic.e_epr;
  for (const auto& t : out.trials) {
    const auto& e = t.estimate;
    out.mean_i += e.report.i_insep / trials;
    out.mean_e += e.report.e_epr / trials;
    if (std::abs(e.report.i_insep - ai) <= 3.0 * e.sigma_i) ++out.i_within_3sigma;
    if (std::abs(e.report.e_epr - ae) <= 3.0 * e.sigma_e) ++out.e_within_3sigma;
  }
  return out;
}

void write_raw_record(const std::string& path, std::span<const double> samples,
                      double sample_rate, std::uint64_t seed, const std::string& label) {
  if (label.find_first_of(" \n") != std::string::npos) {
    throw InvalidArgument("record label must not contain spaces or newlines");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  std::ostringstream header;
  header.precision(17);
  header << "eprmux-raw sample_rate=" << sample_rate << " length=" << samples.size()
         << " seed=" << seed << " label=" << label << "\n";
  out << header.str();
  for (double v : samples) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  if (!out) throw InvalidArgument("failed writing " + path);
}

RawRecord read_raw_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream fields(header);
  std::string magic;
  fields >> magic;
  if (magic != "eprmux-raw") throw InvalidArgument(path + ": not an eprmux raw record");
  RawRecord r;
  std::size_t length = 0;
  bool have_rate = false, have_length = false, have_seed = false;
  for (std::string kv; fields >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument(path + ": malformed header field " + kv);
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "sample_rate") {
      r.sample_rate = std::stod(value);
      have_rate = true;
    } else if (key == "length") {
      length = std::stoull(value);
      have_length = true;
    } else if (key == "seed") {
      r.seed = std::stoull(value);
      have_seed = true;
    } else if (key == "label") {
      r.label = value;
    }
  }
  if (!have_rate || !have_length || !have_seed) {
    throw InvalidArgument(path + ": header lacks sample_rate, length or seed");
  }
  r.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw InvalidArgument(path + ": fewer samples than the header states");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    r.samples[i] = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw InvalidArgument(path + ": more samples than the header states");
  }
  return r;
}

void write_streams_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& streams, double rate) {
  if (names.size() != streams.size()) throw InvalidArgument("one name per stream is needed");
  std::size_t n = streams.empty() ? 0 : streams.front()->size();
  for (const auto* s : streams) {
    if (s->size() != n) throw InvalidArgument("streams differ in length");
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  out.precision(17);
  out << "t";
  for (const auto& name : names) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << static_cast<double>(i) / rate;
    for (const auto* s : streams) out << "," << (*s)[i];
    out << "\n";
  }
}

}  // namespace eprmux
