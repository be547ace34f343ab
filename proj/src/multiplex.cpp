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


#include "eprmux/multiplex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

constexpr double kCrossChannelTolerance = 1e-12;

double slack(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

void check_geometry(double band_min, double band_max, double bandwidth, double guard,
                    double demod) {
  for (double v : {band_min, band_max, bandwidth, guard, demod}) {
    if (!std::isfinite(v)) throw InvalidArgument("plan parameters must be finite");
  }
  if (!(bandwidth > 0.0)) throw InvalidArgument("detection bandwidth must be positive");
  if (!(demod > 0.0)) throw InvalidArgument("demodulation frequency must be positive");
  if (guard < 0.0) throw InvalidArgument("guard band must be non-negative");
  if (demod >= bandwidth) {
    throw InvalidArgument("demodulation frequency must be below the detection bandwidth");
  }
  if (band_max < band_min) throw InvalidArgument("band upper edge lies below its lower edge");
  if (band_min < bandwidth + guard - slack(band_min)) {
    throw InvalidArgument("band starts closer to the carrier than bandwidth + guard");
  }
}

}  // namespace

MultiplexChannel make_channel(double center, double demod_freq) {
  MultiplexChannel c;
  c.center = center;
  c.lo_pair = {-center, center};
  c.sidebands = {-center - demod_freq, -center + demod_freq, center - demod_freq,
                 center + demod_freq};
  c.demod_freq = demod_freq;
  c.filter_detunings = {-center, center};
  return c;
}

MultiplexPlan plan_multiplex(double band_min, double band_max, double detection_bandwidth,
                             double guard_band, double demod_freq) {
  check_geometry(band_min, band_max, detection_bandwidth, guard_band, demod_freq);
  MultiplexPlan plan{band_min, band_max, detection_bandwidth, guard_band, demod_freq, {}};
  const double pitch = 2.0 * detection_bandwidth + guard_band;
  for (int i = 0;; ++i) {
    const double center = band_min + detection_bandwidth + i * pitch;
    if (center + detection_bandwidth > band_max + slack(band_max)) break;
    plan.channels.push_back(make_channel(center, demod_freq));
  }
  return plan;
}

void check_plan(const MultiplexPlan& plan) {
  check_geometry(plan.band_min, plan.band_max, plan.detection_bandwidth, plan.guard_band,
                 plan.demod_freq);
  const double b = plan.detection_bandwidth;
  std::vector<MultiplexChannel> sorted = plan.channels;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& l, const auto& r) { return l.center < r.center; });
  for (const auto& c : sorted) {
    std::ostringstream where;
    where << "channel at " << c.center << " Hz";
    if (c.center - b < plan.band_min - slack(plan.band_min) ||
        c.center + b > plan.band_max + slack(plan.band_max)) {
      throw InvalidArgument(where.str() + " leaves the usable band");
    }
    if (c.demod_freq != plan.demod_freq) {
      throw InvalidArgument(where.str() + " uses a different demodulation frequency");
    }
    const MultiplexChannel expected = make_channel(c.center, c.demod_freq);
    if (c.sidebands != expected.sidebands || c.lo_pair != expected.lo_pair) {
      throw InvalidArgument(where.str() + " has inconsistent sidebands or LOs");
    }
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double gap = (sorted[i].center - b) - (sorted[i - 1].center + b);
    if (gap < plan.guard_band - slack(sorted[i].center)) {
      std::ostringstream msg;
      msg << "disjointness violation: channels at " << sorted[i - 1].center << " and "
          << sorted[i].center << " Hz are closer than 2B + guard";
      throw InvalidArgument(msg.str());
    }
  }
}

ChainScenario channel_scenario(const MultiplexChannel& channel, const OpaSource& source,
                               const ValidationOptions& options) {
  ChainScenario s;
  s.source = source;
  s.f1 = channel.center - channel.demod_freq;
  s.f2 = channel.center + channel.demod_freq;
  s.rbw = options.rbw;
  s.alice = {channel.lo_pair[0], 0.0, channel.demod_freq, std::nullopt, 1.0};
  s.bob = {channel.lo_pair[1], 0.0, channel.demod_freq, std::nullopt, 1.0};
  if (options.ideal_filters) return s;
  s.fbs = FilterCavity{channel.filter_detunings[0], options.filter_linewidth, options.filter_loss};
  if (options.bob_filter) {
    s.bob_filter =
        FilterCavity{channel.filter_detunings[1], options.filter_linewidth, options.filter_loss};
  }
  return s;
}

PlanValidation validate_plan(const MultiplexPlan& plan, const OpaSource& source,
                             const ValidationOptions& options) {
  check_plan(plan);
  source.validate();
  PlanValidation out;
  if (plan.channels.empty()) return out;

  std::vector<double> freqs;
  std::vector<int> owner;  // channel index per positive frequency
  for (std::size_t i = 0; i < plan.channels.size(); ++i) {
    for (double f : {plan.channels[i].sidebands[2], plan.channels[i].sidebands[3]}) {
      freqs.push_back(f);
      owner.push_back(static_cast<int>(i));
    }
  }
  const GaussianState joint = build_sideband_pairs(source, freqs, options.rbw);
  auto channel_of = [&](std::size_t mode) {
    const double f = std::abs(joint.label(mode).offset);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      if (std::abs(freqs[k] - f) < 1e-6) return owner[k];
    }
    throw InvalidState("mode not owned by any channel");
  };
  const Eigen::MatrixXd& cov = joint.cov();
  for (std::size_t i = 0; i < joint.modes(); ++i) {
    for (std::size_t j = i + 1; j < joint.modes(); ++j) {
      if (channel_of(i) == channel_of(j)) continue;
      const double m = cov.block<2, 2>(2 * i, 2 * j).cwiseAbs().maxCoeff();
      out.max_cross_channel_covariance = std::max(out.max_cross_channel_covariance, m);
    }
  }
  if (out.max_cross_channel_covariance >= kCrossChannelTolerance) {
    throw InvalidState("channels are correlated: cross-channel covariance " +
                       std::to_string(out.max_cross_channel_covariance));
  }

  for (const auto& c : plan.channels) {
    out.channels.push_back({c.center, analyze(channel_scenario(c, source, options))});
  }
  return out;
}

}  // namespace eprmux
