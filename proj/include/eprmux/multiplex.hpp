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


// Frequency-division packing of EPR channels into the usable band of one
// squeezed field. Each channel i addresses the sideband quadruple
// {-W_i - D, -W_i + D, W_i - D, W_i + D} with LOs at -/+W_i and occupies
// [W_i - B, W_i + B] on either side of the carrier.

#ifndef EPRMUX_MULTIPLEX_HPP
#define EPRMUX_MULTIPLEX_HPP

#include <array>
#include <optional>
#include <vector>

#include "eprmux/criteria.hpp"
#include "eprmux/optics.hpp"

namespace eprmux {

struct MultiplexChannel {
  double center = 0.0;                     ///< W_i, Hz
  std::array<double, 2> lo_pair{};         ///< {-W_i, +W_i}
  std::array<double, 4> sidebands{};       ///< ascending offsets
  double demod_freq = 0.0;                 ///< D, Hz
  std::array<double, 2> filter_detunings{};  ///< {Alice's FBS, Bob's filter}
};

struct MultiplexPlan {
  double band_min = 0.0;
  double band_max = 0.0;
  double detection_bandwidth = 0.0;  ///< B, the per-channel half-width
  double guard_band = 0.0;
  double demod_freq = 0.0;
  std::vector<MultiplexChannel> channels;
};

/// Channel i (from 1) sits at band_min + B + (i - 1)(2B + guard) while it
/// fits. Throws InvalidArgument for demod_freq >= B, band_min < B + guard,
/// band_max < band_min, or non-positive widths. A band too narrow for one
/// channel yields an empty plan.
MultiplexPlan plan_multiplex(double band_min, double band_max, double detection_bandwidth,
                             double guard_band, double demod_freq);

MultiplexChannel make_channel(double center, double demod_freq);

/// Throws InvalidArgument naming the first violated constraint (geometry,
/// band membership, spacing, disjointness).
void check_plan(const MultiplexPlan& plan);

struct ValidationOptions {
  /// Filter linewidth (FWHM) of both cavities of a channel. Defaults to the
  /// low-finesse 52 cm ring.
  double filter_linewidth = linewidth_from_finesse(0.52, 370.0);
  double filter_loss = 0.0;
  bool bob_filter = true;
  /// Replace the cavities with the ideal sideband splitter.
  bool ideal_filters = false;
  double rbw = 1e5;
};

struct ChannelReport {
  double center = 0.0;
  EntanglementReport report;
};

struct PlanValidation {
  std::vector<ChannelReport> channels;
  double max_cross_channel_covariance = 0.0;
};

/// Channel scenario: sidebands W_i -/+ D, Alice's FBS detuned to -W_i and,
/// optionally, Bob's filter at +W_i. The finite rejection of a cavity at the
/// opposite sideband (2 W_i away) makes channels differ slightly even on a
/// flat source.
ChainScenario channel_scenario(const MultiplexChannel& channel, const OpaSource& source,
                               const ValidationOptions& options = {});

/// Runs the chain per channel. Also builds the joint source state over every
/// channel's sidebands and throws InvalidState if any covariance between
/// modes of different channels reaches 1e-12.
PlanValidation validate_plan(const MultiplexPlan& plan, const OpaSource& source,
                             const ValidationOptions& options = {});

}  // namespace eprmux

#endif  // EPRMUX_MULTIPLEX_HPP
