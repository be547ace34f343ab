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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eprmux/criteria.hpp"
#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

constexpr double kPumpCeiling = 1.0 - 1e-9;

struct Params {
  double pump;
  double efficiency;
};

Params clamp(Params p) {
  return {std::clamp(p.pump, 0.0, kPumpCeiling), std::clamp(p.efficiency, 0.0, 1.0)};
}

ChainScenario with(const ChainScenario& tmpl, Params p) {
  ChainScenario s = tmpl;
  s.source.pump_parameter = p.pump;
  s.source.efficiency = p.efficiency;
  return s;
}

// Seed from the symmetric model evaluated at the channel centre: V_sq = I
// and V_anti from the harmonic-mean identity, then invert the spectrum.
Params symmetric_seed(double target_i, double target_e, const ChainScenario& tmpl) {
  const double w = 0.5 * (tmpl.f1 + tmpl.f2) / tmpl.source.half_linewidth();
  const auto anti = symmetric_antisqueezing(target_i, target_e);
  if (!anti || target_i >= 1.0) return {0.5, 0.8};
  const double deficit = 1.0 - target_i;
  const double ratio = deficit / (*anti - 1.0);
  // ratio(x) = ((1-x)^2 + w^2) / ((1+x)^2 + w^2), decreasing on [0, 1].
  auto ratio_at = [w](double x) { return ((1 - x) * (1 - x) + w * w) / ((1 + x) * (1 + x) + w * w); };
  double x;
  if (ratio >= 1.0) {
    x = 1e-3;
  } else if (ratio <= ratio_at(kPumpCeiling)) {
    x = 0.999;
  } else {
    double lo = 0.0, hi = kPumpCeiling;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (ratio_at(mid) > ratio ? lo : hi) = mid;
    }
    x = 0.5 * (lo + hi);
  }
  const double gain = 4.0 * x / ((1 + x) * (1 + x) + w * w);
  return clamp({x, std::clamp(deficit / gain, 0.05, 1.0)});
}

}  // namespace

std::optional<double> symmetric_antisqueezing(double target_i, double target_e) {
  // E = h^2 with h = 2 Vs Va / (Vs + Va)  =>  Va = h Vs / (2 Vs - h).
  if (!(target_i > 0.0) || !(target_e > 0.0)) return std::nullopt;
  const double h = std::sqrt(target_e);
  if (2.0 * target_i <= h) return std::nullopt;
  const double anti = h * target_i / (2.0 * target_i - h);
  if (anti < 1.0 || anti * target_i < 1.0 - 1e-12) return std::nullopt;
  return anti;
}

FitResult fit_to_measurements(double target_i, double target_e, const ChainScenario& tmpl,
                              const FitOptions& options) {
  if (!(target_i > 0.0) || !(target_e > 0.0) || !std::isfinite(target_i) ||
      !std::isfinite(target_e)) {
    throw InvalidArgument("fit targets must be positive and finite");
  }
  tmpl.validate();

  auto forward = [&](Params p) {
    const EntanglementReport r = analyze(with(tmpl, p));
    return Eigen::Vector2d(r.i_insep - target_i, r.e_epr - target_e);
  };

  // The vacuum reproduces (1, 1) for any efficiency.
  {
    const Params vacuum{0.0, tmpl.source.efficiency};
    const Eigen::Vector2d r = forward(vacuum);
    if (r.norm() < options.tolerance) {
      const ChainScenario s = with(tmpl, vacuum);
      return {s, analyze(s), 0, r.norm()};
    }
  }

  Params p = symmetric_seed(target_i, target_e, tmpl);
  Eigen::Vector2d res = forward(p);
  Params best = p;
  double best_norm = res.norm();
  int iter = 0;
  for (; iter < options.max_iterations && best_norm >= options.tolerance; ++iter) {
    // Central differences, one-sided at the box edges.
    Eigen::Matrix2d jac;
    const double hx = 1e-7, he = 1e-7;
    {
      const double lo = std::max(0.0, p.pump - hx), hi = std::min(kPumpCeiling, p.pump + hx);
      jac.col(0) = (forward({hi, p.efficiency}) - forward({lo, p.efficiency})) / (hi - lo);
    }
    {
      const double lo = std::max(0.0, p.efficiency - he), hi = std::min(1.0, p.efficiency + he);
      jac.col(1) = (forward({p.pump, hi}) - forward({p.pump, lo})) / (hi - lo);
    }
    if (std::abs(jac.determinant()) < 1e-14) break;
    const Eigen::Vector2d step = jac.partialPivLu().solve(-res);

    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, lambda *= 0.5) {
      const Params trial = clamp({p.pump + lambda * step(0), p.efficiency + lambda * step(1)});
      const Eigen::Vector2d r = forward(trial);
      if (r.norm() < res.norm()) {
        p = trial;
        res = r;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    if (res.norm() < best_norm) {
      best = p;
      best_norm = res.norm();
    }
  }

  if (best_norm >= options.tolerance) {
    const EntanglementReport closest = analyze(with(tmpl, best));
    std::ostringstream msg;
    msg << "no (pump, efficiency) reproduces I=" << target_i << ", E=" << target_e
        << "; closest reachable point I=" << closest.i_insep << ", E=" << closest.e_epr
        << " at pump=" << best.pump << ", efficiency=" << best.efficiency;
    const double lower = std::pow(2.0 / (target_i + 1.0 / target_i), 2.0);
    const double upper = 4.0 * target_i * target_i;
    if (target_i < 1.0) {
      msg << "; a symmetric lossy pure squeezer at this I spans E in [" << lower << ", " << upper
          << ")";
    }
    if (const auto anti = symmetric_antisqueezing(target_i, target_e)) {
      msg << "; the targets need an antisqueezed variance of about " << *anti;
    }
    throw NoSolution(msg.str());
  }

  const ChainScenario fitted = with(tmpl, best);
  return {fitted, analyze(fitted), iter, best_norm};
}

}  // namespace eprmux
