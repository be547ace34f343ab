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

// Entanglement witnesses on the joint quadrature statistics of two sites.
//
//   inseparability  I = (V(X_A - X_B) + V(Xp_A + Xp_B)) / 4       (< 1)
//   EPR-Reid        E = min_g V(X_A - g X_B) * min_g' V(Xp_A + g' Xp_B)  (< 1)
//
// Xp denotes the quadrature orthogonal to X at the same site.

#ifndef EPRMUX_CRITERIA_HPP
#define EPRMUX_CRITERIA_HPP

#include <optional>

#include <Eigen/Dense>

#include "eprmux/gaussian_state.hpp"
#include "eprmux/optics.hpp"

namespace eprmux {

/// Second moments over (X_A, Xp_A, X_B, Xp_B).
struct JointSecondMoments {
  double v_xa = 1.0;
  double v_xb = 1.0;
  double v_xpa = 1.0;
  double v_xpb = 1.0;
  double c_x = 0.0;   ///< Cov(X_A, X_B)
  double c_xp = 0.0;  ///< Cov(Xp_A, Xp_B)
  std::optional<Eigen::Matrix4d> full;

  static JointSecondMoments from_matrix(const Eigen::Matrix4d& matrix);
  /// Throws InvalidArgument for non-positive variances, |C| > sqrt(V V), or a
  /// full matrix that is asymmetric or indefinite.
  void validate() const;
};

double duan_inseparability(const JointSecondMoments& moments);

struct ReidResult {
  double e_epr = 1.0;
  double gain = 0.0;       ///< g minimising <(dX_A - g dX_B)^2>
  double gain_perp = 0.0;  ///< g' minimising <(dXp_A + g' dXp_B)^2>
  double conditional_x = 1.0;
  double conditional_x_perp = 1.0;
};

/// Closed-form gain minimisation; throws NumericError on a vanishing Bob
/// variance.
ReidResult reid_epr(const JointSecondMoments& moments);

/// Moments at LO angles (theta_a, theta_b) measured from the reference frame
/// of `reference`, a covariance over (X_A(0), X_A(pi/2), X_B(0), X_B(pi/2)).
JointSecondMoments moments_at(const Eigen::Matrix4d& reference, double theta_a, double theta_b);

struct AngleOptimum {
  double theta_a = 0.0;
  double theta_b = 0.0;
  double insep = 1.0;  ///< I with Xp at theta + pi/2
  double min_difference_variance = 2.0;
  JointSecondMoments moments;
  int iterations = 0;
};

/// Minimises V(X_A - X_B) over both angles: 1 degree grid, then alternating
/// golden-section refinement to 1e-6 rad.
AngleOptimum optimize_duan_angles(const Eigen::Matrix4d& reference);

/// Throws InvalidArgument if the X and Xp vectors of a site are not
/// orthogonal, or any vector is not unit norm.
JointSecondMoments extract_moments(const GaussianState& state, const Eigen::VectorXd& alice_x,
                                   const Eigen::VectorXd& alice_x_perp,
                                   const Eigen::VectorXd& bob_x, const Eigen::VectorXd& bob_x_perp);

/// Covariance over (X_A, Xp_A, X_B, Xp_B) of four projections.
Eigen::Matrix4d reference_covariance(const GaussianState& state, const SiteProjections& alice,
                                     const SiteProjections& bob);

struct EntanglementReport {
  double i_insep = 1.0;
  double e_epr = 1.0;
  double g_opt = 0.0;
  double g_perp_opt = 0.0;
  double theta_a = 0.0;  ///< absolute LO phase, rad
  double theta_b = 0.0;
  double conditional_x = 1.0;
  double conditional_x_perp = 1.0;
  JointSecondMoments moments;
};

/// Evaluates both criteria on moments already taken at the given angles.
EntanglementReport report_from_moments(const JointSecondMoments& moments, double theta_a,
                                       double theta_b);

/// Optimises the LO angles on a chain result and evaluates both criteria.
EntanglementReport evaluate_chain(const ChainResult& chain, const ChainScenario& scenario);

EntanglementReport analyze(const ChainScenario& scenario);

// ---------------------------------------------------------------------------
// Inverse problem

struct FitOptions {
  double tolerance = 1e-6;  ///< on the residual norm
  int max_iterations = 60;
};

struct FitResult {
  ChainScenario scenario;
  EntanglementReport report;
  int iterations = 0;
  double residual = 0.0;
};

/// Finds (pump parameter, source efficiency) such that the chain built from
/// `tmpl` reproduces (target_i, target_e), by damped Newton iteration seeded
/// from the symmetric lumped-loss closed form. Throws NoSolution with a
/// diagnostic when the targets lie outside the model's reach.
FitResult fit_to_measurements(double target_i, double target_e, const ChainScenario& tmpl,
                              const FitOptions& options = {});

/// Symmetric lumped-loss model: the antisqueezed variance consistent with
/// I = V_sq and E = (V_sq V_anti / mean)^2; nullopt if none exists.
std::optional<double> symmetric_antisqueezing(double target_i, double target_e);

}  // namespace eprmux

#endif  // EPRMUX_CRITERIA_HPP
