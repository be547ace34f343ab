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

#include "eprmux/criteria.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGridSteps = 360;
constexpr double kAngleTolerance = 1e-6;
constexpr int kMaxSweeps = 500;

Eigen::Matrix4d frame_rotation(double theta_a, double theta_b) {
  Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
  const double ca = std::cos(theta_a), sa = std::sin(theta_a);
  const double cb = std::cos(theta_b), sb = std::sin(theta_b);
  r.block<2, 2>(0, 0) << ca, sa, -sa, ca;
  r.block<2, 2>(2, 2) << cb, sb, -sb, cb;
  return r;
}

// V(X_A(ta) - X_B(tb)) on the reference covariance.
double difference_variance(const Eigen::Matrix4d& ref, double ta, double tb) {
  const Eigen::Vector4d u(std::cos(ta), std::sin(ta), -std::cos(tb), -std::sin(tb));
  return u.dot(ref * u);
}

template <class F>
double golden_section(F f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

void check_unit(const Eigen::VectorXd& v, const char* name) {
  if (std::abs(v.squaredNorm() - 1.0) > 1e-12) {
    throw InvalidArgument(std::string("projection ") + name + " is not unit norm");
  }
}

}  // namespace

JointSecondMoments JointSecondMoments::from_matrix(const Eigen::Matrix4d& m) {
  JointSecondMoments out;
  out.v_xa = m(0, 0);
  out.v_xpa = m(1, 1);
  out.v_xb = m(2, 2);
  out.v_xpb = m(3, 3);
  out.c_x = m(0, 2);
  out.c_xp = m(1, 3);
  out.full = m;
  return out;
}

void JointSecondMoments::validate() const {
  for (double v : {v_xa, v_xb, v_xpa, v_xpb}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("variances must be positive");
  }
  const double slack = 1.0 + 1e-12;
  if (std::abs(c_x) > std::sqrt(v_xa * v_xb) * slack ||
      std::abs(c_xp) > std::sqrt(v_xpa * v_xpb) * slack) {
    throw InvalidArgument("covariance exceeds the Cauchy-Schwarz bound");
  }
  if (full) {
    const Eigen::Matrix4d& m = *full;
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InvalidArgument("moment matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw InvalidArgument("moment matrix is not positive semidefinite");
    }
  }
}

double duan_inseparability(const JointSecondMoments& m) {
  m.validate();
  return 0.25 * (m.v_xa + m.v_xb - 2.0 * m.c_x + m.v_xpa + m.v_xpb + 2.0 * m.c_xp);
}

ReidResult reid_epr(const JointSecondMoments& m) {
  if (m.v_xb == 0.0 || m.v_xpb == 0.0) {
    throw NumericError("Bob's variance vanishes; conditional variance undefined");
  }
  m.validate();
  ReidResult r;
  r.gain = m.c_x / m.v_xb;
  r.gain_perp = -m.c_xp / m.v_xpb;
  r.conditional_x = m.v_xa - m.c_x * m.c_x / m.v_xb;
  r.conditional_x_perp = m.v_xpa - m.c_xp * m.c_xp / m.v_xpb;
  r.e_epr = r.conditional_x * r.conditional_x_perp;
  return r;
}

JointSecondMoments moments_at(const Eigen::Matrix4d& reference, double theta_a, double theta_b) {
  const Eigen::Matrix4d r = frame_rotation(theta_a, theta_b);
  return JointSecondMoments::from_matrix(r * reference * r.transpose());
}

AngleOptimum optimize_duan_angles(const Eigen::Matrix4d& reference) {
  if (!reference.allFinite()) throw InvalidArgument("reference covariance must be finite");

  // Coarse scan. V = a(ta) + b(tb) - 2 (cos ta, sin ta) C (cos tb, sin tb)^T.
  const Eigen::Matrix2d aa = reference.block<2, 2>(0, 0);
  const Eigen::Matrix2d bb = reference.block<2, 2>(2, 2);
  const Eigen::Matrix2d ab = reference.block<2, 2>(0, 2);
  std::array<Eigen::Vector2d, kGridSteps> dirs;
  std::array<double, kGridSteps> va{}, vb{};
  for (int k = 0; k < kGridSteps; ++k) {
    const double t = 2.0 * kPi * k / kGridSteps;
    dirs[k] = Eigen::Vector2d(std::cos(t), std::sin(t));
    va[k] = dirs[k].dot(aa * dirs[k]);
    vb[k] = dirs[k].dot(bb * dirs[k]);
  }
  int best_a = 0, best_b = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridSteps; ++i) {
    const Eigen::RowVector2d row = dirs[i].transpose() * ab;
    for (int j = 0; j < kGridSteps; ++j) {
      const double v = va[i] + vb[j] - 2.0 * row.dot(dirs[j]);
      if (v < best) {
        best = v;
        best_a = i;
        best_b = j;
      }
    }
  }

  double ta = 2.0 * kPi * best_a / kGridSteps;
  double tb = 2.0 * kPi * best_b / kGridSteps;
  const double step = 2.0 * kPi / kGridSteps;
  double value = difference_variance(reference, ta, tb);
  int sweeps = 0;
  bool converged = false;
  while (sweeps < kMaxSweeps) {
    ++sweeps;
    const double na = golden_section([&](double t) { return difference_variance(reference, t, tb); },
                                     ta - step, ta + step, 1e-9);
    const double nb = golden_section([&](double t) { return difference_variance(reference, na, t); },
                                     tb - step, tb + step, 1e-9);
    const double next = difference_variance(reference, na, nb);
    const double move = std::max(std::abs(na - ta), std::abs(nb - tb));
    const bool flat = std::abs(value - next) <= 1e-15 * std::max(1.0, std::abs(value));
    ta = na;
    tb = nb;
    value = next;
    if (move < kAngleTolerance || flat) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("angle optimisation did not converge");

  AngleOptimum out;
  out.theta_a = wrap(ta);
  out.theta_b = wrap(tb);
  out.iterations = sweeps;
  out.moments = moments_at(reference, out.theta_a, out.theta_b);
  out.min_difference_variance = value;
  out.insep = duan_inseparability(out.moments);
  return out;
}

JointSecondMoments extract_moments(const GaussianState& state, const Eigen::VectorXd& alice_x,
                                   const Eigen::VectorXd& alice_x_perp,
                                   const Eigen::VectorXd& bob_x,
                                   const Eigen::VectorXd& bob_x_perp) {
  check_unit(alice_x, "X_A");
  check_unit(alice_x_perp, "Xp_A");
  check_unit(bob_x, "X_B");
  check_unit(bob_x_perp, "Xp_B");
  if (std::abs(alice_x.dot(alice_x_perp)) > 1e-9 || std::abs(bob_x.dot(bob_x_perp)) > 1e-9) {
    throw InvalidArgument("X and Xp projections of a site must be orthogonal");
  }
  return JointSecondMoments::from_matrix(
      reference_covariance(state, {alice_x, alice_x_perp}, {bob_x, bob_x_perp}));
}

Eigen::Matrix4d reference_covariance(const GaussianState& state, const SiteProjections& alice,
                                     const SiteProjections& bob) {
  const Eigen::VectorXd* v[4] = {&alice.x, &alice.x_perp, &bob.x, &bob.x_perp};
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      m(i, j) = m(j, i) = bilinear_form(state, *v[i], *v[j]);
    }
  }
  return m;
}

EntanglementReport report_from_moments(const JointSecondMoments& moments, double theta_a,
                                       double theta_b) {
  const ReidResult reid = reid_epr(moments);
  EntanglementReport r;
  r.i_insep = duan_inseparability(moments);
  r.e_epr = reid.e_epr;
  r.g_opt = reid.gain;
  r.g_perp_opt = reid.gain_perp;
  r.conditional_x = reid.conditional_x;
  r.conditional_x_perp = reid.conditional_x_perp;
  r.theta_a = theta_a;
  r.theta_b = theta_b;
  r.moments = moments;
  return r;
}

EntanglementReport evaluate_chain(const ChainResult& chain, const ChainScenario& scenario) {
  const Eigen::Matrix4d ref = reference_covariance(chain.state, chain.alice, chain.bob);
  const AngleOptimum opt = optimize_duan_angles(ref);
  return report_from_moments(opt.moments, wrap(scenario.alice.lo_phase + opt.theta_a),
                             wrap(scenario.bob.lo_phase + opt.theta_b));
}

EntanglementReport analyze(const ChainScenario& scenario) {
  return evaluate_chain(run_chain(scenario), scenario);
}

}  // namespace eprmux
