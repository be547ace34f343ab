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


#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "eprmux/errors.hpp"
#include "eprmux/gaussian_state.hpp"
#include "oracles.hpp"
#include "random_chains.hpp"

namespace {

using namespace eprmux;
constexpr double kPi = std::numbers::pi;

std::vector<SidebandLabel> labels(std::size_t n) { return chains::labels(n); }

Eigen::VectorXd unit(std::size_t len, std::size_t index) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(len));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

// Mode 0 squeezed in P, mode 1 in X, then 50:50.
GaussianState epr_state(double s) {
  const double r = -0.5 * std::log(s);
  GaussianState st = GaussianState::vacuum(labels(2));
  st = apply_squeezing(st, 0, r, kPi / 2);
  st = apply_squeezing(st, 1, r, 0.0);
  return apply_two_mode_bs(st, 0, 1, 0.5, 0.0);
}

TEST(Vacuum, SingleModeIsIdentity) {
  const auto v = GaussianState::vacuum(labels(1));
  EXPECT_EQ(v.cov(), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(v.mean(), Eigen::VectorXd::Zero(2));
}

TEST(Vacuum, TwoModesIsIdentity) {
  const auto v = GaussianState::vacuum(labels(2));
  EXPECT_EQ(v.cov(), Eigen::MatrixXd::Identity(4, 4));
  for (std::size_t m = 0; m < 2; ++m) EXPECT_EQ(project_quadrature(v, unit(4, 2 * m)), 1.0);
}

TEST(Vacuum, OverlappingLabelsRejected) {
  std::vector<SidebandLabel> l{{1e6, 1e5, Path::source}, {1.05e6, 1e5, Path::source}};
  EXPECT_THROW(GaussianState::vacuum(l), LabelCollision);
  // Same frequency on different paths is fine.
  l[1] = {1e6, 1e5, Path::reflected};
  EXPECT_NO_THROW(GaussianState::vacuum(l));
}

TEST(Vacuum, LabelTouchingCarrierRejected) {
  std::vector<SidebandLabel> l{{4e4, 1e5, Path::source}};
  EXPECT_THROW(GaussianState::vacuum(l), InvalidArgument);
}

TEST(Rotation, ZeroIsIdentity) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, 0.7);
  EXPECT_TRUE(apply_rotation(s, 0, 0.0).cov().isApprox(s.cov(), 1e-15));
}

TEST(Rotation, QuarterTurnSwapsQuadratures) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, 0.7);
  const auto r = apply_rotation(s, 0, kPi / 2);
  EXPECT_NEAR(r.cov()(0, 0), s.cov()(1, 1), 1e-12);
  EXPECT_NEAR(r.cov()(1, 1), s.cov()(0, 0), 1e-12);
}

TEST(Rotation, FullTurnIsIdentity) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, 0.7, 0.3);
  EXPECT_LT((apply_rotation(s, 0, 2 * kPi).cov() - s.cov()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BeamSplitter, ZeroReflectivityIsIdentity) {
  auto s = apply_squeezing(GaussianState::vacuum(labels(2)), 0, 0.5);
  s = apply_squeezing(s, 1, 0.2, 1.0);
  EXPECT_LT((apply_two_mode_bs(s, 0, 1, 0.0).cov() - s.cov()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BeamSplitter, BalancedCrossCovarianceMatchesExplicitProduct) {
  const double s = 0.3;
  const auto out = epr_state(s);
  const Eigen::Matrix4d expected = oracle::two_squeezer_epr(s);
  EXPECT_LT((out.cov() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(std::abs(out.cov()(0, 2)), (1.0 / s - s) / 2.0, 1e-12);
}

TEST(BeamSplitter, FullReflectivitySwapsModes) {
  auto s = apply_squeezing(GaussianState::vacuum(labels(2)), 0, 0.6);
  const auto out = apply_two_mode_bs(s, 0, 1, 1.0);
  // Swap up to a phase: the squeezed mode's spectrum moves to mode 1.
  const Eigen::Matrix2d a = s.cov().block(0, 0, 2, 2), b = out.cov().block(2, 2, 2, 2);
  EXPECT_NEAR(a.trace(), b.trace(), 1e-12);
  EXPECT_NEAR(a.determinant(), b.determinant(), 1e-12);
  EXPECT_LT((out.cov().block(0, 0, 2, 2) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BeamSplitter, SameModeRejected) {
  EXPECT_THROW(apply_two_mode_bs(GaussianState::vacuum(labels(2)), 1, 1, 0.5), InvalidArgument);
  EXPECT_THROW(apply_two_mode_bs(GaussianState::vacuum(labels(2)), 0, 1, 1.5), InvalidArgument);
}

TEST(BeamSplitter, ConservesPhotonNumber) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    auto s = apply_squeezing(GaussianState::vacuum(labels(3)), 0, u(rng), 6 * u(rng));
    s = apply_squeezing(s, 2, u(rng), 6 * u(rng));
    const auto out = apply_two_mode_bs(s, 0, 2, u(rng), 6 * u(rng));
    EXPECT_NEAR(out.cov().trace(), s.cov().trace(), 1e-10);
  }
}

TEST(Loss, UnitTransmissionIsIdentity) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, 0.4);
  EXPECT_LT((apply_loss(s, 0, 1.0).cov() - s.cov()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Loss, ZeroTransmissionGivesVacuum) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, 0.4);
  EXPECT_LT((apply_loss(s, 0, 0.0).cov() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(Loss, HalfOnQuarterVariance) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, std::log(2.0));
  ASSERT_NEAR(s.cov()(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(apply_loss(s, 0, 0.5).cov()(0, 0), 0.625, 1e-15);
}

TEST(Loss, MeanScalesWithAmplitude) {
  Eigen::VectorXd mean(2);
  mean << 2.0, -1.0;
  const GaussianState s(labels(1), mean, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LT((apply_loss(s, 0, 0.36).mean() - 0.6 * mean).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Loss, OutOfRangeRejected) {
  const auto v = GaussianState::vacuum(labels(1));
  EXPECT_THROW(apply_loss(v, 0, -0.1), InvalidArgument);
  EXPECT_THROW(apply_loss(v, 0, 1.1), InvalidArgument);
}

TEST(Loss, Composes) {
  auto s = apply_squeezing(GaussianState::vacuum(labels(2)), 0, 0.9, 0.4);
  s = apply_two_mode_bs(s, 0, 1, 0.3, 0.2);
  const auto twice = apply_loss(apply_loss(s, 0, 0.7), 0, 0.4);
  const auto once = apply_loss(s, 0, 0.28);
  EXPECT_LT((twice.cov() - once.cov()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, VacuumGivesOneForUnitVectors) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  const auto v = GaussianState::vacuum(labels(3));
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd c(6);
    for (auto& x : c) x = n(rng);
    c.normalize();
    EXPECT_NEAR(project_quadrature(v, c), 1.0, 1e-15);
  }
}

TEST(Projection, SqueezedAxis) {
  const auto s = apply_squeezing(GaussianState::vacuum(labels(1)), 0, 0.5);
  EXPECT_NEAR(project_quadrature(s, unit(2, 0)), std::exp(-1.0), 1e-15);
}

TEST(Projection, JointDifferenceOnEprState) {
  const double s = 0.2;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c(0) = 1 / std::sqrt(2.0);
  c(2) = -1 / std::sqrt(2.0);
  const Eigen::Matrix4d ref = oracle::two_squeezer_epr(s);
  EXPECT_NEAR(c.dot(ref * c), s, 1e-12);
  EXPECT_NEAR(project_quadrature(epr_state(s), c), s, 1e-12);
}

TEST(Projection, RejectsUnnormalized) {
  const auto v = GaussianState::vacuum(labels(1));
  EXPECT_THROW(project_quadrature(v, 1.01 * unit(2, 0)), InvalidArgument);
  EXPECT_THROW(project_quadrature(v, unit(3, 0)), InvalidArgument);
}

TEST(Ppt, ProductVacuum) {
  const std::size_t b[] = {1};
  EXPECT_NEAR(ppt_min_symplectic_eigenvalue(GaussianState::vacuum(labels(2)), b), 1.0, 1e-12);
}

TEST(Ppt, EprStateGivesSqueezedVariance) {
  const std::size_t b[] = {1};
  for (double s : {0.1, 0.25, 0.5, 0.9}) {
    const auto st = epr_state(s);
    EXPECT_NEAR(ppt_min_symplectic_eigenvalue(st, b), s, 1e-10);
    EXPECT_NEAR(oracle::ppt_eigenvalue(Eigen::MatrixXd(oracle::two_squeezer_epr(s)), b), s, 1e-10);
  }
}

TEST(Ppt, MatchesGeneralEigensolver) {
  std::mt19937_64 rng(9);
  const std::size_t b[] = {1, 2};
  for (int k = 0; k < 100; ++k) {
    GaussianState s = GaussianState::vacuum(labels(3));
    for (int j = 0; j < 8; ++j) s = chains::random_op(s, rng);
    EXPECT_NEAR(ppt_min_symplectic_eigenvalue(s, b), oracle::ppt_eigenvalue(s.cov(), b), 1e-8);
  }
}

TEST(Ppt, RejectsUnphysical) {
  const GaussianState bad(labels(2), Eigen::VectorXd::Zero(4), 0.5 * Eigen::MatrixXd::Identity(4, 4));
  const std::size_t b[] = {1};
  EXPECT_THROW(ppt_min_symplectic_eigenvalue(bad, b), InvalidState);
  const std::size_t none[] = {0, 1};
  EXPECT_THROW(ppt_min_symplectic_eigenvalue(GaussianState::vacuum(labels(2)), none),
               InvalidArgument);
}

TEST(Symplectic, LosslessOpsPreserveForm) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_LT(symplectic_defect(rotation_op(20 * u(rng)).matrix), 1e-10);
    EXPECT_LT(symplectic_defect(squeeze_op(2 * u(rng), 7 * u(rng)).matrix), 1e-10);
    EXPECT_LT(symplectic_defect(beamsplitter_op(u(rng), 7 * u(rng)).matrix), 1e-10);
  }
}

TEST(Symplectic, RandomChainsStayPhysical) {
  const auto out = chains::run(5000, 17, kValidityTolerance);
  EXPECT_EQ(out.violations, 0) << "worst eigenvalue " << out.worst;
}

TEST(State, RejectsAsymmetricCovariance) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(2, 2);
  c(0, 1) = 0.1;
  EXPECT_THROW(GaussianState(labels(1), Eigen::VectorXd::Zero(2), c), InvalidArgument);
}

TEST(State, SubsystemAndFind) {
  const auto s = epr_state(0.3);
  const std::size_t order[] = {1};
  const auto sub = s.subsystem(order);
  EXPECT_EQ(sub.modes(), 1u);
  EXPECT_EQ(sub.cov(), s.cov().block(2, 2, 2, 2));
  EXPECT_EQ(s.find(2e6, Path::source), std::optional<std::size_t>(1));
  EXPECT_FALSE(s.find(2e6, Path::reflected).has_value());
}

TEST(State, RelabelCollisionRejected) {
  const auto s = GaussianState::vacuum(labels(2));
  EXPECT_THROW(relabel(s, 0, {2e6, 1e5, Path::source}), LabelCollision);
  EXPECT_NO_THROW(relabel(s, 0, {2e6, 1e5, Path::reflected}));
}

}  // namespace
