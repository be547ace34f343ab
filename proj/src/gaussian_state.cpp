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

#include "eprmux/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

void check_mode(const GaussianState& state, std::size_t mode) {
  if (mode >= state.modes()) {
    std::ostringstream msg;
    msg << "mode index " << mode << " out of range for a " << state.modes() << "-mode state";
    throw InvalidArgument(msg.str());
  }
}

std::string describe(const SidebandLabel& label) {
  std::ostringstream out;
  out << to_string(label.path) << "@" << label.offset << "Hz/" << label.rbw << "Hz";
  return out.str();
}

// Embeds a 2k x 2k block acting on `modes` into a 2n x 2n identity.
Eigen::MatrixXd embed(std::size_t n, std::span<const std::size_t> modes,
                      const Eigen::MatrixXd& block, double fill_diagonal) {
  Eigen::MatrixXd full = fill_diagonal * Eigen::MatrixXd::Identity(2 * n, 2 * n);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      full.block<2, 2>(2 * modes[i], 2 * modes[j]) = block.block<2, 2>(2 * i, 2 * j);
    }
  }
  return full;
}

void check_distinct(const GaussianState& state, std::span<const std::size_t> modes) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    check_mode(state, modes[i]);
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      if (modes[i] == modes[j]) throw InvalidArgument("mode indices must be distinct");
    }
  }
}

}  // namespace

std::string to_string(Path path) {
  switch (path) {
    case Path::source:
      return "source";
    case Path::transmitted:
      return "transmitted";
    case Path::reflected:
      return "reflected";
  }
  return "unknown";
}

void validate_label(const SidebandLabel& label) {
  if (!(label.rbw > 0.0) || !std::isfinite(label.rbw)) {
    throw InvalidArgument("sideband rbw must be positive: " + describe(label));
  }
  if (!std::isfinite(label.offset) || std::abs(label.offset) <= label.rbw / 2.0) {
    throw InvalidArgument("sideband overlaps the carrier: " + describe(label));
  }
}

bool overlaps(const SidebandLabel& a, const SidebandLabel& b) {
  if (a.path != b.path) return false;
  return std::abs(a.offset - b.offset) < (a.rbw + b.rbw) / 2.0;
}

void validate_labels(std::span<const SidebandLabel> labels) {
  for (const auto& label : labels) validate_label(label);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (overlaps(labels[i], labels[j])) {
        throw LabelCollision("sidebands overlap: " + describe(labels[i]) + " and " +
                             describe(labels[j]));
      }
    }
  }
}

Eigen::MatrixXd symplectic_form(std::size_t modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (std::size_t k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

GaussianState::GaussianState(std::vector<SidebandLabel> labels, Eigen::VectorXd mean,
                             Eigen::MatrixXd cov)
    : labels_(std::move(labels)), mean_(std::move(mean)), cov_(std::move(cov)) {
  if (labels_.empty()) throw InvalidArgument("a state needs at least one mode");
  const auto dim = static_cast<Eigen::Index>(2 * labels_.size());
  if (mean_.size() != dim || cov_.rows() != dim || cov_.cols() != dim) {
    throw InvalidArgument("mean/covariance dimensions do not match the mode count");
  }
  validate_labels(labels_);
  if (!cov_.allFinite() || !mean_.allFinite()) {
    throw InvalidArgument("covariance and mean must be finite");
  }
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("covariance matrix is not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

GaussianState GaussianState::vacuum(std::vector<SidebandLabel> labels) {
  const auto dim = static_cast<Eigen::Index>(2 * labels.size());
  return GaussianState(std::move(labels), Eigen::VectorXd::Zero(dim),
                       Eigen::MatrixXd::Identity(dim, dim));
}

const SidebandLabel& GaussianState::label(std::size_t mode) const {
  check_mode(*this, mode);
  return labels_[mode];
}

std::optional<std::size_t> GaussianState::find(double offset, Path path) const {
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    const auto& l = labels_[k];
    if (l.path == path && std::abs(l.offset - offset) < l.rbw / 2.0) return k;
  }
  return std::nullopt;
}

std::vector<std::size_t> GaussianState::modes_on(Path path) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (labels_[k].path == path) out.push_back(k);
  }
  return out;
}

double GaussianState::min_uncertainty_eigenvalue() const {
  const Eigen::MatrixXcd hermitian =
      cov_.cast<std::complex<double>>() +
      std::complex<double>(0.0, 1.0) * symplectic_form(modes()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool GaussianState::is_physical(double tolerance) const {
  return min_uncertainty_eigenvalue() >= -tolerance;
}

void GaussianState::require_physical(double tolerance) const {
  const double lowest = min_uncertainty_eigenvalue();
  if (lowest < -tolerance) {
    std::ostringstream msg;
    msg << "covariance violates the uncertainty relation (min eigenvalue of cov + i*Omega = "
        << lowest << ")";
    throw InvalidState(msg.str());
  }
}

GaussianState GaussianState::subsystem(std::span<const std::size_t> modes) const {
  check_distinct(*this, modes);
  if (modes.empty()) throw InvalidArgument("subsystem needs at least one mode");
  const auto k = static_cast<Eigen::Index>(modes.size());
  std::vector<SidebandLabel> labels;
  Eigen::VectorXd mean(2 * k);
  Eigen::MatrixXd cov(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    labels.push_back(labels_[modes[i]]);
    mean.segment<2>(2 * i) = mean_.segment<2>(2 * modes[i]);
    for (Eigen::Index j = 0; j < k; ++j) {
      cov.block<2, 2>(2 * i, 2 * j) = cov_.block<2, 2>(2 * modes[i], 2 * modes[j]);
    }
  }
  return GaussianState(std::move(labels), std::move(mean), std::move(cov));
}

GaussianState append_vacuum(const GaussianState& state, std::vector<SidebandLabel> extra) {
  const auto n = static_cast<Eigen::Index>(state.modes());
  const auto m = static_cast<Eigen::Index>(extra.size());
  std::vector<SidebandLabel> labels = state.labels();
  labels.insert(labels.end(), extra.begin(), extra.end());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2 * (n + m));
  mean.head(2 * n) = state.mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2 * (n + m), 2 * (n + m));
  cov.topLeftCorner(2 * n, 2 * n) = state.cov();
  return GaussianState(std::move(labels), std::move(mean), std::move(cov));
}

GaussianState relabel(const GaussianState& state, std::size_t mode, SidebandLabel label) {
  check_mode(state, mode);
  auto labels = state.labels();
  labels[mode] = label;
  return GaussianState(std::move(labels), state.mean(), state.cov());
}

SymplecticOp rotation_op(double theta) {
  Eigen::MatrixXd m(2, 2);
  const double c = std::cos(theta), s = std::sin(theta);
  m << c, -s, s, c;
  return {SymplecticOp::Kind::rotation, m};
}

SymplecticOp squeeze_op(double r, double angle) {
  const Eigen::MatrixXd rot = rotation_op(angle).matrix;
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
  diag(0, 0) = std::exp(-r);
  diag(1, 1) = std::exp(r);
  return {SymplecticOp::Kind::squeeze, rot * diag * rot.transpose()};
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& amplitudes) {
  const auto rows = amplitudes.rows(), cols = amplitudes.cols();
  Eigen::MatrixXd out(2 * rows, 2 * cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto z = amplitudes(i, j);
      out(2 * i, 2 * j) = z.real();
      out(2 * i, 2 * j + 1) = -z.imag();
      out(2 * i + 1, 2 * j) = z.imag();
      out(2 * i + 1, 2 * j + 1) = z.real();
    }
  }
  return out;
}

SymplecticOp beamsplitter_op(double reflectivity, double phase) {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
    throw InvalidArgument("beam splitter reflectivity must lie in [0, 1]");
  }
  const double t = std::sqrt(1.0 - reflectivity);
  const double r = std::sqrt(reflectivity);
  const std::complex<double> e = std::polar(1.0, phase);
  Eigen::MatrixXcd u(2, 2);
  u << t, -r * std::conj(e), r * e, t;
  return {SymplecticOp::Kind::beamsplitter, realify(u)};
}

double symplectic_defect(const Eigen::MatrixXd& matrix) {
  const auto n = static_cast<std::size_t>(matrix.rows() / 2);
  const Eigen::MatrixXd omega = symplectic_form(n);
  return (matrix * omega * matrix.transpose() - omega).cwiseAbs().maxCoeff();
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op,
                               std::span<const std::size_t> modes) {
  check_distinct(state, modes);
  if (op.matrix.rows() != static_cast<Eigen::Index>(2 * modes.size()) ||
      op.matrix.cols() != op.matrix.rows()) {
    throw InvalidArgument("symplectic matrix size does not match the number of modes");
  }
  const Eigen::MatrixXd full = embed(state.modes(), modes, op.matrix, 1.0);
  return GaussianState(state.labels(), full * state.mean(),
                       full * state.cov() * full.transpose());
}

GaussianState apply_rotation(const GaussianState& state, std::size_t mode, double theta) {
  const std::size_t modes[] = {mode};
  return apply_symplectic(state, rotation_op(theta), modes);
}

GaussianState apply_squeezing(const GaussianState& state, std::size_t mode, double r,
                              double angle) {
  const std::size_t modes[] = {mode};
  return apply_symplectic(state, squeeze_op(r, angle), modes);
}

GaussianState apply_two_mode_bs(const GaussianState& state, std::size_t mode_a,
                                std::size_t mode_b, double reflectivity, double phase) {
  if (mode_a == mode_b) throw InvalidArgument("beam splitter needs two distinct modes");
  const std::size_t modes[] = {mode_a, mode_b};
  return apply_symplectic(state, beamsplitter_op(reflectivity, phase), modes);
}

GaussianState apply_loss(const GaussianState& state, std::size_t mode, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw InvalidArgument("loss transmission must lie in [0, 1]");
  }
  const std::size_t modes[] = {mode};
  Eigen::MatrixXcd gain(1, 1);
  gain(0, 0) = std::sqrt(eta);
  return apply_passive(state, modes, gain);
}

GaussianState apply_passive(const GaussianState& state, std::span<const std::size_t> modes,
                            const Eigen::MatrixXcd& transfer) {
  check_distinct(state, modes);
  const auto k = static_cast<Eigen::Index>(modes.size());
  if (transfer.rows() != k || transfer.cols() != k) {
    throw InvalidArgument("transfer matrix size does not match the number of modes");
  }
  const Eigen::MatrixXd real = realify(transfer);
  const Eigen::MatrixXd noise = Eigen::MatrixXd::Identity(2 * k, 2 * k) - real * real.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(noise, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < -1e-12) {
    throw InvalidArgument("transfer matrix is not a contraction (it would add energy)");
  }
  const std::size_t n = state.modes();
  const Eigen::MatrixXd full = embed(n, modes, real, 1.0);
  const Eigen::MatrixXd added = embed(n, modes, noise, 0.0);
  return GaussianState(state.labels(), full * state.mean(),
                       full * state.cov() * full.transpose() + added);
}

double project_quadrature(const GaussianState& state, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != state.cov().rows()) {
    throw InvalidArgument("projection vector length must be 2n");
  }
  if (std::abs(coeffs.squaredNorm() - 1.0) > 1e-12) {
    throw InvalidArgument("projection vector must have unit norm");
  }
  return coeffs.dot(state.cov() * coeffs);
}

double bilinear_form(const GaussianState& state, const Eigen::VectorXd& coeffs_a,
                     const Eigen::VectorXd& coeffs_b) {
  if (coeffs_a.size() != state.cov().rows() || coeffs_b.size() != state.cov().rows()) {
    throw InvalidArgument("projection vector length must be 2n");
  }
  return coeffs_a.dot(state.cov() * coeffs_b);
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov) {
  // nu_k are the moduli of the eigenvalues of i*Omega*cov; computed through
  // the Hermitian matrix i * cov^{1/2} Omega cov^{1/2}, which shares them.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidState("covariance is not positive definite");
  }
  const Eigen::MatrixXd root = eig.operatorSqrt();
  const auto n = static_cast<std::size_t>(cov.rows() / 2);
  const Eigen::MatrixXd antisym = root * symplectic_form(n) * root;
  const Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * antisym.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  // Spectrum is {+nu_k, -nu_k}; the upper half holds the nu_k.
  const Eigen::VectorXd all = solver.eigenvalues();
  Eigen::VectorXd nu = all.tail(static_cast<Eigen::Index>(n));
  std::sort(nu.data(), nu.data() + nu.size());
  return nu;
}

double ppt_min_symplectic_eigenvalue(const GaussianState& state,
                                     std::span<const std::size_t> part_b) {
  check_distinct(state, part_b);
  if (part_b.empty() || part_b.size() >= state.modes()) {
    throw InvalidArgument("bipartition needs two non-empty parts");
  }
  state.require_physical();
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(2 * state.modes()));
  for (auto m : part_b) flip(static_cast<Eigen::Index>(2 * m + 1)) = -1.0;
  const Eigen::MatrixXd transposed = flip.asDiagonal() * state.cov() * flip.asDiagonal();
  return symplectic_eigenvalues(transposed).minCoeff();
}

}  // namespace eprmux
