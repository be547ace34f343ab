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

// Covariance-matrix representation of multimode Gaussian states of
// narrowband optical sideband modes.
//
// Conventions used throughout the library:
//   * quadratures are ordered per mode, interleaved: (X1, P1, X2, P2, ...)
//   * the vacuum has unit variance in every quadrature, so [X, P] = 2i and
//     a physical covariance satisfies cov + i*Omega >= 0 with Omega the
//     block-diagonal form [[0, 1], [-1, 0]]
//   * a complex amplitude gain z acting on a mode maps (X, P) through
//     [[Re z, -Im z], [Im z, Re z]]; the measured quadrature X_b at angle b
//     after the gain equals |z| X_{b - arg z} before it.

#ifndef EPRMUX_GAUSSIAN_STATE_HPP
#define EPRMUX_GAUSSIAN_STATE_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eprmux {

/// Tolerance on the smallest eigenvalue of cov + i*Omega.
inline constexpr double kValidityTolerance = 1e-9;

/// Spatial path a mode travels on. Modes on different paths may share a
/// frequency; modes on the same path may not overlap.
enum class Path { source, transmitted, reflected };

std::string to_string(Path path);

/// Narrowband optical mode at a signed Fourier offset from the carrier.
struct SidebandLabel {
  double offset = 0.0;  ///< Hz, signed, rotating frame of the carrier
  double rbw = 0.0;     ///< resolution bandwidth, Hz
  Path path = Path::source;

  friend bool operator==(const SidebandLabel&, const SidebandLabel&) = default;
};

/// Throws InvalidArgument unless rbw > 0 and the mode clears the carrier.
void validate_label(const SidebandLabel& label);

/// True when two labels share a path and their bands intersect.
bool overlaps(const SidebandLabel& a, const SidebandLabel& b);

/// Throws LabelCollision if any pair of labels overlaps.
void validate_labels(std::span<const SidebandLabel> labels);

/// 2n x 2n symplectic form with blocks [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(std::size_t modes);

/// Immutable Gaussian state. All operations below return new states.
class GaussianState {
 public:
  /// Validates labels, dimensions and symmetry. Physicality is not checked
  /// here; call is_physical() or require_physical().
  GaussianState(std::vector<SidebandLabel> labels, Eigen::VectorXd mean,
                Eigen::MatrixXd cov);

  static GaussianState vacuum(std::vector<SidebandLabel> labels);

  std::size_t modes() const { return labels_.size(); }
  const std::vector<SidebandLabel>& labels() const { return labels_; }
  const SidebandLabel& label(std::size_t mode) const;
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  /// Index of the mode at `offset` on `path`, matched to within half its rbw.
  std::optional<std::size_t> find(double offset, Path path) const;

  /// Modes travelling on `path`, in state order.
  std::vector<std::size_t> modes_on(Path path) const;

  /// Smallest eigenvalue of the Hermitian matrix cov + i*Omega.
  double min_uncertainty_eigenvalue() const;
  bool is_physical(double tolerance = kValidityTolerance) const;
  /// Throws InvalidState when is_physical() fails.
  void require_physical(double tolerance = kValidityTolerance) const;

  /// Reduced state on the listed modes, in the listed order.
  GaussianState subsystem(std::span<const std::size_t> modes) const;

 private:
  std::vector<SidebandLabel> labels_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Direct sum with additional vacuum modes appended at the end.
GaussianState append_vacuum(const GaussianState& state,
                            std::vector<SidebandLabel> extra);

/// Copy of the state with one mode relabelled. Collisions are rejected.
GaussianState relabel(const GaussianState& state, std::size_t mode,
                      SidebandLabel label);

struct SymplecticOp {
  enum class Kind { rotation, squeeze, beamsplitter, loss_dilation };
  Kind kind;
  Eigen::MatrixXd matrix;
};

SymplecticOp rotation_op(double theta);
/// Squeezes X by exp(-2r) in variance, along the axis rotated by `angle`.
SymplecticOp squeeze_op(double r, double angle = 0.0);
/// Beam splitter on two modes with power reflectivity `reflectivity`.
SymplecticOp beamsplitter_op(double reflectivity, double phase);
/// Real 2n x 2n image of an n x n complex amplitude matrix.
Eigen::MatrixXd realify(const Eigen::MatrixXcd& amplitudes);

/// Max-norm of M*Omega*M^T - Omega.
double symplectic_defect(const Eigen::MatrixXd& matrix);

/// Applies a symplectic matrix acting on the listed modes.
GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op,
                               std::span<const std::size_t> modes);

GaussianState apply_rotation(const GaussianState& state, std::size_t mode, double theta);

GaussianState apply_squeezing(const GaussianState& state, std::size_t mode, double r,
                              double angle = 0.0);

GaussianState apply_two_mode_bs(const GaussianState& state, std::size_t mode_a,
                                std::size_t mode_b, double reflectivity, double phase = 0.0);

/// Mixes the mode with vacuum: cov -> eta*cov + (1 - eta)*I on the mode.
GaussianState apply_loss(const GaussianState& state, std::size_t mode, double eta);

/// Passive linear map b = T a on the listed modes, with T a contraction.
/// The missing power is replaced with vacuum noise (I - R R^T). This covers
/// lossy filters: a complex gain z is loss |z|^2 followed by rotation arg z.
GaussianState apply_passive(const GaussianState& state, std::span<const std::size_t> modes,
                            const Eigen::MatrixXcd& transfer);

/// coeffs^T * cov * coeffs. Rejects coefficient vectors that are not unit
/// norm (tolerance 1e-12) instead of renormalizing them.
double project_quadrature(const GaussianState& state, const Eigen::VectorXd& coeffs);

/// coeffs_a^T * cov * coeffs_b, no normalization requirement.
double bilinear_form(const GaussianState& state, const Eigen::VectorXd& coeffs_a,
                     const Eigen::VectorXd& coeffs_b);

/// Smallest symplectic eigenvalue of the covariance with the P quadratures
/// of `part_b` sign-flipped (partial transpose). Values below 1 certify
/// entanglement between `part_b` and the remaining modes.
double ppt_min_symplectic_eigenvalue(const GaussianState& state,
                                     std::span<const std::size_t> part_b);

/// Symplectic eigenvalues of a positive definite covariance, ascending.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov);

}  // namespace eprmux

#endif  // EPRMUX_GAUSSIAN_STATE_HPP
