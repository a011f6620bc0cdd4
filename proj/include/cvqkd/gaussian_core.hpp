// Copyright 2026 The cvqkd Authors
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
#pragma once

// Covariance-matrix description of the zero-mean Gaussian states that appear
// in the no-switching protocol. Every channel considered here is symmetric in
// x and p and has no x-p correlations, so states are stored as one block per
// quadrature instead of an interleaved 2n x 2n matrix.

#include <Eigen/Dense>

#include <cstddef>
#include <span>

#include "cvqkd/errors.hpp"

namespace cvqkd {

/// Quadrature variance of the vacuum. All variances are in these units.
inline constexpr double kShotNoise = 1.0;

inline constexpr double kSingularDeterminant = 1e-12;
inline constexpr double kNegativeVarianceSlack = 1e-12;

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

enum class Quadrature { X, P };

/// Gaussian channel seen by the legitimate parties: transmittance T and the
/// input-referred noise chi = (1 - T) / T + excess_noise.
struct ChannelParams {
  double transmittance = 1.0;
  double excess_noise = 0.0;
  double chi = 0.0;
};

/// Throws DomainError unless 0 < T <= 1 and eps >= 0.
ChannelParams make_channel(double transmittance, double excess_noise);

/// T = 10^(-loss_db / 10).
ChannelParams channel_from_loss_db(double loss_db, double excess_noise);
double loss_db_to_transmittance(double loss_db);
/// -10 log10(T). Throws DomainError unless 0 < T <= 1.
double transmittance_to_loss_db(double transmittance);

/// Variance V of Alice's thermal (EPR-reduced) mode. V = 1 means no modulation.
struct ProtocolParams {
  double v = 1.0;
};

ProtocolParams make_protocol(double v);

struct TwoModeCovariance {
  Mat2 x_block;
  Mat2 p_block;
};

/// Per-quadrature covariance of an n-mode state.
struct MultiModeCovariance {
  Eigen::MatrixXd x_block;
  Eigen::MatrixXd p_block;

  [[nodiscard]] std::size_t n_modes() const {
    return static_cast<std::size_t>(x_block.rows());
  }
  [[nodiscard]] const Eigen::MatrixXd& block(Quadrature q) const {
    return q == Quadrature::X ? x_block : p_block;
  }
};

/// A block-diagonal symplectic map on (B0, E1, E2): S_x acts on the x
/// quadratures and S_p = (S_x^T)^-1 on the p quadratures.
class SymplecticPair {
 public:
  /// Throws SingularMatrixError when |det s_x| < kSingularDeterminant.
  static SymplecticPair from_sx(const Mat3& s_x);
  static SymplecticPair identity();

  [[nodiscard]] const Mat3& s_x() const { return s_x_; }
  [[nodiscard]] const Mat3& s_p() const { return s_p_; }

  /// Max-abs entry of S J S^T - J for the assembled 6x6 transform.
  [[nodiscard]] double commutator_residual() const;

 private:
  SymplecticPair(const Mat3& s_x, const Mat3& s_p) : s_x_(s_x), s_p_(s_p) {}

  Mat3 s_x_;
  Mat3 s_p_;
};

// Mode ordering of the state returned by apply_attack.
inline constexpr int kModeA = 0;
inline constexpr int kModeB = 1;
inline constexpr int kModeE1 = 2;
inline constexpr int kModeE2 = 3;

// Closed-form adjugate inverses. Throw SingularMatrixError below
// kSingularDeterminant.
Mat2 inverse2(const Mat2& m);
Mat3 inverse3(const Mat3& m);

/// EPR state of variance V with one arm sent through the channel.
TwoModeCovariance epr_through_channel(const ProtocolParams& protocol,
                                      const ChannelParams& channel);

/// Two-mode EPR state of variance V as a MultiModeCovariance (A, B0).
MultiModeCovariance epr_state(const ProtocolParams& protocol);

MultiModeCovariance to_multimode(const TwoModeCovariance& cov);

/// var_x - cov_xy^2 / var_y. Tiny negative results are clamped to zero.
double conditional_variance(double var_x, double var_y, double cov_xy);

/// Schur complement of the measured modes in the chosen quadrature block.
/// The result holds the retained modes in their original order; their
/// conjugate block is copied unchanged.
MultiModeCovariance condition_on_measurement(
    const MultiModeCovariance& cov, std::span<const int> measured,
    Quadrature quadrature);

/// Conditional variance of one quadrature of `target` given the same-named
/// quadrature of `measured` (a single homodyne outcome).
double conditional_variance_of(const MultiModeCovariance& cov, int target,
                               int measured, Quadrature quadrature);

/// (v + 1) / 2: the variance of a heterodyne outcome when the underlying
/// quadrature has conditional variance v.
double heterodyne_conditioned_variance(double v_conditional);

/// (A, B, E1, E2) state after S acts on (B0, E1, E2) of EPR(V) + vacua.
MultiModeCovariance apply_attack(const ProtocolParams& protocol,
                                 const SymplecticPair& attack);

/// Applies a linear map L (rows: outputs, columns: modes of `cov`) to both
/// quadrature blocks: L_x Gamma_x L_x^T and L_p Gamma_p L_p^T.
MultiModeCovariance transform(const MultiModeCovariance& cov,
                              const Eigen::MatrixXd& map_x,
                              const Eigen::MatrixXd& map_p);

/// Direct sum with `n` vacuum modes appended.
MultiModeCovariance append_vacuum(const MultiModeCovariance& cov,
                                  std::size_t n);

/// Smallest eigenvalue of x_block - p_block^-1. Non-negative for physical
/// states without x-p correlations.
double uncertainty_margin(const MultiModeCovariance& cov);

bool is_physical(const MultiModeCovariance& cov, double tol = 1e-9);

}  // namespace cvqkd
