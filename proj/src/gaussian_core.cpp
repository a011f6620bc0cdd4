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
#include "cvqkd/gaussian_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cvqkd {

ChannelParams make_channel(double transmittance, double excess_noise) {
  if (!(transmittance > 0.0) || !(transmittance <= 1.0)) {
    throw DomainError("transmittance must lie in (0, 1], got " +
                      std::to_string(transmittance));
  }
  if (!(excess_noise >= 0.0) || !std::isfinite(excess_noise)) {
    throw DomainError("excess noise must be non-negative, got " +
                      std::to_string(excess_noise));
  }
  ChannelParams ch;
  ch.transmittance = transmittance;
  ch.excess_noise = excess_noise;
  ch.chi = (1.0 - transmittance) / transmittance + excess_noise;
  return ch;
}

double loss_db_to_transmittance(double loss_db) {
  if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) {
    throw DomainError("line loss must be a finite non-negative dB value");
  }
  return std::pow(10.0, -loss_db / 10.0);
}

double transmittance_to_loss_db(double transmittance) {
  if (!(transmittance > 0.0 && transmittance <= 1.0)) {
    throw DomainError("transmittance must lie in (0, 1]");
  }
  return transmittance == 1.0 ? 0.0 : -10.0 * std::log10(transmittance);
}

ChannelParams channel_from_loss_db(double loss_db, double excess_noise) {
  return make_channel(loss_db_to_transmittance(loss_db), excess_noise);
}

ProtocolParams make_protocol(double v) {
  if (!(v >= 1.0) || !std::isfinite(v)) {
    throw DomainError("modulation variance V must be >= 1, got " +
                      std::to_string(v));
  }
  return ProtocolParams{v};
}

Mat2 inverse2(const Mat2& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (std::abs(det) < kSingularDeterminant) {
    throw SingularMatrixError("2x2 matrix is singular");
  }
  Mat2 adj;
  adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return adj / det;
}

Mat3 inverse3(const Mat3& m) {
  Mat3 cof;
  cof(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  cof(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  cof(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  cof(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  cof(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  cof(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  cof(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  cof(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  cof(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double det =
      m(0, 0) * cof(0, 0) + m(0, 1) * cof(0, 1) + m(0, 2) * cof(0, 2);
  if (std::abs(det) < kSingularDeterminant) {
    throw SingularMatrixError("3x3 matrix is singular");
  }
  return cof.transpose() / det;
}

SymplecticPair SymplecticPair::from_sx(const Mat3& s_x) {
  return SymplecticPair(s_x, inverse3(s_x).transpose());
}

SymplecticPair SymplecticPair::identity() {
  return SymplecticPair(Mat3::Identity(), Mat3::Identity());
}

double SymplecticPair::commutator_residual() const {
  Eigen::Matrix<double, 6, 6> s = Eigen::Matrix<double, 6, 6>::Zero();
  s.topLeftCorner<3, 3>() = s_x_;
  s.bottomRightCorner<3, 3>() = s_p_;
  Eigen::Matrix<double, 6, 6> j = Eigen::Matrix<double, 6, 6>::Zero();
  j.topRightCorner<3, 3>() = Mat3::Identity();
  j.bottomLeftCorner<3, 3>() = -Mat3::Identity();
  return (s * j * s.transpose() - j).cwiseAbs().maxCoeff();
}

TwoModeCovariance epr_through_channel(const ProtocolParams& protocol,
                                      const ChannelParams& channel) {
  const double v = protocol.v;
  const double t = channel.transmittance;
  const double corr = std::sqrt(t * (v * v - 1.0));
  const double bob = t * (v + channel.chi);
  TwoModeCovariance cov;
  cov.x_block << v, corr, corr, bob;
  cov.p_block << v, -corr, -corr, bob;
  return cov;
}

MultiModeCovariance epr_state(const ProtocolParams& protocol) {
  const double v = protocol.v;
  const double corr = std::sqrt(v * v - 1.0);
  MultiModeCovariance cov;
  cov.x_block.resize(2, 2);
  cov.p_block.resize(2, 2);
  cov.x_block << v, corr, corr, v;
  cov.p_block << v, -corr, -corr, v;
  return cov;
}

MultiModeCovariance to_multimode(const TwoModeCovariance& cov) {
  return MultiModeCovariance{cov.x_block, cov.p_block};
}

double conditional_variance(double var_x, double var_y, double cov_xy) {
  if (!(var_y > 0.0)) {
    throw DomainError("conditioning variable must have positive variance");
  }
  const double result = var_x - cov_xy * cov_xy / var_y;
  if (result < 0.0) {
    if (result < -kNegativeVarianceSlack) {
      throw DomainError("conditional variance is negative: " +
                        std::to_string(result));
    }
    return 0.0;
  }
  return result;
}

namespace {

std::vector<int> retained_modes(std::size_t n, std::span<const int> measured) {
  std::vector<bool> is_measured(n, false);
  for (int m : measured) {
    if (m < 0 || static_cast<std::size_t>(m) >= n) {
      throw DomainError("measured mode index out of range");
    }
    if (is_measured[m]) {
      throw DomainError("measured mode listed twice");
    }
    is_measured[m] = true;
  }
  std::vector<int> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_measured[i]) kept.push_back(static_cast<int>(i));
  }
  return kept;
}

Eigen::MatrixXd small_inverse(const Eigen::MatrixXd& m) {
  switch (m.rows()) {
    case 1:
      if (std::abs(m(0, 0)) < kSingularDeterminant) {
        throw SingularMatrixError("measured variance is zero");
      }
      return Eigen::MatrixXd::Constant(1, 1, 1.0 / m(0, 0));
    case 2:
      return inverse2(Mat2(m));
    case 3:
      return inverse3(Mat3(m));
    default: {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (!lu.isInvertible() || std::abs(lu.determinant()) < kSingularDeterminant) {
        throw SingularMatrixError("measured block is singular");
      }
      return lu.inverse();
    }
  }
}

Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& block,
                                 const std::vector<int>& kept,
                                 std::span<const int> measured) {
  const auto nk = static_cast<Eigen::Index>(kept.size());
  const auto nm = static_cast<Eigen::Index>(measured.size());
  Eigen::MatrixXd out(nk, nk);
  if (nm == 1) {
    // Same arithmetic as conditional_variance on the diagonal.
    const int k = measured[0];
    const double var_k = block(k, k);
    if (!(var_k > 0.0)) {
      throw SingularMatrixError("measured variance is not positive");
    }
    for (Eigen::Index i = 0; i < nk; ++i) {
      for (Eigen::Index j = 0; j < nk; ++j) {
        const double a = block(kept[i], k);
        const double b = block(kept[j], k);
        out(i, j) = i == j ? conditional_variance(block(kept[i], kept[i]),
                                                  var_k, a)
                           : block(kept[i], kept[j]) - a * b / var_k;
      }
    }
    return out;
  }
  Eigen::MatrixXd s11(nk, nk), s12(nk, nm), s22(nm, nm);
  for (Eigen::Index i = 0; i < nk; ++i) {
    for (Eigen::Index j = 0; j < nk; ++j) s11(i, j) = block(kept[i], kept[j]);
    for (Eigen::Index j = 0; j < nm; ++j) s12(i, j) = block(kept[i], measured[j]);
  }
  for (Eigen::Index i = 0; i < nm; ++i) {
    for (Eigen::Index j = 0; j < nm; ++j) s22(i, j) = block(measured[i], measured[j]);
  }
  out = s11 - s12 * small_inverse(s22) * s12.transpose();
  for (Eigen::Index i = 0; i < nk; ++i) {
    if (out(i, i) < 0.0) {
      if (out(i, i) < -kNegativeVarianceSlack) {
        throw DomainError("conditioning produced a negative variance");
      }
      out(i, i) = 0.0;
    }
  }
  return out;
}

}  // namespace

MultiModeCovariance condition_on_measurement(const MultiModeCovariance& cov,
                                             std::span<const int> measured,
                                             Quadrature quadrature) {
  const std::vector<int> kept = retained_modes(cov.n_modes(), measured);
  if (measured.empty()) return cov;
  const Eigen::MatrixXd& conditioned = cov.block(quadrature);
  const Eigen::MatrixXd& conjugate =
      quadrature == Quadrature::X ? cov.p_block : cov.x_block;

  Eigen::MatrixXd kept_conjugate(kept.size(), kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < kept.size(); ++j) {
      kept_conjugate(i, j) = conjugate(kept[i], kept[j]);
    }
  }
  Eigen::MatrixXd schur = schur_complement(conditioned, kept, measured);

  MultiModeCovariance out;
  if (quadrature == Quadrature::X) {
    out.x_block = std::move(schur);
    out.p_block = std::move(kept_conjugate);
  } else {
    out.x_block = std::move(kept_conjugate);
    out.p_block = std::move(schur);
  }
  return out;
}

double conditional_variance_of(const MultiModeCovariance& cov, int target,
                               int measured, Quadrature quadrature) {
  const Eigen::MatrixXd& b = cov.block(quadrature);
  return conditional_variance(b(target, target), b(measured, measured),
                              b(target, measured));
}

double heterodyne_conditioned_variance(double v_conditional) {
  if (!(v_conditional >= 0.0)) {
    throw DomainError("conditional variance must be non-negative");
  }
  return 0.5 * (v_conditional + kShotNoise);
}

MultiModeCovariance transform(const MultiModeCovariance& cov,
                              const Eigen::MatrixXd& map_x,
                              const Eigen::MatrixXd& map_p) {
  if (map_x.cols() != cov.x_block.rows() || map_p.cols() != cov.p_block.rows()) {
    throw DomainError("linear map does not match the number of modes");
  }
  MultiModeCovariance out;
  out.x_block = map_x * cov.x_block * map_x.transpose();
  out.p_block = map_p * cov.p_block * map_p.transpose();
  return out;
}

MultiModeCovariance append_vacuum(const MultiModeCovariance& cov,
                                  std::size_t n) {
  const auto m = static_cast<Eigen::Index>(cov.n_modes());
  const auto total = m + static_cast<Eigen::Index>(n);
  MultiModeCovariance out;
  out.x_block = Eigen::MatrixXd::Identity(total, total) * kShotNoise;
  out.p_block = Eigen::MatrixXd::Identity(total, total) * kShotNoise;
  out.x_block.topLeftCorner(m, m) = cov.x_block;
  out.p_block.topLeftCorner(m, m) = cov.p_block;
  return out;
}

MultiModeCovariance apply_attack(const ProtocolParams& protocol,
                                 const SymplecticPair& attack) {
  const MultiModeCovariance input = append_vacuum(epr_state(protocol), 2);
  Eigen::Matrix4d map_x = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d map_p = Eigen::Matrix4d::Identity();
  map_x.bottomRightCorner<3, 3>() = attack.s_x();
  map_p.bottomRightCorner<3, 3>() = attack.s_p();
  return transform(input, map_x, map_p);
}

double uncertainty_margin(const MultiModeCovariance& cov) {
  const Eigen::MatrixXd p_inv = cov.p_block.rows() <= 3
                                    ? small_inverse(cov.p_block)
                                    : Eigen::MatrixXd(cov.p_block.inverse());
  Eigen::MatrixXd gap = cov.x_block - p_inv;
  gap = 0.5 * (gap + gap.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gap, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

bool is_physical(const MultiModeCovariance& cov, double tol) {
  return uncertainty_margin(cov) >= -tol;
}

}  // namespace cvqkd
