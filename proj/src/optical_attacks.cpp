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
#include "cvqkd/optical_attacks.hpp"

#include <cmath>
#include <numbers>

namespace cvqkd {

Eigen::Matrix<double, 2, 3> LinearCircuit::displaced(Quadrature q) const {
  Eigen::Matrix<double, 2, 3> m = q == Quadrature::X ? map_x : map_p;
  m.row(0) += gain * m.row(1);
  return m;
}

TeleportationConfig solve_teleportation(const ChannelParams& channel,
                                        RootChoice root) {
  const RhoSolution rho = solve_rho(channel);
  const double target = root == RootChoice::Plus ? rho.rho_plus : rho.rho_minus;
  if (!(target > 0.0)) {
    throw DomainError("perfect channel: teleportation attack degenerates");
  }
  const double t = channel.transmittance;
  const double cosh2r = 1.0 / target;
  const double sinh2r =
      (t * channel.chi - (1.0 + t) * cosh2r) / (2.0 * std::sqrt(t));
  const double magnitude = 0.5 * std::acosh(cosh2r);
  return {std::signbit(sinh2r) ? -magnitude : magnitude, std::sqrt(2.0 * t)};
}

double teleportation_residual(const ChannelParams& channel,
                              const TeleportationConfig& config) {
  const double t = channel.transmittance;
  return t * channel.chi - (1.0 + t) * std::cosh(2.0 * config.r_sq) -
         2.0 * std::sqrt(t) * std::sinh(2.0 * config.r_sq);
}

FeedForwardConfig solve_feed_forward(const ChannelParams& channel) {
  const double rho = solve_rho(channel).rho_plus;
  const double g_tap = (1.0 - rho) / (1.0 + rho);
  if (g_tap >= 1.0) return {1.0, 0.0};
  const double gain = (std::sqrt(channel.transmittance) - std::sqrt(g_tap)) *
                      std::sqrt(2.0 / (1.0 - g_tap));
  return {g_tap, gain};
}

LinearCircuit teleportation_circuit(const TeleportationConfig& config) {
  using Row = Eigen::RowVector3d;
  const double h = std::numbers::sqrt2 / 2.0;
  const double up = std::exp(config.r_sq);
  const double down = std::exp(-config.r_sq);
  const Row b0(1.0, 0.0, 0.0);

  // EPR pair from the two squeezers, then Bell measurement on (B0, arm 1).
  const Row x1(0.0, up, 0.0), x2(0.0, 0.0, down);
  const Row p1(0.0, down, 0.0), p2(0.0, 0.0, up);
  const Row x_arm1 = h * (x1 + x2), x_arm2 = h * (x1 - x2);
  const Row p_arm1 = h * (p1 + p2), p_arm2 = h * (p1 - p2);
  const Row x_out = h * (b0 + x_arm1);
  const Row p_out = h * (b0 - p_arm1);

  LinearCircuit c;
  c.map_x.row(0) = x_arm2;
  c.map_x.row(1) = x_out;
  c.map_p.row(0) = p_arm2;
  c.map_p.row(1) = p_out;
  c.gain = config.gain;
  return c;
}

LinearCircuit feed_forward_circuit(const FeedForwardConfig& config) {
  using Row = Eigen::RowVector3d;
  const double g = config.tap_transmittance;
  if (!(g >= 0.0 && g <= 1.0)) {
    throw DomainError("tap transmittance must lie in [0, 1]");
  }
  const double h = std::numbers::sqrt2 / 2.0;
  const Row b0(1.0, 0.0, 0.0), v1(0.0, 1.0, 0.0), v2(0.0, 0.0, 1.0);
  const Row kept = std::sqrt(g) * b0 + std::sqrt(1.0 - g) * v1;
  const Row tapped = std::sqrt(1.0 - g) * b0 - std::sqrt(g) * v1;
  // Heterodyne of the tapped beam: mix with vacuum v2, x on one port and p
  // on the other.
  const Row x_out = h * (tapped + v2);
  const Row p_out = h * (tapped - v2);

  LinearCircuit c;
  c.map_x.row(0) = kept;
  c.map_x.row(1) = x_out;
  c.map_p.row(0) = kept;
  c.map_p.row(1) = p_out;
  c.gain = config.gain;
  return c;
}

CircuitReport circuit_channel(const ProtocolParams& protocol,
                              const LinearCircuit& circuit) {
  const MultiModeCovariance input = append_vacuum(epr_state(protocol), 2);
  auto embed = [](const Eigen::Matrix<double, 2, 3>& m) {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(3, 4);
    full(0, 0) = 1.0;
    full.block<2, 3>(1, 1) = m;
    return full;
  };
  // Output modes: A, B, E outcome.
  const MultiModeCovariance out =
      transform(input, embed(circuit.displaced(Quadrature::X)),
                embed(circuit.displaced(Quadrature::P)));

  constexpr int a = 0, b = 1, e = 2;
  const double v = protocol.v;
  CircuitReport r;
  r.b_variance_x = out.x_block(b, b);
  r.b_variance_p = out.p_block(b, b);
  r.ab_correlation_x = out.x_block(a, b);
  r.ab_correlation_p = -out.p_block(a, b);
  // Moments of EPR through (T, chi): <AB>^2 = T (V^2 - 1), <B^2> = T (V + chi).
  // V = 1 carries no correlation, so T cannot be identified.
  if (v > 1.0) {
    r.transmittance = r.ab_correlation_x * r.ab_correlation_x / (v * v - 1.0);
    r.chi = r.b_variance_x / r.transmittance - v;
  }
  r.v_a_given_e = {conditional_variance_of(out, a, e, Quadrature::X),
                   conditional_variance_of(out, a, e, Quadrature::P)};
  r.v_b_given_e = {conditional_variance_of(out, b, e, Quadrature::X),
                   conditional_variance_of(out, b, e, Quadrature::P)};
  return r;
}

CircuitReport teleportation_channel(const ProtocolParams& protocol,
                                    const TeleportationConfig& config) {
  return circuit_channel(protocol, teleportation_circuit(config));
}

CircuitReport feed_forward_channel(const ProtocolParams& protocol,
                                   const FeedForwardConfig& config) {
  return circuit_channel(protocol, feed_forward_circuit(config));
}

}  // namespace cvqkd
