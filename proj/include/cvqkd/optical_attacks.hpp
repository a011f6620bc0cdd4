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

// Optical circuits that realise the optimal individual attack: a
// teleportation scheme built from two squeezed vacua, and a feed-forward
// scheme built from a beamsplitter tap and heterodyne detection.
//
// Both are linear maps of (B0, anc1, anc2) onto Bob's mode and Eve's
// classical outcome. The x map carries Eve's x outcome and the p map her
// p outcome, so conditioning on "mode E" in each block is conditioning on
// the corresponding measurement record.

#include <Eigen/Dense>

#include "cvqkd/attack_search.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/keyrates.hpp"

namespace cvqkd {

enum class RootChoice { Plus, Minus };

/// Squeezed vacua x1 = e^r x1', x2 = e^-r x2'; displacement gain g.
struct TeleportationConfig {
  double r_sq = 0.0;
  double gain = 0.0;
};

/// Tap beamsplitter of transmittance G; displacement gain g.
struct FeedForwardConfig {
  double tap_transmittance = 1.0;
  double gain = 0.0;
};

/// Rows: (Bob's mode before the displacement, Eve's outcome). Columns:
/// (B0, anc1, anc2). Bob finally holds row 0 + gain * row 1.
struct LinearCircuit {
  Eigen::Matrix<double, 2, 3> map_x;
  Eigen::Matrix<double, 2, 3> map_p;
  double gain = 0.0;

  /// Rows (B, E) with the displacement folded in.
  [[nodiscard]] Eigen::Matrix<double, 2, 3> displaced(Quadrature q) const;
};

struct CircuitReport {
  double transmittance = 0.0;
  double chi = 0.0;
  double b_variance_x = 0.0;
  double b_variance_p = 0.0;
  double ab_correlation_x = 0.0;
  /// Sign flipped so that it is comparable with the x correlation.
  double ab_correlation_p = 0.0;
  QuadraturePair v_a_given_e;
  QuadraturePair v_b_given_e;
};

/// cosh 2r = 1/rho for the chosen root, g = sqrt(2T). The sign of r comes
/// from the channel condition and is negative whenever Eve adds little
/// noise. Throws DomainError when rho = 0.
TeleportationConfig solve_teleportation(const ChannelParams& channel,
                                        RootChoice root = RootChoice::Plus);

/// T chi - (1 + T) cosh 2r - 2 sqrt(T) sinh 2r.
double teleportation_residual(const ChannelParams& channel,
                              const TeleportationConfig& config);

/// G = (1 - rho+) / (1 + rho+), g = (sqrt T - sqrt G) sqrt(2 / (1 - G)).
/// At G = 1 (a perfect channel) the gain is zero.
FeedForwardConfig solve_feed_forward(const ChannelParams& channel);

/// Bell measurement: balanced beamsplitter on (B0, EPR arm 1), x on one
/// output and p on the other. Bob gets EPR arm 2 displaced by g times the
/// outcomes.
LinearCircuit teleportation_circuit(const TeleportationConfig& config);

/// Throws DomainError unless 0 <= G <= 1.
LinearCircuit feed_forward_circuit(const FeedForwardConfig& config);

/// Runs EPR(V) through the circuit and reads the effective channel and
/// Eve's conditional variances off the resulting covariance.
CircuitReport circuit_channel(const ProtocolParams& protocol,
                              const LinearCircuit& circuit);

CircuitReport teleportation_channel(const ProtocolParams& protocol,
                                    const TeleportationConfig& config);
CircuitReport feed_forward_channel(const ProtocolParams& protocol,
                                   const FeedForwardConfig& config);

}  // namespace cvqkd
