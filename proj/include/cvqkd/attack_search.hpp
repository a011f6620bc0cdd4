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

// Explicit two-ancilla symplectic attacks on the no-switching protocol.
//
// Eve's x-quadrature map is written as
//
//   S_x = sqrt(T) [ 1       sqrt(chi) cos(theta)  sqrt(chi) sin(theta) ]
//                 [ a       b                     c                    ]
//                 [ r       s                     t                    ]
//
// with (a, b, c) = u (sqrt(rho), sin(xi), cos(xi)). The first row fixes Bob's
// x moments; requiring the same for p constrains the third row. Eve reads
// x on E1 and p on E2.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/keyrates.hpp"

namespace cvqkd {

struct SxParameterization {
  double theta = 0.0;
  double xi = 0.0;
  double u = 1.0;
  double rho = 0.0;
  Vec3 third_row = Vec3::UnitZ();
  /// Angle of the p-channel noise row. Recorded for reference; build_sx does
  /// not read it.
  double phi = 0.0;
  ChannelParams channel;
};

/// Throws SingularMatrixError if |det S_x| < kSingularDeterminant.
Mat3 build_sx(const SxParameterization& params);

/// p-channel residuals (R1, R2) of an S_x whose first row already matches
/// the x channel. With M = S_x / sqrt(T), rows (a,b,c), (r,s,t) and
/// d = det(M):
///   R1 = (bt - cs) - dT
///   R2 = (cr - at)^2 + (as - br)^2 - (dT)^2 chi
std::array<double, 2> symmetry_residuals(const Mat3& s_x, double transmittance,
                                         double chi);

/// Third row making the p channel match (T, chi) for the given first two
/// rows of M. `compatibility` is zero exactly when such a row exists.
struct ThirdRowCompletion {
  Vec3 third_row = Vec3::Zero();
  double phi = 0.0;
  double compatibility = 0.0;
};

ThirdRowCompletion complete_third_row(const ChannelParams& channel,
                                      double theta, const Vec3& second_row);

struct QuadraturePair {
  double x = 0.0;
  double p = 0.0;
};

struct AttackSolution {
  double rho_achieved = 0.0;
  SymplecticPair s_pair = SymplecticPair::identity();
  /// V_{X_A|X_E1} and V_{P_A|P_E2}.
  QuadraturePair v_a_given_e;
  /// V_{X_B|X_E1} and V_{P_B|P_E2}.
  QuadraturePair v_b_given_e;
  std::array<double, 2> residuals{0.0, 0.0};
  /// Value of the search objective (construct_optimal reports the mean
  /// Eve variance of the requested direction).
  double objective = 0.0;
  SxParameterization params;
};

/// Measures an arbitrary attack: Eve's conditional variances come from
/// conditioning the four-mode state, rho from the second row of S_x.
AttackSolution evaluate_attack(const ProtocolParams& protocol,
                               const ChannelParams& channel,
                               const SymplecticPair& attack);

enum class CosBranch { Positive, Negative };

/// Attack realising a given root rho of the quadratic (sign of cos(xi+theta)
/// selected by `branch`; theta is a gauge angle).
AttackSolution construct_attack(const ProtocolParams& protocol,
                                const ChannelParams& channel, double rho,
                                CosBranch branch = CosBranch::Positive,
                                double theta = 0.0);

/// Optimal attack at rho_plus. The same S serves DR and RR; `direction`
/// only selects which variance is reported as the objective.
AttackSolution construct_optimal(const ProtocolParams& protocol,
                                 const ChannelParams& channel,
                                 Direction direction,
                                 CosBranch branch = CosBranch::Positive,
                                 double theta = 0.0);

/// Beamsplitter of transmittance T followed by Eve heterodyning the
/// reflected beam. Optimal when the excess noise is zero.
SymplecticPair beamsplitter_heterodyne_attack(double transmittance);

struct SearchConfig {
  int starts = 32;
  std::uint64_t seed = 1;
  double objective_tolerance = 1e-10;
  // Scaled constraint residual; near the double-precision floor.
  double feasibility_tolerance = 1e-15;
  unsigned threads = 0;
};

struct SearchDiagnostics {
  int feasible_starts = 0;
  int starts = 0;
  double best_infeasibility = 0.0;
};

struct SearchResult {
  AttackSolution best;
  SearchDiagnostics diagnostics;
};

/// Minimises Eve's conditional variance (A for DR, B for RR) over
/// (theta, xi, a) with the third row eliminated, subject to the p-channel
/// constraint and equal x/p information for Eve. Seeded multi-start,
/// penalised Hooke-Jeeves, then projection onto the constraints.
/// Throws SearchError when no start reaches a feasible point.
SearchResult optimize_attack(const ProtocolParams& protocol,
                             const ChannelParams& channel, Direction direction,
                             const SearchConfig& config = {});

/// Same search without the equal-information constraint; the objective is
/// log V_x + log V_p of the key holder's quadratures given Eve.
SearchResult unconstrained_stress_search(const ProtocolParams& protocol,
                                         const ChannelParams& channel,
                                         Direction direction,
                                         const SearchConfig& config = {});

}  // namespace cvqkd
