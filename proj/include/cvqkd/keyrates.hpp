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

// Closed-form conditional variances and secret key rates for the coherent
// state protocol under individual Gaussian attacks. Rates are in bits per
// channel use and may be negative (no key).

#include <string_view>

#include "cvqkd/gaussian_core.hpp"

namespace cvqkd {

enum class Direction { Direct, Reverse };
enum class Detection { Heterodyne, Homodyne };
enum class Bound { Heisenberg, Optimal };

std::string_view to_string(Direction d);
std::string_view to_string(Detection d);
std::string_view to_string(Bound b);

struct KeyRateReport {
  Direction direction = Direction::Direct;
  Detection protocol = Detection::Heterodyne;
  Bound bound = Bound::Heisenberg;
  /// Variance of the key holder's data given the honest partner's data.
  double v_given_partner = 0.0;
  /// Variance of the key holder's data given Eve's optimal measurement.
  double v_given_eve = 0.0;
  double rate_bits = 0.0;

  [[nodiscard]] bool has_key() const { return rate_bits > 0.0; }
};

/// Both roots of T(T chi^2 + 4) rho^2 - 2 chi T (T + 1) rho + (1 - T)^2 = 0.
struct RhoSolution {
  double rho_plus = 0.0;
  double rho_minus = 0.0;
  /// T[(T chi)^2 - (1 - T)^2], the quantity under the square root.
  double discriminant = 0.0;
};

// Mode-level conditional variances of the EPR-through-channel state.
double v_a_given_b(const ProtocolParams& p, const ChannelParams& ch);
double v_b_given_a(const ProtocolParams& p, const ChannelParams& ch);
double v_a_given_bm(const ProtocolParams& p, const ChannelParams& ch);
double v_am_given_bm(const ProtocolParams& p, const ChannelParams& ch);
double v_bm_given_am(const ChannelParams& ch);

KeyRateReport heisenberg_dr(const ProtocolParams& p, const ChannelParams& ch);
KeyRateReport heisenberg_rr(const ProtocolParams& p, const ChannelParams& ch);

/// Uses T * excess_noise for T chi - (1 - T) so the double root at zero
/// excess noise is exact.
RhoSolution solve_rho(const ChannelParams& ch);

/// Raw form for callers holding (T, chi) only. Throws DomainError when the
/// discriminant is negative, i.e. chi < (1 - T) / T.
RhoSolution solve_rho(double transmittance, double chi);

/// Residual of the rho quadratic.
double rho_quadratic(double rho, double transmittance, double chi);

/// Eve's mode-level conditional variance (V + rho) / (V rho + 1).
double eve_variance(const ProtocolParams& p, double rho);

KeyRateReport optimal_dr(const ProtocolParams& p, const ChannelParams& ch);
KeyRateReport optimal_rr(const ProtocolParams& p, const ChannelParams& ch);

// Homodyne-detection coherent-state protocol with Heisenberg-saturating
// (entangling cloner) eavesdropping. One quadrature per channel use.
KeyRateReport homodyne_dr(const ProtocolParams& p, const ChannelParams& ch);
KeyRateReport homodyne_rr(const ProtocolParams& p, const ChannelParams& ch);

}  // namespace cvqkd
