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

// Shot-by-shot simulation of the entanglement-based protocol. Quadratures
// are drawn from the Wigner function of the EPR state, pushed through the
// attack, and both legitimate parties heterodyne by mixing with a fresh
// vacuum mode. Every estimator is a plug-in estimate from sample second
// moments; standard errors come from the spread across batches.
//
// Random stream, version 1: batch k of a run with seed s uses
// std::mt19937_64 seeded with seed_seq{lo32(s), hi32(s), lo32(k), hi32(k)}.
// Normal deviates come from Box-Muller on 53-bit uniforms
// ((x >> 11) + 0.5) * 2^-53, cosine branch first. Per shot, deviates are consumed in this order: EPR x (2),
// EPR p (2), attack ancillas x then p, Alice's heterodyne vacuum (x, p),
// Bob's heterodyne vacuum (x, p). Changing any of this changes the stream.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/keyrates.hpp"
#include "cvqkd/optical_attacks.hpp"

namespace cvqkd {

inline constexpr int kRandomStreamVersion = 1;

/// Bob receives sqrt(T) (B0 + sqrt(chi) n) and nobody else sees anything.
struct NoAttack {};

using AttackModel =
    std::variant<NoAttack, SymplecticPair, TeleportationConfig, FeedForwardConfig>;

struct SimConfig {
  ProtocolParams protocol;
  ChannelParams channel;
  AttackModel attack = NoAttack{};
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  int batches = 16;
  /// Worker threads; 0 picks hardware concurrency. Does not affect output.
  unsigned threads = 0;
};

/// Throws DomainError for batches < 2 or fewer than two shots per batch.
void validate(const SimConfig& config);

struct ShotRecord {
  double x_a_m = 0.0;
  double p_a_m = 0.0;
  double x_b_m = 0.0;
  double p_b_m = 0.0;
  /// Eve's outcomes; zero without an attack.
  double x_e = 0.0;
  double p_e = 0.0;
};

// Row/column order of the sample moment matrices.
inline constexpr int kSimA = 0;
inline constexpr int kSimB = 1;
inline constexpr int kSimAM = 2;
inline constexpr int kSimBM = 3;
inline constexpr int kSimE = 4;

using Moments = Eigen::Matrix<double, 5, 5>;

struct Estimates {
  QuadraturePair a_given_b;
  QuadraturePair b_given_a;
  QuadraturePair am_given_bm;
  QuadraturePair bm_given_am;
  // Eve's entries stay zero when there is no attack.
  QuadraturePair a_given_e;
  QuadraturePair b_given_e;
  QuadraturePair am_given_e;
  QuadraturePair bm_given_e;
  /// Gaussian mutual informations in bits, summed over both quadratures.
  double i_ab = 0.0;
  double i_ae = 0.0;
  double i_be = 0.0;
  /// empirical_key_rate for each direction; zero without an attack.
  double rate_dr = 0.0;
  double rate_rr = 0.0;
};

struct EstimatorResult {
  std::size_t n_samples = 0;
  int batches = 0;
  bool has_eve = false;
  /// Sample covariances of (A, B, A^M, B^M, E) per quadrature.
  Moments moments_x = Moments::Zero();
  Moments moments_p = Moments::Zero();
  Moments moments_se_x = Moments::Zero();
  Moments moments_se_p = Moments::Zero();
  Estimates value;
  Estimates standard_error;
  /// RMS of the displacement g * outcome applied to Bob's mode.
  double displacement_rms = 0.0;
};

EstimatorResult run_sim(const SimConfig& config);

/// The same shots run_sim consumes, in batch order.
std::vector<ShotRecord> sample_shots(const SimConfig& config);

/// Header then one row per shot, shortest round-trip decimal form.
void write_shots_csv(std::ostream& out, std::span<const ShotRecord> shots);

/// var(x) - cov(x,y)^2 / var(y). Throws DomainError for fewer than two
/// samples, mismatched lengths or a constant y.
double empirical_conditional_variance(std::span<const double> x,
                                      std::span<const double> y);

/// Sum over quadratures of 1/2 log2(V_eve / V_partner) with heterodyne data:
/// A^M for DR, B^M for RR. Throws DomainError when there is no attack.
double empirical_key_rate(const EstimatorResult& result, Direction direction);

/// Same, but from an arbitrary Estimates (e.g. a single batch).
double empirical_key_rate(const Estimates& estimates, Direction direction);

}  // namespace cvqkd
