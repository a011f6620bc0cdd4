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
#include "cvqkd/keyrates.hpp"

#include <algorithm>
#include <cmath>

namespace cvqkd {

std::string_view to_string(Direction d) {
  return d == Direction::Direct ? "DR" : "RR";
}
std::string_view to_string(Detection d) {
  return d == Detection::Heterodyne ? "heterodyne" : "homodyne";
}
std::string_view to_string(Bound b) {
  return b == Bound::Heisenberg ? "heisenberg" : "optimal";
}

namespace {

KeyRateReport make_report(Direction dir, Detection det, Bound bound,
                          double v_partner, double v_eve, double quadratures) {
  KeyRateReport r;
  r.direction = dir;
  r.protocol = det;
  r.bound = bound;
  r.v_given_partner = v_partner;
  r.v_given_eve = v_eve;
  // Each quadrature contributes (1/2) log2 of the variance ratio.
  r.rate_bits = 0.5 * quadratures * std::log2(v_eve / v_partner);
  return r;
}

}  // namespace

double v_a_given_b(const ProtocolParams& p, const ChannelParams& ch) {
  return (p.v * ch.chi + 1.0) / (p.v + ch.chi);
}

double v_b_given_a(const ProtocolParams& p, const ChannelParams& ch) {
  return ch.transmittance * (ch.chi + 1.0 / p.v);
}

double v_a_given_bm(const ProtocolParams& p, const ChannelParams& ch) {
  const double t = ch.transmittance;
  return (t * (p.v * ch.chi + 1.0) + p.v) / (t * (p.v + ch.chi) + 1.0);
}

double v_am_given_bm(const ProtocolParams& p, const ChannelParams& ch) {
  const double t = ch.transmittance;
  return 0.5 * (p.v + 1.0) * (t * (ch.chi + 1.0) + 1.0) /
         (t * (p.v + ch.chi) + 1.0);
}

double v_bm_given_am(const ChannelParams& ch) {
  return 0.5 * (ch.transmittance * (ch.chi + 1.0) + 1.0);
}

KeyRateReport heisenberg_dr(const ProtocolParams& p, const ChannelParams& ch) {
  const double v_eve =
      0.5 * (p.v + 1.0) * (ch.chi + 1.0) / (p.v * ch.chi + 1.0);
  return make_report(Direction::Direct, Detection::Heterodyne,
                     Bound::Heisenberg, v_am_given_bm(p, ch), v_eve, 2.0);
}

KeyRateReport heisenberg_rr(const ProtocolParams& p, const ChannelParams& ch) {
  const double t = ch.transmittance;
  const double tv = t * (p.v * ch.chi + 1.0);
  const double v_eve = 0.5 * (tv + p.v) / tv;
  return make_report(Direction::Reverse, Detection::Heterodyne,
                     Bound::Heisenberg, v_bm_given_am(ch), v_eve, 2.0);
}

namespace {

RhoSolution rho_roots(double t, double chi, double t_chi_minus_loss) {
  const double loss = 1.0 - t;
  const double disc = t * t_chi_minus_loss * (t * chi + loss);
  if (disc < 0.0) {
    throw DomainError("channel unreachable by symmetric Gaussian attack");
  }
  const double a = t * (t * chi * chi + 4.0);
  RhoSolution s;
  s.discriminant = disc;
  s.rho_plus = (chi * t * (t + 1.0) + 2.0 * std::sqrt(disc)) / a;
  // Product of the roots avoids cancellation in the smaller one.
  // At a double root the quotient can round one ulp above rho_plus.
  s.rho_minus = s.rho_plus > 0.0
                    ? std::min(loss * loss / (a * s.rho_plus), s.rho_plus)
                    : 0.0;
  return s;
}

}  // namespace

RhoSolution solve_rho(const ChannelParams& ch) {
  const double t = ch.transmittance;
  return rho_roots(t, ch.chi, t * ch.excess_noise);
}

RhoSolution solve_rho(double transmittance, double chi) {
  if (!(transmittance > 0.0) || !(transmittance <= 1.0) || !(chi >= 0.0)) {
    throw DomainError("solve_rho requires 0 < T <= 1 and chi >= 0");
  }
  const double t = transmittance;
  return rho_roots(t, chi, t * chi - (1.0 - t));
}

double rho_quadratic(double rho, double transmittance, double chi) {
  const double t = transmittance;
  return t * (t * chi * chi + 4.0) * rho * rho -
         2.0 * chi * t * (t + 1.0) * rho + (1.0 - t) * (1.0 - t);
}

double eve_variance(const ProtocolParams& p, double rho) {
  return (p.v + rho) / (p.v * rho + 1.0);
}

KeyRateReport optimal_dr(const ProtocolParams& p, const ChannelParams& ch) {
  const double rho = solve_rho(ch).rho_plus;
  const double v_eve = 0.5 * (p.v + 1.0) * (rho + 1.0) / (p.v * rho + 1.0);
  return make_report(Direction::Direct, Detection::Heterodyne, Bound::Optimal,
                     v_am_given_bm(p, ch), v_eve, 2.0);
}

KeyRateReport optimal_rr(const ProtocolParams& p, const ChannelParams& ch) {
  const double rho = solve_rho(ch).rho_plus;
  const double v_eve = 0.5 * (p.v + 1.0) * (rho + 1.0) / (p.v * rho + 1.0);
  return make_report(Direction::Reverse, Detection::Heterodyne, Bound::Optimal,
                     v_bm_given_am(ch), v_eve, 2.0);
}

KeyRateReport homodyne_dr(const ProtocolParams& p, const ChannelParams& ch) {
  const double vab = v_a_given_b(p, ch);
  const double v_partner = heterodyne_conditioned_variance(vab);
  const double v_eve = heterodyne_conditioned_variance(1.0 / vab);
  return make_report(Direction::Direct, Detection::Homodyne, Bound::Heisenberg,
                     v_partner, v_eve, 1.0);
}

KeyRateReport homodyne_rr(const ProtocolParams& p, const ChannelParams& ch) {
  const double v_partner = ch.transmittance * (ch.chi + 1.0);
  const double v_eve = 1.0 / v_b_given_a(p, ch);
  return make_report(Direction::Reverse, Detection::Homodyne, Bound::Heisenberg,
                     v_partner, v_eve, 1.0);
}

}  // namespace cvqkd
