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
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cvqkd/attack_search.hpp"
#include "cvqkd/mc_sim.hpp"

using namespace cvqkd;
using doctest::Approx;

namespace {

SimConfig base_config(double t, double eps, AttackModel attack, std::size_t n,
                      std::uint64_t seed) {
  SimConfig c;
  c.protocol = make_protocol(12.0);
  c.channel = make_channel(t, eps);
  c.attack = std::move(attack);
  c.n_samples = n;
  c.seed = seed;
  return c;
}

double closed_form_eve(double v, double rho) { return (v + rho) / (v * rho + 1.0); }

// Box-Muller on the documented stream, written out independently.
std::vector<double> reference_normals(std::uint64_t seed, std::uint64_t batch, int count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  std::mt19937_64 eng(seq);
  std::vector<double> out;
  while (static_cast<int>(out.size()) < count) {
    const double u1 = (static_cast<double>(eng() >> 11) + 0.5) / 9007199254740992.0;
    const double u2 = (static_cast<double>(eng() >> 11) + 0.5) / 9007199254740992.0;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    out.push_back(rad * std::cos(2.0 * std::numbers::pi * u2));
    out.push_back(rad * std::sin(2.0 * std::numbers::pi * u2));
  }
  return out;
}

}  // namespace

TEST_CASE("identity channel reproduces Alice's variance at Bob") {
  const EstimatorResult r = run_sim(base_config(1.0, 0.0, NoAttack{}, 1'000'000, 1));
  CHECK(std::abs(r.moments_x(kSimB, kSimB) - 12.0) <= 3.0 * r.moments_se_x(kSimB, kSimB));
  CHECK(std::abs(r.moments_p(kSimB, kSimB) - 12.0) <= 3.0 * r.moments_se_p(kSimB, kSimB));
  CHECK_FALSE(r.has_eve);
  CHECK_THROWS_AS(empirical_key_rate(r, Direction::Direct), DomainError);
}

TEST_CASE("optimal symplectic attack matches the closed forms") {
  const ProtocolParams p = make_protocol(12.0);
  const ChannelParams ch = make_channel(0.5, 0.01);
  const AttackSolution attack = construct_optimal(p, ch, Direction::Direct);
  const EstimatorResult r = run_sim(base_config(0.5, 0.01, attack.s_pair, 1'000'000, 99));
  const double eve = closed_form_eve(12.0, solve_rho(ch).rho_plus);
  CHECK(r.value.a_given_e.x == Approx(eve).epsilon(0.01));
  CHECK(r.value.a_given_e.p == Approx(eve).epsilon(0.01));
  CHECK(r.value.b_given_e.x == Approx(eve).epsilon(0.01));

  // Moments of (A, B) within four batch standard errors.
  const double t = 0.5, chi = 1.01, v = 12.0;
  const double expect_x[2][2] = {{v, std::sqrt(t * (v * v - 1))},
                                 {std::sqrt(t * (v * v - 1)), t * (v + chi)}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(r.moments_x(i, j) - expect_x[i][j]) <= 4.0 * r.moments_se_x(i, j));
      const double sign = i == j ? 1.0 : -1.0;
      CHECK(std::abs(r.moments_p(i, j) - sign * expect_x[i][j]) <= 4.0 * r.moments_se_p(i, j));
    }
  }

  // Heterodyne outcomes: (V + 1) / 2 and the rates, within 4 standard errors.
  CHECK(std::abs(r.moments_x(kSimAM, kSimAM) - 6.5) <= 4.0 * r.moments_se_x(kSimAM, kSimAM));
  const double eve_m = 0.5 * (eve + 1.0);
  const double partner_dr = 0.5 * (v + 1.0) * (t * (chi + 1.0) + 1.0) / (t * (v + chi) + 1.0);
  const double k_dr = std::log2(eve_m / partner_dr);
  const double k_rr = std::log2(eve_m / (0.5 * (t * (chi + 1.0) + 1.0)));
  CHECK(std::abs(r.value.rate_dr - k_dr) <= 4.0 * r.standard_error.rate_dr);
  CHECK(std::abs(r.value.rate_rr - k_rr) <= 4.0 * r.standard_error.rate_rr);
  CHECK(empirical_key_rate(r, Direction::Reverse) == r.value.rate_rr);
  // Beyond 3 dB loss Eve knows Alice's heterodyne data better than Bob does.
  CHECK(r.value.i_ae > r.value.i_ab);
  CHECK(r.value.rate_dr == Approx(r.value.i_ab - r.value.i_ae).epsilon(1e-12));
  CHECK(r.value.rate_rr == Approx(r.value.i_ab - r.value.i_be).epsilon(1e-12));
}

TEST_CASE("feed-forward at zero excess noise applies no displacement") {
  const ChannelParams ch = make_channel(0.5, 0.0);
  const EstimatorResult r =
      run_sim(base_config(0.5, 0.0, solve_feed_forward(ch), 200'000, 5));
  CHECK(r.displacement_rms < 1e-6);
  const EstimatorResult noisy =
      run_sim(base_config(0.5, 0.05, solve_feed_forward(make_channel(0.5, 0.05)), 200'000, 5));
  CHECK(noisy.displacement_rms > 0.01);
}

TEST_CASE("all three optimal-attack implementations give the same channel") {
  const ChannelParams ch = make_channel(0.4, 0.05);
  const ProtocolParams p = make_protocol(12.0);
  const std::vector<AttackModel> attacks{construct_optimal(p, ch, Direction::Direct).s_pair,
                                         solve_teleportation(ch), solve_feed_forward(ch)};
  std::vector<EstimatorResult> results;
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    results.push_back(run_sim(base_config(0.4, 0.05, attacks[i], 400'000, 100 + i)));
  }
  for (std::size_t a = 0; a < results.size(); ++a) {
    for (std::size_t b = a + 1; b < results.size(); ++b) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const double se = std::hypot(results[a].moments_se_x(i, j), results[b].moments_se_x(i, j));
          CHECK(std::abs(results[a].moments_x(i, j) - results[b].moments_x(i, j)) <= 4.0 * se);
          const double sp = std::hypot(results[a].moments_se_p(i, j), results[b].moments_se_p(i, j));
          CHECK(std::abs(results[a].moments_p(i, j) - results[b].moments_p(i, j)) <= 4.0 * sp);
        }
      }
      const double se = std::hypot(results[a].standard_error.a_given_e.x,
                                   results[b].standard_error.a_given_e.x);
      CHECK(std::abs(results[a].value.a_given_e.x - results[b].value.a_given_e.x) <= 4.0 * se);
    }
  }
}

TEST_CASE("standard errors shrink like one over root n") {
  const ProtocolParams p = make_protocol(12.0);
  const ChannelParams ch = make_channel(0.5, 0.01);
  const AttackModel attack = construct_optimal(p, ch, Direction::Direct).s_pair;
  // Sixteen times the shots should give a quarter of the standard error. 64
  // batches keep the noise of each SE estimate near 9%, and the geometric
  // mean over estimators smooths it further.
  SimConfig small_cfg = base_config(0.5, 0.01, attack, 100'000, 8);
  small_cfg.batches = 64;
  SimConfig large_cfg = small_cfg;
  large_cfg.n_samples = 1'600'000;
  const EstimatorResult small = run_sim(small_cfg);
  const EstimatorResult large = run_sim(large_cfg);
  const std::vector<std::pair<double, double>> pairs{
      {small.standard_error.a_given_e.x, large.standard_error.a_given_e.x},
      {small.standard_error.a_given_e.p, large.standard_error.a_given_e.p},
      {small.standard_error.b_given_e.x, large.standard_error.b_given_e.x},
      {small.standard_error.b_given_e.p, large.standard_error.b_given_e.p},
      {small.standard_error.am_given_bm.x, large.standard_error.am_given_bm.x},
      {small.standard_error.am_given_bm.p, large.standard_error.am_given_bm.p},
      {small.standard_error.bm_given_am.x, large.standard_error.bm_given_am.x},
      {small.standard_error.bm_given_am.p, large.standard_error.bm_given_am.p},
      {small.moments_se_x(kSimB, kSimB), large.moments_se_x(kSimB, kSimB)},
      {small.moments_se_p(kSimB, kSimB), large.moments_se_p(kSimB, kSimB)},
      {small.moments_se_x(kSimA, kSimB), large.moments_se_x(kSimA, kSimB)},
      {small.moments_se_p(kSimA, kSimB), large.moments_se_p(kSimA, kSimB)}};
  double log_sum = 0.0;
  for (const auto& [s, l] : pairs) log_sum += std::log(s / l);
  const double ratio = std::exp(log_sum / static_cast<double>(pairs.size()));
  CHECK(ratio >= 3.2);
  CHECK(ratio <= 5.0);
}

TEST_CASE("same seed gives the same result whatever the thread count") {
  SimConfig a = base_config(0.7, 0.02, solve_teleportation(make_channel(0.7, 0.02)), 50'000, 3);
  a.threads = 1;
  SimConfig b = a;
  b.threads = 3;
  const EstimatorResult ra = run_sim(a);
  const EstimatorResult rb = run_sim(b);
  CHECK(ra.moments_x == rb.moments_x);
  CHECK(ra.moments_se_p == rb.moments_se_p);
  CHECK(ra.value.rate_dr == rb.value.rate_dr);
  CHECK(ra.standard_error.a_given_e.x == rb.standard_error.a_given_e.x);

  SimConfig c = a;
  c.seed = 4;
  CHECK(run_sim(c).moments_x(kSimB, kSimB) != ra.moments_x(kSimB, kSimB));
}

TEST_CASE("random stream version 1 is pinned") {
  REQUIRE(kRandomStreamVersion == 1);
  const std::uint64_t seed = 0x123456789ABCDEF0ULL;
  SimConfig c = base_config(0.8, 0.1, NoAttack{}, 64, seed);
  const std::vector<ShotRecord> shots = sample_shots(c);
  REQUIRE(shots.size() == 64);
  const std::vector<double> z = reference_normals(seed, 0, 10);
  const double v = 12.0, t = 0.8, chi = 0.25 + 0.1, h = std::sqrt(0.5);
  const double xb0 = std::sqrt(v * v - 1.0) / std::sqrt(v) * z[0] + z[1] / std::sqrt(v);
  const double pb0 = -std::sqrt(v * v - 1.0) / std::sqrt(v) * z[2] + z[3] / std::sqrt(v);
  CHECK(shots[0].x_a_m == Approx(h * (std::sqrt(v) * z[0] + z[6])).epsilon(1e-14));
  CHECK(shots[0].p_a_m == Approx(h * (std::sqrt(v) * z[2] - z[7])).epsilon(1e-14));
  CHECK(shots[0].x_b_m ==
        Approx(h * (std::sqrt(t) * (xb0 + std::sqrt(chi) * z[4]) + z[8])).epsilon(1e-14));
  CHECK(shots[0].p_b_m ==
        Approx(h * (std::sqrt(t) * (pb0 + std::sqrt(chi) * z[5]) - z[9])).epsilon(1e-14));
  CHECK(shots[0].x_e == 0.0);

  // Batch 1 starts its own stream.
  const std::vector<double> z1 = reference_normals(seed, 1, 10);
  CHECK(shots[4].x_a_m == Approx(h * (std::sqrt(v) * z1[0] + z1[6])).epsilon(1e-14));
}

TEST_CASE("shot dump matches the simulation") {
  const ChannelParams ch = make_channel(0.5, 0.01);
  const SimConfig c = base_config(
      0.5, 0.01, construct_optimal(make_protocol(12.0), ch, Direction::Direct).s_pair, 3'200, 17);
  const std::vector<ShotRecord> shots = sample_shots(c);
  REQUIRE(shots.size() == 3'200);

  std::vector<double> xa, xb;
  for (const ShotRecord& s : shots) {
    xa.push_back(s.x_a_m);
    xb.push_back(s.x_b_m);
  }
  const EstimatorResult r = run_sim(c);
  CHECK(empirical_conditional_variance(xa, xb) ==
        Approx(r.value.am_given_bm.x).epsilon(1e-10));

  std::ostringstream csv;
  write_shots_csv(csv, shots);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x_a_m,p_a_m,x_b_m,p_b_m,x_e,p_e");
  std::getline(in, line);
  std::istringstream row(line);
  std::string cell;
  std::vector<double> parsed;
  while (std::getline(row, cell, ',')) parsed.push_back(std::stod(cell));
  REQUIRE(parsed.size() == 6);
  CHECK(parsed[0] == shots[0].x_a_m);
  CHECK(parsed[5] == shots[0].p_e);
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == shots.size());
}

TEST_CASE("empirical_conditional_variance") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(200'000), y(200'000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 2.0 * n(rng);
    y[i] = n(rng);
  }
  // Independent y: nothing to learn. Sampling error of var(x) ~ 4 * sqrt(2/n).
  CHECK(empirical_conditional_variance(x, y) == Approx(4.0).epsilon(0.02));
  CHECK(empirical_conditional_variance(x, x) == Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(empirical_conditional_variance(std::vector<double>{1.0},
                                                 std::vector<double>{1.0}),
                  DomainError);
  CHECK_THROWS_AS(empirical_conditional_variance(std::vector<double>{1.0, 2.0},
                                                 std::vector<double>{1.0}),
                  DomainError);
  CHECK_THROWS_AS(empirical_conditional_variance(std::vector<double>{1.0, 2.0, 3.0},
                                                 std::vector<double>{5.0, 5.0, 5.0}),
                  DomainError);
}

TEST_CASE("configuration checks") {
  SimConfig c = base_config(0.5, 0.0, NoAttack{}, 100, 1);
  c.batches = 1;
  CHECK_THROWS_AS(run_sim(c), DomainError);
  c.batches = 16;
  c.n_samples = 31;
  CHECK_THROWS_AS(run_sim(c), DomainError);
  c.n_samples = 32;
  CHECK_NOTHROW(run_sim(c));
  c.protocol.v = 0.5;
  CHECK_THROWS_AS(run_sim(c), DomainError);
}
