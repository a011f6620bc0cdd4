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
#include "cvqkd/mc_sim.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "cvqkd/parallel.hpp"

namespace cvqkd {

namespace {

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t batch) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(batch),
                      static_cast<std::uint32_t>(batch >> 32)};
    engine_.seed(seq);
  }

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // In (0, 1): never zero, so the log is finite.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Shot {
  // Indexed by kSimA .. kSimE.
  std::array<double, 5> x{};
  std::array<double, 5> p{};
  double displacement_sq = 0.0;
};

class ShotSampler {
 public:
  explicit ShotSampler(const SimConfig& config) : config_(config) {
    const double v = config.protocol.v;
    a_scale_ = std::sqrt(v);
    b_from_a_ = std::sqrt(v * v - 1.0) / std::sqrt(v);
    b_own_ = 1.0 / std::sqrt(v);
    if (const auto* tele = std::get_if<TeleportationConfig>(&config.attack)) {
      circuit_ = teleportation_circuit(*tele);
    } else if (const auto* ff = std::get_if<FeedForwardConfig>(&config.attack)) {
      circuit_ = feed_forward_circuit(*ff);
    }
  }

  Shot operator()(NormalStream& normal) const {
    Shot s;
    // EPR(V): Cholesky factor of [[V, c], [c, V]] (p uses -c).
    const double n1 = normal(), n2 = normal();
    const double m1 = normal(), m2 = normal();
    const double xa = a_scale_ * n1;
    const double xb0 = b_from_a_ * n1 + b_own_ * n2;
    const double pa = a_scale_ * m1;
    const double pb0 = -b_from_a_ * m1 + b_own_ * m2;

    double xb = 0.0, pb = 0.0, xe = 0.0, pe = 0.0;
    std::visit(
        [&](const auto& attack) {
          using A = std::decay_t<decltype(attack)>;
          if constexpr (std::is_same_v<A, NoAttack>) {
            const double t = config_.channel.transmittance;
            const double k = std::sqrt(config_.channel.chi);
            const double nx = normal(), np = normal();
            xb = std::sqrt(t) * (xb0 + k * nx);
            pb = std::sqrt(t) * (pb0 + k * np);
          } else if constexpr (std::is_same_v<A, SymplecticPair>) {
            const Vec3 in_x(xb0, normal(), normal());
            const Vec3 in_p(pb0, normal(), normal());
            const Vec3 out_x = attack.s_x() * in_x;
            const Vec3 out_p = attack.s_p() * in_p;
            xb = out_x[0];
            pb = out_p[0];
            xe = out_x[1];
            pe = out_p[2];
          } else {
            const Vec3 in_x(xb0, normal(), normal());
            const Vec3 in_p(pb0, normal(), normal());
            const auto out_x = circuit_.map_x * in_x;
            const auto out_p = circuit_.map_p * in_p;
            xe = out_x[1];
            pe = out_p[1];
            // Eve's displacement, conditioned on her outcomes.
            const double dx = circuit_.gain * xe;
            const double dp = circuit_.gain * pe;
            xb = out_x[0] + dx;
            pb = out_p[0] + dp;
            s.displacement_sq = dx * dx + dp * dp;
          }
        },
        config_.attack);

    const double h = std::numbers::sqrt2 / 2.0;
    const double ax = normal(), ap = normal();
    const double bx = normal(), bp = normal();
    s.x = {xa, xb, h * (xa + ax), h * (xb + bx), xe};
    s.p = {pa, pb, h * (pa - ap), h * (pb - bp), pe};
    return s;
  }

 private:
  const SimConfig& config_;
  double a_scale_ = 0.0;
  double b_from_a_ = 0.0;
  double b_own_ = 0.0;
  LinearCircuit circuit_;
};

std::size_t batch_size(const SimConfig& config, int batch) {
  const auto nb = static_cast<std::size_t>(config.batches);
  const std::size_t base = config.n_samples / nb;
  const std::size_t extra = config.n_samples % nb;
  return base + (static_cast<std::size_t>(batch) < extra ? 1 : 0);
}

template <class Fn>
void for_each_shot(const SimConfig& config, int batch, Fn&& fn) {
  NormalStream normal(config.seed, static_cast<std::uint64_t>(batch));
  const ShotSampler sampler(config);
  const std::size_t n = batch_size(config, batch);
  for (std::size_t i = 0; i < n; ++i) fn(sampler(normal));
}

struct Sums {
  double count = 0.0;
  Eigen::Matrix<double, 5, 1> sum_x = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 1> sum_p = Eigen::Matrix<double, 5, 1>::Zero();
  Moments prod_x = Moments::Zero();
  Moments prod_p = Moments::Zero();
  double displacement_sq = 0.0;

  void add(const Shot& s) {
    const Eigen::Map<const Eigen::Matrix<double, 5, 1>> x(s.x.data());
    const Eigen::Map<const Eigen::Matrix<double, 5, 1>> p(s.p.data());
    count += 1.0;
    sum_x += x;
    sum_p += p;
    prod_x.noalias() += x * x.transpose();
    prod_p.noalias() += p * p.transpose();
    displacement_sq += s.displacement_sq;
  }

  void merge(const Sums& o) {
    count += o.count;
    sum_x += o.sum_x;
    sum_p += o.sum_p;
    prod_x += o.prod_x;
    prod_p += o.prod_p;
    displacement_sq += o.displacement_sq;
  }

  [[nodiscard]] Moments covariance(Quadrature q) const {
    const auto& sum = q == Quadrature::X ? sum_x : sum_p;
    const auto& prod = q == Quadrature::X ? prod_x : prod_p;
    return (prod - sum * sum.transpose() / count) / (count - 1.0);
  }
};

double conditional(const Moments& c, int i, int j) {
  return c(i, i) - c(i, j) * c(i, j) / c(j, j);
}

double information(const Moments& cx, const Moments& cp, int i, int j) {
  return 0.5 * (std::log2(cx(i, i) / conditional(cx, i, j)) +
                std::log2(cp(i, i) / conditional(cp, i, j)));
}

Estimates estimates_from(const Moments& cx, const Moments& cp, bool has_eve) {
  auto pair = [&](int i, int j) {
    return QuadraturePair{conditional(cx, i, j), conditional(cp, i, j)};
  };
  Estimates e;
  e.a_given_b = pair(kSimA, kSimB);
  e.b_given_a = pair(kSimB, kSimA);
  e.am_given_bm = pair(kSimAM, kSimBM);
  e.bm_given_am = pair(kSimBM, kSimAM);
  e.i_ab = information(cx, cp, kSimAM, kSimBM);
  if (has_eve) {
    e.a_given_e = pair(kSimA, kSimE);
    e.b_given_e = pair(kSimB, kSimE);
    e.am_given_e = pair(kSimAM, kSimE);
    e.bm_given_e = pair(kSimBM, kSimE);
    e.i_ae = information(cx, cp, kSimAM, kSimE);
    e.i_be = information(cx, cp, kSimBM, kSimE);
    e.rate_dr = empirical_key_rate(e, Direction::Direct);
    e.rate_rr = empirical_key_rate(e, Direction::Reverse);
  }
  return e;
}

std::array<double*, 21> fields(Estimates& e) {
  return {&e.a_given_b.x,  &e.a_given_b.p,  &e.b_given_a.x,  &e.b_given_a.p,
          &e.am_given_bm.x, &e.am_given_bm.p, &e.bm_given_am.x, &e.bm_given_am.p,
          &e.a_given_e.x,  &e.a_given_e.p,  &e.b_given_e.x,  &e.b_given_e.p,
          &e.am_given_e.x, &e.am_given_e.p, &e.bm_given_e.x, &e.bm_given_e.p,
          &e.i_ab,         &e.i_ae,         &e.i_be,         &e.rate_dr,
          &e.rate_rr};
}

// Standard error of the mean of the per-batch values.
double batch_standard_error(std::span<const double> values) {
  const auto nb = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= nb;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (nb - 1.0) / nb);
}

}  // namespace

void validate(const SimConfig& config) {
  if (config.batches < 2) throw DomainError("simulation needs at least two batches");
  if (config.n_samples < 2 * static_cast<std::size_t>(config.batches)) {
    throw DomainError("simulation needs at least two shots per batch");
  }
  if (!(config.protocol.v >= 1.0)) throw DomainError("modulation variance V must be >= 1");
  make_channel(config.channel.transmittance, config.channel.excess_noise);
}

EstimatorResult run_sim(const SimConfig& config) {
  validate(config);
  const bool has_eve = !std::holds_alternative<NoAttack>(config.attack);
  const auto nb = static_cast<std::size_t>(config.batches);

  std::vector<Sums> batches(nb);
  parallel_for(
      nb,
      [&](std::size_t b) {
        Sums sums;
        for_each_shot(config, static_cast<int>(b),
                      [&](const Shot& s) { sums.add(s); });
        batches[b] = sums;
      },
      config.threads);

  Sums total;
  for (const Sums& b : batches) total.merge(b);

  EstimatorResult r;
  r.n_samples = config.n_samples;
  r.batches = config.batches;
  r.has_eve = has_eve;
  r.moments_x = total.covariance(Quadrature::X);
  r.moments_p = total.covariance(Quadrature::P);
  r.value = estimates_from(r.moments_x, r.moments_p, has_eve);
  r.displacement_rms = std::sqrt(total.displacement_sq / total.count);

  std::vector<Estimates> per_batch;
  per_batch.reserve(nb);
  std::vector<double> column(nb);
  for (const Sums& b : batches) {
    per_batch.push_back(estimates_from(b.covariance(Quadrature::X),
                                       b.covariance(Quadrature::P), has_eve));
  }
  const std::size_t n_fields = fields(r.standard_error).size();
  for (std::size_t f = 0; f < n_fields; ++f) {
    for (std::size_t b = 0; b < nb; ++b) column[b] = *fields(per_batch[b])[f];
    *fields(r.standard_error)[f] = batch_standard_error(column);
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      for (std::size_t b = 0; b < nb; ++b) column[b] = batches[b].covariance(Quadrature::X)(i, j);
      r.moments_se_x(i, j) = batch_standard_error(column);
      for (std::size_t b = 0; b < nb; ++b) column[b] = batches[b].covariance(Quadrature::P)(i, j);
      r.moments_se_p(i, j) = batch_standard_error(column);
    }
  }
  return r;
}

std::vector<ShotRecord> sample_shots(const SimConfig& config) {
  validate(config);
  std::vector<ShotRecord> shots;
  shots.reserve(config.n_samples);
  for (int b = 0; b < config.batches; ++b) {
    for_each_shot(config, b, [&](const Shot& s) {
      shots.push_back({s.x[kSimAM], s.p[kSimAM], s.x[kSimBM], s.p[kSimBM],
                       s.x[kSimE], s.p[kSimE]});
    });
  }
  return shots;
}

void write_shots_csv(std::ostream& out, std::span<const ShotRecord> shots) {
  out << "x_a_m,p_a_m,x_b_m,p_b_m,x_e,p_e\n";
  std::array<char, 32> buf{};
  auto put = [&](double v, char sep) {
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.write(buf.data(), res.ptr - buf.data());
    out.put(sep);
  };
  for (const ShotRecord& s : shots) {
    put(s.x_a_m, ',');
    put(s.p_a_m, ',');
    put(s.x_b_m, ',');
    put(s.p_b_m, ',');
    put(s.x_e, ',');
    put(s.p_e, '\n');
  }
}

double empirical_conditional_variance(std::span<const double> x,
                                      std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("sample lengths differ");
  if (x.size() < 2) throw DomainError("need at least two samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(syy > 1e-24 * n * std::max(1.0, my * my))) {
    throw DomainError("conditioning sample has zero variance");
  }
  return std::max(0.0, (sxx - sxy * sxy / syy) / (n - 1.0));
}

double empirical_key_rate(const Estimates& e, Direction direction) {
  const QuadraturePair& eve =
      direction == Direction::Direct ? e.am_given_e : e.bm_given_e;
  const QuadraturePair& partner =
      direction == Direction::Direct ? e.am_given_bm : e.bm_given_am;
  return 0.5 * (std::log2(eve.x / partner.x) + std::log2(eve.p / partner.p));
}

double empirical_key_rate(const EstimatorResult& result, Direction direction) {
  if (!result.has_eve) throw DomainError("simulation has no eavesdropper");
  return empirical_key_rate(result.value, direction);
}

}  // namespace cvqkd
