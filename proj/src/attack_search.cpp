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
#include "cvqkd/attack_search.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "cvqkd/parallel.hpp"
#include "cvqkd/pattern_search.hpp"

namespace cvqkd {

Mat3 build_sx(const SxParameterization& params) {
  const double t = params.channel.transmittance;
  const double sq_chi = std::sqrt(params.channel.chi);
  if (!(params.rho >= 0.0)) {
    throw DomainError("rho must be non-negative");
  }
  Mat3 m;
  m.row(0) << 1.0, sq_chi * std::cos(params.theta),
      sq_chi * std::sin(params.theta);
  m.row(1) << params.u * std::sqrt(params.rho), params.u * std::sin(params.xi),
      params.u * std::cos(params.xi);
  m.row(2) = params.third_row.transpose();
  Mat3 s_x = std::sqrt(t) * m;
  if (std::abs(s_x.determinant()) < kSingularDeterminant) {
    throw SingularMatrixError("S_x is singular");
  }
  return s_x;
}

std::array<double, 2> symmetry_residuals(const Mat3& s_x, double transmittance,
                                         double chi) {
  const Mat3 m = s_x / std::sqrt(transmittance);
  const Vec3 row2 = m.row(1).transpose();
  const Vec3 row3 = m.row(2).transpose();
  // Cofactors of the first row: (bt - cs, cr - at, as - br).
  const Vec3 cof = row2.cross(row3);
  const double dt = m.determinant() * transmittance;
  return {cof[0] - dt, cof[1] * cof[1] + cof[2] * cof[2] - dt * dt * chi};
}

ThirdRowCompletion complete_third_row(const ChannelParams& channel,
                                      double theta, const Vec3& second_row) {
  // The cofactor vector of the first row must be proportional to
  // w = (1, y, z) with y^2 + z^2 = chi. Being a cross product it is
  // orthogonal to row 2, and the determinant condition fixes w . row1 = 1/T.
  const double sq_chi = std::sqrt(channel.chi);
  Mat2 lhs;
  lhs << sq_chi * std::cos(theta), sq_chi * std::sin(theta), second_row[1],
      second_row[2];
  const Eigen::Vector2d rhs(1.0 / channel.transmittance - 1.0, -second_row[0]);
  const Eigen::Vector2d yz = inverse2(lhs) * rhs;
  const Vec3 w(1.0, yz[0], yz[1]);
  Vec3 third = w.cross(second_row);
  const double norm = third.norm();
  if (!(norm > kSingularDeterminant)) {
    throw SearchError("linear completion has no nonzero solution");
  }
  ThirdRowCompletion c;
  c.third_row = third / norm;
  c.phi = std::atan2(yz[1], yz[0]);
  c.compatibility = yz.squaredNorm() - channel.chi;
  return c;
}

AttackSolution evaluate_attack(const ProtocolParams& protocol,
                               const ChannelParams& channel,
                               const SymplecticPair& attack) {
  const MultiModeCovariance state = apply_attack(protocol, attack);
  AttackSolution s;
  s.s_pair = attack;
  s.v_a_given_e = {conditional_variance_of(state, kModeA, kModeE1, Quadrature::X),
                   conditional_variance_of(state, kModeA, kModeE2, Quadrature::P)};
  s.v_b_given_e = {conditional_variance_of(state, kModeB, kModeE1, Quadrature::X),
                   conditional_variance_of(state, kModeB, kModeE2, Quadrature::P)};
  const Mat3 m = attack.s_x() / std::sqrt(channel.transmittance);
  const double a = m(1, 0);
  s.rho_achieved = a * a / (m(1, 1) * m(1, 1) + m(1, 2) * m(1, 2));
  s.residuals = symmetry_residuals(attack.s_x(), channel.transmittance, channel.chi);
  return s;
}

namespace {

double mean_eve_variance(const AttackSolution& s, Direction direction) {
  const QuadraturePair& q =
      direction == Direction::Direct ? s.v_a_given_e : s.v_b_given_e;
  return 0.5 * (q.x + q.p);
}

AttackSolution identity_solution(const ProtocolParams& protocol,
                                 const ChannelParams& channel,
                                 Direction direction) {
  AttackSolution s = evaluate_attack(protocol, channel, SymplecticPair::identity());
  s.objective = mean_eve_variance(s, direction);
  s.params.channel = channel;
  s.params.xi = std::numbers::pi / 2.0;
  s.params.third_row = Vec3::UnitZ();
  return s;
}

}  // namespace

AttackSolution construct_attack(const ProtocolParams& protocol,
                                const ChannelParams& channel, double rho,
                                CosBranch branch, double theta) {
  if (channel.chi == 0.0) {
    return identity_solution(protocol, channel, Direction::Direct);
  }
  if (!(rho > 0.0) || !(rho <= 1.0)) {
    throw DomainError("attack construction needs 0 < rho <= 1");
  }
  const double t = channel.transmittance;
  const double chi = channel.chi;
  const double sin_psi =
      0.5 * (t * chi * rho - (1.0 - t)) / (t * std::sqrt(chi * rho));
  double cos_psi = std::sqrt(rho / (t * chi));
  if (branch == CosBranch::Negative) cos_psi = -cos_psi;
  const double psi = std::atan2(sin_psi, cos_psi);

  SxParameterization params;
  params.theta = theta;
  params.xi = psi - theta;
  params.u = 1.0;
  params.rho = rho;
  params.channel = channel;
  const Vec3 row2(std::sqrt(rho), std::sin(params.xi), std::cos(params.xi));
  const ThirdRowCompletion completion = complete_third_row(channel, theta, row2);
  params.third_row = completion.third_row;
  params.phi = completion.phi;

  AttackSolution s = evaluate_attack(
      protocol, channel, SymplecticPair::from_sx(build_sx(params)));
  s.params = params;
  return s;
}

AttackSolution construct_optimal(const ProtocolParams& protocol,
                                 const ChannelParams& channel,
                                 Direction direction, CosBranch branch,
                                 double theta) {
  if (channel.chi == 0.0) return identity_solution(protocol, channel, direction);
  AttackSolution s = construct_attack(protocol, channel,
                                      solve_rho(channel).rho_plus, branch, theta);
  s.objective = mean_eve_variance(s, direction);
  return s;
}

SymplecticPair beamsplitter_heterodyne_attack(double transmittance) {
  const double t = std::sqrt(transmittance);
  const double r = std::sqrt(1.0 - transmittance);
  const double h = std::numbers::sqrt2 / 2.0;
  Mat3 beamsplitter;
  beamsplitter << t, r, 0.0, r, -t, 0.0, 0.0, 0.0, 1.0;
  Mat3 balanced;
  balanced << 1.0, 0.0, 0.0, 0.0, h, h, 0.0, h, -h;
  return SymplecticPair::from_sx(balanced * beamsplitter);
}

namespace {

// Search variables: (theta, xi, a) with u = 1. The third row is eliminated
// by complete_third_row; only its compatibility remains as a constraint.
struct SearchPoint {
  SymplecticPair pair;
  ThirdRowCompletion completion;
};

SearchPoint pair_from_search(const ChannelParams& channel,
                             const Eigen::VectorXd& z) {
  const Vec3 row2(z[2], std::sin(z[1]), std::cos(z[1]));
  const ThirdRowCompletion completion = complete_third_row(channel, z[0], row2);
  Mat3 m;
  const double sq_chi = std::sqrt(channel.chi);
  m.row(0) << 1.0, sq_chi * std::cos(z[0]), sq_chi * std::sin(z[0]);
  m.row(1) = row2.transpose();
  m.row(2) = completion.third_row.transpose();
  return {SymplecticPair::from_sx(std::sqrt(channel.transmittance) * m), completion};
}

constexpr double kInfeasiblePenalty = 1e6;

// Extended-precision evaluation of the search variables. At zero excess
// noise the two roots merge and the constraint surfaces touch, so the
// attainable accuracy in rho is the square root of the constraint noise
// floor; long double keeps that well below 1e-8.
template <class Real>
struct InnerValues {
  Real compatibility;
  Real key_x;
  Real key_p;
};

template <class Real>
std::optional<InnerValues<Real>> inner_values(const ProtocolParams& protocol,
                                              const ChannelParams& channel,
                                              Direction direction,
                                              const Eigen::VectorXd& z) {
  using M3 = Eigen::Matrix<Real, 3, 3>;
  using V3 = Eigen::Matrix<Real, 3, 1>;
  const Real v = protocol.v;
  const Real t = channel.transmittance;
  const Real chi = channel.chi;
  const Real theta = z[0];
  const Real xi = z[1];
  const Real sq_chi = std::sqrt(chi);

  const V3 row1(Real(1), sq_chi * std::cos(theta), sq_chi * std::sin(theta));
  const V3 row2(Real(z[2]), std::sin(xi), std::cos(xi));
  // Same completion as complete_third_row, by Cramer's rule.
  const Real l00 = row1[1], l01 = row1[2], l10 = row2[1], l11 = row2[2];
  const Real det2 = l00 * l11 - l01 * l10;
  if (!(std::abs(det2) > Real(1e-14))) return std::nullopt;
  const Real r0 = Real(1) / t - Real(1);
  const Real r1 = -row2[0];
  const Real y = (r0 * l11 - l01 * r1) / det2;
  const Real zz = (l00 * r1 - r0 * l10) / det2;
  const V3 w(Real(1), y, zz);
  V3 row3 = w.cross(row2);
  const Real norm = row3.norm();
  if (!(norm > Real(1e-12))) return std::nullopt;
  row3 /= norm;

  M3 sx;
  sx.row(0) = std::sqrt(t) * row1.transpose();
  sx.row(1) = std::sqrt(t) * row2.transpose();
  sx.row(2) = std::sqrt(t) * row3.transpose();
  const Real det = sx.determinant();
  if (!(std::abs(det) > Real(kSingularDeterminant))) return std::nullopt;
  const M3 sp = sx.inverse().transpose();

  const Real c = std::sqrt(v * v - Real(1));
  const V3 gamma(v, Real(1), Real(1));
  auto cross_moment = [&](const M3& s, int i, int j) {
    return s(i, 0) * s(j, 0) * gamma[0] + s(i, 1) * s(j, 1) + s(i, 2) * s(j, 2);
  };
  Real key_x, key_p;
  if (direction == Direction::Direct) {
    const Real cov_x = sx(1, 0) * c;
    const Real cov_p = -sp(2, 0) * c;
    key_x = v - cov_x * cov_x / cross_moment(sx, 1, 1);
    key_p = v - cov_p * cov_p / cross_moment(sp, 2, 2);
  } else {
    const Real cov_x = cross_moment(sx, 0, 1);
    const Real cov_p = cross_moment(sp, 0, 2);
    key_x = cross_moment(sx, 0, 0) - cov_x * cov_x / cross_moment(sx, 1, 1);
    key_p = cross_moment(sp, 0, 0) - cov_p * cov_p / cross_moment(sp, 2, 2);
  }
  if (!(key_x > Real(0)) || !(key_p > Real(0))) return std::nullopt;
  return InnerValues<Real>{y * y + zz * zz - chi, key_x, key_p};
}

struct Problem {
  ProtocolParams protocol;
  ChannelParams channel;
  Direction direction;
  bool symmetric;

  using Values = InnerValues<long double>;

  [[nodiscard]] std::optional<Values> values(const Eigen::VectorXd& z) const {
    return inner_values<long double>(protocol, channel, direction, z);
  }

  [[nodiscard]] double objective(const Values& c) const {
    if (symmetric) return static_cast<double>(0.5L * (c.key_x + c.key_p));
    return static_cast<double>(std::log(c.key_x) + std::log(c.key_p));
  }

  [[nodiscard]] Eigen::VectorXd constraints(const Values& c) const {
    Eigen::VectorXd g(symmetric ? 2 : 1);
    g[0] = static_cast<double>(c.compatibility / channel.chi);
    if (symmetric) {
      g[1] = static_cast<double>((c.key_x - c.key_p) / protocol.v);
    }
    return g;
  }
};

struct StartOutcome {
  bool feasible = false;
  double infeasibility = std::numeric_limits<double>::infinity();
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd z;
};

std::uint64_t start_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over (seed, index).
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

StartOutcome run_start(const Problem& problem, const SearchConfig& config,
                       std::uint64_t index) {
  std::mt19937_64 rng(start_seed(config.seed, index));
  Eigen::VectorXd z(3);
  z << uniform(rng, 0.0, 2.0 * std::numbers::pi),
      uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, -1.0, 1.0);

  auto candidate = [&](const Eigen::VectorXd& x) { return problem.values(x); };

  numopt::PatternSearchOptions opts;
  opts.min_step = 1e-9;
  opts.max_evaluations = 4000;
  for (double mu : {1e1, 1e3, 1e5, 1e7}) {
    auto penalised = [&](const Eigen::VectorXd& x) {
      const auto c = candidate(x);
      if (!c) return kInfeasiblePenalty;
      return problem.objective(*c) + mu * problem.constraints(*c).squaredNorm();
    };
    z = numopt::hooke_jeeves(penalised, z, opts).x;
    opts.initial_step = 0.01;
  }

  auto constraint_fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const auto c = candidate(x);
    if (!c) {
      return Eigen::VectorXd::Constant(problem.symmetric ? 2 : 1,
                                       std::numeric_limits<double>::infinity());
    }
    return problem.constraints(*c);
  };
  numopt::ProjectionOptions popts;
  popts.tolerance = config.feasibility_tolerance;
  numopt::Projection proj = numopt::project(constraint_fn, z, popts);

  // Projected compass refinement: every trial point is pulled back onto the
  // constraint manifold before its objective is compared.
  auto feasible_value = [&](const Eigen::VectorXd& x) {
    const auto c = candidate(x);
    return c ? problem.objective(*c) : std::numeric_limits<double>::infinity();
  };
  StartOutcome out;
  out.z = proj.x;
  out.infeasibility = proj.residual;
  out.feasible = proj.converged;
  if (!out.feasible) return out;
  out.objective = feasible_value(out.z);
  double step = 1e-3;
  int budget = 400;
  while (step > 1e-9 && budget > 0) {
    bool improved = false;
    for (Eigen::Index i = 0; i < 3 && budget > 0; ++i) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = out.z;
        trial[i] += sign * step;
        --budget;
        const numopt::Projection p = numopt::project(constraint_fn, trial, popts);
        if (!p.converged) continue;
        const double value = feasible_value(p.x);
        if (value < out.objective - config.objective_tolerance * 1e-2) {
          out.z = p.x;
          out.objective = value;
          out.infeasibility = p.residual;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return out;
}

SearchResult run_search(const Problem& problem, const SearchConfig& config) {
  if (problem.channel.chi == 0.0) {
    SearchResult r;
    r.best = identity_solution(problem.protocol, problem.channel, problem.direction);
    if (!problem.symmetric) {
      const QuadraturePair& q = problem.direction == Direction::Direct
                                    ? r.best.v_a_given_e
                                    : r.best.v_b_given_e;
      r.best.objective = std::log(q.x) + std::log(q.p);
    }
    return r;
  }
  if (config.starts < 1) throw DomainError("search needs at least one start");

  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(config.starts));
  parallel_for(
      outcomes.size(),
      [&](std::size_t i) { outcomes[i] = run_start(problem, config, i); },
      config.threads);

  SearchResult result;
  result.diagnostics.starts = config.starts;
  result.diagnostics.best_infeasibility = std::numeric_limits<double>::infinity();
  const StartOutcome* best = nullptr;
  for (const StartOutcome& o : outcomes) {
    result.diagnostics.best_infeasibility =
        std::min(result.diagnostics.best_infeasibility, o.infeasibility);
    if (!o.feasible) continue;
    ++result.diagnostics.feasible_starts;
    if (best == nullptr || o.objective < best->objective) best = &o;
  }
  if (best == nullptr) {
    std::ostringstream msg;
    msg << "no feasible attack found: " << config.starts
        << " starts, smallest constraint violation "
        << result.diagnostics.best_infeasibility;
    throw SearchError(msg.str());
  }

  const SearchPoint point = pair_from_search(problem.channel, best->z);
  const SymplecticPair& pair = point.pair;
  result.best = evaluate_attack(problem.protocol, problem.channel, pair);
  result.best.objective = best->objective;
  result.best.params.theta = best->z[0];
  result.best.params.xi = best->z[1];
  result.best.params.rho = best->z[2] * best->z[2];
  result.best.params.phi = point.completion.phi;
  result.best.params.channel = problem.channel;
  const Mat3 m = pair.s_x() / std::sqrt(problem.channel.transmittance);
  result.best.params.third_row = m.row(2).transpose();
  return result;
}

}  // namespace

SearchResult optimize_attack(const ProtocolParams& protocol,
                             const ChannelParams& channel, Direction direction,
                             const SearchConfig& config) {
  return run_search(Problem{protocol, channel, direction, true}, config);
}

SearchResult unconstrained_stress_search(const ProtocolParams& protocol,
                                         const ChannelParams& channel,
                                         Direction direction,
                                         const SearchConfig& config) {
  return run_search(Problem{protocol, channel, direction, false}, config);
}

}  // namespace cvqkd
