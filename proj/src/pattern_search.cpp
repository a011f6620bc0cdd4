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
#include "cvqkd/pattern_search.hpp"

#include <cmath>
#include <limits>

namespace cvqkd::numopt {

namespace {

// One exploratory sweep around `base`; returns true if anything improved.
bool explore(const Objective& f, Eigen::VectorXd& base, double& value,
             double step, std::size_t& evals) {
  bool improved = false;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double keep = base[i];
    base[i] = keep + step;
    double trial = f(base);
    ++evals;
    if (trial < value) {
      value = trial;
      improved = true;
      continue;
    }
    base[i] = keep - step;
    trial = f(base);
    ++evals;
    if (trial < value) {
      value = trial;
      improved = true;
      continue;
    }
    base[i] = keep;
  }
  return improved;
}

}  // namespace

Minimum hooke_jeeves(const Objective& f, const Eigen::VectorXd& x0,
                     const PatternSearchOptions& opts) {
  Minimum m;
  m.x = x0;
  m.value = f(x0);
  m.evaluations = 1;
  double step = opts.initial_step;
  while (step >= opts.min_step && m.evaluations < opts.max_evaluations) {
    Eigen::VectorXd candidate = m.x;
    double value = m.value;
    if (!explore(f, candidate, value, step, m.evaluations)) {
      step *= opts.shrink;
      continue;
    }
    // Pattern moves along the improving direction while they keep paying.
    while (m.evaluations < opts.max_evaluations) {
      Eigen::VectorXd direction = candidate - m.x;
      m.x = candidate;
      m.value = value;
      Eigen::VectorXd jump = candidate + direction;
      double jump_value = f(jump);
      ++m.evaluations;
      explore(f, jump, jump_value, step, m.evaluations);
      if (!(jump_value < m.value)) break;
      candidate = jump;
      value = jump_value;
    }
  }
  return m;
}

Projection project(const Constraints& c, const Eigen::VectorXd& x0,
                   const ProjectionOptions& opts) {
  Projection p;
  p.x = x0;
  Eigen::VectorXd r = c(p.x);
  p.residual = r.cwiseAbs().maxCoeff();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    if (!std::isfinite(p.residual)) break;
    if (p.residual <= opts.tolerance) {
      p.converged = true;
      return p;
    }
    Eigen::MatrixXd jac(r.size(), p.x.size());
    for (Eigen::Index j = 0; j < p.x.size(); ++j) {
      Eigen::VectorXd xh = p.x;
      const double h = opts.fd_step * std::max(1.0, std::abs(p.x[j]));
      xh[j] += h;
      jac.col(j) = (c(xh) - r) / h;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
    Eigen::VectorXd delta = cod.solve(-r);
    // Backtrack until the residual decreases.
    double scale = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd trial = p.x + scale * delta;
      Eigen::VectorXd rt = c(trial);
      const double res = rt.cwiseAbs().maxCoeff();
      if (std::isfinite(res) && res < p.residual) {
        p.x = std::move(trial);
        r = std::move(rt);
        p.residual = res;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) break;
  }
  p.converged = p.residual <= opts.tolerance;
  return p;
}

}  // namespace cvqkd::numopt
