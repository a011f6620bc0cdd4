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

// Small derivative-free toolkit: Hooke-Jeeves pattern search for penalised
// objectives and a Gauss-Newton projection onto an equality-constraint
// manifold using forward-difference Jacobians.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace cvqkd::numopt {

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Constraints = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PatternSearchOptions {
  double initial_step = 0.25;
  double min_step = 1e-10;
  double shrink = 0.5;
  std::size_t max_evaluations = 20000;
};

struct Minimum {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

Minimum hooke_jeeves(const Objective& f, const Eigen::VectorXd& x0,
                     const PatternSearchOptions& opts = {});

struct ProjectionOptions {
  double tolerance = 1e-13;
  std::size_t max_iterations = 200;
  double fd_step = 1e-7;
};

struct Projection {
  Eigen::VectorXd x;
  double residual = 0.0;  // max-abs constraint value at x
  bool converged = false;
};

/// Minimum-norm Gauss-Newton iterations driving c(x) to zero.
Projection project(const Constraints& c, const Eigen::VectorXd& x0,
                   const ProjectionOptions& opts = {});

}  // namespace cvqkd::numopt
