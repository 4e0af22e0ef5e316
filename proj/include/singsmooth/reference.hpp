// Copyright 2026 The singsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "singsmooth/errors.hpp"
#include "singsmooth/model.hpp"
#include "singsmooth/penalty.hpp"

// Independent reference implementations used as test oracles and as
// baselines in the comparison runs. Clarity over speed throughout.
namespace singsmooth::reference {

struct GaussianEstimate {
  Mat means;                      // N x n
  std::vector<Mat> covariances;   // N matrices, n x n
};

// Covariance-form Kalman filter and Rauch-Tung-Striebel smoother. Requires
// quadratic process and measurement penalties covering every coordinate and
// no state penalty. Singular Q and R are formed explicitly and never
// inverted; the smoother gain uses an eigendecomposition pseudo-inverse.
GaussianEstimate kalman_rts(const Problem& p, Index max_steps = 1000);

// Dense KKT solve of min sum s_i z_i^2 / 2 s.t. A z = w_hat for problems
// whose penalties are all quadratic or zero.
StackedVector dense_equality_ls(const Problem& p, Index max_steps = 64);

// Golden-section minimization of (x - z)^2 / (2 alpha) + rho(x) in extended
// precision. `i` selects the box bound for box penalties.
double prox_oracle(const Penalty& p, double alpha, double z, Index i = 0);

// Symmetric pseudo-inverse via eigendecomposition, dropping eigenvalues
// below rel_tol times the largest.
Mat pinv_symmetric(const Mat& m, double rel_tol = 1e-12);

struct PinvHuberResult {
  Mat trajectory;  // N x n
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Baseline that whitens with Moore-Penrose pseudo-inverses of the covariance
// square roots and minimizes
//   sum_k huber(C_k^+ (x_k - G_k x_{k-1})) + huber(S_k^+ (H_k x_k - y_k))
// over the states by iteratively reweighted Newton steps with backtracking.
PinvHuberResult pinv_huber_smoother(const Problem& p, double kappa = 1.0,
                                    int max_iter = 2000, double grad_tol = 1e-8);

}  // namespace singsmooth::reference
