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

#include <iosfwd>
#include <optional>
#include <vector>

#include "singsmooth/block_linalg.hpp"
#include "singsmooth/model.hpp"
#include "singsmooth/penalty.hpp"

namespace singsmooth {

struct SolverConfig {
  double tau = 1.0;    // primal step
  double sigma = 1.0;  // dual step; tau * sigma <= 1
  int max_iter = 100000;
  double tol_rel = 1e-8;
  double tol_feas = 1e-8;
  int log_every = 50;
  double pivot_tol = 1e-10;
  bool precondition = true;

  // Throws ParameterError.
  void check() const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double feas_residual = 0.0;
  double step_change = 0.0;
};

struct SolveResult {
  StackedVector z;  // last affine projection, feasible up to solver precision
  Vec zeta;         // dual variable
  int iterations = 0;
  std::vector<IterationRecord> trace;
  double feas_residual = 0.0;
  double step_change = 0.0;
  bool converged = false;

  Mat trajectory() const { return z.trajectory(); }
};

/// Douglas-Rachford splitting for min rho(z) s.t. A z = w_hat:
///
///   z^k    = P_{Az = w}(z^{k-1} - tau W zeta^{k-1})
///   zeta^k = prox_{sigma W^-1 rho*}(zeta^{k-1} + sigma W^-1 (2 z^k - z^{k-1}))
///
/// W is a positive diagonal metric, constant on each penalty term, and the
/// projection is taken in the W^-1 norm. With preconditioning on, W undoes
/// the scale of each term (1/scale for smooth losses, 1/scale^2 for the
/// piecewise linear ones) so that every block sees a unit-size penalty;
/// otherwise W = I. The minimizer does not depend on W.
///
/// The weighted constraint Gram matrix A W A^T is factored once at
/// construction; solve() may be called concurrently from several threads.
class Smoother {
 public:
  explicit Smoother(Problem p, double pivot_tol = 1e-10, bool precondition = true);

  const Problem& problem() const { return problem_; }
  const StackedLayout& layout() const { return layout_; }
  const SeparablePenalty& penalty() const { return penalty_; }
  const Vec& metric() const { return weights_; }

  SolveResult solve(const SolverConfig& cfg,
                    const std::optional<StackedVector>& init = std::nullopt,
                    const std::optional<Vec>& zeta0 = std::nullopt) const;

  // max |A z - w_hat|
  double feasibility_residual(const Vec& z) const;
  // max over the part of zeta orthogonal to range(A^T).
  double dual_residual(const Vec& zeta) const;

 private:
  Problem problem_;
  StackedLayout layout_;
  SeparablePenalty penalty_;
  Vec weights_;
  Vec sqrt_w_;
  AffineProjector projector_;  // for A W^{1/2}
};

// Validates, factors and solves in one call.
SolveResult solve(const Problem& p, const SolverConfig& cfg,
                  const std::optional<StackedVector>& init = std::nullopt);

// Initial iterate for a state laid out as (position, velocity, ...): x_1 is
// (last_fix, damping * last_velocity, 0, ...) and later states follow the
// model transitions. u and t blocks are zero.
StackedVector warm_start(const Problem& p, const Vec& last_fix,
                         const Vec& last_velocity, double damping);

struct KktReport {
  double feas_residual = 0.0;  // max |A z - w_hat|
  double stationarity = 0.0;   // max_i dist(zeta_i, d rho_i(z_i))
  double dual_residual = 0.0;  // max |P_null(A)(zeta)|
  double prox_residual = 0.0;  // max |z - prox_rho(z + zeta)|, continuous in (z, zeta)
};

// Points within kink_tol of a breakpoint use the subdifferential of the
// breakpoint, since iterates only reach kinks to solver precision.
KktReport kkt_certificate(const Smoother& s, const SolveResult& r, double kink_tol = 1e-7);
KktReport kkt_certificate(const Problem& p, const SolveResult& r, double kink_tol = 1e-7);

// iteration,objective,feas_residual,step_change
void write_diagnostics_csv(std::ostream& os, const SolveResult& r);

}  // namespace singsmooth
