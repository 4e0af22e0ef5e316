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

#include "singsmooth/solver.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace singsmooth {

void SolverConfig::check() const {
  if (!(tau > 0.0) || !(sigma > 0.0)) {
    throw ParameterError("solver steps tau and sigma must be positive");
  }
  if (tau * sigma > 1.0 + 1e-12) {
    throw ParameterError("solver steps must satisfy tau * sigma <= 1");
  }
  if (max_iter < 1) throw ParameterError("max_iter must be at least 1");
  if (!(tol_rel > 0.0) || !(tol_feas > 0.0)) {
    throw ParameterError("solver tolerances must be positive");
  }
  if (log_every < 1) throw ParameterError("log_every must be at least 1");
}

namespace {

double term_weight(const Penalty& p) {
  const double s = p.scale();
  switch (p.kind()) {
    case PenaltyKind::kZero:
    case PenaltyKind::kBox:
      return 1.0;
    case PenaltyKind::kQuadratic:
    case PenaltyKind::kHuber:
    case PenaltyKind::kHubnik:
    case PenaltyKind::kElasticNet:
      return 1.0 / s;
    case PenaltyKind::kQuantileHuber:
      return p.kappa() / s;
    case PenaltyKind::kL1:
    case PenaltyKind::kQuantile:
    case PenaltyKind::kVapnik:
      return 1.0 / (s * s);
  }
  return 1.0;
}

Vec metric_weights(const SeparablePenalty& sp, Index dim, bool precondition) {
  Vec w = Vec::Ones(dim);
  if (!precondition) return w;
  for (const auto& t : sp.terms()) {
    w.segment(t.offset, t.length).setConstant(term_weight(t.penalty));
  }
  return w;
}

AffineProjector make_projector(const Problem& p, const Vec& sqrt_w, double pivot_tol) {
  validate(p);
  Assembly a = assemble(p);
  BlockBidiagonal& A = a.A;
  for (Index k = 0; k < A.num_blocks(); ++k) {
    const auto d = sqrt_w.segment(A.col_offset[k], A.block_cols(k)).asDiagonal();
    A.diag[k] = A.diag[k] * d;
    if (k < static_cast<Index>(A.sub.size())) A.sub[k] = A.sub[k] * d;
  }
  return AffineProjector(std::move(a.A), std::move(a.w_hat), pivot_tol);
}

}  // namespace

Smoother::Smoother(Problem p, double pivot_tol, bool precondition)
    : problem_(std::move(p)),
      layout_(problem_),
      penalty_(stacked_penalty(problem_, layout_)),
      weights_(metric_weights(penalty_, layout_.size(), precondition)),
      sqrt_w_(weights_.cwiseSqrt()),
      projector_(make_projector(problem_, sqrt_w_, pivot_tol)) {}

double Smoother::feasibility_residual(const Vec& z) const {
  return projector_.feasibility_residual(z.cwiseQuotient(sqrt_w_));
}

double Smoother::dual_residual(const Vec& zeta) const {
  // zeta lies in range(A^T) iff W^{1/2} zeta lies in range((A W^{1/2})^T).
  const Vec r = projector_.null_space_component(zeta.cwiseProduct(sqrt_w_));
  return r.cwiseQuotient(sqrt_w_).lpNorm<Eigen::Infinity>();
}

SolveResult Smoother::solve(const SolverConfig& cfg,
                            const std::optional<StackedVector>& init,
                            const std::optional<Vec>& zeta0) const {
  cfg.check();
  const Index dim = layout_.size();
  // The iteration runs in the scaled variables z~ = W^{-1/2} z, where it is
  // the plain splitting with unit metric.
  Vec z_prev = Vec::Zero(dim);
  if (init) {
    if (!(init->layout == layout_)) throw DimensionError("initial iterate layout mismatch");
    z_prev = init->data.cwiseQuotient(sqrt_w_);
  }
  Vec zeta = Vec::Zero(dim);
  if (zeta0) {
    if (zeta0->size() != dim) throw DimensionError("initial dual length mismatch");
    zeta = zeta0->cwiseProduct(sqrt_w_);
  }

  Vec z(dim), eta(dim), arg(dim), zeta_next(dim), nu;
  SolveResult res;
  const double tau = cfg.tau, sigma = cfg.sigma;
  auto unscaled = [&](const Vec& v) -> Vec { return v.cwiseProduct(sqrt_w_); };
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    eta = z_prev - tau * zeta;
    projector_.project(eta, z, nu);
    arg = zeta + sigma * (2.0 * z - z_prev);
    // prox of sigma rho~* with rho~(v) = rho(W^{1/2} v), term by term.
    zeta_next.setZero();
    for (const auto& t : penalty_.terms()) {
      const double r = sqrt_w_[t.offset];
      auto a = arg.segment(t.offset, t.length);
      auto out = zeta_next.segment(t.offset, t.length);
      t.penalty.prox_conjugate_into(sigma / (r * r), a / r, out);
      out *= r;
    }

    const double dz = (z - z_prev).norm();
    const double dzeta = tau * (zeta_next - zeta).norm();
    const double change = std::max(dz, dzeta) / (1.0 + z.norm());
    zeta.swap(zeta_next);

    const bool small = change <= cfg.tol_rel;
    double feas = -1.0;
    if (small) feas = projector_.feasibility_residual(z);
    const bool done = small && feas <= cfg.tol_feas;
    if (it % cfg.log_every == 0 || done || it == cfg.max_iter) {
      if (feas < 0.0) feas = projector_.feasibility_residual(z);
      res.trace.push_back({it, penalty_.eval(unscaled(z)), feas, change});
    }
    res.step_change = change;
    if (done) {
      res.converged = true;
      break;
    }
    z_prev.swap(z);
  }
  if (!res.converged) z.swap(z_prev);  // last projection
  res.iterations = std::min(it, cfg.max_iter);
  res.feas_residual = projector_.feasibility_residual(z);
  res.z = StackedVector(layout_, unscaled(z));
  res.zeta = zeta.cwiseQuotient(sqrt_w_);
  return res;
}

SolveResult solve(const Problem& p, const SolverConfig& cfg,
                  const std::optional<StackedVector>& init) {
  cfg.check();
  Smoother s(p, cfg.pivot_tol, cfg.precondition);
  return s.solve(cfg, init);
}

StackedVector warm_start(const Problem& p, const Vec& last_fix,
                         const Vec& last_velocity, double damping) {
  if (!(damping >= 0.0 && damping <= 1.0)) {
    throw ParameterError("warm start damping must lie in [0, 1]");
  }
  const Index n = p.state_dim();
  const Index d = last_fix.size();
  if (last_velocity.size() != d || 2 * d > n) {
    throw DimensionError("warm start expects position and velocity blocks of equal size");
  }
  StackedVector z{StackedLayout(p)};
  Vec x = Vec::Zero(n);
  x.head(d) = last_fix;
  x.segment(d, d) = damping * last_velocity;
  for (Index k = 0; k < p.num_steps(); ++k) {
    if (k > 0) x = p.steps[k].G * x;
    z.x(k) = x;
  }
  return z;
}

KktReport kkt_certificate(const Smoother& s, const SolveResult& r, double kink_tol) {
  KktReport rep;
  const Vec& z = r.z.data;
  rep.feas_residual = s.feasibility_residual(z);
  rep.dual_residual = s.dual_residual(r.zeta);

  double worst = 0.0;
  double natural = 0.0;
  std::vector<bool> covered(z.size(), false);
  for (const auto& t : s.penalty().terms()) {
    const Vec shifted = z.segment(t.offset, t.length) + r.zeta.segment(t.offset, t.length);
    Vec p(t.length);
    t.penalty.prox_into(1.0, shifted, p);
    natural = std::max(natural, (z.segment(t.offset, t.length) - p).lpNorm<Eigen::Infinity>());
    for (Index i = 0; i < t.length; ++i) {
      const Index j = t.offset + i;
      covered[j] = true;
      const auto [lo, hi] = t.penalty.subdifferential(z[j], i, kink_tol);
      const double g = r.zeta[j];
      const double dist = g < lo ? lo - g : (g > hi ? g - hi : 0.0);
      worst = std::max(worst, dist);
    }
  }
  for (Index j = 0; j < z.size(); ++j) {
    if (!covered[j]) {
      worst = std::max(worst, std::abs(r.zeta[j]));
      natural = std::max(natural, std::abs(r.zeta[j]));
    }
  }
  rep.stationarity = worst;
  rep.prox_residual = natural;
  return rep;
}

KktReport kkt_certificate(const Problem& p, const SolveResult& r, double kink_tol) {
  return kkt_certificate(Smoother(p), r, kink_tol);
}

void write_diagnostics_csv(std::ostream& os, const SolveResult& r) {
  os << "iteration,objective,feas_residual,step_change\n";
  os << std::setprecision(10);
  for (const auto& rec : r.trace) {
    os << rec.iteration << ',' << rec.objective << ',' << rec.feas_residual << ','
       << rec.step_change << '\n';
  }
}

}  // namespace singsmooth
