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

#include "singsmooth/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "singsmooth/block_linalg.hpp"

namespace singsmooth::reference {
namespace {

// Per-coordinate quadratic weights of a separable penalty; anything other
// than full quadratic coverage is outside the Gaussian oracle's reach.
Vec quadratic_weights(const SeparablePenalty& sp, Index dim, const char* what, Index k) {
  Vec w = Vec::Zero(dim);
  Index covered = 0;
  for (const auto& t : sp.terms()) {
    if (t.penalty.kind() != PenaltyKind::kQuadratic) {
      throw OracleError(std::string(what) + " penalty at step " + std::to_string(k) +
                        " is not quadratic");
    }
    w.segment(t.offset, t.length).setConstant(t.penalty.scale());
    covered += t.length;
  }
  if (covered != dim) {
    throw OracleError(std::string(what) + " penalty at step " + std::to_string(k) +
                      " does not cover every coordinate");
  }
  return w;
}

Mat weighted_outer(const Mat& F, const Vec& w) {
  return F * w.cwiseInverse().asDiagonal() * F.transpose();
}

// Loss definitions for the prox oracle, written out independently of the
// library's evaluation code.
long double oracle_loss(const Penalty& p, long double x, Index i) {
  const long double ax = std::fabs(x);
  const long double tau = p.tau(), kap = p.kappa(), eps = p.epsilon();
  long double v = 0.0L;
  switch (p.kind()) {
    case PenaltyKind::kZero: v = 0.0L; break;
    case PenaltyKind::kQuadratic: v = x * x / 2.0L; break;
    case PenaltyKind::kL1: v = ax; break;
    case PenaltyKind::kQuantile: v = std::max((1.0L - tau) * x, -tau * x); break;
    case PenaltyKind::kHuber:
      v = ax <= kap ? x * x / 2.0L : kap * ax - kap * kap / 2.0L;
      break;
    case PenaltyKind::kQuantileHuber: {
      // inf_y quantile(y) + (x - y)^2 / (2 kappa), evaluated piecewise
      if (x > kap * (1.0L - tau)) {
        v = (1.0L - tau) * x - kap * (1.0L - tau) * (1.0L - tau) / 2.0L;
      } else if (x < -kap * tau) {
        v = -tau * x - kap * tau * tau / 2.0L;
      } else {
        v = x * x / (2.0L * kap);
      }
      break;
    }
    case PenaltyKind::kVapnik: v = std::max(ax - eps, 0.0L); break;
    case PenaltyKind::kHubnik: {
      const long double r = std::max(ax - eps, 0.0L);
      v = r <= kap ? r * r / 2.0L : kap * r - kap * kap / 2.0L;
      break;
    }
    case PenaltyKind::kElasticNet: v = x * x + ax; break;
    case PenaltyKind::kBox:
      return (x < p.lower()[i] || x > p.upper()[i])
                 ? std::numeric_limits<long double>::infinity()
                 : 0.0L;
  }
  return static_cast<long double>(p.scale()) * v;
}

}  // namespace

Mat pinv_symmetric(const Mat& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
  const Vec& lam = eig.eigenvalues();
  const double lmax = lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0;
  Vec inv = Vec::Zero(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    if (lmax > 0.0 && std::abs(lam[i]) > rel_tol * lmax) inv[i] = 1.0 / lam[i];
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

GaussianEstimate kalman_rts(const Problem& p, Index max_steps) {
  const Index N = p.num_steps();
  const Index n = p.state_dim();
  if (N < 1) throw OracleError("kalman_rts: empty problem");
  if (N > max_steps) throw OracleError("kalman_rts: problem exceeds the step guard");

  std::vector<Vec> xp(N), xf(N);
  std::vector<Mat> Pp(N), Pf(N);
  const Mat I = Mat::Identity(n, n);
  for (Index k = 0; k < N; ++k) {
    const TimeStep& s = p.steps[k];
    if (s.state.kind() != PenaltyKind::kZero) {
      throw OracleError("kalman_rts: state constraints are not supported");
    }
    const Mat Q = weighted_outer(s.C, quadratic_weights(s.process, s.process_dim(), "process", k));
    if (k == 0) {
      xp[k] = p.x0;
      Pp[k] = Q;
    } else {
      xp[k] = s.G * xf[k - 1];
      Pp[k] = s.G * Pf[k - 1] * s.G.transpose() + Q;
    }
    if (s.meas_dim() == 0) {
      xf[k] = xp[k];
      Pf[k] = Pp[k];
      continue;
    }
    const Mat R = weighted_outer(
        s.S, quadratic_weights(s.measurement, s.residual_dim(), "measurement", k));
    Mat innov = s.H * Pp[k] * s.H.transpose() + R;
    innov = 0.5 * (innov + innov.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(innov);
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(lmax, 1e-300))) {
      throw OracleError("kalman_rts: innovation covariance is singular at step " +
                        std::to_string(k));
    }
    const Mat K = innov.ldlt().solve(s.H * Pp[k]).transpose();
    xf[k] = xp[k] + K * (s.y - s.H * xp[k]);
    const Mat IKH = I - K * s.H;
    Pf[k] = IKH * Pp[k] * IKH.transpose() + K * R * K.transpose();
  }

  GaussianEstimate out;
  out.means.resize(N, n);
  out.covariances.resize(N);
  Vec xs = xf[N - 1];
  Mat Ps = Pf[N - 1];
  out.means.row(N - 1) = xs.transpose();
  out.covariances[N - 1] = Ps;
  for (Index k = N - 2; k >= 0; --k) {
    const Mat& G = p.steps[k + 1].G;
    const Mat J = Pf[k] * G.transpose() * pinv_symmetric(Pp[k + 1]);
    xs = xf[k] + J * (xs - xp[k + 1]);
    Ps = Pf[k] + J * (Ps - Pp[k + 1]) * J.transpose();
    out.means.row(k) = xs.transpose();
    out.covariances[k] = 0.5 * (Ps + Ps.transpose());
  }
  return out;
}

StackedVector dense_equality_ls(const Problem& p, Index max_steps) {
  if (p.num_steps() > max_steps) throw OracleError("dense_equality_ls: problem exceeds the step guard");
  const StackedLayout layout(p);
  const Assembly a = assemble(p);
  const Mat A = a.A.dense();
  const Index nz = A.cols(), nr = A.rows();

  Vec weight = Vec::Zero(nz);
  const SeparablePenalty penalty = stacked_penalty(p, layout);
  for (const auto& t : penalty.terms()) {
    if (t.penalty.kind() == PenaltyKind::kZero) continue;
    if (t.penalty.kind() != PenaltyKind::kQuadratic) {
      throw OracleError("dense_equality_ls: only quadratic and zero penalties are supported");
    }
    weight.segment(t.offset, t.length).setConstant(t.penalty.scale());
  }

  Mat kkt = Mat::Zero(nz + nr, nz + nr);
  kkt.topLeftCorner(nz, nz) = weight.asDiagonal();
  kkt.topRightCorner(nz, nr) = A.transpose();
  kkt.bottomLeftCorner(nr, nz) = A;
  Vec rhs = Vec::Zero(nz + nr);
  rhs.tail(nr) = a.w_hat;

  Eigen::FullPivLU<Mat> lu(kkt);
  if (lu.rank() < kkt.rows()) throw OracleError("dense_equality_ls: KKT system is singular");
  const Vec sol = lu.solve(rhs);
  return StackedVector(layout, sol.head(nz));
}

double prox_oracle(const Penalty& p, double alpha, double z, Index i) {
  if (!(alpha > 0.0)) throw OracleError("prox_oracle: alpha must be positive");
  using ld = long double;
  const ld zz = z, a = alpha;
  // Every scalar loss is minimized at 0, so the minimizer lies between 0 and z.
  ld lo = std::min<ld>(0.0L, zz) - 1.0L;
  ld hi = std::max<ld>(0.0L, zz) + 1.0L;
  if (p.kind() == PenaltyKind::kBox) {
    lo = std::clamp<ld>(zz - 1.0L, p.lower()[i], p.upper()[i]);
    hi = std::clamp<ld>(zz + 1.0L, p.lower()[i], p.upper()[i]);
  }
  auto f = [&](ld x) { return (x - zz) * (x - zz) / (2.0L * a) + oracle_loss(p, x, i); };

  const ld phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  ld x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  ld f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 400 && hi - lo > 1e-13L * (1.0L + std::fabs(lo)); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return static_cast<double>((lo + hi) / 2.0L);
}

PinvHuberResult pinv_huber_smoother(const Problem& p, double kappa, int max_iter,
                                    double grad_tol) {
  const Index N = p.num_steps();
  const Index n = p.state_dim();
  if (N * n > 4000) throw OracleError("pinv_huber_smoother: problem too large for the dense baseline");
  if (!(kappa > 0.0)) throw OracleError("pinv_huber_smoother: kappa must be positive");

  // Stack all whitened residuals as J x - b.
  Index rows = 0;
  std::vector<Mat> Cp(N), Sp(N);
  for (Index k = 0; k < N; ++k) {
    const TimeStep& s = p.steps[k];
    Cp[k] = s.C.completeOrthogonalDecomposition().pseudoInverse();
    Sp[k] = s.S.completeOrthogonalDecomposition().pseudoInverse();
    rows += Cp[k].rows() + Sp[k].rows();
  }
  Mat J = Mat::Zero(rows, N * n);
  Vec b = Vec::Zero(rows);
  Index r = 0;
  for (Index k = 0; k < N; ++k) {
    const TimeStep& s = p.steps[k];
    const Index rc = Cp[k].rows();
    J.block(r, k * n, rc, n) = Cp[k];
    if (k == 0) {
      b.segment(r, rc) = Cp[k] * p.x0;
    } else {
      J.block(r, (k - 1) * n, rc, n) = -Cp[k] * s.G;
    }
    r += rc;
    const Index rs = Sp[k].rows();
    if (rs > 0) {
      J.block(r, k * n, rs, n) = Sp[k] * s.H;
      b.segment(r, rs) = Sp[k] * s.y;
    }
    r += rs;
  }

  auto huber = [kappa](double v) {
    const double a = std::abs(v);
    return a <= kappa ? 0.5 * v * v : kappa * a - 0.5 * kappa * kappa;
  };
  auto objective = [&](const Vec& x) {
    const Vec res = J * x - b;
    double s = 0.0;
    for (Index i = 0; i < res.size(); ++i) s += huber(res[i]);
    return s;
  };

  Vec x = Vec::Zero(N * n);
  for (Index k = 0; k < N; ++k) x.segment(k * n, n) = p.x0;
  const double ridge = 1e-10 * std::max(1.0, J.colwise().squaredNorm().maxCoeff());

  PinvHuberResult out;
  double f = objective(x);
  for (int it = 1; it <= max_iter; ++it) {
    const Vec res = J * x - b;
    Vec psi(res.size()), w(res.size());
    for (Index i = 0; i < res.size(); ++i) {
      const double a = std::abs(res[i]);
      psi[i] = a <= kappa ? res[i] : kappa * (res[i] > 0 ? 1.0 : -1.0);
      w[i] = a <= kappa ? 1.0 : kappa / a;
    }
    const Vec g = J.transpose() * psi;
    out.grad_norm = g.lpNorm<Eigen::Infinity>();
    out.iterations = it - 1;
    if (out.grad_norm <= grad_tol) {
      out.converged = true;
      break;
    }
    // Generalized Newton step (unit weight on the quadratic pieces only); the
    // IRLS majorizer step is the fallback when it fails to descend.
    auto direction = [&](const Vec& weights) {
      Mat Hs = J.transpose() * weights.asDiagonal() * J;
      Hs.diagonal().array() += ridge;
      return Vec(-Hs.ldlt().solve(g));
    };
    auto search = [&](const Vec& d, double& t) {
      const double slope = g.dot(d);
      t = 1.0;
      if (!(slope < 0.0)) return std::numeric_limits<double>::infinity();
      double fn = objective(x + d);
      while (fn > f + 1e-4 * t * slope && t > 1e-20) {
        t *= 0.5;
        fn = objective(x + t * d);
      }
      return fn;
    };
    Vec newton_w(res.size());
    for (Index i = 0; i < res.size(); ++i) newton_w[i] = std::abs(res[i]) <= kappa ? 1.0 : 0.0;
    Vec d = direction(newton_w);
    double t = 1.0;
    double f_new = search(d, t);
    if (!(f_new < f)) {
      d = direction(w);
      f_new = search(d, t);
    }
    if (!(f_new <= f)) break;  // no descent possible at working precision
    x += t * d;
    f = f_new;
    out.iterations = it;
  }
  out.trajectory.resize(N, n);
  for (Index k = 0; k < N; ++k) out.trajectory.row(k) = x.segment(k * n, n).transpose();
  return out;
}

}  // namespace singsmooth::reference
