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

#include "singsmooth/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace singsmooth {
namespace {

std::string at_step(Index k) { return " at step " + std::to_string(k); }

Penalty extend_state_penalty(const Penalty& p, Index extra) {
  if (p.kind() != PenaltyKind::kBox) return p;
  const Index n = p.lower().size();
  Vec lo(n + extra), hi(n + extra);
  lo << p.lower(), Vec::Constant(extra, -std::numeric_limits<double>::infinity());
  hi << p.upper(), Vec::Constant(extra, std::numeric_limits<double>::infinity());
  return Penalty::box(std::move(lo), std::move(hi));
}

Mat blkdiag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

StackedLayout::StackedLayout(const Problem& p) : n_(p.state_dim()) {
  const auto N = p.steps.size();
  step_offset_.reserve(N);
  u_size_.reserve(N);
  t_size_.reserve(N);
  Index off = 0;
  for (const auto& s : p.steps) {
    step_offset_.push_back(off);
    u_size_.push_back(s.process_dim());
    t_size_.push_back(s.residual_dim());
    off += s.process_dim() + s.residual_dim() + n_;
  }
  size_ = off;
}

StackedVector::StackedVector(StackedLayout l, Vec d)
    : layout(std::move(l)), data(std::move(d)) {
  if (data.size() != layout.size()) {
    throw DimensionError("stacked vector length does not match its layout");
  }
}

Mat StackedVector::trajectory() const {
  Mat out(layout.num_steps(), layout.state_dim());
  for (Index k = 0; k < layout.num_steps(); ++k) out.row(k) = x(k).transpose();
  return out;
}

void validate(const Problem& p, const ValidateOptions& opts) {
  if (p.steps.empty()) throw ModelError("problem has no time steps");
  const Index n = p.state_dim();
  if (n == 0) throw DimensionError("state dimension must be positive");
  if (!p.x0.allFinite()) throw ModelError("x0 has non-finite entries");

  for (Index k = 0; k < p.num_steps(); ++k) {
    const TimeStep& s = p.steps[k];
    const bool g_ok = (k == 0 && s.G.size() == 0) || (s.G.rows() == n && s.G.cols() == n);
    if (!g_ok) throw DimensionError("G must be n x n" + at_step(k));
    if (s.C.rows() != n) throw DimensionError("C must have n rows" + at_step(k));
    if (s.H.cols() != n) throw DimensionError("H must have n columns" + at_step(k));
    const Index m = s.H.rows();
    if (s.S.rows() != m) throw DimensionError("S must have as many rows as H" + at_step(k));
    if (s.y.size() != m) throw DimensionError("y must have as many entries as H has rows" + at_step(k));
    if (s.process.extent() > s.process_dim()) {
      throw DimensionError("process penalty exceeds the innovation block" + at_step(k));
    }
    if (s.measurement.extent() > s.residual_dim()) {
      throw DimensionError("measurement penalty exceeds the residual block" + at_step(k));
    }
    s.state.check_length(n);
    if (!s.G.allFinite() || !s.C.allFinite() || !s.H.allFinite() ||
        !s.S.allFinite() || !s.y.allFinite()) {
      throw ModelError("non-finite model data" + at_step(k));
    }
    if (m == 0) continue;

    Mat sh(m, s.S.cols() + n);
    sh << s.S, s.H;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(sh);
    cod.setThreshold(opts.rank_tol);
    const Vec resid = s.y - sh * cod.solve(s.y);
    if (resid.norm() > opts.feas_tol * (1.0 + s.y.norm())) {
      throw ModelError("observation is not in the range of [S H]" + at_step(k));
    }
    if (cod.rank() < m) {
      throw ModelError("measurement rows [S H] are linearly dependent" + at_step(k));
    }
  }
}

Problem augment_bias(const Problem& p, Index bias_dim,
                     const std::vector<Mat>& bias_maps,
                     std::optional<Penalty> bias_prior) {
  if (bias_dim < 1) throw ParameterError("bias_dim must be at least 1");
  if (static_cast<Index>(bias_maps.size()) != p.num_steps()) {
    throw DimensionError("one bias map per time step is required");
  }
  const Index n = p.state_dim();
  const Mat eye_b = Mat::Identity(bias_dim, bias_dim);

  Problem out;
  out.x0 = Vec::Zero(n + bias_dim);
  out.x0.head(n) = p.x0;
  out.steps.reserve(p.steps.size());
  for (Index k = 0; k < p.num_steps(); ++k) {
    const TimeStep& s = p.steps[k];
    const Mat& map = bias_maps[k];
    if (map.rows() != s.meas_dim() || map.cols() != bias_dim) {
      throw DimensionError("bias map must be m_k x bias_dim" + at_step(k));
    }
    TimeStep a;
    a.G = s.G.size() == 0 ? s.G : blkdiag(s.G, eye_b);
    a.H.resize(s.meas_dim(), n + bias_dim);
    a.H << s.H, map;
    a.S = s.S;
    a.y = s.y;
    a.measurement = s.measurement;
    a.state = extend_state_penalty(s.state, bias_dim);
    a.process = s.process;
    if (k == 0) {
      a.C = blkdiag(s.C, eye_b);
      Penalty prior = Penalty::zero();
      if (bias_prior) {
        prior = *bias_prior;
      } else if (s.process_dim() > 0) {
        if (const Penalty* last = s.process.penalty_at(s.process_dim() - 1)) prior = *last;
      }
      a.process.add(s.process_dim(), bias_dim, prior);
    } else {
      a.C = Mat::Zero(n + bias_dim, s.process_dim());
      a.C.topRows(n) = s.C;
    }
    out.steps.push_back(std::move(a));
  }
  return out;
}

Problem augment_bias(const Problem& p, Index bias_dim, const Mat& bias_map,
                     std::optional<Penalty> bias_prior) {
  return augment_bias(p, bias_dim, std::vector<Mat>(p.steps.size(), bias_map),
                      std::move(bias_prior));
}

Problem augment_correlated_noise(const Problem& p, const Mat& M,
                                 const Mat& noise_factor,
                                 const Penalty& noise_penalty) {
  const Index n = p.state_dim();
  if (M.rows() != M.cols()) throw DimensionError("noise transition M must be square");
  if (M.rows() != n) {
    throw DimensionError("noise transition must match the state dimension");
  }
  if (noise_factor.rows() != n) throw DimensionError("noise factor must have n rows");
  const Index q = noise_factor.cols();

  Problem out;
  out.x0 = Vec::Zero(2 * n);
  out.x0.head(n) = p.x0;
  for (Index k = 0; k < p.num_steps(); ++k) {
    const TimeStep& s = p.steps[k];
    TimeStep a;
    if (s.G.size() != 0) {
      a.G = Mat::Zero(2 * n, 2 * n);
      a.G.topLeftCorner(n, n) = s.G;
      a.G.topRightCorner(n, n).setIdentity();
      a.G.bottomRightCorner(n, n) = M;
    }
    a.C = Mat::Zero(2 * n, q);
    a.C.bottomRows(n) = noise_factor;
    a.H = Mat::Zero(s.meas_dim(), 2 * n);
    a.H.leftCols(n) = s.H;
    a.S = s.S;
    a.y = s.y;
    a.process = SeparablePenalty::uniform(noise_penalty, q);
    a.measurement = s.measurement;
    a.state = extend_state_penalty(s.state, n);
    out.steps.push_back(std::move(a));
  }
  return out;
}

Problem add_exact_measurement(const Problem& p, Index k, Index state_index,
                              double value) {
  if (k < 0 || k >= p.num_steps()) throw DimensionError("time index out of range");
  const Index n = p.state_dim();
  if (state_index < 0 || state_index >= n) {
    throw DimensionError("state index out of range");
  }
  Problem out = p;
  TimeStep& s = out.steps[k];
  const Index m = s.meas_dim();
  s.H.conservativeResize(m + 1, n);
  s.H.row(m).setZero();
  s.H(m, state_index) = 1.0;
  s.S.conservativeResize(m + 1, s.S.cols());
  s.S.row(m).setZero();
  s.y.conservativeResize(m + 1);
  s.y[m] = value;
  return out;
}

SeparablePenalty stacked_penalty(const Problem& p, const StackedLayout& layout) {
  SeparablePenalty sp;
  for (Index k = 0; k < p.num_steps(); ++k) {
    const TimeStep& s = p.steps[k];
    for (const auto& t : s.process.terms()) {
      sp.add(layout.u_offset(k) + t.offset, t.length, t.penalty.reflected());
    }
    for (const auto& t : s.measurement.terms()) {
      sp.add(layout.t_offset(k) + t.offset, t.length, t.penalty);
    }
    if (s.state.kind() != PenaltyKind::kZero) {
      sp.add(layout.x_offset(k), layout.state_dim(), s.state);
    }
  }
  return sp;
}

double objective(const Problem& p, const StackedVector& z) {
  const StackedLayout layout(p);
  if (!(layout == z.layout)) throw DimensionError("stacked vector layout mismatch");
  return stacked_penalty(p, layout).eval(z.data);
}

Mat factor_covariance(const Mat& cov, double rel_tol) {
  if (cov.rows() != cov.cols()) throw DimensionError("covariance must be square");
  const Mat sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  const Vec& lam = eig.eigenvalues();
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
  if (lam.size() && lam.minCoeff() < -1e-8 * std::max(1.0, lmax)) {
    throw ModelError("covariance is not positive semidefinite");
  }
  std::vector<Index> keep;
  for (Index i = 0; i < lam.size(); ++i) {
    if (lmax > 0.0 && lam[i] > rel_tol * lmax) keep.push_back(i);
  }
  Mat f(cov.rows(), static_cast<Index>(keep.size()));
  for (Index j = 0; j < f.cols(); ++j) {
    f.col(j) = eig.eigenvectors().col(keep[j]) * std::sqrt(lam[keep[j]]);
  }
  return f;
}

}  // namespace singsmooth
