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

#include <optional>
#include <vector>

#include "singsmooth/errors.hpp"
#include "singsmooth/penalty.hpp"

namespace singsmooth {

/// One time slice of the state-space model
///
///   x_k = G_k x_{k-1} + w_k,   w_k = C_k u_k'   (Q_k = C_k C_k^T)
///   y_k = H_k x_k + v_k,       v_k = S_k t_k    (R_k = S_k S_k^T)
///
/// with penalties on the whitened innovation, the whitened residual and the
/// state. C_k and S_k may be rectangular, including zero width, which makes
/// the corresponding rows exact. G is ignored at the first step, where
/// x_1 = x_0 + w_1.
///
/// `process` penalizes the whitened innovation u' with C u' = x_k - G x_{k-1};
/// `measurement` penalizes t with S t = y_k - H_k x_k.
struct TimeStep {
  Mat G;
  Mat C;
  Mat H;
  Mat S;
  Vec y;
  SeparablePenalty process;
  SeparablePenalty measurement;
  Penalty state;

  Index state_dim() const { return C.rows(); }
  Index process_dim() const { return C.cols(); }
  Index meas_dim() const { return H.rows(); }
  Index residual_dim() const { return S.cols(); }
};

struct Problem {
  Vec x0;
  std::vector<TimeStep> steps;

  Index state_dim() const { return x0.size(); }
  Index num_steps() const { return static_cast<Index>(steps.size()); }
};

/// Offsets of the (u_k, t_k, x_k) blocks inside z = (u_1, t_1, x_1, ...).
class StackedLayout {
 public:
  StackedLayout() = default;
  explicit StackedLayout(const Problem& p);

  Index size() const { return size_; }
  Index num_steps() const { return static_cast<Index>(step_offset_.size()); }
  Index state_dim() const { return n_; }

  Index step_offset(Index k) const { return step_offset_[k]; }
  Index u_offset(Index k) const { return step_offset_[k]; }
  Index u_size(Index k) const { return u_size_[k]; }
  Index t_offset(Index k) const { return step_offset_[k] + u_size_[k]; }
  Index t_size(Index k) const { return t_size_[k]; }
  Index x_offset(Index k) const { return t_offset(k) + t_size_[k]; }
  Index step_size(Index k) const { return u_size_[k] + t_size_[k] + n_; }

  bool operator==(const StackedLayout&) const = default;

 private:
  Index n_ = 0;
  Index size_ = 0;
  std::vector<Index> step_offset_;
  std::vector<Index> u_size_;
  std::vector<Index> t_size_;
};

struct StackedVector {
  StackedLayout layout;
  Vec data;

  StackedVector() = default;
  explicit StackedVector(StackedLayout l)
      : layout(std::move(l)), data(Vec::Zero(layout.size())) {}
  StackedVector(StackedLayout l, Vec d);

  auto u(Index k) { return data.segment(layout.u_offset(k), layout.u_size(k)); }
  auto t(Index k) { return data.segment(layout.t_offset(k), layout.t_size(k)); }
  auto x(Index k) { return data.segment(layout.x_offset(k), layout.state_dim()); }
  auto u(Index k) const { return data.segment(layout.u_offset(k), layout.u_size(k)); }
  auto t(Index k) const { return data.segment(layout.t_offset(k), layout.t_size(k)); }
  auto x(Index k) const { return data.segment(layout.x_offset(k), layout.state_dim()); }

  // N x n matrix whose row k is x_k.
  Mat trajectory() const;
};

struct ValidateOptions {
  double feas_tol = 1e-9;
  double rank_tol = 1e-10;
};

// Throws DimensionError / ModelError naming the offending step.
void validate(const Problem& p, const ValidateOptions& opts = {});

// Appends bias_dim constant states. bias_maps[k] (m_k x bias_dim) couples the
// bias into the measurements of step k. The bias is free at the first step
// (identity process factor, penalized by bias_prior, which defaults to the
// penalty of the last process coordinate at step 1) and held constant after.
Problem augment_bias(const Problem& p, Index bias_dim,
                     const std::vector<Mat>& bias_maps,
                     std::optional<Penalty> bias_prior = std::nullopt);

// Same map at every step; requires a constant measurement dimension.
Problem augment_bias(const Problem& p, Index bias_dim, const Mat& bias_map,
                     std::optional<Penalty> bias_prior = std::nullopt);

// State (x_k, w_k) with w_k = M w_{k-1} + noise_factor * beta_k. The original
// process factors are replaced; beta_k is penalized by noise_penalty.
Problem augment_correlated_noise(const Problem& p, const Mat& M,
                                 const Mat& noise_factor,
                                 const Penalty& noise_penalty = Penalty::quadratic());

// Pins x_k[state_index] = value through a zero-variance measurement row.
Problem add_exact_measurement(const Problem& p, Index k, Index state_index,
                              double value);

// Sum of all penalties at z (+inf outside a state box).
double objective(const Problem& p, const StackedVector& z);

// The separable penalty on the stacked vector in the solver's sign
// convention. The constraint rows read C u + x_k - G x_{k-1} = ..., so the
// process blocks carry the reflected user penalty.
SeparablePenalty stacked_penalty(const Problem& p, const StackedLayout& layout);

// Square-root factor F (n x r) with F F^T = cov, dropping eigenvalues below
// rel_tol times the largest.
Mat factor_covariance(const Mat& cov, double rel_tol = 1e-12);

}  // namespace singsmooth
