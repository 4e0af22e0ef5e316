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

// Random instance generators shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "singsmooth/model.hpp"
#include "singsmooth/penalty.hpp"

namespace singsmooth::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline Mat random_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

inline Vec random_vector(Rng& rng, Index n) { return random_matrix(rng, n, 1); }

// Well conditioned square factor: identity plus a small perturbation.
inline Mat random_factor(Rng& rng, Index n, double scale = 1.0) {
  return scale * (Mat::Identity(n, n) + 0.3 * random_matrix(rng, n, n));
}

// Transition with spectral radius below one so long horizons stay bounded.
inline Mat random_transition(Rng& rng, Index n) {
  Mat G = random_matrix(rng, n, n);
  const double r = G.jacobiSvd().singularValues()(0);
  return 0.9 * G / r;
}

inline Penalty random_penalty(Rng& rng, PenaltyKind kind) {
  const double scale = log_uniform(rng, 0.2, 5.0);
  switch (kind) {
    case PenaltyKind::kZero: return Penalty::zero();
    case PenaltyKind::kQuadratic: return Penalty::quadratic(scale);
    case PenaltyKind::kL1: return Penalty::l1(scale);
    case PenaltyKind::kQuantile: return Penalty::quantile(uniform(rng, 0.05, 0.95), scale);
    case PenaltyKind::kHuber: return Penalty::huber(log_uniform(rng, 0.1, 5.0), scale);
    case PenaltyKind::kQuantileHuber:
      return Penalty::quantile_huber(uniform(rng, 0.05, 0.95), log_uniform(rng, 0.1, 5.0), scale);
    case PenaltyKind::kVapnik: return Penalty::vapnik(uniform(rng, 0.0, 2.0), scale);
    case PenaltyKind::kHubnik:
      return Penalty::hubnik(uniform(rng, 0.0, 2.0), log_uniform(rng, 0.1, 5.0), scale);
    case PenaltyKind::kElasticNet: return Penalty::elastic_net(scale);
    case PenaltyKind::kBox: {
      const double a = uniform(rng, -3.0, 1.0);
      const double b = a + uniform(rng, 0.0, 4.0);
      return Penalty::box(Vec::Constant(1, a), Vec::Constant(1, b));
    }
  }
  return Penalty::zero();
}

inline const std::vector<PenaltyKind>& all_kinds() {
  static const std::vector<PenaltyKind> kinds = {
      PenaltyKind::kZero,   PenaltyKind::kQuadratic, PenaltyKind::kL1,
      PenaltyKind::kQuantile, PenaltyKind::kHuber,   PenaltyKind::kQuantileHuber,
      PenaltyKind::kVapnik, PenaltyKind::kHubnik,    PenaltyKind::kElasticNet,
      PenaltyKind::kBox};
  return kinds;
}

// Nonsingular Gaussian model: square invertible C and S everywhere.
inline Problem random_gaussian_problem(Rng& rng, Index N, Index n, Index m) {
  Problem p;
  p.x0 = random_vector(rng, n);
  for (Index k = 0; k < N; ++k) {
    TimeStep s;
    s.G = random_transition(rng, n);
    s.C = random_factor(rng, n, 0.5);
    s.H = random_matrix(rng, m, n);
    s.S = random_factor(rng, m, 0.7);
    s.y = random_vector(rng, m);
    s.process = SeparablePenalty::uniform(Penalty::quadratic(), n);
    s.measurement = SeparablePenalty::uniform(Penalty::quadratic(), m);
    p.steps.push_back(std::move(s));
  }
  return p;
}

// Rank-deficient model: C is n x rank_q, and `exact` of the m measurement
// rows carry no noise (S is m x (m - exact) with zero rows on top). Data are
// simulated from the model so every constraint is consistent.
inline Problem random_singular_problem(Rng& rng, Index N, Index n, Index m,
                                       Index rank_q, Index exact) {
  Problem p;
  p.x0 = random_vector(rng, n);
  Vec x = p.x0;
  for (Index k = 0; k < N; ++k) {
    TimeStep s;
    s.G = random_transition(rng, n);
    s.C = random_matrix(rng, n, rank_q) * 0.5;
    s.H = random_matrix(rng, m, n);
    s.S = Mat::Zero(m, m - exact);
    s.S.bottomRows(m - exact) = random_factor(rng, m - exact, 0.7);
    const Vec u = random_vector(rng, rank_q);
    x = (k == 0 ? x : Vec(s.G * x)) + s.C * u;
    s.y = s.H * x + s.S * random_vector(rng, m - exact);
    s.process = SeparablePenalty::uniform(Penalty::quadratic(), rank_q);
    s.measurement = SeparablePenalty::uniform(Penalty::quadratic(), m - exact);
    p.steps.push_back(std::move(s));
  }
  return p;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace singsmooth::testing
