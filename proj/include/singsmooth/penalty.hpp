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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "singsmooth/errors.hpp"

namespace singsmooth {

enum class PenaltyKind {
  kZero,
  kQuadratic,
  kL1,
  kQuantile,
  kHuber,
  kQuantileHuber,
  kVapnik,
  kHubnik,
  kElasticNet,
  kBox,
};

std::string_view to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(std::string_view name);

/// A convex piecewise linear-quadratic loss, or the indicator of a box.
///
/// Scalar kinds act elementwise and are scaled by scale(); every scalar kind
/// is finite, nonnegative and vanishes at the origin. Definitions, with x a
/// single coordinate:
///
///   quadratic        x^2 / 2
///   l1               |x|
///   quantile         (1-tau) x for x >= 0, -tau x for x < 0
///   huber            x^2 / 2 on |x| <= kappa, kappa |x| - kappa^2 / 2 beyond
///   quantile_huber   Moreau envelope of quantile with parameter kappa:
///                    x^2 / (2 kappa) on [-kappa tau, kappa (1-tau)],
///                    quantile(x) - kappa (1-tau)^2 / 2 on the right,
///                    quantile(x) - kappa tau^2 / 2 on the left
///   vapnik           max(|x| - epsilon, 0)
///   hubnik           huber applied to the vapnik residual |x| - epsilon
///   elastic_net      x^2 + |x|
///
/// The box kind is the indicator of [lower, upper] (componentwise, bounds may
/// be infinite) and ignores scale.
class Penalty {
 public:
  Penalty() = default;

  static Penalty zero();
  static Penalty quadratic(double scale = 1.0);
  static Penalty l1(double scale = 1.0);
  static Penalty quantile(double tau, double scale = 1.0);
  static Penalty huber(double kappa, double scale = 1.0);
  static Penalty quantile_huber(double tau, double kappa, double scale = 1.0);
  static Penalty vapnik(double epsilon, double scale = 1.0);
  static Penalty hubnik(double epsilon, double kappa, double scale = 1.0);
  static Penalty elastic_net(double scale = 1.0);
  static Penalty box(Vec lower, Vec upper);

  PenaltyKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double tau() const { return tau_; }
  double kappa() const { return kappa_; }
  double epsilon() const { return epsilon_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  bool is_indicator() const { return kind_ == PenaltyKind::kBox; }
  bool is_symmetric() const;

  // The same loss composed with x -> -x.
  Penalty reflected() const;

  // scale * sum_i rho(x_i), or 0 / +inf for the box.
  double eval(const Vec& x) const;

  // argmin_v 1/(2 alpha) |z - v|^2 + scale * rho(v).
  Vec prox(double alpha, const Vec& z) const;

  // Prox of sigma * rho^*, through the Moreau decomposition
  // prox_{sigma rho*}(zeta) = zeta - sigma prox_{rho / sigma}(zeta / sigma).
  Vec prox_conjugate(double sigma, const Vec& zeta) const;

  // Allocation-free variants writing into out (same length as the input).
  // `first` is the index of the first coordinate within the box bounds.
  void prox_into(double alpha, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out,
                 Index first = 0) const;
  void prox_conjugate_into(double sigma, Eigen::Ref<const Vec> zeta,
                           Eigen::Ref<Vec> out, Index first = 0) const;
  double eval_segment(Eigen::Ref<const Vec> x, Index first = 0) const;

  // Closed interval [lo, hi] of the (scaled) subdifferential at coordinate i,
  // with kinks detected at relative tolerance kink_tol.
  std::pair<double, double> subdifferential(double x, Index i = 0,
                                            double kink_tol = 1e-9) const;

  // Box penalties must match the block length they are applied to.
  void check_length(Index len) const;

 private:
  double prox_scalar(double alpha, double z, Index i) const;
  double eval_scalar(double x, Index i) const;

  PenaltyKind kind_ = PenaltyKind::kZero;
  double scale_ = 1.0;
  double tau_ = 0.5;
  double kappa_ = 1.0;
  double epsilon_ = 0.0;
  Vec lower_;
  Vec upper_;
};

/// A penalty on a vector that is a sum of penalties on disjoint blocks.
/// Coordinates not covered by any term carry zero penalty.
class SeparablePenalty {
 public:
  struct Term {
    Index offset = 0;
    Index length = 0;
    Penalty penalty;
  };

  SeparablePenalty() = default;
  explicit SeparablePenalty(std::vector<Term> terms);

  static SeparablePenalty uniform(const Penalty& p, Index length);

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Appends a term; blocks must stay disjoint and sorted.
  void add(Index offset, Index length, Penalty p);

  // One past the last covered coordinate.
  Index extent() const;

  // The penalty that covers coordinate i, or nullptr if uncovered.
  const Penalty* penalty_at(Index i) const;

  SeparablePenalty shifted(Index by) const;
  SeparablePenalty reflected() const;

  double eval(const Vec& x) const;
  Vec prox(double alpha, const Vec& z) const;
  Vec prox_conjugate(double sigma, const Vec& zeta) const;
  void prox_conjugate_into(double sigma, const Vec& zeta, Vec& out) const;

 private:
  void check_layout(Index len) const;

  std::vector<Term> terms_;
};

// Equivalent to SeparablePenalty::prox; kept as a free function for callers
// that hold the penalty by value.
Vec apply_separable_prox(const SeparablePenalty& sp, double alpha,
                         const Vec& z);

}  // namespace singsmooth
