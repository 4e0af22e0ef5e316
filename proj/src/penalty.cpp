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

#include "singsmooth/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace singsmooth {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double z, double a) {
  if (z > a) return z - a;
  if (z < -a) return z + a;
  return 0.0;
}

double quantile_prox(double z, double a, double tau) {
  if (z > a * (1.0 - tau)) return z - a * (1.0 - tau);
  if (z < -a * tau) return z + a * tau;
  return 0.0;
}

double vapnik_prox(double z, double a, double eps) {
  if (z > eps + a) return z - a;
  if (z > eps) return eps;
  if (z >= -eps) return z;
  if (z > -eps - a) return -eps;
  return z + a;
}

bool near(double x, double kink, double tol) {
  return std::abs(x - kink) <= tol * std::max(1.0, std::abs(kink));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

void check_scale(double scale) {
  require(std::isfinite(scale) && scale > 0.0,
          "penalty scale must be positive and finite");
}

void check_tau(double tau) {
  require(tau > 0.0 && tau < 1.0, "quantile tau must lie in (0, 1)");
}

void check_kappa(double kappa) {
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
}

void check_epsilon(double eps) {
  require(std::isfinite(eps) && eps >= 0.0, "epsilon must be nonnegative");
}

}  // namespace

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kZero: return "zero";
    case PenaltyKind::kQuadratic: return "quadratic";
    case PenaltyKind::kL1: return "l1";
    case PenaltyKind::kQuantile: return "quantile";
    case PenaltyKind::kHuber: return "huber";
    case PenaltyKind::kQuantileHuber: return "quantile_huber";
    case PenaltyKind::kVapnik: return "vapnik";
    case PenaltyKind::kHubnik: return "hubnik";
    case PenaltyKind::kElasticNet: return "elastic_net";
    case PenaltyKind::kBox: return "box";
  }
  return "unknown";
}

PenaltyKind penalty_kind_from_string(std::string_view name) {
  for (auto k : {PenaltyKind::kZero, PenaltyKind::kQuadratic, PenaltyKind::kL1,
                 PenaltyKind::kQuantile, PenaltyKind::kHuber,
                 PenaltyKind::kQuantileHuber, PenaltyKind::kVapnik,
                 PenaltyKind::kHubnik, PenaltyKind::kElasticNet,
                 PenaltyKind::kBox}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown penalty kind '" + std::string(name) + "'");
}

Penalty Penalty::zero() { return Penalty{}; }

Penalty Penalty::quadratic(double scale) {
  check_scale(scale);
  Penalty p;
  p.kind_ = PenaltyKind::kQuadratic;
  p.scale_ = scale;
  return p;
}

Penalty Penalty::l1(double scale) {
  check_scale(scale);
  Penalty p;
  p.kind_ = PenaltyKind::kL1;
  p.scale_ = scale;
  return p;
}

Penalty Penalty::quantile(double tau, double scale) {
  check_scale(scale);
  check_tau(tau);
  Penalty p;
  p.kind_ = PenaltyKind::kQuantile;
  p.scale_ = scale;
  p.tau_ = tau;
  return p;
}

Penalty Penalty::huber(double kappa, double scale) {
  check_scale(scale);
  check_kappa(kappa);
  Penalty p;
  p.kind_ = PenaltyKind::kHuber;
  p.scale_ = scale;
  p.kappa_ = kappa;
  return p;
}

Penalty Penalty::quantile_huber(double tau, double kappa, double scale) {
  check_scale(scale);
  check_tau(tau);
  check_kappa(kappa);
  Penalty p;
  p.kind_ = PenaltyKind::kQuantileHuber;
  p.scale_ = scale;
  p.tau_ = tau;
  p.kappa_ = kappa;
  return p;
}

Penalty Penalty::vapnik(double epsilon, double scale) {
  check_scale(scale);
  check_epsilon(epsilon);
  Penalty p;
  p.kind_ = PenaltyKind::kVapnik;
  p.scale_ = scale;
  p.epsilon_ = epsilon;
  return p;
}

Penalty Penalty::hubnik(double epsilon, double kappa, double scale) {
  check_scale(scale);
  check_epsilon(epsilon);
  check_kappa(kappa);
  Penalty p;
  p.kind_ = PenaltyKind::kHubnik;
  p.scale_ = scale;
  p.epsilon_ = epsilon;
  p.kappa_ = kappa;
  return p;
}

Penalty Penalty::elastic_net(double scale) {
  check_scale(scale);
  Penalty p;
  p.kind_ = PenaltyKind::kElasticNet;
  p.scale_ = scale;
  return p;
}

Penalty Penalty::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) {
    throw DimensionError("box bounds must have equal length");
  }
  for (Index i = 0; i < lower.size(); ++i) {
    require(!std::isnan(lower[i]) && !std::isnan(upper[i]),
            "box bounds must not be NaN");
    require(lower[i] <= upper[i], "box requires lower <= upper");
  }
  Penalty p;
  p.kind_ = PenaltyKind::kBox;
  p.lower_ = std::move(lower);
  p.upper_ = std::move(upper);
  return p;
}

bool Penalty::is_symmetric() const {
  switch (kind_) {
    case PenaltyKind::kQuantile:
    case PenaltyKind::kQuantileHuber:
      return tau_ == 0.5;
    case PenaltyKind::kBox:
      return lower_ == -upper_;
    default:
      return true;
  }
}

Penalty Penalty::reflected() const {
  Penalty p = *this;
  switch (kind_) {
    case PenaltyKind::kQuantile:
    case PenaltyKind::kQuantileHuber:
      p.tau_ = 1.0 - tau_;
      break;
    case PenaltyKind::kBox:
      p.lower_ = -upper_;
      p.upper_ = -lower_;
      break;
    default:
      break;
  }
  return p;
}

void Penalty::check_length(Index len) const {
  if (kind_ == PenaltyKind::kBox && lower_.size() != len) {
    throw DimensionError("box penalty has " + std::to_string(lower_.size()) +
                         " bounds but is applied to a block of length " +
                         std::to_string(len));
  }
}

double Penalty::eval_scalar(double x, Index i) const {
  const double ax = std::abs(x);
  switch (kind_) {
    case PenaltyKind::kZero:
      return 0.0;
    case PenaltyKind::kQuadratic:
      return 0.5 * x * x;
    case PenaltyKind::kL1:
      return ax;
    case PenaltyKind::kQuantile:
      return x >= 0.0 ? (1.0 - tau_) * x : -tau_ * x;
    case PenaltyKind::kHuber:
      return ax <= kappa_ ? 0.5 * x * x : kappa_ * ax - 0.5 * kappa_ * kappa_;
    case PenaltyKind::kQuantileHuber: {
      const double hi = kappa_ * (1.0 - tau_);
      const double lo = -kappa_ * tau_;
      if (x > hi) return (1.0 - tau_) * x - 0.5 * kappa_ * (1.0 - tau_) * (1.0 - tau_);
      if (x < lo) return -tau_ * x - 0.5 * kappa_ * tau_ * tau_;
      return x * x / (2.0 * kappa_);
    }
    case PenaltyKind::kVapnik:
      return std::max(ax - epsilon_, 0.0);
    case PenaltyKind::kHubnik: {
      const double r = ax - epsilon_;
      if (r <= 0.0) return 0.0;
      if (r <= kappa_) return 0.5 * r * r;
      return kappa_ * r - 0.5 * kappa_ * kappa_;
    }
    case PenaltyKind::kElasticNet:
      return x * x + ax;
    case PenaltyKind::kBox:
      return (x < lower_[i] || x > upper_[i]) ? kInf : 0.0;
  }
  return 0.0;
}

double Penalty::prox_scalar(double alpha, double z, Index i) const {
  const double a = alpha * scale_;
  switch (kind_) {
    case PenaltyKind::kZero:
      return z;
    case PenaltyKind::kQuadratic:
      return z / (1.0 + a);
    case PenaltyKind::kL1:
      return soft_threshold(z, a);
    case PenaltyKind::kQuantile:
      return quantile_prox(z, a, tau_);
    case PenaltyKind::kHuber:
      // kappa * envelope_kappa(|.|): shrink toward the l1 prox at step kappa(1+a)
      return z / (1.0 + a) + a / (1.0 + a) * soft_threshold(z, kappa_ * (1.0 + a));
    case PenaltyKind::kQuantileHuber:
      return kappa_ / (a + kappa_) * z +
             a / (a + kappa_) * quantile_prox(z, a + kappa_, tau_);
    case PenaltyKind::kVapnik:
      return vapnik_prox(z, a, epsilon_);
    case PenaltyKind::kHubnik:
      return z / (1.0 + a) +
             a / (1.0 + a) * vapnik_prox(z, kappa_ * (1.0 + a), epsilon_);
    case PenaltyKind::kElasticNet: {
      const double d = 1.0 + 2.0 * a;
      return soft_threshold(z / d, a / d);
    }
    case PenaltyKind::kBox:
      return std::clamp(z, lower_[i], upper_[i]);
  }
  return z;
}

double Penalty::eval_segment(Eigen::Ref<const Vec> x, Index first) const {
  if (kind_ == PenaltyKind::kZero) return 0.0;
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += eval_scalar(x[i], first + i);
  if (kind_ == PenaltyKind::kBox) return s;
  return scale_ * s;
}

double Penalty::eval(const Vec& x) const {
  check_length(x.size());
  return eval_segment(x, 0);
}

void Penalty::prox_into(double alpha, Eigen::Ref<const Vec> z,
                        Eigen::Ref<Vec> out, Index first) const {
  for (Index i = 0; i < z.size(); ++i) out[i] = prox_scalar(alpha, z[i], first + i);
}

void Penalty::prox_conjugate_into(double sigma, Eigen::Ref<const Vec> zeta,
                                  Eigen::Ref<Vec> out, Index first) const {
  const double inv = 1.0 / sigma;
  for (Index i = 0; i < zeta.size(); ++i) {
    out[i] = zeta[i] - sigma * prox_scalar(inv, zeta[i] * inv, first + i);
  }
}

Vec Penalty::prox(double alpha, const Vec& z) const {
  if (!(alpha > 0.0)) throw ParameterError("prox step alpha must be positive");
  check_length(z.size());
  Vec out(z.size());
  prox_into(alpha, z, out);
  return out;
}

Vec Penalty::prox_conjugate(double sigma, const Vec& zeta) const {
  if (!(sigma > 0.0)) throw ParameterError("conjugate step sigma must be positive");
  check_length(zeta.size());
  Vec out(zeta.size());
  prox_conjugate_into(sigma, zeta, out);
  return out;
}

std::pair<double, double> Penalty::subdifferential(double x, Index i,
                                                   double kink_tol) const {
  auto scaled = [this](double lo, double hi) {
    return std::pair<double, double>{scale_ * lo, scale_ * hi};
  };
  const double sgn = x > 0.0 ? 1.0 : -1.0;
  switch (kind_) {
    case PenaltyKind::kZero:
      return {0.0, 0.0};
    case PenaltyKind::kQuadratic:
      return scaled(x, x);
    case PenaltyKind::kL1:
      if (near(x, 0.0, kink_tol)) return scaled(-1.0, 1.0);
      return scaled(sgn, sgn);
    case PenaltyKind::kQuantile:
      if (near(x, 0.0, kink_tol)) return scaled(-tau_, 1.0 - tau_);
      return x > 0.0 ? scaled(1.0 - tau_, 1.0 - tau_) : scaled(-tau_, -tau_);
    case PenaltyKind::kHuber: {
      const double g = std::abs(x) <= kappa_ ? x : kappa_ * sgn;
      return scaled(g, g);
    }
    case PenaltyKind::kQuantileHuber: {
      double g = x / kappa_;
      if (x > kappa_ * (1.0 - tau_)) g = 1.0 - tau_;
      if (x < -kappa_ * tau_) g = -tau_;
      return scaled(g, g);
    }
    case PenaltyKind::kVapnik:
      if (near(x, epsilon_, kink_tol)) return scaled(0.0, 1.0);
      if (near(x, -epsilon_, kink_tol)) return scaled(-1.0, 0.0);
      if (std::abs(x) < epsilon_) return {0.0, 0.0};
      return scaled(sgn, sgn);
    case PenaltyKind::kHubnik: {
      const double r = std::abs(x) - epsilon_;
      if (r <= 0.0) return {0.0, 0.0};
      const double g = sgn * std::min(r, kappa_);
      return scaled(g, g);
    }
    case PenaltyKind::kElasticNet:
      if (near(x, 0.0, kink_tol)) return scaled(-1.0, 1.0);
      return scaled(2.0 * x + sgn, 2.0 * x + sgn);
    case PenaltyKind::kBox: {
      const bool at_lo = std::isfinite(lower_[i]) && x <= lower_[i] + kink_tol * std::max(1.0, std::abs(lower_[i]));
      const bool at_hi = std::isfinite(upper_[i]) && x >= upper_[i] - kink_tol * std::max(1.0, std::abs(upper_[i]));
      return {at_lo ? -kInf : 0.0, at_hi ? kInf : 0.0};
    }
  }
  return {0.0, 0.0};
}

SeparablePenalty::SeparablePenalty(std::vector<Term> terms) {
  for (auto& t : terms) add(t.offset, t.length, std::move(t.penalty));
}

SeparablePenalty SeparablePenalty::uniform(const Penalty& p, Index length) {
  SeparablePenalty sp;
  if (length > 0) sp.add(0, length, p);
  return sp;
}

void SeparablePenalty::add(Index offset, Index length, Penalty p) {
  if (offset < 0 || length < 0) throw DimensionError("negative block layout");
  if (offset < extent()) {
    throw DimensionError("separable penalty blocks must be disjoint and sorted");
  }
  p.check_length(length);
  if (length == 0) return;
  terms_.push_back(Term{offset, length, std::move(p)});
}

Index SeparablePenalty::extent() const {
  return terms_.empty() ? 0 : terms_.back().offset + terms_.back().length;
}

const Penalty* SeparablePenalty::penalty_at(Index i) const {
  for (const auto& t : terms_) {
    if (i >= t.offset && i < t.offset + t.length) return &t.penalty;
  }
  return nullptr;
}

SeparablePenalty SeparablePenalty::shifted(Index by) const {
  SeparablePenalty out = *this;
  for (auto& t : out.terms_) t.offset += by;
  return out;
}

SeparablePenalty SeparablePenalty::reflected() const {
  SeparablePenalty out = *this;
  for (auto& t : out.terms_) t.penalty = t.penalty.reflected();
  return out;
}

void SeparablePenalty::check_layout(Index len) const {
  if (extent() > len) {
    throw DimensionError("separable penalty covers " + std::to_string(extent()) +
                         " coordinates but the vector has " + std::to_string(len));
  }
}

double SeparablePenalty::eval(const Vec& x) const {
  check_layout(x.size());
  double s = 0.0;
  for (const auto& t : terms_) s += t.penalty.eval_segment(x.segment(t.offset, t.length));
  return s;
}

Vec SeparablePenalty::prox(double alpha, const Vec& z) const {
  if (!(alpha > 0.0)) throw ParameterError("prox step alpha must be positive");
  check_layout(z.size());
  Vec out = z;
  for (const auto& t : terms_) {
    t.penalty.prox_into(alpha, z.segment(t.offset, t.length),
                        out.segment(t.offset, t.length));
  }
  return out;
}

Vec SeparablePenalty::prox_conjugate(double sigma, const Vec& zeta) const {
  Vec out;
  prox_conjugate_into(sigma, zeta, out);
  return out;
}

void SeparablePenalty::prox_conjugate_into(double sigma, const Vec& zeta,
                                           Vec& out) const {
  if (!(sigma > 0.0)) throw ParameterError("conjugate step sigma must be positive");
  check_layout(zeta.size());
  // Uncovered coordinates have zero penalty, whose conjugate is the indicator
  // of {0}.
  out.setZero(zeta.size());
  for (const auto& t : terms_) {
    t.penalty.prox_conjugate_into(sigma, zeta.segment(t.offset, t.length),
                                  out.segment(t.offset, t.length));
  }
}

Vec apply_separable_prox(const SeparablePenalty& sp, double alpha, const Vec& z) {
  return sp.prox(alpha, z);
}

}  // namespace singsmooth
