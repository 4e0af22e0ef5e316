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

#include "singsmooth/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace singsmooth::synth {

void Fig1Config::check() const {
  if (N < 1) throw ParameterError("fig1: N must be positive");
  if (!(dt > 0.0)) throw ParameterError("fig1: dt must be positive");
  if (!(sigma_w > 0.0) || !(sigma_v > 0.0)) throw ParameterError("fig1: noise scales must be positive");
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0)) {
    throw ParameterError("fig1: outlier fraction must lie in [0, 1]");
  }
  if (!(outlier_scale >= 0.0)) throw ParameterError("fig1: outlier scale must be nonnegative");
}

Fig1Data make_fig1(const Fig1Config& cfg, std::uint64_t seed) {
  cfg.check();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Fig1Data d;
  d.pos.resize(cfg.N);
  d.vel.resize(cfg.N);
  d.y.resize(cfg.N);
  double p = 0.0, v = 0.0;
  for (Index k = 0; k < cfg.N; ++k) {
    // Draw order is fixed so seeds reproduce across platforms.
    const double dw = gauss(rng);
    const double dv = gauss(rng);
    const double u = unif(rng);
    const double out = gauss(rng);
    if (k > 0) p += cfg.dt * v;
    v += cfg.sigma_w * dw;
    d.t.push_back(cfg.dt * static_cast<double>(k + 1));
    d.pos[k] = p;
    d.vel[k] = v;
    const bool is_out = u < cfg.outlier_fraction;
    d.outlier.push_back(is_out);
    d.y[k] = p + (is_out ? cfg.outlier_scale * cfg.sigma_v * out : cfg.sigma_v * dv);
  }
  return d;
}

Problem fig1_problem(const Fig1Data& d, const Fig1Config& cfg,
                     const Penalty& process, const Penalty& measurement) {
  Problem p;
  p.x0 = Vec::Zero(2);
  Mat G(2, 2);
  G << 1.0, cfg.dt, 0.0, 1.0;
  Mat C(2, 1);
  C << 0.0, cfg.sigma_w;
  Mat H(1, 2);
  H << 1.0, 0.0;
  Mat S = Mat::Constant(1, 1, cfg.sigma_v);
  for (Index k = 0; k < d.y.size(); ++k) {
    TimeStep s;
    s.G = G;
    s.C = C;
    s.H = H;
    s.S = S;
    s.y = d.y.segment(k, 1);
    s.process = SeparablePenalty::uniform(process, 1);
    s.measurement = SeparablePenalty::uniform(measurement, 1);
    p.steps.push_back(std::move(s));
  }
  return p;
}

void NavScenarioConfig::check() const {
  if (!(duration > 0.0) || !(T > 0.0)) throw ParameterError("nav scenario: duration and period must be positive");
  if (!(fix_period >= T)) throw ParameterError("nav scenario: fix period shorter than the IMU period");
  if (!(accel_noise_std >= 0.0) || !(quantum >= 0.0)) throw ParameterError("nav scenario: noise and grid must be nonnegative");
  if (!(usbl_std.array() >= 0.0).all()) throw ParameterError("nav scenario: USBL std must be nonnegative");
  if (harmonics < 0) throw ParameterError("nav scenario: harmonics must be nonnegative");
  if (!(min_period > 0.0 && max_period >= min_period)) {
    throw ParameterError("nav scenario: need 0 < min_period <= max_period");
  }
}

namespace {

struct Harmonic {
  nav::Vec3 amp;
  double omega;
};

}  // namespace

NavData make_nav(const NavScenarioConfig& cfg, std::uint64_t seed) {
  cfg.check();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  std::vector<Harmonic> hs;
  for (int i = 0; i < cfg.harmonics; ++i) {
    Harmonic h;
    const double period = cfg.min_period + (cfg.max_period - cfg.min_period) * unif(rng);
    h.omega = kTwoPi / period;
    for (int j = 0; j < 3; ++j) h.amp[j] = cfg.accel_amplitude * (2.0 * unif(rng) - 1.0);
    h.amp[2] *= 0.3;  // mostly horizontal motion
    hs.push_back(h);
  }
  const double h0 = kTwoPi * unif(rng);
  const double h_rate = kTwoPi / (300.0 + 300.0 * unif(rng));
  const double att_omega = kTwoPi / (20.0 + 20.0 * unif(rng));
  const double att_phase = kTwoPi * unif(rng);

  NavData d;
  d.bias = cfg.bias;
  const auto n = static_cast<Index>(std::floor(cfg.duration / cfg.T + 1e-9)) + 1;
  const Index fix_stride = std::max<Index>(1, std::llround(cfg.fix_period / cfg.T));
  for (Index k = 0; k < n; ++k) {
    const double t = cfg.T * static_cast<double>(k);
    TruthSample s;
    s.t = t;
    for (const auto& h : hs) {
      const double w = h.omega;
      s.acc += h.amp * std::sin(w * t);
      s.vel += h.amp * ((1.0 - std::cos(w * t)) / w);
      s.pos += h.amp * ((t - std::sin(w * t) / w) / w);
    }
    d.truth.push_back(s);

    nav::ImuSample m;
    m.t = t;
    m.heading = h0 + std::sin(h_rate * t) * 1.5;
    m.pitch = cfg.max_tilt * std::sin(att_omega * t + att_phase);
    m.roll = cfg.max_tilt * std::cos(1.3 * att_omega * t);
    nav::Vec3 a = nav::rotation(m.heading, m.pitch, m.roll) * s.acc + cfg.bias;
    for (int j = 0; j < 3; ++j) {
      a[j] += cfg.accel_noise_std * gauss(rng);
      if (cfg.quantum > 0.0) a[j] = cfg.quantum * std::round(a[j] / cfg.quantum);
    }
    m.accel = a;
    d.imu.push_back(m);

    if (k % fix_stride == 0) {
      nav::UsblFix f;
      f.t = t;
      for (int j = 0; j < 3; ++j) f.pos[j] = s.pos[j] + cfg.usbl_std[j] * gauss(rng);
      d.usbl.push_back(f);
    }
  }
  return d;
}

double position_rmse(const Mat& traj, const std::vector<TruthSample>& truth) {
  if (traj.rows() != static_cast<Index>(truth.size()) || traj.cols() < 3) {
    throw DimensionError("position_rmse: trajectory does not match the truth");
  }
  double acc = 0.0;
  for (Index k = 0; k < traj.rows(); ++k) {
    acc += (traj.row(k).head<3>().transpose() - truth[k].pos).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(traj.rows()));
}

}  // namespace singsmooth::synth
