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

#include "singsmooth/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace singsmooth::nav {

void NavConfig::check() const {
  if (!(T >= 0.0)) throw ParameterError("sample period must be nonnegative");
  if (!(r_s >= 0.0) || !(U_diag.array() >= 0.0).all()) {
    throw ParameterError("variances must be nonnegative");
  }
  if (accel_loss == AccelLoss::kHubnik && !(r_s > 0.0)) {
    throw ParameterError("the deadzone loss needs a positive accelerometer variance");
  }
  if (!(deadzone_epsilon >= 0.0)) throw ParameterError("deadzone epsilon must be nonnegative");
  if (!(hub_kappa > 0.0)) throw ParameterError("hubnik kappa must be positive");
  if (!(damping >= 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in [0, 1]");
}

Mat discretize_F(double T) {
  const Mat3 I = Mat3::Identity();
  Mat F = Mat::Identity(9, 9);
  F.block(0, 3, 3, 3) = T * I;
  F.block(0, 6, 3, 3) = 0.5 * T * T * I;
  F.block(3, 6, 3, 3) = T * I;
  return F;
}

Mat gamma_factor(double T) {
  const Mat3 I = Mat3::Identity();
  Mat g(9, 3);
  g << (T * T * T / 6.0) * I, (T * T / 2.0) * I, T * I;
  return g;
}

Mat3 rotation(double heading, double pitch, double roll) {
  const double ch = std::cos(heading), sh = std::sin(heading);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  Mat3 Rh, Rp, Rr;
  Rh << ch, sh, 0, -sh, ch, 0, 0, 0, 1;
  Rp << cp, 0, -sp, 0, 1, 0, sp, 0, cp;
  Rr << 1, 0, 0, 0, cr, sr, 0, -sr, cr;
  return Rh.transpose() * Rp.transpose() * Rr.transpose();
}

NavModel build_problem(const std::vector<ImuSample>& imu,
                       const std::vector<UsblFix>& usbl, const NavConfig& cfg) {
  cfg.check();
  if (imu.empty()) throw ModelError("IMU stream is empty");
  const Index N = static_cast<Index>(imu.size());
  for (Index k = 1; k < N; ++k) {
    if (!(imu[k].t > imu[k - 1].t)) {
      throw ModelError("IMU timestamps must be strictly increasing (sample " +
                       std::to_string(k) + ")");
    }
  }
  double T = cfg.T;
  if (T == 0.0) {
    if (N < 2) throw ModelError("cannot infer the sample period from a single IMU sample");
    T = (imu.back().t - imu.front().t) / static_cast<double>(N - 1);
  }
  for (Index k = 1; k < N; ++k) {
    if (std::abs(imu[k].t - imu[k - 1].t - T) > 0.01 * T) {
      throw ModelError("IMU stream is not uniformly sampled at the configured period (sample " +
                       std::to_string(k) + ")");
    }
  }

  NavModel out;
  out.T = T;
  out.times.reserve(N);
  for (const auto& s : imu) out.times.push_back(s.t);

  // Snap fixes to the nearest IMU step; the first fix wins on collisions.
  std::vector<int> fix_at(N, -1);
  const double t0 = imu.front().t;
  for (std::size_t i = 0; i < usbl.size(); ++i) {
    const double rel = (usbl[i].t - t0) / T;
    if (rel < -0.5 || rel > static_cast<double>(N - 1) + 0.5) {
      throw ModelError("USBL fix at t=" + std::to_string(usbl[i].t) +
                       " lies outside the IMU time range");
    }
    const Index k = std::clamp<Index>(static_cast<Index>(std::llround(rel)), 0, N - 1);
    if (fix_at[k] < 0) {
      fix_at[k] = static_cast<int>(i);
      out.fix_steps.push_back(k);
      out.fix_positions.push_back(usbl[i].pos);
    }
  }

  const double sig = std::sqrt(cfg.r_s);
  Penalty accel_penalty = Penalty::quadratic();
  if (cfg.accel_loss == AccelLoss::kHubnik) {
    // The loss acts on the whitened residual t = v / sqrt(r_s).
    const double w = sig > 0.0 ? sig : 1.0;
    accel_penalty = Penalty::hubnik(cfg.deadzone_epsilon / w, cfg.hub_kappa / w);
  }

  const Mat F = discretize_F(T);
  const Mat Gam = gamma_factor(T);
  Problem& p = out.problem;
  p.x0 = Vec::Zero(kKinematicDim);
  if (!out.fix_positions.empty()) p.x0.segment<3>(kPos) = out.fix_positions.front();

  std::vector<Mat> bias_maps;
  p.steps.reserve(N);
  for (Index k = 0; k < N; ++k) {
    const bool fix = fix_at[k] >= 0;
    const Index m = fix ? 6 : 3;
    TimeStep s;
    s.G = k == 0 ? Mat::Identity(9, 9) : F;
    s.C = Gam;
    s.H = Mat::Zero(m, 9);
    s.S = Mat::Zero(m, m);
    s.y.resize(m);
    const Index acc_row = fix ? 3 : 0;
    if (fix) {
      s.H.block(0, kPos, 3, 3).setIdentity();
      s.S.topLeftCorner(3, 3) = cfg.U_diag.cwiseSqrt().asDiagonal();
      s.y.head<3>() = usbl[fix_at[k]].pos;
      s.measurement.add(0, 3, cfg.usbl_penalty);
    }
    s.H.block(acc_row, kAcc, 3, 3) = rotation(imu[k].heading, imu[k].pitch, imu[k].roll);
    s.S.block(acc_row, acc_row, 3, 3) = sig * Mat3::Identity();
    s.y.segment<3>(acc_row) = imu[k].accel;
    s.measurement.add(acc_row, 3, accel_penalty);
    s.process = SeparablePenalty::uniform(cfg.process_penalty, 3);

    Mat map = Mat::Zero(m, 3);
    map.block(acc_row, 0, 3, 3).setIdentity();
    bias_maps.push_back(std::move(map));
    p.steps.push_back(std::move(s));
  }
  if (cfg.estimate_bias) {
    p = augment_bias(p, 3, bias_maps, cfg.bias_prior);
    out.has_bias = true;
  }
  if (cfg.diffuse_initial) {
    const Index n = p.state_dim();
    p.steps[0].C = Mat::Identity(n, n);
    p.steps[0].process = SeparablePenalty::uniform(Penalty::zero(), n);
  }
  return out;
}

std::vector<UsblFix> subsample_usbl(const std::vector<UsblFix>& fixes,
                                    double gap_seconds) {
  if (!(gap_seconds >= 0.0)) throw ParameterError("fix gap must be nonnegative");
  std::vector<UsblFix> out;
  for (const auto& f : fixes) {
    // Small slack so a nominal 2 s cadence with jitter still matches gap=2.
    if (out.empty() || f.t - out.back().t >= gap_seconds - 1e-9) out.push_back(f);
  }
  return out;
}

StackedVector warm_start(const NavModel& m, double damping) {
  if (!(damping >= 0.0 && damping <= 1.0)) {
    throw ParameterError("warm start damping must lie in [0, 1]");
  }
  const Problem& p = m.problem;
  StackedVector z{StackedLayout(p)};
  const Index n = p.state_dim();
  std::size_t next_fix = 0;
  Vec3 anchor = p.x0.segment<3>(kPos);
  Vec3 vel = Vec3::Zero();
  double t_anchor = m.times.front();
  for (Index k = 0; k < p.num_steps(); ++k) {
    while (next_fix < m.fix_steps.size() && m.fix_steps[next_fix] <= k) {
      const Index ks = m.fix_steps[next_fix];
      if (next_fix > 0) {
        const Index kp = m.fix_steps[next_fix - 1];
        const double dt = m.times[ks] - m.times[kp];
        vel = (m.fix_positions[next_fix] - m.fix_positions[next_fix - 1]) / dt;
      }
      anchor = m.fix_positions[next_fix];
      t_anchor = m.times[ks];
      ++next_fix;
    }
    Vec x = Vec::Zero(n);
    x.segment<3>(kPos) = anchor + damping * vel * (m.times[k] - t_anchor);
    x.segment<3>(kVel) = damping * vel;
    z.x(k) = x;
  }
  return z;
}

NavSolution smooth(const std::vector<ImuSample>& imu, const std::vector<UsblFix>& usbl,
                   const NavConfig& cfg, const SolverConfig& solver) {
  NavSolution out;
  out.model = build_problem(imu, usbl, cfg);
  StackedVector init = warm_start(out.model, cfg.damping);
  if (cfg.accel_loss == AccelLoss::kHubnik) {
    NavConfig quad = cfg;
    quad.accel_loss = AccelLoss::kQuadratic;
    const NavModel qm = build_problem(imu, usbl, quad);
    const Smoother qs(qm.problem, solver.pivot_tol, solver.precondition);
    const SolveResult qr = qs.solve(solver, init);
    out.presolve_iterations = qr.iterations;
    // Same layout and whitening; only the loss on t differs.
    init = qr.z;
  }
  const Smoother s(out.model.problem, solver.pivot_tol, solver.precondition);
  out.result = s.solve(solver, init);
  return out;
}

}  // namespace singsmooth::nav
