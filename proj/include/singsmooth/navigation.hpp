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

#include "singsmooth/model.hpp"
#include "singsmooth/penalty.hpp"
#include "singsmooth/solver.hpp"

namespace singsmooth::nav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// State layout: position, velocity, acceleration (world frame), then the
// optional instrument-frame accelerometer bias.
inline constexpr Index kPos = 0;
inline constexpr Index kVel = 3;
inline constexpr Index kAcc = 6;
inline constexpr Index kBias = 9;
inline constexpr Index kKinematicDim = 9;

enum class AccelLoss { kHubnik, kQuadratic };

struct NavConfig {
  double T = 0.0;         // IMU period (s); 0 infers it from the timestamps
  double r_s = 2.25e-4;   // accelerometer variance per axis ((m/s^2)^2)
  Vec3 U_diag = Vec3::Constant(0.25);  // USBL position variance (m^2)
  double deadzone_epsilon = 0.05;      // m/s^2
  double hub_kappa = 1.0;              // m/s^2
  AccelLoss accel_loss = AccelLoss::kHubnik;
  Penalty process_penalty = Penalty::l1(30.0);
  Penalty usbl_penalty = Penalty::quadratic();
  bool estimate_bias = true;
  // Penalty on the bias at the first step; the bias is constant afterwards.
  Penalty bias_prior = Penalty::quadratic();
  double damping = 0.1;   // warm-start velocity damping
  // Leaves the first state unpenalized instead of tying it to x0 through the
  // process factor. Useful when the vehicle is already moving at t0.
  bool diffuse_initial = false;

  void check() const;
};

struct ImuSample {
  double t = 0.0;
  Vec3 accel = Vec3::Zero();  // instrument frame
  double heading = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

struct UsblFix {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
};

// exp(F_s T) for the constant-acceleration kinematics, exact.
Mat discretize_F(double T);

// 9 x 3 factor [T^3/6 I; T^2/2 I; T I] of the rank-3 process covariance.
Mat gamma_factor(double T);

// R_h^T R_p^T R_r^T; maps world-frame vectors into the instrument frame.
Mat3 rotation(double heading, double pitch, double roll);

struct NavModel {
  Problem problem;
  std::vector<double> times;       // one per step
  std::vector<Index> fix_steps;    // step index of each retained fix
  std::vector<Vec3> fix_positions;
  double T = 0.0;
  bool has_bias = false;
};

// One time step per IMU sample; fixes snap to the nearest sample.
NavModel build_problem(const std::vector<ImuSample>& imu,
                       const std::vector<UsblFix>& usbl, const NavConfig& cfg);

// Keeps the first fix and every fix at least gap_seconds after the last kept.
std::vector<UsblFix> subsample_usbl(const std::vector<UsblFix>& fixes,
                                    double gap_seconds);

// Initial iterate: from each fix, propagate the fix forward with the damped
// velocity between the two most recent fixes and zero acceleration.
StackedVector warm_start(const NavModel& m, double damping);

struct NavSolution {
  NavModel model;
  SolveResult result;
  int presolve_iterations = 0;  // quadratic stage, zero when skipped
};

// Builds and solves the navigation problem from the fix-anchored warm start.
// With the deadzone loss a quadratic-loss solve runs first and seeds the
// second stage.
NavSolution smooth(const std::vector<ImuSample>& imu, const std::vector<UsblFix>& usbl,
                   const NavConfig& cfg, const SolverConfig& solver);

}  // namespace singsmooth::nav
