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

#include <cstdint>
#include <vector>

#include "singsmooth/model.hpp"
#include "singsmooth/navigation.hpp"
#include "singsmooth/penalty.hpp"

namespace singsmooth::synth {

// 1-D position/velocity track. The velocity is a random walk and the
// position its exact integral, so the process covariance has rank one.
struct Fig1Config {
  Index N = 200;
  double dt = 0.1;
  double sigma_w = 0.5;    // velocity increment std per step
  double sigma_v = 0.5;    // measurement noise std
  double outlier_fraction = 0.1;
  double outlier_scale = 10.0;  // outlier std in units of sigma_v

  void check() const;
};

struct Fig1Data {
  std::vector<double> t;
  Vec pos;
  Vec vel;
  Vec y;
  std::vector<bool> outlier;
};

Fig1Data make_fig1(const Fig1Config& cfg, std::uint64_t seed);

// Rank-one process factor [0; sigma_w] and position measurements with
// standard deviation sigma_v.
Problem fig1_problem(const Fig1Data& d, const Fig1Config& cfg,
                     const Penalty& process, const Penalty& measurement);

struct NavScenarioConfig {
  double duration = 600.0;        // s
  double T = 0.5;                 // IMU period
  double fix_period = 2.0;        // USBL period
  double accel_noise_std = 0.01;  // m/s^2, before quantization
  double quantum = 0.05;          // 0 disables quantization
  nav::Vec3 bias{0.06, -0.045, 0.08};
  nav::Vec3 usbl_std{0.5, 0.5, 0.3};
  double accel_amplitude = 0.02;  // per sinusoid, m/s^2
  int harmonics = 3;
  double min_period = 60.0;       // s
  double max_period = 200.0;      // s
  double max_tilt = 0.05;         // rad, pitch and roll amplitude

  void check() const;
};

struct TruthSample {
  double t = 0.0;
  nav::Vec3 pos = nav::Vec3::Zero();
  nav::Vec3 vel = nav::Vec3::Zero();
  nav::Vec3 acc = nav::Vec3::Zero();
};

struct NavData {
  std::vector<nav::ImuSample> imu;
  std::vector<nav::UsblFix> usbl;
  std::vector<TruthSample> truth;
  nav::Vec3 bias = nav::Vec3::Zero();
};

// Smooth 3-D track starting at rest at the origin: world-frame acceleration
// is a sum of sinusoids vanishing at t = 0, position and velocity are its
// exact integrals. Accelerometer samples are rotated into the instrument
// frame, biased, perturbed and quantized.
NavData make_nav(const NavScenarioConfig& cfg, std::uint64_t seed);

// Position RMSE of an N x n trajectory (columns 0..2) against the truth.
double position_rmse(const Mat& traj, const std::vector<TruthSample>& truth);

}  // namespace singsmooth::synth
