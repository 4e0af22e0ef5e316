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


#include <cmath>
#include <numbers>

#include "doctest.h"
#include "singsmooth/navigation.hpp"
#include "singsmooth/reference.hpp"
#include "singsmooth/synth.hpp"
#include "support.hpp"

using namespace singsmooth;
using namespace singsmooth::nav;
using singsmooth::testing::max_abs_diff;
using singsmooth::testing::Rng;

namespace {

std::vector<ImuSample> still_imu(int n, double T) {
  std::vector<ImuSample> imu(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) imu[static_cast<std::size_t>(k)].t = T * k;
  return imu;
}

// Constant-acceleration truth with a slowly turning, tilting vehicle: zero
// process innovations, so quadratic smoothing has a zero-objective solution.
struct ExactTrack {
  std::vector<ImuSample> imu;
  std::vector<Vec3> pos;
};

ExactTrack constant_accel_track(int n, double T, const Vec3& p0, const Vec3& v0,
                                const Vec3& a, const Vec3& bias) {
  ExactTrack tr;
  for (int k = 0; k < n; ++k) {
    const double t = T * k;
    ImuSample s;
    s.t = t;
    s.heading = 0.4 * t;
    s.pitch = 0.1 * std::sin(0.7 * t);
    s.roll = 0.08 * std::cos(0.5 * t);
    s.accel = rotation(s.heading, s.pitch, s.roll) * a + bias;
    tr.imu.push_back(s);
    tr.pos.push_back(p0 + v0 * t + 0.5 * a * t * t);
  }
  return tr;
}

NavConfig exact_config() {
  NavConfig cfg;
  cfg.accel_loss = AccelLoss::kQuadratic;
  cfg.process_penalty = Penalty::quadratic();
  cfg.U_diag.setZero();
  cfg.diffuse_initial = true;
  return cfg;
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.tol_rel = 1e-13;
  cfg.tol_feas = 1e-10;
  return cfg;
}

}  // namespace

TEST_CASE("discretize_F") {
  const Mat F1 = discretize_F(1.0);
  const Mat I = Mat::Identity(3, 3);
  Mat want = Mat::Zero(9, 9);
  want << I, I, 0.5 * I, Mat::Zero(3, 3), I, I, Mat::Zero(3, 6), I;
  CHECK(F1 == want);
  CHECK(discretize_F(0.0) == Mat::Identity(9, 9));
  for (const auto& [a, b] : {std::pair{0.3, 0.7}, std::pair{1.5, 0.25}}) {
    CHECK(max_abs_diff(discretize_F(a) * discretize_F(b), discretize_F(a + b)) < 1e-14);
  }
}

TEST_CASE("gamma_factor") {
  const Mat I = Mat::Identity(3, 3);
  Mat g1(9, 3), g2(9, 3);
  g1 << I / 6.0, I / 2.0, I;
  g2 << (8.0 / 6.0) * I, 2.0 * I, 2.0 * I;
  CHECK(max_abs_diff(gamma_factor(1.0), g1) < 1e-15);
  CHECK(max_abs_diff(gamma_factor(2.0), g2) < 1e-15);
  for (const double T : {0.1, 0.5, 2.0}) {
    const Mat G = gamma_factor(T);
    const Mat Q = G * G.transpose();
    CHECK(max_abs_diff(Q, Q.transpose()) == 0.0);
    const Eigen::SelfAdjointEigenSolver<Mat> eig(Q);
    const Vec lam = eig.eigenvalues();
    CHECK(lam.minCoeff() > -1e-12 * lam.maxCoeff());
    int nonzero = 0;
    for (Index i = 0; i < lam.size(); ++i) nonzero += lam[i] > 1e-10 * lam.maxCoeff();
    CHECK(nonzero == 3);
  }
}

TEST_CASE("rotation") {
  CHECK(max_abs_diff(rotation(0, 0, 0), Mat::Identity(3, 3)) == 0.0);
  Mat3 rh;
  rh << 0, 1, 0, -1, 0, 0, 0, 0, 1;  // printed R_h with ch = 0, sh = 1
  CHECK(max_abs_diff(rotation(std::numbers::pi / 2, 0, 0), rh.transpose()) < 1e-15);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Mat3 R = rotation(testing::uniform(rng, -4, 4), testing::uniform(rng, -1.5, 1.5),
                            testing::uniform(rng, -3, 3));
    CHECK(max_abs_diff(R * R.transpose(), Mat::Identity(3, 3)) < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Pitch and roll compose in the printed order.
  Mat3 rp, rr;
  const double p = 0.3, r = -0.2;
  rp << std::cos(p), 0, -std::sin(p), 0, 1, 0, std::sin(p), 0, std::cos(p);
  rr << 1, 0, 0, 0, std::cos(r), std::sin(r), 0, -std::sin(r), std::cos(r);
  CHECK(max_abs_diff(rotation(0, p, r), rp.transpose() * rr.transpose()) < 1e-15);
}

TEST_CASE("build_problem: row layout") {
  std::vector<ImuSample> imu = still_imu(6, 0.5);
  const std::vector<UsblFix> usbl = {{0.0, Vec3(1, 2, 3)}, {1.5, Vec3(2, 2, 3)}};
  NavConfig cfg;
  cfg.estimate_bias = false;
  const NavModel m = build_problem(imu, usbl, cfg);
  const Problem& p = m.problem;
  CHECK(m.T == doctest::Approx(0.5));
  CHECK(p.state_dim() == 9);
  CHECK(p.x0 == (Vec(9) << 1, 2, 3, 0, 0, 0, 0, 0, 0).finished());
  CHECK(m.fix_steps == std::vector<Index>{0, 3});
  CHECK(p.steps[0].meas_dim() == 6);
  CHECK(p.steps[1].meas_dim() == 3);
  CHECK(p.steps[3].meas_dim() == 6);
  CHECK(p.steps[1].H.rightCols(3) == Mat::Identity(3, 3));
  CHECK(p.steps[1].H.leftCols(6).isZero(0.0));
  CHECK(p.steps[3].H.topLeftCorner(3, 3) == Mat::Identity(3, 3));
  CHECK(p.steps[3].S.topLeftCorner(3, 3) ==
        Mat(cfg.U_diag.cwiseSqrt().asDiagonal()));
  CHECK(p.steps[3].S.bottomRightCorner(3, 3) ==
        Mat(std::sqrt(cfg.r_s) * Mat::Identity(3, 3)));
  CHECK(max_abs_diff(p.steps[2].G, discretize_F(0.5)) == 0.0);
  CHECK(max_abs_diff(p.steps[2].C, gamma_factor(0.5)) == 0.0);
  CHECK(p.steps[3].y.head(3) == Vec3(2, 2, 3));
}

TEST_CASE("build_problem: bias and attitude") {
  std::vector<ImuSample> imu = still_imu(4, 1.0);
  imu[2].heading = 0.7;
  imu[2].pitch = 0.1;
  NavConfig cfg;
  const NavModel m = build_problem(imu, {{0.0, Vec3::Zero()}}, cfg);
  const Problem& p = m.problem;
  CHECK(m.has_bias);
  CHECK(p.state_dim() == 12);
  CHECK(p.steps[0].C.cols() == 6);
  CHECK(p.steps[2].C.cols() == 3);
  CHECK(p.steps[2].H.block(0, kAcc, 3, 3) == Mat(rotation(0.7, 0.1, 0.0)));
  CHECK(p.steps[2].H.block(0, kBias, 3, 3) == Mat::Identity(3, 3));
  CHECK(p.steps[0].H.block(0, kBias, 3, 3).isZero(0.0));
  CHECK(p.steps[0].H.block(3, kBias, 3, 3) == Mat::Identity(3, 3));
  CHECK(p.steps[2].G.bottomRightCorner(3, 3) == Mat::Identity(3, 3));
}

TEST_CASE("build_problem: deadzone in whitened units") {
  NavConfig cfg;
  cfg.r_s = 0.04;
  cfg.deadzone_epsilon = 0.05;
  cfg.hub_kappa = 1.0;
  const Problem p = build_problem(still_imu(3, 1.0), {{0.0, Vec3::Zero()}}, cfg).problem;
  const Penalty* acc = p.steps[1].measurement.penalty_at(0);
  REQUIRE(acc != nullptr);
  CHECK(acc->kind() == PenaltyKind::kHubnik);
  CHECK(acc->epsilon() == doctest::Approx(0.25));
  CHECK(acc->kappa() == doctest::Approx(5.0));
  CHECK(p.steps[0].measurement.penalty_at(0)->kind() == PenaltyKind::kQuadratic);
}

TEST_CASE("build_problem: fix snapping") {
  const std::vector<ImuSample> imu = still_imu(5, 1.0);
  NavConfig cfg;
  const NavModel m = build_problem(
      imu, {{-0.4, Vec3::Zero()}, {1.6, Vec3::Ones()}, {2.3, Vec3::Ones()}, {4.4, Vec3::Ones()}},
      cfg);
  CHECK(m.fix_steps == std::vector<Index>{0, 2, 4});
  CHECK_THROWS_AS(build_problem(imu, {{4.6, Vec3::Zero()}}, cfg), ModelError);
  CHECK_THROWS_AS(build_problem(imu, {{-0.6, Vec3::Zero()}}, cfg), ModelError);
}

TEST_CASE("build_problem: input errors") {
  NavConfig cfg;
  CHECK_THROWS_AS(build_problem({}, {}, cfg), ModelError);
  std::vector<ImuSample> imu = still_imu(4, 1.0);
  imu[2].t = imu[1].t;
  CHECK_THROWS_AS(build_problem(imu, {}, cfg), ModelError);
  imu = still_imu(4, 1.0);
  imu[3].t = 3.5;
  CHECK_THROWS_AS(build_problem(imu, {}, cfg), ModelError);
  cfg.r_s = -1.0;
  CHECK_THROWS_AS(build_problem(still_imu(3, 1.0), {}, cfg), ParameterError);
  cfg = NavConfig{};
  cfg.r_s = 0.0;
  CHECK_THROWS_AS(cfg.check(), ParameterError);
  cfg.accel_loss = AccelLoss::kQuadratic;
  CHECK_NOTHROW(cfg.check());
}

TEST_CASE("subsample_usbl") {
  std::vector<UsblFix> fixes;
  for (int i = 0; i < 301; ++i) fixes.push_back({2.0 * i, Vec3::Zero()});
  CHECK(subsample_usbl(fixes, 0.0).size() == fixes.size());
  CHECK(subsample_usbl(fixes, 1000.0).size() == 1);
  const auto kept = subsample_usbl(fixes, 30.0);
  CHECK(kept.size() == 21);
  for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i].t - kept[i - 1].t == 30.0);
  // Jittered timestamps still land on the nominal cadence.
  std::vector<UsblFix> jitter = {{0.0, Vec3::Zero()}, {1.999999999999, Vec3::Zero()}};
  CHECK(subsample_usbl(jitter, 2.0).size() == 2);
  CHECK_THROWS_AS(subsample_usbl(fixes, -1.0), ParameterError);
}

TEST_CASE("warm start anchors at the fixes") {
  const std::vector<ImuSample> imu = still_imu(9, 1.0);
  NavConfig cfg;
  cfg.estimate_bias = false;
  const NavModel m = build_problem(imu, {{0.0, Vec3::Zero()}, {4.0, Vec3(4, 0, 0)}}, cfg);
  const Mat X0 = warm_start(m, 0.0).trajectory();
  CHECK(X0.row(3).head(3).isZero(0.0));
  CHECK(X0.row(6).head(3) == Vec3(4, 0, 0).transpose());
  const Mat X = warm_start(m, 0.5).trajectory();
  CHECK(X(8, 0) == doctest::Approx(4.0 + 0.5 * 1.0 * 4.0));
  CHECK(X(8, 3) == doctest::Approx(0.5));
  CHECK_THROWS_AS(warm_start(m, -0.1), ParameterError);
}

TEST_CASE("noiseless round trip recovers positions") {
  synth::NavScenarioConfig sc;
  sc.duration = 20.0;
  sc.fix_period = sc.T;
  sc.accel_noise_std = 0.0;
  sc.quantum = 0.0;
  sc.bias.setZero();
  sc.usbl_std.setZero();
  sc.accel_amplitude = 0.2;
  sc.min_period = 5.0;
  sc.max_period = 15.0;
  const synth::NavData d = synth::make_nav(sc, 3);
  NavConfig cfg = exact_config();
  cfg.estimate_bias = false;
  const NavSolution sol = smooth(d.imu, d.usbl, cfg, tight());
  CHECK(synth::position_rmse(sol.result.trajectory(), d.truth) <= 1e-6);
}

TEST_CASE("noiseless bias is identified from two fixes") {
  const Vec3 bias(0.06, -0.045, 0.08);
  const Vec3 acc(0.02, -0.01, 0.005);
  const ExactTrack tr = constant_accel_track(20, 0.5, Vec3(1, 2, -1), Vec3(0.3, -0.2, 0.05),
                                             acc, bias);
  const std::vector<UsblFix> usbl = {{0.0, tr.pos.front()}, {9.5, tr.pos.back()}};
  const NavConfig cfg = exact_config();
  const NavModel m = build_problem(tr.imu, usbl, cfg);
  const Mat dense = reference::dense_equality_ls(m.problem).trajectory();
  CHECK(max_abs_diff(dense.row(19).segment(kBias, 3).transpose(), bias) <= 1e-6);
  // Two fixes leave a long, shallow valley; a large primal step crosses it
  // much faster than the default balance.
  SolverConfig solver = tight();
  solver.tau = 100.0;
  solver.sigma = 0.01;
  const NavSolution sol = smooth(tr.imu, usbl, cfg, solver);
  CHECK(sol.result.converged);
  const Mat X = sol.result.trajectory();
  CHECK(max_abs_diff(X.row(19).segment(kBias, 3).transpose(), bias) <= 1e-6);
  CHECK(max_abs_diff(X.row(10).segment(kAcc, 3).transpose(), acc) <= 1e-6);
  CHECK(max_abs_diff(X.row(7).head(3).transpose(), tr.pos[7]) <= 1e-6);
}

TEST_CASE("deadzone loss on quantized accelerations") {
  synth::NavScenarioConfig sc;
  sc.duration = 300.0;
  sc.accel_noise_std = 0.005;
  const synth::NavData d = synth::make_nav(sc, 2);
  SolverConfig solver;
  solver.tol_rel = 1e-6;
  NavConfig hub;
  NavConfig quad = hub;
  quad.accel_loss = AccelLoss::kQuadratic;
  const NavSolution h = smooth(d.imu, d.usbl, hub, solver);
  const NavSolution q = smooth(d.imu, d.usbl, quad, solver);
  CHECK(h.presolve_iterations > 0);
  CHECK(q.presolve_iterations == 0);

  // Share of accelerometer residuals inside the deadzone.
  const double eps = hub.deadzone_epsilon;
  const double sig = std::sqrt(hub.r_s);
  int inside = 0, total = 0;
  for (Index k = 0; k < h.model.problem.num_steps(); ++k) {
    const auto t = h.result.z.t(k).tail(3);
    for (Index i = 0; i < 3; ++i) {
      inside += std::abs(sig * t[i]) <= eps * (1.0 + 1e-6);
      ++total;
    }
  }
  CHECK(inside >= 0.95 * total);
  CHECK(synth::position_rmse(h.result.trajectory(), d.truth) <=
        synth::position_rmse(q.result.trajectory(), d.truth));
}
