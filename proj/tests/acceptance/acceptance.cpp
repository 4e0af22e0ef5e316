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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: acceptance <path to the cli binary>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "singsmooth/navigation.hpp"
#include "singsmooth/reference.hpp"
#include "singsmooth/solver.hpp"
#include "singsmooth/synth.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace singsmooth;
using namespace singsmooth::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rmse(const Vec& a, const Vec& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double soft(double v, double t) {
  return v > t ? v - t : (v < -t ? v + t : 0.0);
}

// prox of sigma rho* written from the conjugate of each loss directly, with
// no reference to the primal prox.
double conjugate_prox(const Penalty& p, double sigma, double zeta) {
  const double s = p.scale();
  const double tau = p.tau(), kappa = p.kappa(), eps = p.epsilon();
  switch (p.kind()) {
    case PenaltyKind::kZero: return 0.0;
    case PenaltyKind::kQuadratic: return s * zeta / (s + sigma);
    case PenaltyKind::kL1: return clamp(zeta, -s, s);
    case PenaltyKind::kQuantile: return clamp(zeta, -s * tau, s * (1.0 - tau));
    case PenaltyKind::kHuber: return clamp(s * zeta / (s + sigma), -s * kappa, s * kappa);
    case PenaltyKind::kQuantileHuber:
      return clamp(s * zeta / (s + sigma * kappa), -s * tau, s * (1.0 - tau));
    case PenaltyKind::kVapnik: return clamp(soft(zeta, sigma * eps), -s, s);
    case PenaltyKind::kHubnik:
      return clamp(s * soft(zeta, sigma * eps) / (s + sigma), -s * kappa, s * kappa);
    case PenaltyKind::kElasticNet: {
      if (std::abs(zeta) <= s) return zeta;
      const double m = (2.0 * s * std::abs(zeta) + s * sigma) / (2.0 * s + sigma);
      return std::copysign(m, zeta);
    }
    case PenaltyKind::kBox: {
      const double a = p.lower()[0], b = p.upper()[0];
      if (zeta - sigma * b > 0.0) return zeta - sigma * b;
      if (zeta - sigma * a < 0.0) return zeta - sigma * a;
      return 0.0;
    }
  }
  return 0.0;
}

// max |A z - w_hat| from the model rows.
double feasibility(const Problem& p, const StackedVector& z) {
  double worst = 0.0;
  for (Index k = 0; k < p.num_steps(); ++k) {
    const TimeStep& s = p.steps[k];
    Vec r = s.C * z.u(k) + z.x(k);
    r -= k == 0 ? p.x0 : Vec(s.G * z.x(k - 1));
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
    const Vec m = s.S * z.t(k) + s.H * z.x(k) - s.y;
    if (m.size() > 0) worst = std::max(worst, m.cwiseAbs().maxCoeff());
  }
  return worst;
}

Outcome prox_vs_oracle() {
  Rng rng(101);
  double worst = 0.0;
  std::string worst_kind;
  for (const PenaltyKind kind : all_kinds()) {
    for (int i = 0; i < 1000; ++i) {
      const Penalty p = random_penalty(rng, kind);
      const double alpha = log_uniform(rng, 0.01, 100.0);
      const double z = uniform(rng, -10.0, 10.0);
      const double got = p.prox(alpha, Vec::Constant(1, z))[0];
      const double err = std::abs(got - reference::prox_oracle(p, alpha, z));
      if (err > worst) {
        worst = err;
        worst_kind = std::string(to_string(kind));
      }
    }
  }
  return {worst <= 1e-6, "max |prox - oracle| " + fmt(worst) + " (" + worst_kind + ")"};
}

Outcome moreau() {
  Rng rng(202);
  double identity = 0.0, library = 0.0;
  for (const PenaltyKind kind : all_kinds()) {
    for (int i = 0; i < 1000; ++i) {
      const Penalty p = random_penalty(rng, kind);
      const double sigma = i % 2 ? 1.0 : log_uniform(rng, 0.01, 100.0);
      const double zeta = uniform(rng, -10.0, 10.0);
      const double primal = p.prox(1.0 / sigma, Vec::Constant(1, zeta / sigma))[0];
      const double dual = conjugate_prox(p, sigma, zeta);
      identity = std::max(identity, std::abs(sigma * primal + dual - zeta));
      const double lib = p.prox_conjugate(sigma, Vec::Constant(1, zeta))[0];
      library = std::max(library, std::abs(lib - dual));
    }
  }
  return {identity <= 1e-10 && library <= 1e-10,
          "identity residual " + fmt(identity) + ", conjugate prox vs closed form " +
              fmt(library)};
}

Outcome oracle_triangle() {
  Rng rng(303);
  SolverConfig cfg;
  cfg.tol_rel = 1e-12;
  cfg.tol_feas = 1e-12;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Problem p = random_gaussian_problem(rng, 50, 4, 2);
    const Mat drs = solve(p, cfg).trajectory();
    const Mat kf = reference::kalman_rts(p).means;
    const Mat dense = reference::dense_equality_ls(p).trajectory();
    worst = std::max({worst, max_abs_diff(drs, kf), max_abs_diff(drs, dense),
                      max_abs_diff(kf, dense)});
  }
  return {worst <= 1e-6, "max pairwise difference " + fmt(worst)};
}

Outcome singular_l2() {
  Rng rng(404);
  SolverConfig cfg;
  cfg.tol_rel = 1e-14;
  cfg.tol_feas = 1e-12;
  double diff = 0.0, feas = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Index N = 5 + i % 16;
    const Problem p = random_singular_problem(rng, N, 4, 3, 2, 1);
    const SolveResult r = solve(p, cfg);
    diff = std::max(diff, max_abs_diff(r.trajectory(),
                                       reference::dense_equality_ls(p).trajectory()));
    feas = std::max(feas, feasibility(p, r.z));
  }
  return {diff <= 1e-8 && feas <= 1e-8,
          "max difference " + fmt(diff) + ", feasibility " + fmt(feas)};
}

Outcome fig1() {
  const synth::Fig1Config cfg;
  SolverConfig sc;
  sc.tol_rel = 1e-8;
  std::vector<double> l2, hub, pinv;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const synth::Fig1Data d = synth::make_fig1(cfg, seed);
    const Penalty q = Penalty::quadratic(), h = Penalty::huber(1.0);
    const Problem pq = synth::fig1_problem(d, cfg, q, q);
    const Problem ph = synth::fig1_problem(d, cfg, h, h);
    l2.push_back(rmse(solve(pq, sc).trajectory().col(0), d.pos));
    hub.push_back(rmse(solve(ph, sc).trajectory().col(0), d.pos));
    pinv.push_back(rmse(reference::pinv_huber_smoother(ph, 1.0).trajectory.col(0), d.pos));
  }
  const double mh = median(hub), ml = median(l2), mp = median(pinv);
  return {mh < ml && ml < mp && mh < 0.5 * mp,
          "median RMSE huber " + fmt(mh) + ", l2 " + fmt(ml) + ", pinv " + fmt(mp)};
}

// Rotating instrument on a constant-acceleration track; exact readings.
std::vector<nav::ImuSample> exact_imu(int n, double T, const nav::Vec3& a,
                                      const nav::Vec3& bias) {
  std::vector<nav::ImuSample> imu;
  for (int k = 0; k < n; ++k) {
    nav::ImuSample s;
    s.t = T * k;
    s.heading = 0.4 * s.t;
    s.pitch = 0.1 * std::sin(0.7 * s.t);
    s.roll = 0.08 * std::cos(0.5 * s.t);
    s.accel = nav::rotation(s.heading, s.pitch, s.roll) * a + bias;
    imu.push_back(s);
  }
  return imu;
}

Outcome bias_recovery() {
  const nav::Vec3 bias(0.06, -0.045, 0.08);
  const nav::Vec3 acc(0.02, -0.01, 0.005);
  const nav::Vec3 p0(1, 2, -1), v0(0.3, -0.2, 0.05);
  const int n = 20;
  const double T = 0.5;
  const auto imu = exact_imu(n, T, acc, bias);
  const double tf = T * (n - 1);
  const std::vector<nav::UsblFix> usbl = {{0.0, p0},
                                          {tf, p0 + v0 * tf + 0.5 * acc * tf * tf}};
  nav::NavConfig exact;
  exact.accel_loss = nav::AccelLoss::kQuadratic;
  exact.process_penalty = Penalty::quadratic();
  exact.U_diag.setZero();
  exact.diffuse_initial = true;
  SolverConfig tight;
  tight.tol_rel = 1e-13;
  tight.tol_feas = 1e-10;
  tight.tau = 100.0;
  tight.sigma = 0.01;
  const nav::NavSolution ex = nav::smooth(imu, usbl, exact, tight);
  const Mat X = ex.result.trajectory();
  const double noiseless =
      (X.row(n - 1).segment(nav::kBias, 3).transpose() - bias).cwiseAbs().maxCoeff();

  // Default scenario; sensor noise near sqrt(r_s).
  const synth::NavScenarioConfig sc;
  SolverConfig solver;
  solver.tol_rel = 1e-6;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const synth::NavData d = synth::make_nav(sc, seed);
    const nav::NavSolution sol = nav::smooth(d.imu, d.usbl, nav::NavConfig{}, solver);
    const Mat Y = sol.result.trajectory();
    const nav::Vec3 b = Y.row(Y.rows() - 1).segment(nav::kBias, 3).transpose();
    worst = std::max(worst, (b - d.bias).norm() / d.bias.norm());
  }
  return {noiseless <= 1e-6 && worst <= 0.1,
          "noiseless error " + fmt(noiseless) + ", worst relative error over seeds " +
              fmt(worst)};
}

Outcome deadzone() {
  synth::NavScenarioConfig sc;
  sc.duration = 300.0;
  sc.accel_noise_std = 0.005;
  SolverConfig solver;
  solver.tol_rel = 1e-6;
  nav::NavConfig hub;
  nav::NavConfig quad = hub;
  quad.accel_loss = nav::AccelLoss::kQuadratic;
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const synth::NavData d = synth::make_nav(sc, seed);
    const double eh =
        synth::position_rmse(nav::smooth(d.imu, d.usbl, hub, solver).result.trajectory(),
                             d.truth);
    const double eq =
        synth::position_rmse(nav::smooth(d.imu, d.usbl, quad, solver).result.trajectory(),
                             d.truth);
    wins += eh <= eq;
  }
  return {wins >= 18, "hubnik at or below quadratic in " + std::to_string(wins) + "/20 seeds"};
}

Outcome fix_gap() {
  synth::NavScenarioConfig sc;
  sc.duration = 600.0;
  sc.accel_noise_std = 0.005;
  sc.accel_amplitude = 0.1;
  sc.min_period = 20.0;
  sc.max_period = 60.0;
  SolverConfig solver;
  solver.tol_rel = 1e-5;
  const std::vector<double> gaps = {2.0, 30.0, 60.0, 120.0};
  std::vector<std::vector<double>> err(gaps.size());
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const synth::NavData d = synth::make_nav(sc, seed);
    for (std::size_t g = 0; g < gaps.size(); ++g) {
      const auto usbl = nav::subsample_usbl(d.usbl, gaps[g]);
      const nav::NavSolution sol = nav::smooth(d.imu, usbl, nav::NavConfig{}, solver);
      err[g].push_back(synth::position_rmse(sol.result.trajectory(), d.truth));
    }
  }
  std::vector<double> med;
  for (const auto& e : err) med.push_back(median(e));
  bool ok = true;
  std::string detail = "median RMSE";
  for (std::size_t g = 0; g < gaps.size(); ++g) {
    if (g > 0) ok = ok && med[g] >= med[g - 1];
    detail += " " + fmt(gaps[g]) + "s:" + fmt(med[g]);
  }
  ok = ok && med.back() < 10.0 * med.front();
  return {ok, detail};
}

double seconds_per_iteration(double duration) {
  synth::NavScenarioConfig sc;
  sc.duration = duration;
  const synth::NavData d = synth::make_nav(sc, 1);
  const nav::NavModel m = nav::build_problem(d.imu, d.usbl, nav::NavConfig{});
  const Smoother smoother(m.problem);
  SolverConfig cfg;
  cfg.max_iter = 200;
  cfg.tol_rel = 1e-300;
  cfg.tol_feas = 1e-300;
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = smoother.solve(cfg);
    const double w = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, w / r.iterations);
  }
  return best;
}

Outcome complexity() {
  // The IMU runs at 2 Hz, so these give N = 1000 and N = 2000.
  const double t1 = seconds_per_iteration(500.0);
  const double t2 = seconds_per_iteration(1000.0);
  const double ratio = t2 / t1;
  return {ratio >= 1.6 && ratio <= 2.6, "ratio " + fmt(ratio) + " (" + fmt(t1 * 1e3) +
                                            " ms vs " + fmt(t2 * 1e3) + " ms per iteration)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "singsmooth_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 11, "synth": {"nav": {"duration": 120}},)"
                     << R"( "solver": {"tol_rel": 1e-6}})";
  for (const std::string run : {"a", "b"}) {
    const fs::path dir = root / run;
    const std::string base = cli + " ";
    const std::string quiet = " > /dev/null 2>&1";
    for (const std::string args :
         {"synth --config " + cfg.string() + " --out " + (dir / "data").string(),
          "smooth --config " + cfg.string() + " --data " + (dir / "data").string() +
              " --out " + (dir / "out").string()}) {
      const int status = std::system((base + args + quiet).c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return {false, "command failed: " + args};
      }
    }
  }
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    const fs::path other = root / "b" / rel;
    if (!fs::exists(other)) return {false, "missing " + rel.string()};
    std::string x = slurp(e.path()), y = slurp(other);
    if (rel.filename() == "summary.json") {
      // Elapsed time is the only field allowed to differ.
      auto a = nlohmann::json::parse(x), b = nlohmann::json::parse(y);
      a.erase("wall_time");
      b.erase("wall_time");
      x = a.dump();
      y = b.dump();
    }
    if (x != y) return {false, rel.string() + " differs"};
    ++files;
  }
  fs::remove_all(root);
  return {files > 0, std::to_string(files) + " files identical"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <cli binary>\n";
    return 2;
  }
  const std::string cli = argv[1];
  struct Criterion {
    std::string name;
    double limit;  // seconds; 0 for none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"prox vs oracle", 10, prox_vs_oracle},
      {"Moreau decomposition", 5, moreau},
      {"oracle triangle", 30, oracle_triangle},
      {"singular l2 equivalence", 30, singular_l2},
      {"outlier scenario", 60, fig1},
      {"bias recovery", 60, bias_recovery},
      {"deadzone on quantized data", 120, deadzone},
      {"fix-gap degradation", 300, fix_gap},
      {"per-iteration cost linear in N", 120, complexity},
      {"CLI determinism", 0, [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit > 0 && wall > c.limit) {
      o.pass = false;
      o.detail += ", over the " + fmt(c.limit) + " s budget";
    }
    failed += !o.pass;
    std::printf("[%s] criterion %zu: %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                c.name.c_str(), o.detail.c_str(), wall);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
