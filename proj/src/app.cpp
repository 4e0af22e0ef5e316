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

#include "singsmooth/app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <set>

#include "singsmooth/block_linalg.hpp"
#include "singsmooth/reference.hpp"

namespace singsmooth::app {
namespace fs = std::filesystem;
using io::json;

std::string RunConfig::imu_path() const {
  return imu.empty() ? (fs::path(data) / "imu.csv").string() : imu;
}
std::string RunConfig::usbl_path() const {
  return usbl.empty() ? (fs::path(data) / "usbl.csv").string() : usbl;
}
std::string RunConfig::truth_path() const {
  return truth.empty() ? (fs::path(data) / "truth.csv").string() : truth;
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> keys = {
      "seed", "gap", "out", "data", "imu", "usbl", "truth", "problem", "strict",
      "dump_matrices", "huber_kappa", "nav", "solver", "synth"};
  for (const auto& [k, _] : j.items()) {
    if (!keys.count(k)) throw ConfigError("config: unknown key '" + k + "'");
  }
  read_key(j, "seed", c.seed);
  read_key(j, "gap", c.gap);
  read_key(j, "out", c.out);
  read_key(j, "data", c.data);
  read_key(j, "imu", c.imu);
  read_key(j, "usbl", c.usbl);
  read_key(j, "truth", c.truth);
  read_key(j, "problem", c.problem);
  read_key(j, "strict", c.strict);
  read_key(j, "dump_matrices", c.dump_matrices);
  read_key(j, "huber_kappa", c.huber_kappa);
  if (j.contains("nav")) c.nav = io::nav_config_from_json(j["nav"], c.nav);
  if (j.contains("solver")) c.solver = io::solver_config_from_json(j["solver"], c.solver);
  if (j.contains("synth")) {
    const json& s = j["synth"];
    if (!s.is_object()) throw ConfigError("synth: expected an object");
    for (const auto& [k, _] : s.items()) {
      if (k != "fig1" && k != "nav") throw ConfigError("synth: unknown key '" + k + "'");
    }
    if (s.contains("fig1")) c.fig1 = io::fig1_config_from_json(s["fig1"], c.fig1);
    if (s.contains("nav")) c.scenario = io::nav_scenario_from_json(s["nav"], c.scenario);
  }
  if (!(c.gap >= 0.0)) throw ConfigError("gap must be nonnegative");
  if (!(c.huber_kappa > 0.0)) throw ConfigError("huber_kappa must be positive");
  return c;
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"gap", c.gap},
          {"out", c.out},
          {"data", c.data},
          {"imu", c.imu},
          {"usbl", c.usbl},
          {"truth", c.truth},
          {"problem", c.problem},
          {"strict", c.strict},
          {"dump_matrices", c.dump_matrices},
          {"huber_kappa", c.huber_kappa},
          {"nav", io::to_json(c.nav)},
          {"solver", io::to_json(c.solver)},
          {"synth", {{"fig1", io::to_json(c.fig1)}, {"nav", io::to_json(c.scenario)}}}};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, end);
}

namespace {

struct CsvTable {
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw ConfigError(path + ": expected header '" + header + "', got '" + line + "'");
  }
  const auto ncols = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  CsvTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const char* first = line.data() + pos;
      const char* last = line.data() + next;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
      }
      row.push_back(v);
      pos = next + 1;
    }
    if (row.size() != ncols) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(ncols) + " fields");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  return os;
}

void write_row(std::ostream& os, std::initializer_list<double> vals) {
  bool first = true;
  for (double v : vals) {
    if (!first) os << ',';
    os << format_number(v);
    first = false;
  }
  os << '\n';
}

void write_json(const std::string& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

}  // namespace

std::vector<nav::ImuSample> read_imu_csv(const std::string& path) {
  std::vector<nav::ImuSample> out;
  for (const auto& r : read_csv(path, "t,ax,ay,az,heading,pitch,roll").rows) {
    nav::ImuSample s;
    s.t = r[0];
    s.accel = nav::Vec3(r[1], r[2], r[3]);
    s.heading = r[4];
    s.pitch = r[5];
    s.roll = r[6];
    out.push_back(s);
  }
  return out;
}

std::vector<nav::UsblFix> read_usbl_csv(const std::string& path) {
  std::vector<nav::UsblFix> out;
  for (const auto& r : read_csv(path, "t,x,y,z").rows) {
    out.push_back({r[0], nav::Vec3(r[1], r[2], r[3])});
  }
  return out;
}

std::vector<synth::TruthSample> read_truth_csv(const std::string& path) {
  std::vector<synth::TruthSample> out;
  for (const auto& r : read_csv(path, "t,x,y,z,vx,vy,vz").rows) {
    synth::TruthSample s;
    s.t = r[0];
    s.pos = nav::Vec3(r[1], r[2], r[3]);
    s.vel = nav::Vec3(r[4], r[5], r[6]);
    out.push_back(s);
  }
  return out;
}

void write_imu_csv(const std::string& path, const std::vector<nav::ImuSample>& imu) {
  auto os = open_out(path);
  os << "t,ax,ay,az,heading,pitch,roll\n";
  for (const auto& s : imu) {
    write_row(os, {s.t, s.accel[0], s.accel[1], s.accel[2], s.heading, s.pitch, s.roll});
  }
}

void write_usbl_csv(const std::string& path, const std::vector<nav::UsblFix>& usbl) {
  auto os = open_out(path);
  os << "t,x,y,z\n";
  for (const auto& f : usbl) write_row(os, {f.t, f.pos[0], f.pos[1], f.pos[2]});
}

void write_truth_csv(const std::string& path, const std::vector<synth::TruthSample>& truth) {
  auto os = open_out(path);
  os << "t,x,y,z,vx,vy,vz\n";
  for (const auto& s : truth) {
    write_row(os, {s.t, s.pos[0], s.pos[1], s.pos[2], s.vel[0], s.vel[1], s.vel[2]});
  }
}

namespace {

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParameterError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const RankDeficiencyError& e) {
    log << "model error: " << e.what() << '\n';
    return kModelError;
  } catch (const ModelError& e) {
    log << "model error: " << e.what() << '\n';
    return kModelError;
  } catch (const DimensionError& e) {
    log << "model error: " << e.what() << '\n';
    return kModelError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFailure;
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

std::string out_file(const RunConfig& cfg, const char* name) {
  return (fs::path(cfg.out) / name).string();
}

void dump_matrices(const RunConfig& cfg, const Problem& p) {
  const Assembly a = assemble(p);
  {
    auto os = open_out(out_file(cfg, "A.mtx"));
    write_matrix_market(os, a.A);
  }
  auto os = open_out(out_file(cfg, "w_hat.mtx"));
  os << "%%MatrixMarket matrix array real general\n" << a.w_hat.size() << " 1\n";
  for (Index i = 0; i < a.w_hat.size(); ++i) os << format_number(a.w_hat[i]) << '\n';
}

int finish(const RunConfig& cfg, const SolveResult& r, std::ostream& log) {
  if (r.converged) return kOk;
  log << "warning: solver stopped after " << r.iterations
      << " iterations without meeting the tolerances\n";
  return cfg.strict ? kNotConverged : kOk;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int smooth_generic(const RunConfig& cfg, std::ostream& log) {
  std::ifstream in(cfg.problem);
  if (!in) throw ConfigError("cannot open problem file " + cfg.problem);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("problem " + cfg.problem + ": " + e.what());
  }
  const Problem p = io::problem_from_json(j);
  ensure_dir(cfg.out);
  if (cfg.dump_matrices) dump_matrices(cfg, p);
  const auto t0 = std::chrono::steady_clock::now();
  const Smoother s(p, cfg.solver.pivot_tol, cfg.solver.precondition);
  const SolveResult r = s.solve(cfg.solver);
  const double wall = seconds_since(t0);

  const Mat X = r.trajectory();
  {
    auto os = open_out(out_file(cfg, "states.csv"));
    os << "k";
    for (Index i = 0; i < X.cols(); ++i) os << ",x" << i + 1;
    os << '\n';
    for (Index k = 0; k < X.rows(); ++k) {
      os << k + 1;
      for (Index i = 0; i < X.cols(); ++i) os << ',' << format_number(X(k, i));
      os << '\n';
    }
  }
  {
    auto os = open_out(out_file(cfg, "diagnostics.csv"));
    write_diagnostics_csv(os, r);
  }
  write_json(out_file(cfg, "summary.json"),
             {{"steps", p.num_steps()},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"feas_residual", r.feas_residual},
              {"objective", objective(p, r.z)},
              {"wall_time", wall}});
  log << "smooth: " << r.iterations << " iterations, objective "
      << format_number(objective(p, r.z)) << '\n';
  return finish(cfg, r, log);
}

struct NavRun {
  nav::NavModel model;
  SolveResult result;
  int presolve_iterations = 0;
  double wall = 0.0;
};

NavRun run_nav(const std::vector<nav::ImuSample>& imu, const std::vector<nav::UsblFix>& usbl,
               const nav::NavConfig& nc, const SolverConfig& sc) {
  NavRun run;
  const auto t0 = std::chrono::steady_clock::now();
  nav::NavSolution sol = nav::smooth(imu, usbl, nc, sc);
  run.model = std::move(sol.model);
  run.result = std::move(sol.result);
  run.presolve_iterations = sol.presolve_iterations;
  run.wall = seconds_since(t0);
  return run;
}

// Truth rows must line up with the IMU samples.
void check_truth(const std::vector<synth::TruthSample>& truth, const std::vector<double>& times) {
  if (truth.size() != times.size()) {
    throw ConfigError("truth has " + std::to_string(truth.size()) + " rows, expected " +
                      std::to_string(times.size()));
  }
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (std::abs(truth[k].t - times[k]) > 1e-6) {
      throw ConfigError("truth timestamps do not match the IMU stream at row " +
                        std::to_string(k + 1));
    }
  }
}

}  // namespace

int cmd_synth(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    ensure_dir(cfg.out);
    const synth::Fig1Data f = synth::make_fig1(cfg.fig1, cfg.seed);
    {
      auto os = open_out(out_file(cfg, "fig1.csv"));
      os << "t,pos,vel,y,outlier\n";
      for (std::size_t k = 0; k < f.t.size(); ++k) {
        const auto i = static_cast<Index>(k);
        write_row(os, {f.t[k], f.pos[i], f.vel[i], f.y[i], f.outlier[k] ? 1.0 : 0.0});
      }
    }
    const synth::NavData d = synth::make_nav(cfg.scenario, cfg.seed);
    write_imu_csv(out_file(cfg, "imu.csv"), d.imu);
    write_usbl_csv(out_file(cfg, "usbl.csv"), d.usbl);
    write_truth_csv(out_file(cfg, "truth.csv"), d.truth);
    write_json(out_file(cfg, "scenario.json"),
               {{"seed", cfg.seed},
                {"fig1", io::to_json(cfg.fig1)},
                {"nav", io::to_json(cfg.scenario)}});
    log << "synth: wrote fig1 (" << f.t.size() << " steps) and nav (" << d.imu.size()
        << " IMU samples, " << d.usbl.size() << " fixes) to " << cfg.out << '\n';
    return kOk;
  });
}

int cmd_smooth(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    if (!cfg.problem.empty()) return smooth_generic(cfg, log);
    const auto imu = read_imu_csv(cfg.imu_path());
    const auto usbl = nav::subsample_usbl(read_usbl_csv(cfg.usbl_path()), cfg.gap);
    std::vector<synth::TruthSample> truth;
    const bool have_truth = fs::exists(cfg.truth_path());
    if (have_truth) truth = read_truth_csv(cfg.truth_path());

    ensure_dir(cfg.out);
    const NavRun run = run_nav(imu, usbl, cfg.nav, cfg.solver);
    if (cfg.dump_matrices) dump_matrices(cfg, run.model.problem);
    const Mat X = run.result.trajectory();
    const std::vector<double>& times = run.model.times;
    {
      auto os = open_out(out_file(cfg, "track.csv"));
      os << "t,x,y,z,vx,vy,vz,ax,ay,az";
      if (run.model.has_bias) os << ",b1,b2,b3";
      os << '\n';
      for (Index k = 0; k < X.rows(); ++k) {
        os << format_number(times[k]);
        for (Index i = 0; i < X.cols(); ++i) os << ',' << format_number(X(k, i));
        os << '\n';
      }
    }
    {
      auto os = open_out(out_file(cfg, "diagnostics.csv"));
      write_diagnostics_csv(os, run.result);
    }
    json summary{{"steps", X.rows()},
                 {"fixes", run.model.fix_steps.size()},
                 {"gap", cfg.gap},
                 {"iterations", run.result.iterations},
                 {"presolve_iterations", run.presolve_iterations},
                 {"converged", run.result.converged},
                 {"feas_residual", run.result.feas_residual},
                 {"objective", objective(run.model.problem, run.result.z)}};
    if (run.model.has_bias) {
      const auto b = X.row(X.rows() - 1).segment<3>(nav::kBias);
      summary["bias"] = {b[0], b[1], b[2]};
    }
    if (have_truth) {
      check_truth(truth, times);
      summary["rmse"] = synth::position_rmse(X, truth);
    }
    summary["wall_time"] = run.wall;
    write_json(out_file(cfg, "summary.json"), summary);
    log << "smooth: " << X.rows() << " steps, " << run.model.fix_steps.size() << " fixes, "
        << run.result.iterations << " iterations";
    if (have_truth) log << ", position RMSE " << format_number(summary["rmse"].get<double>());
    log << '\n';
    return finish(cfg, run.result, log);
  });
}

namespace {

struct Fig1Csv {
  std::vector<double> t;
  Vec pos, y;
};

Fig1Csv read_fig1_csv(const std::string& path) {
  const auto tab = read_csv(path, "t,pos,vel,y,outlier");
  Fig1Csv f;
  const auto n = static_cast<Index>(tab.rows.size());
  f.pos.resize(n);
  f.y.resize(n);
  for (Index k = 0; k < n; ++k) {
    f.t.push_back(tab.rows[k][0]);
    f.pos[k] = tab.rows[k][1];
    f.y[k] = tab.rows[k][3];
  }
  return f;
}

double rmse(const Vec& a, const Vec& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    synth::Fig1Config fc = cfg.fig1;
    const std::string scen = (fs::path(cfg.data) / "scenario.json").string();
    if (fs::exists(scen)) {
      std::ifstream in(scen);
      const json j = json::parse(in);
      if (j.contains("fig1")) fc = io::fig1_config_from_json(j["fig1"], fc);
    }
    ensure_dir(cfg.out);
    auto table = open_out(out_file(cfg, "compare.csv"));
    table << "scenario,method,rmse,iterations,converged\n";
    bool all_converged = true;

    // Fig 1 scenario: singular process covariance with outliers.
    const Fig1Csv f = read_fig1_csv((fs::path(cfg.data) / "fig1.csv").string());
    synth::Fig1Data fd;
    fd.t = f.t;
    fd.y = f.y;
    fc.N = static_cast<Index>(f.t.size());
    const Penalty quad = Penalty::quadratic();
    const Penalty hub = Penalty::huber(cfg.huber_kappa);
    const Problem p_l2 = synth::fig1_problem(fd, fc, quad, quad);
    const Problem p_hub = synth::fig1_problem(fd, fc, hub, hub);
    const SolveResult r_l2 = solve(p_l2, cfg.solver);
    const SolveResult r_hub = solve(p_hub, cfg.solver);
    const reference::PinvHuberResult r_pinv =
        reference::pinv_huber_smoother(p_l2, cfg.huber_kappa);
    const Vec x_l2 = r_l2.trajectory().col(0);
    const Vec x_hub = r_hub.trajectory().col(0);
    const Vec x_pinv = r_pinv.trajectory.col(0);
    table << "fig1,l2_singular," << format_number(rmse(x_l2, f.pos)) << ',' << r_l2.iterations
          << ',' << r_l2.converged << '\n';
    table << "fig1,huber_singular," << format_number(rmse(x_hub, f.pos)) << ','
          << r_hub.iterations << ',' << r_hub.converged << '\n';
    table << "fig1,pinv_huber," << format_number(rmse(x_pinv, f.pos)) << ','
          << r_pinv.iterations << ',' << r_pinv.converged << '\n';
    all_converged = all_converged && r_l2.converged && r_hub.converged && r_pinv.converged;
    {
      auto os = open_out(out_file(cfg, "fig1_tracks.csv"));
      os << "t,truth,y,l2_singular,huber_singular,pinv_huber\n";
      for (Index k = 0; k < f.pos.size(); ++k) {
        write_row(os, {f.t[k], f.pos[k], f.y[k], x_l2[k], x_hub[k], x_pinv[k]});
      }
    }

    // Navigation ablation: add the bias states, then the deadzone loss.
    const auto imu = read_imu_csv(cfg.imu_path());
    const auto usbl = nav::subsample_usbl(read_usbl_csv(cfg.usbl_path()), cfg.gap);
    const auto truth = read_truth_csv(cfg.truth_path());
    struct Method {
      const char* name;
      nav::NavConfig nc;
    };
    std::vector<Method> methods(3, Method{"", cfg.nav});
    methods[0].name = "l2";
    methods[0].nc.accel_loss = nav::AccelLoss::kQuadratic;
    methods[0].nc.estimate_bias = false;
    methods[1].name = "l2_bias";
    methods[1].nc.accel_loss = nav::AccelLoss::kQuadratic;
    methods[1].nc.estimate_bias = true;
    methods[2].name = "hubnik_bias";
    methods[2].nc.accel_loss = nav::AccelLoss::kHubnik;
    methods[2].nc.estimate_bias = true;
    std::vector<std::future<NavRun>> jobs;
    for (const auto& m : methods) {
      jobs.push_back(std::async(std::launch::async,
                                [&, nc = m.nc] { return run_nav(imu, usbl, nc, cfg.solver); }));
    }
    std::vector<NavRun> runs;
    for (auto& j : jobs) runs.push_back(j.get());
    check_truth(truth, runs[0].model.times);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& r = runs[i].result;
      table << "nav," << methods[i].name << ','
            << format_number(synth::position_rmse(r.trajectory(), truth)) << ','
            << r.iterations << ',' << r.converged << '\n';
      all_converged = all_converged && r.converged;
    }
    {
      auto os = open_out(out_file(cfg, "nav_tracks.csv"));
      os << "t,truth_x,truth_y,truth_z";
      for (const auto& m : methods) os << ',' << m.name << "_x," << m.name << "_y," << m.name << "_z";
      os << '\n';
      std::vector<Mat> X;
      for (const auto& r : runs) X.push_back(r.result.trajectory());
      for (std::size_t k = 0; k < truth.size(); ++k) {
        const auto i = static_cast<Index>(k);
        os << format_number(truth[k].t);
        for (int c = 0; c < 3; ++c) os << ',' << format_number(truth[k].pos[c]);
        for (const auto& x : X) {
          for (int c = 0; c < 3; ++c) os << ',' << format_number(x(i, c));
        }
        os << '\n';
      }
    }
    log << "compare: wrote " << out_file(cfg, "compare.csv") << '\n';
    if (!all_converged) {
      log << "warning: at least one method stopped before meeting its tolerance\n";
      if (cfg.strict) return static_cast<int>(kNotConverged);
    }
    return static_cast<int>(kOk);
  });
}

}  // namespace singsmooth::app
