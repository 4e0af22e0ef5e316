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

// Command-line front end: synth, smooth, compare.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "singsmooth/app.hpp"

namespace {

using singsmooth::app::RunConfig;

struct Overrides {
  std::string config;
  std::optional<double> gap;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> imu, usbl, truth, problem;
  std::optional<int> max_iter;
  std::optional<double> tol;
  bool dump_matrices = false;
  bool strict = false;
  bool dump_config = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--gap", o.gap, "USBL fix gap in seconds (0 keeps every fix)");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--data", o.data, "Directory with the input CSVs");
  cmd->add_option("--imu", o.imu, "IMU CSV (t,ax,ay,az,heading,pitch,roll)");
  cmd->add_option("--usbl", o.usbl, "USBL CSV (t,x,y,z)");
  cmd->add_option("--truth", o.truth, "Truth CSV (t,x,y,z,vx,vy,vz)");
  cmd->add_option("--max-iter", o.max_iter, "Solver iteration limit");
  cmd->add_option("--tol", o.tol, "Relative step tolerance");
  cmd->add_flag("--dump-matrices", o.dump_matrices, "Write A and w_hat in Matrix Market format");
  cmd->add_flag("--strict", o.strict, "Exit with code 4 if the solver does not converge");
  cmd->add_flag("--dump-config", o.dump_config, "Print the effective configuration and exit");
}

RunConfig effective(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : singsmooth::app::load_config(o.config);
  if (o.gap) c.gap = *o.gap;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.data) c.data = *o.data;
  if (o.imu) c.imu = *o.imu;
  if (o.usbl) c.usbl = *o.usbl;
  if (o.truth) c.truth = *o.truth;
  if (o.problem) c.problem = *o.problem;
  if (o.max_iter) c.solver.max_iter = *o.max_iter;
  if (o.tol) c.solver.tol_rel = *o.tol;
  if (o.dump_matrices) c.dump_matrices = true;
  if (o.strict) c.strict = true;
  // Re-validate after the command-line overrides.
  return singsmooth::app::config_from_json(singsmooth::app::to_json(c));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Kalman smoothing for singular state-space models"};
  app.require_subcommand(1);
  Overrides o;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic scenarios");
  auto* smooth = app.add_subcommand("smooth", "Smooth IMU and USBL data (or a problem JSON)");
  auto* compare = app.add_subcommand("compare", "Run the baseline comparisons");
  for (auto* cmd : {synth, smooth, compare}) add_common(cmd, o);
  smooth->add_option("--problem", o.problem, "Generic problem JSON instead of navigation data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : singsmooth::app::kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = effective(o);
  } catch (const singsmooth::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return singsmooth::app::kConfigError;
  }
  if (o.dump_config) {
    std::cout << singsmooth::app::to_json(cfg).dump(2) << '\n';
    return 0;
  }
  if (synth->parsed()) return singsmooth::app::cmd_synth(cfg, std::cerr);
  if (smooth->parsed()) return singsmooth::app::cmd_smooth(cfg, std::cerr);
  return singsmooth::app::cmd_compare(cfg, std::cerr);
}
