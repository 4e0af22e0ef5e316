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
#include <iosfwd>
#include <string>
#include <vector>

#include "singsmooth/json_io.hpp"
#include "singsmooth/navigation.hpp"
#include "singsmooth/solver.hpp"
#include "singsmooth/synth.hpp"

namespace singsmooth::app {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kModelError = 3,
  kNotConverged = 4,
};

struct RunConfig {
  std::uint64_t seed = 1;
  double gap = 0.0;            // USBL subsampling gap (s); 0 keeps every fix
  std::string out = "out";     // output directory
  std::string data = ".";      // directory holding the input CSVs
  std::string imu;             // default <data>/imu.csv
  std::string usbl;            // default <data>/usbl.csv
  std::string truth;           // default <data>/truth.csv, optional
  std::string problem;         // generic problem JSON; bypasses the nav model
  bool strict = false;
  bool dump_matrices = false;
  double huber_kappa = 1.0;    // fig1 comparison, whitened units

  nav::NavConfig nav;
  SolverConfig solver;
  synth::Fig1Config fig1;
  synth::NavScenarioConfig scenario;

  std::string imu_path() const;
  std::string usbl_path() const;
  std::string truth_path() const;
};

RunConfig config_from_json(const io::json& j, RunConfig base = {});
io::json to_json(const RunConfig& c);
// Reads a JSON file into the defaults. Throws ConfigError.
RunConfig load_config(const std::string& path);

// CSV with a mandatory header. Throws ConfigError on malformed input.
std::vector<nav::ImuSample> read_imu_csv(const std::string& path);
std::vector<nav::UsblFix> read_usbl_csv(const std::string& path);
std::vector<synth::TruthSample> read_truth_csv(const std::string& path);
void write_imu_csv(const std::string& path, const std::vector<nav::ImuSample>& imu);
void write_usbl_csv(const std::string& path, const std::vector<nav::UsblFix>& usbl);
void write_truth_csv(const std::string& path, const std::vector<synth::TruthSample>& truth);

// Shortest round-trip decimal for a double, locale independent.
std::string format_number(double v);

// The subcommands write into cfg.out and report progress on `log`. They
// return an ExitCode and throw only on programming errors.
int cmd_synth(const RunConfig& cfg, std::ostream& log);
int cmd_smooth(const RunConfig& cfg, std::ostream& log);
int cmd_compare(const RunConfig& cfg, std::ostream& log);

}  // namespace singsmooth::app
