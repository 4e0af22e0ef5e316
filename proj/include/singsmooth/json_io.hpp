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

#include "json.hpp"

#include "singsmooth/model.hpp"
#include "singsmooth/navigation.hpp"
#include "singsmooth/penalty.hpp"
#include "singsmooth/solver.hpp"
#include "singsmooth/synth.hpp"

namespace singsmooth::io {

using nlohmann::json;

// {"kind": "hubnik", "epsilon": 0.05, "kappa": 1.0, "scale": 1.0}. Box bounds
// are arrays where null stands for an infinite bound.
Penalty penalty_from_json(const json& j);
json to_json(const Penalty& p);

// The *_from_json readers start from `base` and override the keys present.
// Unknown keys are rejected with ConfigError.
nav::NavConfig nav_config_from_json(const json& j, nav::NavConfig base = {});
json to_json(const nav::NavConfig& c);

SolverConfig solver_config_from_json(const json& j, SolverConfig base = {});
json to_json(const SolverConfig& c);

synth::Fig1Config fig1_config_from_json(const json& j, synth::Fig1Config base = {});
json to_json(const synth::Fig1Config& c);

synth::NavScenarioConfig nav_scenario_from_json(const json& j,
                                                synth::NavScenarioConfig base = {});
json to_json(const synth::NavScenarioConfig& c);

// {"x0": [...], "steps": [{"G": [[...]], "C": ..., "H": ..., "S": ..., "y": [...],
//   "process": penalty | [{"offset", "length", "penalty"}], "measurement": ...,
//   "state": penalty}]}. Matrices are row-major nested arrays. An empty C or S
// ([] or absent) means zero width; G defaults to the identity.
Problem problem_from_json(const json& j);
json to_json(const Problem& p);

Mat matrix_from_json(const json& j, Index rows_hint = -1, Index cols_hint = -1);
json to_json(const Mat& m);
Vec vector_from_json(const json& j);
json to_json(const Vec& v);

}  // namespace singsmooth::io
