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

#include "singsmooth/json_io.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace singsmooth::io {
namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

nav::Vec3 vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected 3 numbers");
  return nav::Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to_json(const nav::Vec3& v) { return json::array({v[0], v[1], v[2]}); }

double bound_from_json(const json& j, double inf) {
  return j.is_null() ? inf : j.get<double>();
}

json bound_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

SeparablePenalty separable_from_json(const json& j, Index length, const std::string& where) {
  if (j.is_null()) return {};
  if (j.is_object()) return SeparablePenalty::uniform(penalty_from_json(j), length);
  if (!j.is_array()) throw ConfigError(where + ": expected a penalty or a list of terms");
  SeparablePenalty sp;
  for (const auto& t : j) {
    reject_unknown(t, {"offset", "length", "penalty"}, where);
    sp.add(t.at("offset").get<Index>(), t.at("length").get<Index>(),
           penalty_from_json(t.at("penalty")));
  }
  return sp;
}

json separable_to_json(const SeparablePenalty& sp) {
  json out = json::array();
  for (const auto& t : sp.terms()) {
    out.push_back({{"offset", t.offset}, {"length", t.length}, {"penalty", to_json(t.penalty)}});
  }
  return out;
}

}  // namespace

Penalty penalty_from_json(const json& j) {
  if (j.is_string()) return penalty_from_json(json{{"kind", j}});
  reject_unknown(j, {"kind", "scale", "tau", "kappa", "epsilon", "lower", "upper"}, "penalty");
  if (!j.contains("kind")) throw ConfigError("penalty: missing 'kind'");
  PenaltyKind kind;
  try {
    kind = penalty_kind_from_string(j.at("kind").get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(std::string("penalty: ") + e.what());
  }
  const double scale = j.value("scale", 1.0);
  const double tau = j.value("tau", 0.5);
  const double kappa = j.value("kappa", 1.0);
  const double eps = j.value("epsilon", 0.0);
  try {
    switch (kind) {
      case PenaltyKind::kZero: return Penalty::zero();
      case PenaltyKind::kQuadratic: return Penalty::quadratic(scale);
      case PenaltyKind::kL1: return Penalty::l1(scale);
      case PenaltyKind::kQuantile: return Penalty::quantile(tau, scale);
      case PenaltyKind::kHuber: return Penalty::huber(kappa, scale);
      case PenaltyKind::kQuantileHuber: return Penalty::quantile_huber(tau, kappa, scale);
      case PenaltyKind::kVapnik: return Penalty::vapnik(eps, scale);
      case PenaltyKind::kHubnik: return Penalty::hubnik(eps, kappa, scale);
      case PenaltyKind::kElasticNet: return Penalty::elastic_net(scale);
      case PenaltyKind::kBox: {
        const auto& lo = j.at("lower");
        const auto& hi = j.at("upper");
        if (!lo.is_array() || !hi.is_array() || lo.size() != hi.size()) {
          throw ConfigError("box penalty: 'lower' and 'upper' must be arrays of equal length");
        }
        constexpr double inf = std::numeric_limits<double>::infinity();
        Vec l(lo.size()), u(hi.size());
        for (std::size_t i = 0; i < lo.size(); ++i) {
          l[i] = bound_from_json(lo[i], -inf);
          u[i] = bound_from_json(hi[i], inf);
        }
        return Penalty::box(l, u);
      }
    }
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("penalty: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("penalty: ") + e.what());
  }
  throw ConfigError("penalty: unsupported kind");
}

json to_json(const Penalty& p) {
  json j{{"kind", to_string(p.kind())}};
  switch (p.kind()) {
    case PenaltyKind::kZero:
      break;
    case PenaltyKind::kBox: {
      json lo = json::array(), hi = json::array();
      for (Index i = 0; i < p.lower().size(); ++i) {
        lo.push_back(bound_to_json(p.lower()[i]));
        hi.push_back(bound_to_json(p.upper()[i]));
      }
      j["lower"] = lo;
      j["upper"] = hi;
      break;
    }
    default:
      j["scale"] = p.scale();
  }
  switch (p.kind()) {
    case PenaltyKind::kQuantile: j["tau"] = p.tau(); break;
    case PenaltyKind::kHuber: j["kappa"] = p.kappa(); break;
    case PenaltyKind::kQuantileHuber: j["tau"] = p.tau(); j["kappa"] = p.kappa(); break;
    case PenaltyKind::kVapnik: j["epsilon"] = p.epsilon(); break;
    case PenaltyKind::kHubnik: j["epsilon"] = p.epsilon(); j["kappa"] = p.kappa(); break;
    default: break;
  }
  return j;
}

nav::NavConfig nav_config_from_json(const json& j, nav::NavConfig c) {
  const std::string w = "nav";
  reject_unknown(j, {"T", "r_s", "U_diag", "deadzone_epsilon", "hub_kappa", "accel_loss",
                     "process_penalty", "usbl_penalty", "estimate_bias", "bias_prior",
                     "damping", "diffuse_initial"}, w);
  read(j, "T", c.T, w);
  read(j, "r_s", c.r_s, w);
  if (j.contains("U_diag")) c.U_diag = vec3_from_json(j["U_diag"], w + ".U_diag");
  read(j, "deadzone_epsilon", c.deadzone_epsilon, w);
  read(j, "hub_kappa", c.hub_kappa, w);
  if (j.contains("accel_loss")) {
    const auto s = j["accel_loss"].get<std::string>();
    if (s == "hubnik") {
      c.accel_loss = nav::AccelLoss::kHubnik;
    } else if (s == "quadratic") {
      c.accel_loss = nav::AccelLoss::kQuadratic;
    } else {
      throw ConfigError("nav.accel_loss: expected 'hubnik' or 'quadratic'");
    }
  }
  if (j.contains("process_penalty")) c.process_penalty = penalty_from_json(j["process_penalty"]);
  if (j.contains("usbl_penalty")) c.usbl_penalty = penalty_from_json(j["usbl_penalty"]);
  read(j, "estimate_bias", c.estimate_bias, w);
  if (j.contains("bias_prior")) c.bias_prior = penalty_from_json(j["bias_prior"]);
  read(j, "damping", c.damping, w);
  read(j, "diffuse_initial", c.diffuse_initial, w);
  try {
    c.check();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("nav: ") + e.what());
  }
  return c;
}

json to_json(const nav::NavConfig& c) {
  return {{"T", c.T},
          {"r_s", c.r_s},
          {"U_diag", vec3_to_json(c.U_diag)},
          {"deadzone_epsilon", c.deadzone_epsilon},
          {"hub_kappa", c.hub_kappa},
          {"accel_loss", c.accel_loss == nav::AccelLoss::kHubnik ? "hubnik" : "quadratic"},
          {"process_penalty", to_json(c.process_penalty)},
          {"usbl_penalty", to_json(c.usbl_penalty)},
          {"estimate_bias", c.estimate_bias},
          {"bias_prior", to_json(c.bias_prior)},
          {"damping", c.damping},
          {"diffuse_initial", c.diffuse_initial}};
}

SolverConfig solver_config_from_json(const json& j, SolverConfig c) {
  const std::string w = "solver";
  reject_unknown(j, {"tau", "sigma", "max_iter", "tol_rel", "tol_feas", "log_every", "pivot_tol"}, w);
  read(j, "tau", c.tau, w);
  read(j, "sigma", c.sigma, w);
  read(j, "max_iter", c.max_iter, w);
  read(j, "tol_rel", c.tol_rel, w);
  read(j, "tol_feas", c.tol_feas, w);
  read(j, "log_every", c.log_every, w);
  read(j, "pivot_tol", c.pivot_tol, w);
  try {
    c.check();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return c;
}

json to_json(const SolverConfig& c) {
  return {{"tau", c.tau},           {"sigma", c.sigma},       {"max_iter", c.max_iter},
          {"tol_rel", c.tol_rel},   {"tol_feas", c.tol_feas}, {"log_every", c.log_every},
          {"pivot_tol", c.pivot_tol}};
}

synth::Fig1Config fig1_config_from_json(const json& j, synth::Fig1Config c) {
  const std::string w = "synth.fig1";
  reject_unknown(j, {"N", "dt", "sigma_w", "sigma_v", "outlier_fraction", "outlier_scale"}, w);
  read(j, "N", c.N, w);
  read(j, "dt", c.dt, w);
  read(j, "sigma_w", c.sigma_w, w);
  read(j, "sigma_v", c.sigma_v, w);
  read(j, "outlier_fraction", c.outlier_fraction, w);
  read(j, "outlier_scale", c.outlier_scale, w);
  try {
    c.check();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const synth::Fig1Config& c) {
  return {{"N", c.N},
          {"dt", c.dt},
          {"sigma_w", c.sigma_w},
          {"sigma_v", c.sigma_v},
          {"outlier_fraction", c.outlier_fraction},
          {"outlier_scale", c.outlier_scale}};
}

synth::NavScenarioConfig nav_scenario_from_json(const json& j, synth::NavScenarioConfig c) {
  const std::string w = "synth.nav";
  reject_unknown(j, {"duration", "T", "fix_period", "accel_noise_std", "quantum", "bias",
                     "usbl_std", "accel_amplitude", "harmonics", "min_period", "max_period", "max_tilt"}, w);
  read(j, "duration", c.duration, w);
  read(j, "T", c.T, w);
  read(j, "fix_period", c.fix_period, w);
  read(j, "accel_noise_std", c.accel_noise_std, w);
  read(j, "quantum", c.quantum, w);
  if (j.contains("bias")) c.bias = vec3_from_json(j["bias"], w + ".bias");
  if (j.contains("usbl_std")) c.usbl_std = vec3_from_json(j["usbl_std"], w + ".usbl_std");
  read(j, "accel_amplitude", c.accel_amplitude, w);
  read(j, "harmonics", c.harmonics, w);
  read(j, "min_period", c.min_period, w);
  read(j, "max_period", c.max_period, w);
  read(j, "max_tilt", c.max_tilt, w);
  try {
    c.check();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const synth::NavScenarioConfig& c) {
  return {{"duration", c.duration},
          {"T", c.T},
          {"fix_period", c.fix_period},
          {"accel_noise_std", c.accel_noise_std},
          {"quantum", c.quantum},
          {"bias", vec3_to_json(c.bias)},
          {"usbl_std", vec3_to_json(c.usbl_std)},
          {"accel_amplitude", c.accel_amplitude},
          {"harmonics", c.harmonics},
          {"min_period", c.min_period},
          {"max_period", c.max_period},
          {"max_tilt", c.max_tilt}};
}

Mat matrix_from_json(const json& j, Index rows_hint, Index cols_hint) {
  if (j.is_null() || (j.is_array() && j.empty())) {
    return Mat::Zero(std::max<Index>(rows_hint, 0), std::max<Index>(cols_hint, 0));
  }
  if (!j.is_array() || !j[0].is_array()) throw ConfigError("matrix: expected nested arrays");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j[r].size()) != cols) throw ConfigError("matrix: ragged rows");
    for (Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json to_json(const Mat& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Vec vector_from_json(const json& j) {
  if (j.is_null()) return Vec();
  if (!j.is_array()) throw ConfigError("vector: expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Problem problem_from_json(const json& j) {
  reject_unknown(j, {"x0", "steps"}, "problem");
  Problem p;
  try {
    p.x0 = vector_from_json(j.at("x0"));
    const Index n = p.x0.size();
    std::size_t k = 0;
    for (const auto& s : j.at("steps")) {
      const std::string w = "problem.steps[" + std::to_string(k++) + "]";
      reject_unknown(s, {"G", "C", "H", "S", "y", "process", "measurement", "state"}, w);
      TimeStep t;
      t.y = vector_from_json(s.value("y", json::array()));
      const Index m = t.y.size();
      t.G = s.contains("G") ? matrix_from_json(s["G"]) : Mat(Mat::Identity(n, n));
      t.C = matrix_from_json(s.value("C", json::array()), n, 0);
      t.H = matrix_from_json(s.value("H", json::array()), m, n);
      t.S = matrix_from_json(s.value("S", json::array()), m, 0);
      t.process = separable_from_json(s.value("process", json()), t.C.cols(), w + ".process");
      t.measurement =
          separable_from_json(s.value("measurement", json()), t.S.cols(), w + ".measurement");
      if (s.contains("state")) t.state = penalty_from_json(s["state"]);
      p.steps.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  return p;
}

json to_json(const Problem& p) {
  json steps = json::array();
  for (const auto& s : p.steps) {
    json t{{"G", to_json(s.G)},
           {"C", to_json(s.C)},
           {"H", to_json(s.H)},
           {"S", to_json(s.S)},
           {"y", to_json(s.y)},
           {"process", separable_to_json(s.process)},
           {"measurement", separable_to_json(s.measurement)}};
    if (s.state.kind() != PenaltyKind::kZero) t["state"] = to_json(s.state);
    steps.push_back(std::move(t));
  }
  return {{"x0", to_json(p.x0)}, {"steps", steps}};
}

}  // namespace singsmooth::io
