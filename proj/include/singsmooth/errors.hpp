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

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace singsmooth {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A penalty or solver parameter outside its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Incompatible vector or matrix sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A problem description that is inconsistent or infeasible.
class ModelError : public Error {
 public:
  using Error::Error;
};

// The Gram matrix of the constraint operator is not positive definite.
// step() is the time index (0-based) of the failing pivot block.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Malformed run configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by the reference implementations when their preconditions fail.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace singsmooth
