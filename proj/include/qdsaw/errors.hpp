// Copyright 2026 The qdsaw Authors
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

#include <stdexcept>
#include <string>

namespace qdsaw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-domain physical or numerical parameter (negative rate, bad range).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (envelope files, imported calibration data).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Mismatched array shapes or time grids.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Integration or steady-state failure. Carries the simulation time in seconds.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double time_s)
      : Error(what + " (t = " + std::to_string(time_s * 1e9) + " ns)"), time_(time_s) {}
  explicit NumericalError(const std::string& what) : Error(what), time_(0.0) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A fit or post-processing step could not produce a meaningful answer.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for the requested fit.
class InsufficientDataError : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

}  // namespace qdsaw
