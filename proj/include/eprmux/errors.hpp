// Copyright 2026 The eprmux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EPRMUX_ERRORS_HPP
#define EPRMUX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eprmux {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside its documented domain (bad index, efficiency > 1, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two sideband labels on the same path overlap in frequency.
class LabelCollision : public Error {
 public:
  using Error::Error;
};

/// Covariance matrix violates the uncertainty relation.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Parametric source driven at or above threshold.
class AboveThreshold : public Error {
 public:
  using Error::Error;
};

/// Iterative routine failed to converge, or a division by a vanishing quantity.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Inverse problem has no solution inside the model's feasible region.
class NoSolution : public Error {
 public:
  using Error::Error;
};

/// Configuration file failed schema validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eprmux

#endif  // EPRMUX_ERRORS_HPP
