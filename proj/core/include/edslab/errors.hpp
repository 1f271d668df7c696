/*
 * Copyright 2026 The edslab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace edslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions, unknown model names, malformed configs.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// An oracle returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, int index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// KKT matrix stayed singular or had wrong inertia after maximal regularization,
/// or a modulus was requested at a point where it is undefined.
class RegularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace edslab
