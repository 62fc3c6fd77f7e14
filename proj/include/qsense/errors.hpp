// Copyright 2026 The qsense Authors
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

namespace qsense {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: violated precondition, malformed config, schema error.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (eigensolver, Newton, least squares, ODE).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The Ramsey trace does not contain enough of an oscillation to fit.
class NoOscillationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A measured shift pair lies outside what the sensor or table can resolve.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace qsense
