// Copyright 2026 The eend Authors. All Rights Reserved.
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

#ifndef EEND_ERRORS_H_
#define EEND_ERRORS_H_

#include <stdexcept>
#include <string>

namespace eend {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A NaN or infinity reached a place that requires finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An API precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A configuration or function parameter is out of range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Run configuration problems: unknown keys, malformed or out-of-range values.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// A file on disk (WAV, parameter file, RTTM) is malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An input is too short or empty to process.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class ConfigMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A fixed-size search or resource pool was exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ScoreError : public Error {
 public:
  using Error::Error;
};

}  // namespace eend

#endif  // EEND_ERRORS_H_
