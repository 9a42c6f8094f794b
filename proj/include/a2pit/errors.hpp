// a2pit/errors.hpp

// Copyright 2026  The a2pit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace a2pit {

// Root of every error raised by the library. The CLI maps the subclasses
// onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched lengths, sample rates or counts.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// All-zero (silent) signal where energy is required.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

// Out-of-domain scalar parameter (negative alpha, non-positive length, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// More targets or selections requested than there are outputs.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Non-finite entries where finite values are required.
class ValueError : public Error {
 public:
  using Error::Error;
};

// Problem size beyond what an exhaustive routine accepts.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (empty pools, ill-ordered ranges, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unsupported or malformed audio container.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Dataset inconsistency: missing estimates, malformed manifest entries.
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace a2pit
