// core/include/fastvc/error.hpp

// Copyright 2026  FastVC Authors

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

#ifndef FASTVC_ERROR_HPP_
#define FASTVC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fastvc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or stream could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a documented format or consistency rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A function argument is outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Matrix or signal dimensions do not match what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An object is used before required initialization, or out of order.
class StateError : public Error {
 public:
  using Error::Error;
};

/// A named entity (speaker, parameter, metric) is unknown.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must form a pair cannot be matched.
class PairingError : public Error {
 public:
  using Error::Error;
};

/// A configuration value or combination is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fastvc

#endif  // FASTVC_ERROR_HPP_
