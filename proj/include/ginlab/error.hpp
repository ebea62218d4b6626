// Copyright 2026 The ginlab Authors
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

namespace ginlab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required input file is missing or unreadable.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Input text does not follow the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes or feature dimensions do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A graph violates one of its structural invariants.
class GraphInvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace ginlab
