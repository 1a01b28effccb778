// SPDX-License-Identifier: Apache-2.0
//
// dcrs - data-carrying reference signals on the Grassmann manifold
// Copyright (C) 2026 The dcrs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcrs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient or otherwise degenerate numerical input.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain (probability outside (0,1), beta > 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A (M, T) combination a construction does not define.
class UnsupportedShape : public Error {
 public:
  using Error::Error;
};

class NotOnManifold : public Error {
 public:
  using Error::Error;
};

/// Two codewords span (numerically) the same subspace.
class SingularPair : public Error {
 public:
  SingularPair(std::size_t i, std::size_t j, const std::string& what)
      : Error(what), i_(i), j_(j) {}
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }

 private:
  std::size_t i_;
  std::size_t j_;
};

/// Non-finite objective, gradient or accumulator encountered mid-computation.
class NumericAbort : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcrs
