// Copyright 2026 The Mklaren Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace mklaren {

// Malformed arguments: dimension mismatch, out-of-range index, bad parameter.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Files that cannot be read or parsed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pivot whose residual diagonal is below the admissibility threshold.
class DegeneratePivotError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CollinearColumnsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mklaren
