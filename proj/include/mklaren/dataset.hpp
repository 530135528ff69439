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

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mklaren/kernels.hpp"

namespace mklaren {

/// Per-feature affine map x -> (x - mean) / scale.
struct Standardizer {
  VectorXd mean;
  VectorXd scale;

  // Population statistics; constant features get scale 1.
  static Standardizer fit(const MatrixXd& x);
  static Standardizer identity(Index dim);

  Index dim() const { return mean.size(); }
  MatrixXd apply(const MatrixXd& x) const;
};

struct Dataset {
  MatrixXd x;
  VectorXd y;
  std::vector<std::string> feature_names;
  std::string target_name;

  Index size() const { return x.rows(); }
  Index dim() const { return x.cols(); }
  Dataset subset(const std::vector<Index>& rows) const;
};

// Numeric CSV with a header row. `target` names the response column; an empty
// string takes the last column. Throws DataError naming the path, or the row
// and column of the first bad cell.
Dataset load_csv(const std::string& path, const std::string& target);

// Feature-only CSV (header row, no target). Rows with the wrong number of
// cells raise DataError.
MatrixXd load_feature_csv(const std::string& path, std::vector<std::string>* header = nullptr);

void write_csv(const std::string& path, const Dataset& data);

struct Split {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;
};

// Disjoint random split of sizes floor(.6n), floor(.2n) and the remainder.
Split split_60_20_20(Index n, std::uint64_t seed);

// Uniform random subset of at most `limit` rows, sorted.
std::vector<Index> subsample(Index n, Index limit, std::uint64_t seed);

}  // namespace mklaren
