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

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mklaren/kernels.hpp"

namespace mklaren {

/// Equiangular direction of a set of signed, linearly independent columns:
/// |u| = 1 and X^T u = a * 1.
struct Bisector {
  VectorXd u;
  double a = 0.0;
  VectorXd omega;  // u = X * omega
};

// Throws CollinearColumnsError when the Gram matrix of `signed_active` is
// singular.
Bisector bisector(const MatrixXd& signed_active);

// Same, reusing an already available inverse of the Gram matrix.
Bisector bisector(const Eigen::Ref<const MatrixXd>& signed_active, const MatrixXd& gram_inverse);

// Smallest positive of (C - c) / (A - a) and (C + c) / (A + a). A branch with
// a vanishing denominator is dropped; nullopt when neither branch is positive.
std::optional<double> positive_crossing(double c_max, double a_max, double c, double a);

struct StepSize {
  double gamma = 0.0;
  Index entering = -1;  // position in the candidate arrays, -1 if none
};

// LAR step length over inactive candidates with correlations `c` and bisector
// dot products `a`. With no candidate that crosses, gamma = C / A.
StepSize step_size(double c_max, double a_max, const Eigen::Ref<const VectorXd>& c,
                   const Eigen::Ref<const VectorXd>& a);

struct LarState {
  VectorXd mu;
  VectorXd r;
  std::vector<Index> active;  // entry order
  std::vector<int> signs;     // parallel to active
  double c_max = 0.0;         // common |correlation| of the active columns
  double a = 0.0;             // bisector normalization of the last step
  double gamma = 0.0;         // step that produced this state
  VectorXd beta;              // coefficients over all columns of X
  Index entered = -1;         // column that joined at this breakpoint
};

/// Least-angle regression path.
///
/// Columns of X must have zero mean and unit norm and y must be centered
/// (InputError otherwise). Element 0 is the state after the first column
/// enters (mu = 0); element k follows the k-th move along the bisector. The
/// move taken once every column is active goes to the least-squares fit. An
/// all-zero correlation vector (e.g. y = 0) yields an empty path.
std::vector<LarState> lar_path(const MatrixXd& x, const VectorXd& y, Index max_steps);

// Standardize columns to zero mean and unit norm (not unit variance).
MatrixXd unit_norm_columns(const MatrixXd& x);

}  // namespace mklaren
