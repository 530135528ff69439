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

#include <vector>

#include <Eigen/Dense>

#include "mklaren/mklaren.hpp"

namespace mklaren {

/// Out-of-sample transform T with K(train, active) T = G.
///
/// T = K(A,A)^-1 K(A,train) G (G^T G)^-1. `warning` is set when K(A,A) needed
/// jitter or G^T G was singular and a minimum-norm solve was used.
MatrixXd compute_transform(const MatrixXd& g, const MatrixXd& k_active, const MatrixXd& k_active_train,
                           bool* warning = nullptr);

// Same transform from the factor alone: G(A,:) is lower triangular in pivot
// order, and T = G(A,:)^-T.
MatrixXd transform_from_pivots(const MatrixXd& g, const std::vector<Index>& active);

// G*_q = K(x, A_q) T_q for standardized inputs.
MatrixXd out_of_sample_factor(const KernelComponent& component, const MatrixXd& standardized);

// Rows of the combined feature space (top block) for new raw inputs.
MatrixXd combined_features(const MklarenModel& model, const MatrixXd& x);

// Predictions in target units for raw (unstandardized) inputs.
VectorXd predict(const MklarenModel& model, const MatrixXd& x);

struct DualSolution {
  VectorXd alpha;
  bool rank_deficient = false;
};

// Minimum-norm alpha with H^T alpha = beta.
DualSolution dual_coefficients(const MatrixXd& h, const VectorXd& beta);

// beta_phi = Phi^T alpha.
VectorXd primal_weights(const MatrixXd& phi, const VectorXd& alpha);

// Per-kernel factor weights w with sum_q G_q w_q = H_top beta - const.
// Entry l of the result belongs to column `model.space.columns[l].local` of
// kernel `model.space.columns[l].kernel`.
std::vector<VectorXd> factor_weights(const MklarenModel& model);

}  // namespace mklaren
