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

#include "mklaren/dataset.hpp"
#include "mklaren/kernels.hpp"
#include "mklaren/mklaren.hpp"

namespace mklaren {

// Square root of the mean squared difference. Throws InputError on empty or
// mismatched inputs.
double rmse(const VectorXd& predictions, const VectorXd& truth);

// (F^T F + lambda I)^-1 F^T y; least-squares (minimum norm) when lambda = 0.
VectorXd ridge_solve(const MatrixXd& f, const VectorXd& y, double lambda);

enum class PivotRule {
  kMaxResidual,    // greedy incomplete Cholesky
  kUniformRandom,  // Nystrom with seeded uniform pivots
};

/// Independent low-rank approximation of each kernel followed by ridge
/// regression on the stacked, centered and normalized factors.
class StackedFactorModel {
 public:
  // `x` in raw units; standardization statistics are fit on it.
  StackedFactorModel(const MatrixXd& x, const std::vector<KernelFunction>& bank, Index per_kernel_rank,
                     PivotRule rule, std::uint64_t seed = 0);

  // Fits the ridge weights. y in raw units.
  void fit(const VectorXd& y, double lambda);

  MatrixXd features(const MatrixXd& x) const;
  VectorXd predict(const MatrixXd& x) const;

  const MatrixXd& train_features() const { return train_features_; }
  const std::vector<KernelComponent>& kernels() const { return kernels_; }
  const VectorXd& weights() const { return weights_; }
  double lambda() const { return lambda_; }

 private:
  Standardizer standardizer_;
  std::vector<KernelComponent> kernels_;
  VectorXd column_mean_;
  VectorXd column_norm_;
  MatrixXd train_features_;
  VectorXd weights_;
  double y_mean_ = 0.0;
  double lambda_ = 0.0;
};

inline constexpr Index kUniformSampleLimit = 5000;

/// Kernel ridge regression on the sum of all kernels in the bank.
class UniformRidge {
 public:
  // Throws InputError when x has more than kUniformSampleLimit rows.
  UniformRidge(const MatrixXd& x, const VectorXd& y, const std::vector<KernelFunction>& bank);

  void fit(double lambda);
  VectorXd predict(const MatrixXd& x) const;

  const VectorXd& alpha() const { return alpha_; }

 private:
  std::vector<KernelFunction> bank_;
  Standardizer standardizer_;
  MatrixXd points_;
  VectorXd y_centered_;
  double y_mean_ = 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig_;
  VectorXd projected_;
  VectorXd alpha_;
};

struct ExplainedVarianceStep {
  std::string label;
  double explained = 0.0;  // 1 - SSE / SST of OLS on the prefix
  int sign = 1;            // sign of the new feature's OLS coefficient
};

// Cumulative training fit along the model's selection order. Columns of
// rank-one kernels are represented by their standardized input feature.
std::vector<ExplainedVarianceStep> explained_variance_path(const MklarenModel& model,
                                                           const Dataset& data);

}  // namespace mklaren
