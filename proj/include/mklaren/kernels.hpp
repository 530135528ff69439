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

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mklaren {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LinearKernel {};

// (x.y + bias)^degree
struct PolynomialKernel {
  int degree = 2;
  double bias = 0.0;
};

// exp(-gamma * |x - y|^2)
struct GaussianKernel {
  double gamma = 1.0;
};

// x[f] * y[f]; the kernel of a single feature.
struct RankOneKernel {
  Index feature = 0;
};

using KernelKind =
    std::variant<LinearKernel, PolynomialKernel, GaussianKernel, RankOneKernel>;

struct KernelFunction {
  KernelKind kind;
  std::string name;

  static KernelFunction linear();
  static KernelFunction polynomial(int degree, double bias);
  static KernelFunction gaussian(double gamma);
  static KernelFunction rank_one(Index feature);
};

// Throws InputError on dimension mismatch or invalid parameters.
double evaluate(const KernelFunction& kernel, const Eigen::Ref<const VectorXd>& x,
                const Eigen::Ref<const VectorXd>& y);

void validate(const KernelFunction& kernel, Index dim);

// Seven Gaussian kernels with gamma in 2^-3 .. 2^3.
std::vector<KernelFunction> gaussian_bank();

// The same seven widths applied to the mean squared feature difference,
// exp(-gamma |x - y|^2 / dim), so the bank does not depend on the input
// dimension.
std::vector<KernelFunction> gaussian_bank(Index dim);

// One rank-one kernel per input feature.
std::vector<KernelFunction> rank_one_bank(Index dim);

// "gaussian7" (dimension scaled), "gaussian7_raw", "rank_one" or "linear".
std::vector<KernelFunction> named_bank(const std::string& name, Index dim);

/// Lazy access to a kernel matrix over a fixed sample, one column at a time.
///
/// Rows of `data` are samples. The full n x n matrix is never formed; each
/// column costs O(n * dim). The oracle is immutable after construction and
/// may be shared between threads.
class KernelColumnOracle {
 public:
  KernelColumnOracle(std::shared_ptr<const MatrixXd> data, KernelFunction kernel);
  KernelColumnOracle(const MatrixXd& data, KernelFunction kernel);

  Index size() const { return data_->rows(); }
  const KernelFunction& kernel() const { return kernel_; }
  const MatrixXd& data() const { return *data_; }
  const std::shared_ptr<const MatrixXd>& shared_data() const { return data_; }

  // K(:, i). Throws InputError when i is out of range.
  VectorXd column(Index i) const;
  void column(Index i, Eigen::Ref<VectorXd> out) const;

  VectorXd diagonal() const;

  // K(rows, cols) for index subsets of this sample.
  MatrixXd block(const std::vector<Index>& rows, const std::vector<Index>& cols) const;

  // k(points_i, sample_j) for external points (rows of `points`) against the
  // sample rows listed in `cols`.
  MatrixXd cross(const MatrixXd& points, const std::vector<Index>& cols) const;

 private:
  std::shared_ptr<const MatrixXd> data_;
  KernelFunction kernel_;
};

// Kernel values between every row of `points` and every row of `centers`.
MatrixXd kernel_matrix(const KernelFunction& kernel, const MatrixXd& points,
                       const MatrixXd& centers);

}  // namespace mklaren
