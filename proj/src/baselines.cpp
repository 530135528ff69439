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

#include "mklaren/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mklaren/errors.hpp"
#include "mklaren/inference.hpp"
#include "mklaren/lowrank.hpp"

namespace mklaren {

double rmse(const VectorXd& predictions, const VectorXd& truth) {
  if (predictions.size() == 0) throw InputError("rmse of empty vectors");
  if (predictions.size() != truth.size())
    throw InputError("rmse: " + std::to_string(predictions.size()) + " predictions for " +
                     std::to_string(truth.size()) + " targets");
  return std::sqrt((predictions - truth).squaredNorm() / static_cast<double>(truth.size()));
}

VectorXd ridge_solve(const MatrixXd& f, const VectorXd& y, double lambda) {
  if (f.rows() != y.size()) throw InputError("ridge_solve: feature rows do not match targets");
  if (!(lambda >= 0.0)) throw InputError("ridge_solve: lambda must be nonnegative");
  if (f.cols() == 0) return VectorXd(0);
  if (lambda == 0.0) return Eigen::CompleteOrthogonalDecomposition<MatrixXd>(f).solve(y);
  MatrixXd gram = f.transpose() * f;
  gram.diagonal().array() += lambda;
  return gram.llt().solve(f.transpose() * y);
}

StackedFactorModel::StackedFactorModel(const MatrixXd& x, const std::vector<KernelFunction>& bank,
                                       Index per_kernel_rank, PivotRule rule, std::uint64_t seed)
    : standardizer_(Standardizer::fit(x)) {
  if (per_kernel_rank < 1)
    throw InputError("per-kernel rank must be at least 1, got " + std::to_string(per_kernel_rank));
  if (bank.empty()) throw InputError("kernel bank is empty");
  if (x.rows() < 2) throw InputError("at least two samples are required");
  auto data = std::make_shared<const MatrixXd>(standardizer_.apply(x));
  const Index n = data->rows();
  const Index rank = std::min(per_kernel_rank, n);
  std::mt19937_64 rng(seed);

  std::vector<VectorXd> columns;
  for (const auto& kernel : bank) {
    validate(kernel, data->cols());
    const KernelColumnOracle oracle(data, kernel);
    CholeskyFactor factor(oracle);
    if (rule == PivotRule::kMaxResidual) {
      factor = icd(oracle, rank);
    } else {
      std::vector<Index> order(static_cast<size_t>(n));
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (Index i : order) {
        if (factor.rank() == rank) break;
        if (factor.admissible(i)) factor.step(oracle, i);
      }
    }
    KernelComponent comp;
    comp.kernel = kernel;
    comp.active = factor.active();
    comp.factor = factor.matrix();
    comp.active_points.resize(static_cast<Index>(comp.active.size()), data->cols());
    for (size_t j = 0; j < comp.active.size(); ++j)
      comp.active_points.row(static_cast<Index>(j)) = data->row(comp.active[j]);
    comp.transform = transform_from_pivots(comp.factor, comp.active);
    for (Index j = 0; j < comp.factor.cols(); ++j) columns.push_back(comp.factor.col(j));
    kernels_.push_back(std::move(comp));
  }

  const Index m = static_cast<Index>(columns.size());
  column_mean_.resize(m);
  column_norm_.resize(m);
  train_features_.resize(n, m);
  for (Index j = 0; j < m; ++j) {
    const VectorXd& g = columns[static_cast<size_t>(j)];
    column_mean_(j) = g.mean();
    const double norm = (g.array() - column_mean_(j)).matrix().norm();
    column_norm_(j) = norm > 1e-12 ? norm : 1.0;
    train_features_.col(j) = (g.array() - column_mean_(j)) / column_norm_(j);
  }
}

void StackedFactorModel::fit(const VectorXd& y, double lambda) {
  if (y.size() != train_features_.rows()) throw InputError("target length does not match the data");
  y_mean_ = y.mean();
  lambda_ = lambda;
  weights_ = ridge_solve(train_features_, y.array() - y_mean_, lambda);
}

MatrixXd StackedFactorModel::features(const MatrixXd& x) const {
  const MatrixXd xs = standardizer_.apply(x);
  MatrixXd out(x.rows(), train_features_.cols());
  Index col = 0;
  for (const auto& comp : kernels_) {
    const MatrixXd g = out_of_sample_factor(comp, xs);
    for (Index j = 0; j < g.cols(); ++j, ++col)
      out.col(col) = (g.col(j).array() - column_mean_(col)) / column_norm_(col);
  }
  return out;
}

VectorXd StackedFactorModel::predict(const MatrixXd& x) const {
  if (weights_.size() != train_features_.cols()) throw InputError("model has not been fit");
  VectorXd out = VectorXd::Constant(x.rows(), y_mean_);
  if (weights_.size() > 0) out.noalias() += features(x) * weights_;
  return out;
}

UniformRidge::UniformRidge(const MatrixXd& x, const VectorXd& y,
                           const std::vector<KernelFunction>& bank)
    : bank_(bank), standardizer_(Standardizer::fit(x)) {
  if (x.rows() > kUniformSampleLimit)
    throw InputError("uniform kernel ridge refuses " + std::to_string(x.rows()) +
                     " samples (limit " + std::to_string(kUniformSampleLimit) + ")");
  if (x.rows() != y.size()) throw InputError("target length does not match the data");
  if (bank.empty()) throw InputError("kernel bank is empty");
  points_ = standardizer_.apply(x);
  y_mean_ = y.size() > 0 ? y.mean() : 0.0;
  y_centered_ = y.array() - y_mean_;
  MatrixXd sum = MatrixXd::Zero(x.rows(), x.rows());
  for (const auto& kernel : bank_) {
    validate(kernel, x.cols());
    sum += kernel_matrix(kernel, points_, points_);
  }
  eig_.compute(0.5 * (sum + sum.transpose()));
  projected_ = eig_.eigenvectors().transpose() * y_centered_;
}

void UniformRidge::fit(double lambda) {
  if (!(lambda >= 0.0)) throw InputError("lambda must be nonnegative");
  const VectorXd& e = eig_.eigenvalues();
  const double floor = 1e-12 * std::max(e.cwiseAbs().maxCoeff(), 1e-300);
  VectorXd scaled(e.size());
  for (Index i = 0; i < e.size(); ++i) {
    const double denom = std::max(e(i), 0.0) + lambda;
    scaled(i) = denom > floor ? projected_(i) / denom : 0.0;
  }
  alpha_ = eig_.eigenvectors() * scaled;
}

VectorXd UniformRidge::predict(const MatrixXd& x) const {
  if (alpha_.size() != points_.rows()) throw InputError("model has not been fit");
  const MatrixXd xs = standardizer_.apply(x);
  VectorXd out = VectorXd::Constant(x.rows(), y_mean_);
  for (const auto& kernel : bank_) out.noalias() += kernel_matrix(kernel, xs, points_) * alpha_;
  return out;
}

std::vector<ExplainedVarianceStep> explained_variance_path(const MklarenModel& model,
                                                           const Dataset& data) {
  if (data.size() == 0) throw InputError("explained_variance_path on an empty dataset");
  const MatrixXd xs = model.standardizer.apply(data.x);
  const MatrixXd hstar = combined_features(model, data.x);
  const VectorXd yc = data.y.array() - data.y.mean();
  const double sst = yc.squaredNorm();
  const Index k = model.space.size();

  MatrixXd design(data.size(), k);
  std::vector<std::string> labels;
  for (Index l = 0; l < k; ++l) {
    const SpaceColumn& c = model.space.columns[static_cast<size_t>(l)];
    const KernelFunction& kernel = model.kernels[static_cast<size_t>(c.kernel)].kernel;
    if (const auto* r1 = std::get_if<RankOneKernel>(&kernel.kind)) {
      design.col(l) = xs.col(r1->feature);
      const auto f = static_cast<size_t>(r1->feature);
      labels.push_back(f < data.feature_names.size() ? data.feature_names[f]
                                                     : "x" + std::to_string(r1->feature));
    } else {
      design.col(l) = hstar.col(l);
      labels.push_back(kernel.name + "#" + std::to_string(c.pivot));
    }
  }
  design.rowwise() -= design.colwise().mean();

  std::vector<ExplainedVarianceStep> path;
  for (Index i = 1; i <= k; ++i) {
    const auto qr = design.leftCols(i).colPivHouseholderQr();
    const VectorXd coef = qr.solve(yc);
    const double sse = (yc - design.leftCols(i) * coef).squaredNorm();
    ExplainedVarianceStep step;
    step.label = labels[static_cast<size_t>(i - 1)];
    step.explained = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    step.sign = coef(i - 1) >= 0.0 ? 1 : -1;
    path.push_back(step);
  }
  return path;
}

}  // namespace mklaren
