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

#include "mklaren/kernels.hpp"

#include <cmath>
#include <sstream>

#include "mklaren/errors.hpp"

namespace mklaren {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// k(points_r, center) for every row r of `points`.
void kernel_column(const KernelKind& kind, const MatrixXd& points,
                   const Eigen::Ref<const Eigen::RowVectorXd>& center,
                   Eigen::Ref<VectorXd> out) {
  std::visit(
      Overloaded{
          [&](const LinearKernel&) { out.noalias() = points * center.transpose(); },
          [&](const PolynomialKernel& k) {
            out.noalias() = points * center.transpose();
            out = (out.array() + k.bias).pow(static_cast<double>(k.degree)).matrix();
          },
          [&](const GaussianKernel& k) {
            out = (-k.gamma * (points.rowwise() - center).rowwise().squaredNorm().array())
                      .exp()
                      .matrix();
          },
          [&](const RankOneKernel& k) { out = points.col(k.feature) * center(k.feature); },
      },
      kind);
}

}  // namespace

KernelFunction KernelFunction::linear() { return {LinearKernel{}, "linear"}; }

KernelFunction KernelFunction::polynomial(int degree, double bias) {
  std::ostringstream name;
  name << "poly(d=" << degree << ",b=" << bias << ")";
  return {PolynomialKernel{degree, bias}, name.str()};
}

KernelFunction KernelFunction::gaussian(double gamma) {
  std::ostringstream name;
  name << "gauss(gamma=" << gamma << ")";
  return {GaussianKernel{gamma}, name.str()};
}

KernelFunction KernelFunction::rank_one(Index feature) {
  return {RankOneKernel{feature}, "rank1(f=" + std::to_string(feature) + ")"};
}

void validate(const KernelFunction& kernel, Index dim) {
  std::visit(Overloaded{
                 [](const LinearKernel&) {},
                 [](const PolynomialKernel& k) {
                   if (k.degree < 1) throw InputError("polynomial degree must be >= 1");
                 },
                 [](const GaussianKernel& k) {
                   if (!(k.gamma > 0.0) || !std::isfinite(k.gamma))
                     throw InputError("gaussian gamma must be a positive finite number");
                 },
                 [dim](const RankOneKernel& k) {
                   if (k.feature < 0 || k.feature >= dim)
                     throw InputError("rank-one feature index " + std::to_string(k.feature) +
                                      " out of range for dimension " + std::to_string(dim));
                 },
             },
             kernel.kind);
}

double evaluate(const KernelFunction& kernel, const Eigen::Ref<const VectorXd>& x,
                const Eigen::Ref<const VectorXd>& y) {
  if (x.size() != y.size())
    throw InputError("kernel arguments differ in dimension: " + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()));
  validate(kernel, x.size());
  return std::visit(Overloaded{
                        [&](const LinearKernel&) { return x.dot(y); },
                        [&](const PolynomialKernel& k) {
                          return std::pow(x.dot(y) + k.bias, static_cast<double>(k.degree));
                        },
                        [&](const GaussianKernel& k) {
                          return std::exp(-k.gamma * (x - y).squaredNorm());
                        },
                        [&](const RankOneKernel& k) { return x(k.feature) * y(k.feature); },
                    },
                    kernel.kind);
}

std::vector<KernelFunction> gaussian_bank() {
  std::vector<KernelFunction> bank;
  for (int e = -3; e <= 3; ++e) bank.push_back(KernelFunction::gaussian(std::ldexp(1.0, e)));
  return bank;
}

std::vector<KernelFunction> gaussian_bank(Index dim) {
  if (dim < 1) throw InputError("gaussian_bank needs a positive input dimension");
  std::vector<KernelFunction> bank;
  for (int e = -3; e <= 3; ++e)
    bank.push_back(KernelFunction::gaussian(std::ldexp(1.0, e) / static_cast<double>(dim)));
  return bank;
}

std::vector<KernelFunction> named_bank(const std::string& name, Index dim) {
  if (name == "gaussian7") return gaussian_bank(dim);
  if (name == "gaussian7_raw") return gaussian_bank();
  if (name == "rank_one") return rank_one_bank(dim);
  if (name == "linear") return {KernelFunction::linear()};
  throw InputError("unknown kernel bank '" + name +
                   "' (expected gaussian7, gaussian7_raw, rank_one or linear)");
}

std::vector<KernelFunction> rank_one_bank(Index dim) {
  std::vector<KernelFunction> bank;
  bank.reserve(static_cast<size_t>(dim));
  for (Index f = 0; f < dim; ++f) bank.push_back(KernelFunction::rank_one(f));
  return bank;
}

KernelColumnOracle::KernelColumnOracle(std::shared_ptr<const MatrixXd> data,
                                       KernelFunction kernel)
    : data_(std::move(data)), kernel_(std::move(kernel)) {
  if (!data_) throw InputError("kernel oracle requires a data matrix");
  validate(kernel_, data_->cols());
}

KernelColumnOracle::KernelColumnOracle(const MatrixXd& data, KernelFunction kernel)
    : KernelColumnOracle(std::make_shared<const MatrixXd>(data), std::move(kernel)) {}

VectorXd KernelColumnOracle::column(Index i) const {
  VectorXd out(size());
  column(i, out);
  return out;
}

void KernelColumnOracle::column(Index i, Eigen::Ref<VectorXd> out) const {
  if (i < 0 || i >= size())
    throw InputError("kernel column index " + std::to_string(i) + " out of range [0, " +
                     std::to_string(size()) + ")");
  kernel_column(kernel_.kind, *data_, data_->row(i), out);
}

VectorXd KernelColumnOracle::diagonal() const {
  const MatrixXd& x = *data_;
  return std::visit(
      Overloaded{
          [&](const LinearKernel&) -> VectorXd { return x.rowwise().squaredNorm(); },
          [&](const PolynomialKernel& k) -> VectorXd {
            return (x.rowwise().squaredNorm().array() + k.bias)
                .pow(static_cast<double>(k.degree))
                .matrix();
          },
          [&](const GaussianKernel&) -> VectorXd { return VectorXd::Ones(x.rows()); },
          [&](const RankOneKernel& k) -> VectorXd { return x.col(k.feature).array().square(); },
      },
      kernel_.kind);
}

MatrixXd KernelColumnOracle::block(const std::vector<Index>& rows,
                                   const std::vector<Index>& cols) const {
  MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  VectorXd col(size());
  for (size_t c = 0; c < cols.size(); ++c) {
    column(cols[c], col);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] < 0 || rows[r] >= size()) throw InputError("kernel block row out of range");
      out(static_cast<Index>(r), static_cast<Index>(c)) = col(rows[r]);
    }
  }
  return out;
}

MatrixXd KernelColumnOracle::cross(const MatrixXd& points, const std::vector<Index>& cols) const {
  if (points.cols() != data_->cols())
    throw InputError("points have dimension " + std::to_string(points.cols()) +
                     ", kernel sample has dimension " + std::to_string(data_->cols()));
  MatrixXd out(points.rows(), static_cast<Index>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] < 0 || cols[c] >= size()) throw InputError("kernel cross column out of range");
    kernel_column(kernel_.kind, points, data_->row(cols[c]), out.col(static_cast<Index>(c)));
  }
  return out;
}

MatrixXd kernel_matrix(const KernelFunction& kernel, const MatrixXd& points,
                       const MatrixXd& centers) {
  if (points.cols() != centers.cols())
    throw InputError("kernel_matrix: dimension mismatch " + std::to_string(points.cols()) +
                     " vs " + std::to_string(centers.cols()));
  validate(kernel, points.cols());
  MatrixXd out(points.rows(), centers.rows());
  for (Index c = 0; c < centers.rows(); ++c)
    kernel_column(kernel.kind, points, centers.row(c), out.col(c));
  return out;
}

}  // namespace mklaren
