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

#include "mklaren/inference.hpp"

#include <string>

#include "mklaren/errors.hpp"
#include "mklaren/lowrank.hpp"

namespace mklaren {

MatrixXd compute_transform(const MatrixXd& g, const MatrixXd& k_active, const MatrixXd& k_active_train,
                           bool* warning) {
  const Index a = k_active.rows();
  if (k_active.cols() != a) throw InputError("compute_transform: K(A,A) must be square");
  if (k_active_train.rows() != a || k_active_train.cols() != g.rows())
    throw InputError("compute_transform: K(A,train) has the wrong shape");
  bool jittered = false;
  const MatrixXd k_inv = psd_inverse(k_active, &jittered);
  const MatrixXd gtg = g.transpose() * g;
  const MatrixXd right = k_active_train * g;
  Eigen::LDLT<MatrixXd> ldlt(gtg);
  const VectorXd d = ldlt.vectorD();
  MatrixXd scaled;
  bool singular = gtg.rows() > 0 && (ldlt.info() != Eigen::Success ||
                                     d.minCoeff() <= 1e-12 * d.cwiseAbs().maxCoeff());
  if (singular) {
    scaled = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(gtg).solve(right.transpose());
  } else {
    scaled = ldlt.solve(right.transpose());
  }
  if (warning) *warning = jittered || singular;
  return k_inv * scaled.transpose();
}

MatrixXd transform_from_pivots(const MatrixXd& g, const std::vector<Index>& active) {
  const Index j = static_cast<Index>(active.size());
  if (g.cols() != j)
    throw InputError("transform_from_pivots: factor has " + std::to_string(g.cols()) +
                     " columns for " + std::to_string(j) + " pivots");
  MatrixXd ga(j, j);
  for (Index r = 0; r < j; ++r) {
    const Index row = active[static_cast<size_t>(r)];
    if (row < 0 || row >= g.rows()) throw InputError("transform_from_pivots: pivot out of range");
    ga.row(r) = g.row(row);
  }
  return ga.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(j, j));
}

MatrixXd out_of_sample_factor(const KernelComponent& component, const MatrixXd& standardized) {
  if (component.active.empty()) return MatrixXd::Zero(standardized.rows(), 0);
  return kernel_matrix(component.kernel, standardized, component.active_points) *
         component.transform;
}

MatrixXd combined_features(const MklarenModel& model, const MatrixXd& x) {
  if (x.cols() != model.dim())
    throw InputError("model expects " + std::to_string(model.dim()) + " features, got " +
                     std::to_string(x.cols()));
  const MatrixXd xs = model.standardizer.apply(x);
  std::vector<MatrixXd> factors;
  factors.reserve(model.kernels.size());
  for (const auto& comp : model.kernels) factors.push_back(out_of_sample_factor(comp, xs));
  MatrixXd h(x.rows(), model.space.size());
  for (Index l = 0; l < model.space.size(); ++l) {
    const SpaceColumn& c = model.space.columns[static_cast<size_t>(l)];
    const MatrixXd& g = factors[static_cast<size_t>(c.kernel)];
    h.col(l) = (g.col(c.local).array() - c.mean) * (c.sign / c.norm);
  }
  return h;
}

VectorXd predict(const MklarenModel& model, const MatrixXd& x) {
  const MatrixXd h = combined_features(model, x);
  if (h.cols() != model.beta.size()) throw InputError("model coefficients do not match its columns");
  VectorXd out = VectorXd::Constant(x.rows(), model.y_mean);
  if (h.cols() > 0) out.noalias() += h * model.beta;
  return out;
}

DualSolution dual_coefficients(const MatrixXd& h, const VectorXd& beta) {
  if (h.cols() != beta.size())
    throw InputError("dual_coefficients: H has " + std::to_string(h.cols()) + " columns, beta has " +
                     std::to_string(beta.size()) + " entries");
  DualSolution out;
  if (h.cols() == 0) {
    out.alpha = VectorXd::Zero(h.rows());
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(h.transpose());
  cod.setThreshold(1e-12);
  out.rank_deficient = cod.rank() < h.cols();
  out.alpha = cod.solve(beta);
  return out;
}

VectorXd primal_weights(const MatrixXd& phi, const VectorXd& alpha) {
  if (phi.rows() != alpha.size())
    throw InputError("primal_weights: feature map has " + std::to_string(phi.rows()) +
                     " rows, alpha has " + std::to_string(alpha.size()) + " entries");
  return phi.transpose() * alpha;
}

std::vector<VectorXd> factor_weights(const MklarenModel& model) {
  std::vector<VectorXd> out;
  for (const auto& comp : model.kernels)
    out.push_back(VectorXd::Zero(static_cast<Index>(comp.active.size())));
  for (Index l = 0; l < model.space.size(); ++l) {
    const SpaceColumn& c = model.space.columns[static_cast<size_t>(l)];
    out[static_cast<size_t>(c.kernel)](c.local) += model.beta(l) * c.sign / c.norm;
  }
  return out;
}

}  // namespace mklaren
