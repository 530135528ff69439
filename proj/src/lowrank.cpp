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

#include "mklaren/lowrank.hpp"

#include <cmath>
#include <set>
#include <string>

#include "mklaren/errors.hpp"

namespace mklaren {

CholeskyFactor::CholeskyFactor(const KernelColumnOracle& oracle, Index lookahead)
    : diag_(oracle.diagonal()),
      work_(oracle.size()),
      in_active_(static_cast<size_t>(oracle.size()), 0),
      lookahead_(lookahead) {
  if (lookahead < 0) throw InputError("look-ahead width must be nonnegative");
  const double max_diag = diag_.size() > 0 ? diag_.maxCoeff() : 0.0;
  threshold_ = kPivotTolerance * std::max(max_diag, 0.0);
  reserve(std::min<Index>(oracle.size(), lookahead + 4));
}

void CholeskyFactor::reserve(Index cols) {
  if (cols <= columns_.cols()) return;
  Index target = std::max<Index>(cols, 2 * columns_.cols());
  target = std::min<Index>(target, size());
  const Index used = rank_ + width_;
  MatrixXd grown(size(), target);
  grown.leftCols(used) = columns_.leftCols(used);
  columns_.swap(grown);
}

Index CholeskyFactor::best_pivot() const {
  Index best = -1;
  double best_val = threshold_;
  for (Index i = 0; i < size(); ++i) {
    if (in_active_[static_cast<size_t>(i)]) continue;
    if (diag_(i) > best_val) {
      best_val = diag_(i);
      best = i;
    }
  }
  return best;
}

void CholeskyFactor::eliminate(const KernelColumnOracle& oracle, Index col, Index pivot,
                               double pivot_diag, const std::vector<char>& done) {
  oracle.column(pivot, work_);
  auto out = columns_.col(col);
  if (col > 0) {
    out.noalias() = work_ - columns_.leftCols(col) * columns_.row(pivot).head(col).transpose();
  } else {
    out = work_;
  }
  const double root = std::sqrt(pivot_diag);
  out /= root;
  for (Index m = 0; m < size(); ++m)
    if (done[static_cast<size_t>(m)]) out(m) = 0.0;
  out(pivot) = root;
}

VectorXd CholeskyFactor::exact_column(const KernelColumnOracle& oracle, Index pivot) const {
  if (oracle.size() != size()) throw InputError("oracle does not match factor size");
  if (pivot < 0 || pivot >= size())
    throw InputError("pivot " + std::to_string(pivot) + " out of range");
  if (!admissible(pivot))
    throw DegeneratePivotError("pivot " + std::to_string(pivot) + " is not admissible");
  VectorXd out = oracle.column(pivot);
  if (rank_ > 0) out.noalias() -= committed() * columns_.row(pivot).head(rank_).transpose();
  const double root = std::sqrt(diag_(pivot));
  out /= root;
  for (Index m = 0; m < size(); ++m)
    if (in_active_[static_cast<size_t>(m)]) out(m) = 0.0;
  out(pivot) = root;
  return out;
}

void CholeskyFactor::step(const KernelColumnOracle& oracle, Index pivot) {
  if (oracle.size() != size()) throw InputError("oracle does not match factor size");
  if (pivot < 0 || pivot >= size())
    throw InputError("pivot " + std::to_string(pivot) + " out of range");
  if (is_active(pivot))
    throw InputError("pivot " + std::to_string(pivot) + " is already active");
  if (!(diag_(pivot) > threshold_))
    throw DegeneratePivotError("pivot " + std::to_string(pivot) + " has residual diagonal " +
                               std::to_string(diag_(pivot)) + " below threshold");
  width_ = 0;
  lookahead_pivots_.clear();
  reserve(rank_ + 1 + lookahead_);
  eliminate(oracle, rank_, pivot, diag_(pivot), in_active_);
  diag_ -= columns_.col(rank_).cwiseAbs2();
  diag_(pivot) = 0.0;
  in_active_[static_cast<size_t>(pivot)] = 1;
  active_.push_back(pivot);
  ++rank_;
}

void CholeskyFactor::refresh_lookahead(const KernelColumnOracle& oracle) {
  if (oracle.size() != size()) throw InputError("oracle does not match factor size");
  width_ = 0;
  lookahead_pivots_.clear();
  if (lookahead_ == 0) return;
  reserve(rank_ + lookahead_);
  VectorXd diag = diag_;
  std::vector<char> done = in_active_;
  for (Index t = 0; t < lookahead_; ++t) {
    Index pivot = -1;
    double best = threshold_;
    for (Index i = 0; i < size(); ++i) {
      if (!done[static_cast<size_t>(i)] && diag(i) > best) {
        best = diag(i);
        pivot = i;
      }
    }
    if (pivot < 0) break;
    const Index col = rank_ + t;
    eliminate(oracle, col, pivot, diag(pivot), done);
    diag -= columns_.col(col).cwiseAbs2();
    diag(pivot) = 0.0;
    done[static_cast<size_t>(pivot)] = 1;
    lookahead_pivots_.push_back(pivot);
    ++width_;
  }
}

CholeskyFactor icd(const KernelColumnOracle& oracle, Index rank) {
  if (rank < 1 || rank > oracle.size())
    throw InputError("icd rank must lie in [1, n], got " + std::to_string(rank));
  CholeskyFactor factor(oracle);
  for (Index r = 0; r < rank; ++r) {
    const Index pivot = factor.best_pivot();
    if (pivot < 0) break;
    factor.step(oracle, pivot);
  }
  return factor;
}

CholeskyFactor icd(const KernelColumnOracle& oracle, const std::vector<Index>& pivots) {
  CholeskyFactor factor(oracle);
  for (Index pivot : pivots) factor.step(oracle, pivot);
  return factor;
}

MatrixXd psd_inverse(const MatrixXd& block, bool* jittered) {
  if (block.rows() != block.cols()) throw InputError("psd_inverse expects a square matrix");
  const Index k = block.rows();
  if (jittered) *jittered = false;
  if (k == 0) return MatrixXd(0, 0);
  Eigen::LLT<MatrixXd> llt(block);
  if (llt.info() == Eigen::Success) return llt.solve(MatrixXd::Identity(k, k));
  if (jittered) *jittered = true;
  const double jitter = 1e-10 * std::max(block.trace(), 0.0) / static_cast<double>(k);
  MatrixXd shifted = block;
  shifted.diagonal().array() += jitter;
  llt.compute(shifted);
  if (llt.info() != Eigen::Success)
    throw NumericalError("kernel block is not positive definite even after jitter");
  return llt.solve(MatrixXd::Identity(k, k));
}

NystromApproximation nystrom(const KernelColumnOracle& oracle, const std::vector<Index>& active) {
  if (active.empty()) throw InputError("nystrom requires a nonempty active set");
  std::set<Index> seen;
  for (Index i : active) {
    if (i < 0 || i >= oracle.size()) throw InputError("nystrom active index out of range");
    if (!seen.insert(i).second) throw InputError("nystrom active indices must be distinct");
  }
  NystromApproximation out;
  out.active = active;
  out.c.resize(oracle.size(), static_cast<Index>(active.size()));
  for (size_t j = 0; j < active.size(); ++j)
    out.c.col(static_cast<Index>(j)) = oracle.column(active[j]);
  MatrixXd w(static_cast<Index>(active.size()), static_cast<Index>(active.size()));
  for (size_t r = 0; r < active.size(); ++r) w.row(static_cast<Index>(r)) = out.c.row(active[r]);
  w = 0.5 * (w + w.transpose());
  out.w_inverse = psd_inverse(w, &out.jittered);
  return out;
}

}  // namespace mklaren
