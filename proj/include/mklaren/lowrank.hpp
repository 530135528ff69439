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

#include "mklaren/kernels.hpp"

namespace mklaren {

// Relative admissibility threshold: a pivot i is usable while
// d(i) > kPivotTolerance * max(diag(K)).
inline constexpr double kPivotTolerance = 1e-10;

/// Incomplete Cholesky factor K ~= G G^T of one kernel matrix.
///
/// The first rank() columns of the factor are committed pivots. They are
/// followed by up to `lookahead` speculative columns computed by continuing the
/// decomposition with greatest-residual pivoting; those columns are
/// invalidated by every committed step and rebuilt by refresh_lookahead().
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const KernelColumnOracle& oracle, Index lookahead = 0);

  Index size() const { return diag_.size(); }
  Index rank() const { return rank_; }
  Index lookahead() const { return lookahead_; }
  Index lookahead_width() const { return width_; }

  const std::vector<Index>& active() const { return active_; }
  const std::vector<Index>& lookahead_pivots() const { return lookahead_pivots_; }

  // Residual diagonal d = diag(K - G G^T) over the committed columns.
  const VectorXd& residual_diagonal() const { return diag_; }
  double pivot_threshold() const { return threshold_; }

  bool is_active(Index i) const { return in_active_[static_cast<size_t>(i)] != 0; }
  bool admissible(Index i) const { return !is_active(i) && diag_(i) > threshold_; }

  // G(:, 0..rank)
  auto committed() const { return columns_.leftCols(rank_); }
  // G(:, rank..rank+width)
  auto lookahead_block() const { return columns_.middleCols(rank_, width_); }

  // Committed columns as a dense copy.
  MatrixXd matrix() const { return committed(); }

  // Standard Cholesky step on `pivot`. Throws DegeneratePivotError when the
  // pivot's residual diagonal is at or below pivot_threshold(), InputError when
  // it is out of range or already active. Invalidates the look-ahead block.
  void step(const KernelColumnOracle& oracle, Index pivot);

  // Rebuild the look-ahead block from the committed state. Fills fewer than
  // lookahead() columns when admissible pivots run out.
  void refresh_lookahead(const KernelColumnOracle& oracle);

  // Non-active index with the largest residual diagonal (lowest index on ties),
  // or -1 when none is admissible.
  Index best_pivot() const;

  // Column that step(oracle, pivot) would append, without modifying the factor.
  VectorXd exact_column(const KernelColumnOracle& oracle, Index pivot) const;

  // Trace of K - G G^T, the nuclear norm of the (PSD) residual.
  double residual_trace() const { return diag_.sum(); }

 private:
  void reserve(Index cols);
  // Column `col` of columns_ from pivot `pivot`, eliminating the first `col`
  // columns and zeroing rows flagged in `done`.
  void eliminate(const KernelColumnOracle& oracle, Index col, Index pivot, double pivot_diag,
                 const std::vector<char>& done);

  MatrixXd columns_;
  VectorXd diag_;
  VectorXd work_;
  std::vector<Index> active_;
  std::vector<Index> lookahead_pivots_;
  std::vector<char> in_active_;
  double threshold_ = 0.0;
  Index rank_ = 0;
  Index lookahead_ = 0;
  Index width_ = 0;
};

// Greedy ICD with greatest-residual pivoting; stops early (returning fewer
// columns) when every remaining pivot is inadmissible.
CholeskyFactor icd(const KernelColumnOracle& oracle, Index rank);

// ICD with a prescribed pivot order. Throws DegeneratePivotError on an
// inadmissible pivot.
CholeskyFactor icd(const KernelColumnOracle& oracle, const std::vector<Index>& pivots);

// Inverse of a symmetric PSD block. Adds 1e-10 * trace / size to the diagonal
// when the Cholesky factorization fails; `jittered` reports that.
MatrixXd psd_inverse(const MatrixXd& block, bool* jittered = nullptr);

/// Nystrom approximation L = C W^-1 C^T with C = K(:, A), W = K(A, A).
struct NystromApproximation {
  std::vector<Index> active;
  MatrixXd c;
  MatrixXd w_inverse;
  bool jittered = false;

  MatrixXd reconstruct() const { return c * w_inverse * c.transpose(); }
};

NystromApproximation nystrom(const KernelColumnOracle& oracle, const std::vector<Index>& active);

}  // namespace mklaren
