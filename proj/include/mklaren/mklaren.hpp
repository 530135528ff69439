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

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mklaren/dataset.hpp"
#include "mklaren/kernels.hpp"
#include "mklaren/lar.hpp"
#include "mklaren/lowrank.hpp"

namespace mklaren {

struct FitOptions {
  Index rank = 10;       // total number of pivot columns over all kernels
  Index delta = 10;      // look-ahead columns per kernel
  double lambda = 0.0;   // ridge penalty on the normalized combined features
  bool standardize = true;
  // Re-derive (H^T H)^-1 directly each iteration and record the deviation
  // from the incrementally maintained inverse.
  bool verify_gram_inverse = false;
};

enum class FitStatus {
  kRankReached,  // sum of kernel ranks equals the requested rank
  kExhausted,    // no admissible pivot left in any kernel
  kNoSignal,     // residual uncorrelated with every candidate
};

std::string to_string(FitStatus status);

// Provenance of one column of the combined feature space.
struct SpaceColumn {
  Index kernel = 0;
  Index pivot = 0;     // training index of the pivot
  Index local = 0;     // column position inside the kernel's factor
  int sign = 1;
  double mean = 0.0;   // mean of the raw factor column
  double norm = 1.0;   // scale mapping the centered raw column onto H's top rows
};

/// Centered, normalized, sign-corrected Cholesky columns of all kernels.
///
/// With lambda > 0 every column carries sqrt(lambda / (1 + lambda)) in its own
/// augmentation row (row samples + position), so OLS in this space is ridge
/// regression on the unit-norm columns.
struct CombinedFeatureSpace {
  MatrixXd h;  // (samples + augmentation) x columns
  Index samples = 0;
  double lambda = 0.0;
  std::vector<SpaceColumn> columns;

  Index size() const { return static_cast<Index>(columns.size()); }
  auto top() const { return h.topRows(samples); }
};

struct KernelComponent {
  KernelFunction kernel;
  std::vector<Index> active;  // training indices in selection order
  MatrixXd active_points;     // standardized inputs of the active samples
  MatrixXd factor;            // committed training factor G (n x j)
  MatrixXd transform;         // T with G = K(train, active) T
};

struct IterationRecord {
  Index kernel = 0;
  Index pivot = 0;
  double c_hat = 0.0;  // look-ahead estimate used for selection
  double a_hat = 0.0;
  double c = 0.0;      // exact values of the committed column
  double a = 0.0;
  double gamma = 0.0;
  bool equalized = false;        // step reached a common correlation level
  double rebalance = 0.0;        // length of the equalizing move, 0 if none
  double correlation_gap = 0.0;  // spread of |h^T r| over the active columns
  double residual_norm = 0.0;
  double gram_inverse_error = 0.0;  // only with verify_gram_inverse
};

struct MklarenModel {
  std::vector<KernelComponent> kernels;
  CombinedFeatureSpace space;  // h is empty for a deserialized model
  VectorXd beta;
  VectorXd mu;  // in-sample fitted values, centered
  double y_mean = 0.0;
  double lambda = 0.0;
  Index delta = 0;
  Index rank = 0;
  Standardizer standardizer;
  FitStatus status = FitStatus::kRankReached;
  bool path_complete = false;  // final least-squares step was taken
  bool rank_deficient = false;
  std::vector<IterationRecord> iterations;
  std::vector<VectorXd> mu_path;  // mu after each iteration
  MatrixXd gram_inverse;

  Index dim() const { return standardizer.dim(); }
  std::vector<Index> kernel_ranks() const;
};

// Look-ahead approximation of the next Cholesky column for pivot i.
VectorXd candidate_column(const CholeskyFactor& factor, Index i);

/// Look-ahead scores for every row of one kernel. Entries of non-admissible
/// rows are zero and flagged in `admissible`.
struct CandidateScores {
  VectorXd c;  // |correlation with r| of the normalized candidate
  VectorXd a;  // dot product with u, sign-matched to c
  std::vector<char> admissible;
};

// `r` and `u` are the first n rows of the residual and the bisector. The
// shared precomputations cost O(n delta^2); each candidate then costs
// O(delta) once the per-factor norms are known.
CandidateScores candidate_scores(const CholeskyFactor& factor, const Eigen::Ref<const VectorXd>& r,
                                 const Eigen::Ref<const VectorXd>& u, double lambda,
                                 const std::vector<char>* rejected = nullptr);

struct Selection {
  Index kernel = -1;
  Index pivot = -1;
  double gamma = 0.0;  // predicted step; 0 on the first iteration
  double c_hat = 0.0;
  double a_hat = 0.0;
  // Smallest predicted step of any other candidate (infinity when none).
  double next_gamma = 0.0;
};

// First iteration: largest c. Afterwards: smallest positive LAR crossing,
// with candidates already at or above c_max crossing immediately. Ties go to
// the lowest kernel and then the lowest pivot. nullopt when nothing is
// admissible.
std::optional<Selection> select_kernel_pivot(const std::vector<CandidateScores>& scores,
                                             double c_max, double a_max, bool first);

struct BetaSolution {
  VectorXd beta;
  bool rank_deficient = false;
};

// Solve H beta = mu through a thin QR factorization; minimum-norm solution
// when H is rank deficient.
BetaSolution solve_beta(const MatrixXd& h, const VectorXd& mu);

/// Step-wise driver of the joint decomposition and regression.
class MklarenSolver {
 public:
  // `x` must already be in the units the kernels expect; `y` is centered here.
  MklarenSolver(const MatrixXd& x, const VectorXd& y, std::vector<KernelFunction> bank,
                const FitOptions& options);

  // One selection + commit. Returns false once the rank is reached or no
  // admissible candidate remains (status() tells which).
  bool iterate();
  // Commit an explicit (kernel, pivot) pair. Returns false when the pair is
  // rejected because its column is numerically inside span(H).
  // The step toward the new column stops at `gamma_limit`, the point where
  // another candidate is predicted to catch up.
  bool commit(Index kernel, Index pivot, double c_hat = 0.0, double a_hat = 0.0,
              double gamma_limit = std::numeric_limits<double>::infinity());

  std::vector<CandidateScores> scores() const;

  Index columns() const { return static_cast<Index>(space_.columns.size()); }
  Index samples() const { return n_; }
  FitStatus status() const { return status_; }
  const CombinedFeatureSpace& space() const { return space_; }
  auto h() const { return space_.h.leftCols(columns()); }
  const VectorXd& mu() const { return mu_; }
  const VectorXd& residual() const { return r_; }
  const VectorXd& direction() const { return u_; }
  double c_max() const { return c_max_; }
  double a_max() const { return a_max_; }
  const MatrixXd& gram_inverse() const { return gram_inverse_; }
  const std::vector<CholeskyFactor>& factors() const { return factors_; }
  const std::vector<KernelColumnOracle>& oracles() const { return oracles_; }
  const std::vector<IterationRecord>& iterations() const { return iterations_; }
  double y_mean() const { return y_mean_; }

  // Move to the least-squares fit of the current columns (taken when every
  // kernel is exhausted) and assemble the model.
  MklarenModel finish(const Standardizer& standardizer);

 private:
  // Move inside span(H) that brings every active correlation down to a common
  // level: the smallest one, or lower if needed so that |r| does not grow.
  double rebalance();
  void update_direction();
  void rebuild_cache(Index kernel);
  bool any_admissible() const;

  FitOptions options_;
  Index n_ = 0;
  double y_mean_ = 0.0;
  double y_norm_ = 0.0;
  std::shared_ptr<const MatrixXd> x_;
  std::vector<KernelColumnOracle> oracles_;
  std::vector<CholeskyFactor> factors_;
  std::vector<std::vector<char>> rejected_;
  std::vector<VectorXd> norms2_;    // per kernel: squared candidate norms times d
  std::vector<VectorXd> col_sums_;  // per kernel: column sums of the look-ahead block
  Index rank_cap_ = 0;
  bool done_ = false;
  CombinedFeatureSpace space_;
  VectorXd mu_;
  VectorXd r_;
  VectorXd u_;
  VectorXd omega_;
  double c_max_ = 0.0;
  double a_max_ = 0.0;
  MatrixXd gram_inverse_;
  FitStatus status_ = FitStatus::kRankReached;
  std::vector<IterationRecord> iterations_;
  std::vector<VectorXd> mu_path_;
};

// Full fit: standardizes x (unless disabled), runs the solver to the requested
// rank and computes out-of-sample transforms.
MklarenModel fit(const MatrixXd& x, const VectorXd& y, const std::vector<KernelFunction>& bank,
                 const FitOptions& options);

}  // namespace mklaren
