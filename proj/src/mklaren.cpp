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

#include "mklaren/mklaren.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mklaren/errors.hpp"
#include "mklaren/inference.hpp"

namespace mklaren {

namespace {

constexpr double kNormFloor = 1e-12;
constexpr double kSchurFloor = 1e-10;
constexpr double kSignalFloor = 1e-12;
constexpr double kGapFloor = 1e-12;

struct ScoreCache {
  VectorXd norms2;
  VectorXd col_sums;
};

ScoreCache build_cache(const CholeskyFactor& factor) {
  ScoreCache cache;
  const auto l = factor.lookahead_block();
  cache.col_sums = l.colwise().sum().transpose();
  if (l.cols() == 0) {
    cache.norms2 = VectorXd::Zero(factor.size());
    return cache;
  }
  MatrixXd mc = l.transpose() * l;
  mc.noalias() -= cache.col_sums * cache.col_sums.transpose() / static_cast<double>(factor.size());
  cache.norms2 = (l * mc).cwiseProduct(l).rowwise().sum();
  return cache;
}

CandidateScores score_with_cache(const CholeskyFactor& factor, const VectorXd& norms2,
                                 const VectorXd& col_sums, const Eigen::Ref<const VectorXd>& r,
                                 const Eigen::Ref<const VectorXd>& u, double lambda,
                                 const std::vector<char>* rejected) {
  const Index n = factor.size();
  if (r.size() != n || u.size() != n)
    throw InputError("candidate_scores: residual and bisector must have one entry per sample");
  CandidateScores out;
  out.c = VectorXd::Zero(n);
  out.a = VectorXd::Zero(n);
  out.admissible.assign(static_cast<size_t>(n), 0);
  if (factor.lookahead_width() == 0) return out;

  const auto l = factor.lookahead_block();
  const double inv_n = 1.0 / static_cast<double>(n);
  const VectorXd rho = l.transpose() * r - col_sums * (r.sum() * inv_n);
  const VectorXd ups = l.transpose() * u - col_sums * (u.sum() * inv_n);
  const VectorXd dr = l * rho;
  const VectorXd du = l * ups;
  const double scale = 1.0 / std::sqrt(1.0 + lambda);
  const VectorXd& d = factor.residual_diagonal();

  for (Index i = 0; i < n; ++i) {
    if (!factor.admissible(i)) continue;
    if (rejected && (*rejected)[static_cast<size_t>(i)]) continue;
    const double n2 = norms2(i);
    if (!(n2 > 0.0) || std::sqrt(n2 / d(i)) <= kNormFloor) continue;
    const double root = std::sqrt(n2);
    const double sign = dr(i) >= 0.0 ? 1.0 : -1.0;
    out.c(i) = std::abs(dr(i)) / root * scale;
    out.a(i) = sign * du(i) / root * scale;
    out.admissible[static_cast<size_t>(i)] = 1;
  }
  return out;
}

}  // namespace

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kRankReached:
      return "rank_reached";
    case FitStatus::kExhausted:
      return "exhausted";
    case FitStatus::kNoSignal:
      return "no_signal";
  }
  return "unknown";
}

std::vector<Index> MklarenModel::kernel_ranks() const {
  std::vector<Index> out;
  for (const auto& k : kernels) out.push_back(static_cast<Index>(k.active.size()));
  return out;
}

VectorXd candidate_column(const CholeskyFactor& factor, Index i) {
  if (i < 0 || i >= factor.size()) throw InputError("candidate_column: index out of range");
  if (!factor.admissible(i))
    throw DegeneratePivotError("candidate_column: pivot " + std::to_string(i) + " is not admissible");
  const auto l = factor.lookahead_block();
  if (l.cols() == 0) return VectorXd::Zero(factor.size());
  return l * l.row(i).transpose() / std::sqrt(factor.residual_diagonal()(i));
}

CandidateScores candidate_scores(const CholeskyFactor& factor, const Eigen::Ref<const VectorXd>& r,
                                 const Eigen::Ref<const VectorXd>& u, double lambda,
                                 const std::vector<char>* rejected) {
  const ScoreCache cache = build_cache(factor);
  return score_with_cache(factor, cache.norms2, cache.col_sums, r, u, lambda, rejected);
}

std::optional<Selection> select_kernel_pivot(const std::vector<CandidateScores>& scores,
                                             double c_max, double a_max, bool first) {
  std::optional<Selection> best;
  double runner_up = std::numeric_limits<double>::infinity();
  for (size_t q = 0; q < scores.size(); ++q) {
    const CandidateScores& s = scores[q];
    for (Index i = 0; i < s.c.size(); ++i) {
      if (!s.admissible[static_cast<size_t>(i)]) continue;
      Selection cand{static_cast<Index>(q), i, 0.0, s.c(i), s.a(i)};
      if (first) {
        if (!best || cand.c_hat > best->c_hat) best = cand;
        continue;
      }
      if (cand.c_hat < c_max) {
        const auto gamma = positive_crossing(c_max, a_max, cand.c_hat, cand.a_hat);
        if (!gamma) continue;
        cand.gamma = *gamma;
      }
      if (!best || cand.gamma < best->gamma) {
        if (best) runner_up = best->gamma;
        best = cand;
      } else {
        runner_up = std::min(runner_up, cand.gamma);
      }
    }
  }
  if (best) best->next_gamma = first ? 0.0 : runner_up;
  return best;
}

BetaSolution solve_beta(const MatrixXd& h, const VectorXd& mu) {
  if (h.rows() != mu.size()) throw InputError("solve_beta: H and mu differ in row count");
  BetaSolution out;
  if (h.cols() == 0) {
    out.beta = VectorXd(0);
    return out;
  }
  Eigen::HouseholderQR<MatrixXd> qr(h);
  const VectorXd diag = qr.matrixQR().diagonal().head(std::min(h.rows(), h.cols())).cwiseAbs();
  if (h.rows() < h.cols() || diag.minCoeff() <= 1e-12 * std::max(diag.maxCoeff(), 1e-300)) {
    out.rank_deficient = true;
    out.beta = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(h).solve(mu);
    return out;
  }
  out.beta = qr.solve(mu);
  return out;
}

MklarenSolver::MklarenSolver(const MatrixXd& x, const VectorXd& y,
                             std::vector<KernelFunction> bank, const FitOptions& options)
    : options_(options), n_(x.rows()) {
  if (options.rank < 1) throw InputError("rank must be at least 1");
  if (options.delta < 0) throw InputError("delta must be nonnegative");
  if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda))
    throw InputError("lambda must be a finite nonnegative number");
  if (n_ < 2) throw InputError("at least two samples are required");
  if (y.size() != n_)
    throw InputError("y has " + std::to_string(y.size()) + " entries, x has " +
                     std::to_string(n_) + " rows");
  if (bank.empty()) throw InputError("kernel bank is empty");
  if (!x.allFinite() || !y.allFinite()) throw DataError("inputs contain non-finite values");

  x_ = std::make_shared<const MatrixXd>(x);
  const Index p = static_cast<Index>(bank.size());
  oracles_.reserve(bank.size());
  factors_.reserve(bank.size());
  for (auto& kernel : bank) {
    validate(kernel, x.cols());
    oracles_.emplace_back(x_, std::move(kernel));
  }
  for (const auto& oracle : oracles_) {
    factors_.emplace_back(oracle, options.delta);
    factors_.back().refresh_lookahead(oracle);
  }
  rejected_.assign(bank.size(), std::vector<char>(static_cast<size_t>(n_), 0));
  norms2_.resize(bank.size());
  col_sums_.resize(bank.size());
  for (Index q = 0; q < p; ++q) rebuild_cache(q);

  rank_cap_ = std::min<Index>(options.rank, p * n_);
  const Index rows = n_ + (options.lambda > 0.0 ? rank_cap_ : 0);
  space_.samples = n_;
  space_.lambda = options.lambda;
  space_.h.resize(rows, std::min<Index>(rank_cap_, 16));

  y_mean_ = y.mean();
  mu_ = VectorXd::Zero(rows);
  r_ = VectorXd::Zero(rows);
  r_.head(n_) = y.array() - y_mean_;
  y_norm_ = r_.norm();
  u_ = VectorXd::Zero(rows);
  gram_inverse_.resize(0, 0);
}

void MklarenSolver::rebuild_cache(Index kernel) {
  ScoreCache cache = build_cache(factors_[static_cast<size_t>(kernel)]);
  norms2_[static_cast<size_t>(kernel)] = std::move(cache.norms2);
  col_sums_[static_cast<size_t>(kernel)] = std::move(cache.col_sums);
}

std::vector<CandidateScores> MklarenSolver::scores() const {
  std::vector<CandidateScores> out;
  out.reserve(factors_.size());
  for (size_t q = 0; q < factors_.size(); ++q)
    out.push_back(score_with_cache(factors_[q], norms2_[q], col_sums_[q], r_.head(n_),
                                   u_.head(n_), options_.lambda, &rejected_[q]));
  return out;
}

bool MklarenSolver::any_admissible() const {
  for (const auto& s : scores())
    for (char ok : s.admissible)
      if (ok) return true;
  return false;
}

bool MklarenSolver::iterate() {
  if (done_) return false;
  if (columns() >= rank_cap_) {
    status_ = FitStatus::kRankReached;
    done_ = true;
    return false;
  }
  std::vector<CandidateScores> all = scores();
  const bool first = columns() == 0;
  if (first) {
    double best = 0.0;
    bool any = false;
    for (const auto& s : all)
      for (Index i = 0; i < s.c.size(); ++i)
        if (s.admissible[static_cast<size_t>(i)]) {
          any = true;
          best = std::max(best, s.c(i));
        }
    if (any && best <= kSignalFloor * y_norm_) {
      status_ = FitStatus::kNoSignal;
      done_ = true;
      return false;
    }
  }
  for (;;) {
    const auto sel = select_kernel_pivot(all, c_max_, a_max_, first);
    if (!sel) {
      status_ = FitStatus::kExhausted;
      done_ = true;
      return false;
    }
    if (commit(sel->kernel, sel->pivot, sel->c_hat, sel->a_hat, sel->next_gamma)) return true;
    all[static_cast<size_t>(sel->kernel)].admissible[static_cast<size_t>(sel->pivot)] = 0;
  }
}

bool MklarenSolver::commit(Index kernel, Index pivot, double c_hat, double a_hat,
                           double gamma_limit) {
  if (kernel < 0 || kernel >= static_cast<Index>(factors_.size()))
    throw InputError("commit: kernel index out of range");
  if (columns() >= rank_cap_) throw InputError("commit: requested rank already reached");
  const size_t q = static_cast<size_t>(kernel);
  CholeskyFactor& factor = factors_[q];
  const VectorXd g = factor.exact_column(oracles_[q], pivot);

  const double mean = g.mean();
  const VectorXd z = g.array() - mean;
  const double norm = z.norm();
  if (norm <= kNormFloor) {
    rejected_[q][static_cast<size_t>(pivot)] = 1;
    return false;
  }

  const Index l = columns();
  const double lambda = options_.lambda;
  const double scale = 1.0 / std::sqrt(1.0 + lambda);
  VectorXd col = VectorXd::Zero(r_.size());
  col.head(n_) = z * (scale / norm);
  if (lambda > 0.0) col(n_ + l) = std::sqrt(lambda) * scale;
  int sign = col.dot(r_) >= 0.0 ? 1 : -1;
  if (sign < 0) col = -col;

  VectorXd b;
  VectorXd v;
  double schur = col.squaredNorm();
  if (l > 0) {
    b = h().transpose() * col;
    v = gram_inverse_ * b;
    // Second projection pass; the Schur complement is the squared norm of the
    // part of col outside span(H), which avoids cancellation in |col|^2 - b^T v.
    VectorXd outside = col - h() * v;
    v.noalias() += gram_inverse_ * (h().transpose() * outside);
    outside = col - h() * v;
    schur = outside.squaredNorm();
  }
  if (schur <= kSchurFloor) {
    rejected_[q][static_cast<size_t>(pivot)] = 1;
    return false;
  }

  const Index local = factor.rank();
  factor.step(oracles_[q], pivot);

  IterationRecord rec;
  rec.kernel = kernel;
  rec.pivot = pivot;
  rec.c_hat = c_hat;
  rec.a_hat = a_hat;
  rec.c = col.dot(r_);
  rec.a = col.dot(u_);

  double gamma = 0.0;
  if (l > 0 && rec.c < c_max_) {
    if (const auto crossing = positive_crossing(c_max_, a_max_, rec.c, rec.a)) {
      gamma = *crossing;
      rec.equalized = true;
    }
  }
  const double cap = std::max(0.0, std::min(gamma_limit, r_.dot(u_)));
  if (gamma > cap) {
    gamma = cap;
    rec.equalized = false;
  }
  rec.gamma = gamma;
  if (gamma > 0.0) {
    mu_.noalias() += gamma * u_;
    r_.noalias() -= gamma * u_;
  }

  if (col.dot(r_) < 0.0) {
    col = -col;
    sign = -sign;
    if (l > 0) {
      b = -b;
      v = -v;
    }
  }

  MatrixXd grown(l + 1, l + 1);
  if (l > 0) {
    grown.topLeftCorner(l, l) = gram_inverse_ + v * v.transpose() / schur;
    grown.topRightCorner(l, 1) = -v / schur;
    grown.bottomLeftCorner(1, l) = -v.transpose() / schur;
  }
  grown(l, l) = 1.0 / schur;
  gram_inverse_.swap(grown);

  if (space_.h.cols() <= l) {
    MatrixXd wider(space_.h.rows(), std::min<Index>(rank_cap_, std::max<Index>(2 * l, l + 1)));
    wider.leftCols(l) = space_.h.leftCols(l);
    space_.h.swap(wider);
  }
  space_.h.col(l) = col;
  space_.columns.push_back(SpaceColumn{kernel, pivot, local, sign, mean, norm / scale});

  rec.rebalance = rebalance();
  update_direction();
  const VectorXd corr = h().transpose() * r_;
  c_max_ = corr.maxCoeff();
  rec.correlation_gap = c_max_ - corr.minCoeff();
  rec.residual_norm = r_.norm();

  if (options_.verify_gram_inverse) {
    // Direct inverse from the triangular factor of H, (H^T H)^-1 = R^-1 R^-T.
    const Eigen::HouseholderQR<MatrixXd> qr(h());
    const MatrixXd r = qr.matrixQR().topRows(l + 1).triangularView<Eigen::Upper>();
    const MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(l + 1, l + 1));
    const MatrixXd direct = r_inv * r_inv.transpose();
    rec.gram_inverse_error = (direct - gram_inverse_).cwiseAbs().maxCoeff();
  }

  factor.refresh_lookahead(oracles_[q]);
  rebuild_cache(kernel);

  iterations_.push_back(rec);
  mu_path_.push_back(mu_.head(n_));
  return true;
}

double MklarenSolver::rebalance() {
  const VectorXd corr = h().transpose() * r_;
  const VectorXd weights = gram_inverse_ * corr;
  const double ones = gram_inverse_.sum();
  // Any common level up to sqrt(c^T T^-1 c / 1^T T^-1 1) keeps |r| from growing.
  const double ceiling = std::sqrt(std::max(0.0, corr.dot(weights)) / ones);
  const double level = std::max(0.0, std::min(corr.minCoeff(), ceiling));
  if (corr.maxCoeff() - level <= kGapFloor * std::max(1.0, corr.maxCoeff())) return 0.0;
  const VectorXd shift = h() * (weights - level * gram_inverse_.rowwise().sum());
  mu_ += shift;
  r_ -= shift;
  return shift.norm();
}

void MklarenSolver::update_direction() {
  const Bisector dir = bisector(h(), gram_inverse_);
  u_ = dir.u;
  a_max_ = dir.a;
  omega_ = dir.omega;
}

MklarenModel MklarenSolver::finish(const Standardizer& standardizer) {
  if (standardizer.dim() != x_->cols())
    throw InputError("finish: standardizer dimension does not match the data");
  done_ = true;
  const Index k = columns();
  MklarenModel model;
  if (k > 0 && !any_admissible()) {
    const MatrixXd hk = h();
    const VectorXd y_aug = mu_ + r_;
    const VectorXd coef = hk.colPivHouseholderQr().solve(y_aug);
    mu_ = hk * coef;
    r_ = y_aug - mu_;
    mu_path_.push_back(mu_.head(n_));
    model.path_complete = true;
  }
  if (k < rank_cap_ && status_ == FitStatus::kRankReached) status_ = FitStatus::kExhausted;

  const Index rows = n_ + (options_.lambda > 0.0 ? k : 0);
  model.space.samples = n_;
  model.space.lambda = options_.lambda;
  model.space.columns = space_.columns;
  model.space.h = space_.h.topLeftCorner(rows, k);

  const BetaSolution beta = solve_beta(model.space.h, mu_.head(rows));
  model.beta = beta.beta;
  model.rank_deficient = beta.rank_deficient;
  model.mu = mu_.head(n_);
  model.y_mean = y_mean_;
  model.lambda = options_.lambda;
  model.delta = options_.delta;
  model.rank = options_.rank;
  model.standardizer = standardizer;
  model.status = status_;
  model.iterations = iterations_;
  model.mu_path = mu_path_;
  model.gram_inverse = gram_inverse_;

  for (size_t q = 0; q < factors_.size(); ++q) {
    KernelComponent comp;
    comp.kernel = oracles_[q].kernel();
    comp.active = factors_[q].active();
    comp.factor = factors_[q].matrix();
    comp.active_points.resize(static_cast<Index>(comp.active.size()), x_->cols());
    for (size_t j = 0; j < comp.active.size(); ++j)
      comp.active_points.row(static_cast<Index>(j)) = x_->row(comp.active[j]);
    comp.transform = transform_from_pivots(comp.factor, comp.active);
    model.kernels.push_back(std::move(comp));
  }
  return model;
}

MklarenModel fit(const MatrixXd& x, const VectorXd& y, const std::vector<KernelFunction>& bank,
                 const FitOptions& options) {
  if (x.rows() != y.size())
    throw InputError("x has " + std::to_string(x.rows()) + " rows, y has " +
                     std::to_string(y.size()) + " entries");
  const Standardizer standardizer =
      options.standardize ? Standardizer::fit(x) : Standardizer::identity(x.cols());
  MklarenSolver solver(standardizer.apply(x), y, bank, options);
  while (solver.iterate()) {
  }
  return solver.finish(standardizer);
}

}  // namespace mklaren
