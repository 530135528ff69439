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

#include "mklaren/lar.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mklaren/errors.hpp"

namespace mklaren {

namespace {

constexpr double kDenominatorFloor = 1e-14;

Bisector finish_bisector(const Eigen::Ref<const MatrixXd>& x, const VectorXd& weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw CollinearColumnsError("bisector: Gram matrix of active columns is singular");
  Bisector out;
  out.a = 1.0 / std::sqrt(total);
  out.omega = out.a * weights;
  out.u.noalias() = x * out.omega;
  return out;
}

}  // namespace

Bisector bisector(const MatrixXd& signed_active) {
  if (signed_active.cols() == 0) throw InputError("bisector of an empty column set");
  const MatrixXd gram = signed_active.transpose() * signed_active;
  Eigen::LDLT<MatrixXd> ldlt(gram);
  const VectorXd d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * d.cwiseAbs().maxCoeff())
    throw CollinearColumnsError("bisector: active columns are linearly dependent");
  return finish_bisector(signed_active, ldlt.solve(VectorXd::Ones(gram.rows())));
}

Bisector bisector(const Eigen::Ref<const MatrixXd>& signed_active, const MatrixXd& gram_inverse) {
  if (signed_active.cols() != gram_inverse.rows())
    throw InputError("bisector: Gram inverse does not match the active columns");
  return finish_bisector(signed_active, gram_inverse.rowwise().sum());
}

std::optional<double> positive_crossing(double c_max, double a_max, double c, double a) {
  std::optional<double> best;
  const auto consider = [&](double num, double den) {
    if (std::abs(den) <= kDenominatorFloor) return;
    const double value = num / den;
    if (value > 0.0 && std::isfinite(value) && (!best || value < *best)) best = value;
  };
  consider(c_max - c, a_max - a);
  consider(c_max + c, a_max + a);
  return best;
}

StepSize step_size(double c_max, double a_max, const Eigen::Ref<const VectorXd>& c,
                   const Eigen::Ref<const VectorXd>& a) {
  if (c.size() != a.size()) throw InputError("step_size: correlation arrays differ in size");
  StepSize out;
  out.gamma = c_max / a_max;
  double best = std::numeric_limits<double>::infinity();
  for (Index m = 0; m < c.size(); ++m) {
    const auto gamma = positive_crossing(c_max, a_max, c(m), a(m));
    if (gamma && *gamma < best) {
      best = *gamma;
      out.entering = m;
    }
  }
  if (out.entering >= 0) out.gamma = best;
  return out;
}

MatrixXd unit_norm_columns(const MatrixXd& x) {
  MatrixXd out = x.rowwise() - x.colwise().mean();
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0.0) out.col(j) /= norm;
  }
  return out;
}

std::vector<LarState> lar_path(const MatrixXd& x, const VectorXd& y, Index max_steps) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (y.size() != n) throw InputError("lar_path: y has " + std::to_string(y.size()) +
                                      " entries, X has " + std::to_string(n) + " rows");
  if (max_steps < 0) throw InputError("lar_path: max_steps must be nonnegative");
  for (Index j = 0; j < p; ++j) {
    if (std::abs(x.col(j).sum()) > 1e-8 || std::abs(x.col(j).norm() - 1.0) > 1e-8)
      throw InputError("lar_path: column " + std::to_string(j) +
                       " is not centered with unit norm");
  }
  if (std::abs(y.sum()) > 1e-8 * std::max(1.0, y.norm()))
    throw InputError("lar_path: y is not centered");

  std::vector<LarState> path;
  VectorXd corr = x.transpose() * y;
  if (p == 0) return path;
  Index first = 0;
  corr.cwiseAbs().maxCoeff(&first);
  if (std::abs(corr(first)) <= 1e-12 * std::max(1.0, y.norm())) return path;

  LarState state;
  state.mu = VectorXd::Zero(n);
  state.r = y;
  state.beta = VectorXd::Zero(p);
  state.active = {first};
  state.signs = {corr(first) >= 0.0 ? 1 : -1};
  state.c_max = std::abs(corr(first));
  state.entered = first;
  path.push_back(state);

  std::vector<char> in_active(static_cast<size_t>(p), 0);
  in_active[static_cast<size_t>(first)] = 1;

  for (Index step = 0; step < max_steps; ++step) {
    const Index k = static_cast<Index>(state.active.size());
    MatrixXd xa(n, k);
    for (Index j = 0; j < k; ++j)
      xa.col(j) = state.signs[static_cast<size_t>(j)] * x.col(state.active[static_cast<size_t>(j)]);
    Bisector dir;
    try {
      dir = bisector(xa);
    } catch (const CollinearColumnsError&) {
      break;
    }
    const VectorXd a_all = x.transpose() * dir.u;

    std::vector<Index> inactive;
    for (Index j = 0; j < p; ++j)
      if (!in_active[static_cast<size_t>(j)]) inactive.push_back(j);
    VectorXd c_in(static_cast<Index>(inactive.size()));
    VectorXd a_in(static_cast<Index>(inactive.size()));
    for (size_t m = 0; m < inactive.size(); ++m) {
      c_in(static_cast<Index>(m)) = corr(inactive[m]);
      a_in(static_cast<Index>(m)) = a_all(inactive[m]);
    }
    const StepSize s = step_size(state.c_max, dir.a, c_in, a_in);

    state.mu += s.gamma * dir.u;
    state.r -= s.gamma * dir.u;
    for (Index j = 0; j < k; ++j)
      state.beta(state.active[static_cast<size_t>(j)]) +=
          s.gamma * dir.omega(j) * state.signs[static_cast<size_t>(j)];
    corr.noalias() = x.transpose() * state.r;
    state.gamma = s.gamma;
    state.a = dir.a;
    state.c_max = state.c_max - s.gamma * dir.a;
    state.entered = -1;
    if (s.entering >= 0) {
      const Index j = inactive[static_cast<size_t>(s.entering)];
      state.active.push_back(j);
      state.signs.push_back(corr(j) >= 0.0 ? 1 : -1);
      in_active[static_cast<size_t>(j)] = 1;
      state.entered = j;
    }
    path.push_back(state);
    if (s.entering < 0) break;
  }
  return path;
}

}  // namespace mklaren
