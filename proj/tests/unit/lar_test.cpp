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
#include <random>

#include <gtest/gtest.h>

#include "mklaren/errors.hpp"
#include "oracles.hpp"

namespace mklaren {
namespace {

VectorXd centered(VectorXd y) {
  y.array() -= y.mean();
  return y;
}

TEST(BisectorTest, SingleUnitColumn) {
  MatrixXd x(3, 1);
  x << 0.6, 0.8, 0.0;
  const Bisector b = bisector(x);
  EXPECT_NEAR(b.a, 1.0, 1e-15);
  EXPECT_LE((b.u - x.col(0)).norm(), 1e-15);
}

TEST(BisectorTest, TwoOrthonormalColumns) {
  const MatrixXd x = MatrixXd::Identity(3, 2);
  const Bisector b = bisector(x);
  EXPECT_NEAR(b.a, 1 / std::sqrt(2.0), 1e-15);
  EXPECT_LE((b.u - (x.col(0) + x.col(1)) / std::sqrt(2.0)).norm(), 1e-15);
}

TEST(BisectorTest, UnitColumnsAtSixtyDegrees) {
  MatrixXd x(2, 2);
  x << 1, 0.5, 0, std::sqrt(3.0) / 2;
  const Bisector b = bisector(x);
  MatrixXd t(2, 2);
  t << 1, 0.5, 0.5, 1;
  const double expected = 1 / std::sqrt(VectorXd::Ones(2).dot(t.inverse() * VectorXd::Ones(2)));
  EXPECT_NEAR(b.a, expected, 1e-12);
  EXPECT_NEAR(b.a, 0.8660254037844386, 1e-12);
}

TEST(BisectorTest, EquiangularOnRandomColumns) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = oracles::random_matrix(15, 1 + trial % 6, rng);
    const Bisector b = bisector(x);
    EXPECT_NEAR(b.u.norm(), 1.0, 1e-12);
    const VectorXd dots = x.transpose() * b.u;
    EXPECT_LE((dots.array() - b.a).abs().maxCoeff(), 1e-10);
    EXPECT_LE((x * b.omega - b.u).norm(), 1e-10);
    const Bisector with_inverse = bisector(x, (x.transpose() * x).inverse());
    EXPECT_LE((with_inverse.u - b.u).norm(), 1e-10);
  }
}

TEST(BisectorTest, CollinearColumnsThrow) {
  MatrixXd x(3, 2);
  x << 1, 2, 1, 2, 0, 0;
  EXPECT_THROW(bisector(x), CollinearColumnsError);
}

TEST(StepSizeTest, NoCandidatesFallsBackToFullStep) {
  const StepSize s = step_size(0.8, 0.4, VectorXd(), VectorXd());
  EXPECT_DOUBLE_EQ(s.gamma, 2.0);
  EXPECT_EQ(s.entering, -1);
}

TEST(StepSizeTest, ZeroCandidate) {
  const StepSize s = step_size(0.8, 0.4, VectorXd::Zero(1), VectorXd::Zero(1));
  EXPECT_DOUBLE_EQ(s.gamma, 2.0);
  EXPECT_EQ(s.entering, 0);
}

TEST(StepSizeTest, MinimumOverPositiveArguments) {
  const StepSize s = step_size(1.0, 1.0, VectorXd::Constant(1, 0.5), VectorXd::Constant(1, 0.25));
  EXPECT_NEAR(s.gamma, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(s.entering, 0);
}

TEST(StepSizeTest, TiesGoToLowestIndex) {
  const StepSize s = step_size(1.0, 1.0, VectorXd::Constant(3, 0.5), VectorXd::Constant(3, 0.25));
  EXPECT_EQ(s.entering, 0);
}

TEST(PositiveCrossingTest, DropsVanishingBranch) {
  const auto g = positive_crossing(1.0, 1.0, 0.5, 1.0);
  ASSERT_TRUE(g.has_value());
  EXPECT_NEAR(*g, 0.75, 1e-15);
  EXPECT_FALSE(positive_crossing(1.0, 1.0, 1.0, -1.0).has_value());
}

TEST(LarPathTest, OrthonormalSingleSignal) {
  MatrixXd x(4, 2);
  x << 1, 1, -1, 1, 1, -1, -1, -1;
  x /= 2.0;
  const VectorXd y = 2.0 * x.col(0);
  const auto path = lar_path(x, y, 2);
  ASSERT_FALSE(path.empty());
  EXPECT_EQ(path.front().active.front(), 0);
  EXPECT_LE((path.back().mu - y).norm(), 1e-12);
}

TEST(LarPathTest, ZeroResponseGivesEmptyPath) {
  const MatrixXd x = unit_norm_columns((MatrixXd(4, 2) << 1, 2, 3, 1, 0, 5, 2, 2).finished());
  EXPECT_TRUE(lar_path(x, VectorXd::Zero(4), 2).empty());
}

TEST(LarPathTest, RejectsUnstandardizedInput) {
  MatrixXd x(3, 1);
  x << 1, 2, 3;
  EXPECT_THROW(lar_path(x, centered(VectorXd::LinSpaced(3, 0, 1)), 1), InputError);
  const MatrixXd xs = unit_norm_columns(x);
  EXPECT_THROW(lar_path(xs, VectorXd::Ones(3), 1), InputError);
}

TEST(LarPathTest, MatchesBruteForceBreakpoints) {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd x = unit_norm_columns(oracles::random_matrix(30, 5, rng));
    const VectorXd y = centered(x * oracles::random_matrix(5, 1, rng).col(0) +
                                0.3 * oracles::random_matrix(30, 1, rng).col(0));
    const auto path = lar_path(x, y, 5);
    const auto reference = oracles::brute_force_lars(x, y);
    ASSERT_EQ(path.size(), reference.size());
    for (size_t k = 0; k < path.size(); ++k) {
      EXPECT_LE((path[k].beta - reference[k].beta).cwiseAbs().maxCoeff(), 1e-8) << k;
      EXPECT_LE((path[k].mu - reference[k].mu).cwiseAbs().maxCoeff(), 1e-8) << k;
      EXPECT_EQ(path[k].active, reference[k].active) << k;
    }
  }
}

TEST(LarPathTest, PathInvariants) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Index p = 3 + trial;
    const MatrixXd x = unit_norm_columns(oracles::random_matrix(40, p, rng));
    const VectorXd y = centered(oracles::random_matrix(40, 1, rng).col(0));
    const auto path = lar_path(x, y, p);
    ASSERT_EQ(static_cast<Index>(path.size()), p + 1);
    double previous_c = path.front().c_max;
    double previous_r = path.front().r.norm();
    for (size_t k = 0; k + 1 < path.size(); ++k) {
      const LarState& s = path[k];
      const VectorXd c = x.transpose() * s.r;
      double lo = INFINITY, hi = 0.0;
      std::vector<char> active(static_cast<size_t>(p), 0);
      for (Index j : s.active) {
        lo = std::min(lo, std::abs(c(j)));
        hi = std::max(hi, std::abs(c(j)));
        active[static_cast<size_t>(j)] = 1;
      }
      EXPECT_LE(hi - lo, 1e-8);
      for (Index m = 0; m < p; ++m)
        if (!active[static_cast<size_t>(m)]) EXPECT_LE(std::abs(c(m)), hi + 1e-8);
      EXPECT_LE(s.c_max, previous_c + 1e-12);
      EXPECT_LE(s.r.norm(), previous_r + 1e-12);
      EXPECT_LE((x * s.beta - s.mu).norm(), 1e-8);
      previous_c = s.c_max;
      previous_r = s.r.norm();
    }
    EXPECT_LE((path.back().mu - x * oracles::ols(x, y)).norm(), 1e-8);
  }
}

TEST(LarPathTest, CorrelationUpdateIdentity) {
  std::mt19937_64 rng(32);
  const MatrixXd x = unit_norm_columns(oracles::random_matrix(25, 4, rng));
  const VectorXd y = centered(oracles::random_matrix(25, 1, rng).col(0));
  const auto path = lar_path(x, y, 4);
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    const VectorXd u = (path[k + 1].mu - path[k].mu) / path[k + 1].gamma;
    const VectorXd predicted = x.transpose() * path[k].r - path[k + 1].gamma * (x.transpose() * u);
    EXPECT_LE((x.transpose() * path[k + 1].r - predicted).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(LarPathTest, MaxStepsTruncates) {
  std::mt19937_64 rng(33);
  const MatrixXd x = unit_norm_columns(oracles::random_matrix(20, 6, rng));
  const VectorXd y = centered(oracles::random_matrix(20, 1, rng).col(0));
  const auto path = lar_path(x, y, 2);
  EXPECT_EQ(path.back().active.size(), 3u);
}

TEST(UnitNormColumnsTest, CentersAndScales) {
  std::mt19937_64 rng(34);
  const MatrixXd x = unit_norm_columns(oracles::random_matrix(10, 3, rng));
  EXPECT_LE(x.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((x.colwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace mklaren
