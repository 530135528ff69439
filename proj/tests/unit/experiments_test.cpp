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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mklaren/baselines.hpp"
#include "mklaren/benchmark.hpp"
#include "mklaren/dataset.hpp"
#include "mklaren/errors.hpp"
#include "oracles.hpp"

namespace mklaren {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("mklaren_exp_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string fixture(const std::string& name) { return std::string(MKLAREN_FIXTURE_DIR) + "/" + name; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(LoadCsvTest, SmallFile) {
  TempDir dir;
  const auto path = dir.write("small.csv", "a,b,target\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d = load_csv(path, "target");
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.y, (VectorXd(3) << 3, 6, 9).finished());
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
  const Dataset first = load_csv(path, "a");
  EXPECT_EQ(first.y, (VectorXd(3) << 1, 4, 7).finished());
  EXPECT_EQ(load_csv(path, "").target_name, "target");
}

TEST(LoadCsvTest, MissingFileNamesPath) {
  const std::string msg = error_of([] { load_csv("/no/such/file.csv", ""); });
  EXPECT_NE(msg.find("/no/such/file.csv"), std::string::npos);
  EXPECT_THROW(load_csv("/no/such/file.csv", ""), DataError);
}

TEST(LoadCsvTest, BlankCellNamesRowAndColumn) {
  TempDir dir;
  const auto path = dir.write("blank.csv", "a,b,y\n1,2,3\n4,,6\n");
  EXPECT_THROW(load_csv(path, "y"), DataError);
  const std::string msg = error_of([&] { load_csv(path, "y"); });
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("b"), std::string::npos) << msg;
}

TEST(LoadCsvTest, NonNumericAndMissingTarget) {
  TempDir dir;
  const auto bad = dir.write("bad.csv", "a,y\n1,2\nfoo,3\n");
  EXPECT_THROW(load_csv(bad, "y"), DataError);
  const auto good = dir.write("good.csv", "a,y\n1,2\n");
  EXPECT_THROW(load_csv(good, "z"), DataError);
  const auto ragged = dir.write("ragged.csv", "a,y\n1,2,3\n");
  EXPECT_THROW(load_csv(ragged, "y"), DataError);
}

TEST(LoadCsvTest, WriteRoundTrip) {
  TempDir dir;
  Dataset d;
  d.x = (MatrixXd(2, 2) << 0.1, 1.0 / 3.0, -2.5e-7, 4.0).finished();
  d.y = (VectorXd(2) << 1e10, -0.7).finished();
  d.feature_names = {"p", "q"};
  d.target_name = "t";
  write_csv(dir.path("out.csv"), d);
  const Dataset back = load_csv(dir.path("out.csv"), "t");
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
}

TEST(StandardizerTest, PopulationStatisticsAndConstantFeature) {
  MatrixXd x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  const Standardizer s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean(0), 2.5);
  EXPECT_DOUBLE_EQ(s.scale(0), std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(s.scale(1), 1.0);
  const MatrixXd z = s.apply(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_EQ(z.col(1), VectorXd::Zero(4));
  EXPECT_THROW(s.apply(MatrixXd::Zero(2, 3)), InputError);
}

TEST(SplitTest, SizesAndDeterminism) {
  const Split s = split_60_20_20(10, 3);
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(s.validation.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  const Split again = split_60_20_20(10, 3);
  EXPECT_EQ(s.train, again.train);
  EXPECT_EQ(s.test, again.test);
  const Split big = split_60_20_20(1000, 1);
  EXPECT_EQ(big.train.size(), 600u);
  EXPECT_EQ(big.validation.size(), 200u);
  EXPECT_EQ(big.test.size(), 200u);
  std::set<Index> all(big.train.begin(), big.train.end());
  all.insert(big.validation.begin(), big.validation.end());
  all.insert(big.test.begin(), big.test.end());
  EXPECT_EQ(all.size(), 1000u);
  EXPECT_EQ(*all.rbegin(), 999);
  EXPECT_NE(split_60_20_20(50, 1).train, split_60_20_20(50, 2).train);
  EXPECT_THROW(split_60_20_20(4, 0), InputError);
}

TEST(SubsampleTest, SortedSubset) {
  const auto s = subsample(100, 30, 5);
  EXPECT_EQ(s.size(), 30u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 30u);
  EXPECT_EQ(subsample(10, 30, 5).size(), 10u);
  EXPECT_EQ(s, subsample(100, 30, 5));
}

TEST(RmseTest, Examples) {
  const VectorXd t = VectorXd::LinSpaced(6, 0, 5);
  EXPECT_EQ(rmse(t, t), 0.0);
  VectorXd p = t;
  for (Index i = 0; i < p.size(); ++i) p(i) += i % 2 == 0 ? 1.0 : -1.0;
  EXPECT_DOUBLE_EQ(rmse(p, t), 1.0);
  EXPECT_THROW(rmse(VectorXd(), VectorXd()), InputError);
  EXPECT_THROW(rmse(t, t.head(3)), InputError);
}

TEST(RidgeSolveTest, MatchesClosedForm) {
  std::mt19937_64 rng(100);
  const MatrixXd f = oracles::random_matrix(30, 5, rng);
  const VectorXd y = oracles::random_matrix(30, 1, rng).col(0);
  for (double lambda : {0.0, 0.1, 10.0})
    EXPECT_LE((ridge_solve(f, y, lambda) - oracles::ridge_closed_form(f, y, lambda)).norm(), 1e-10);
}

TEST(StackedFactorTest, FullRankSingleKernelIsLeastSquares) {
  std::mt19937_64 rng(101);
  const MatrixXd x = oracles::random_matrix(25, 3, rng);
  const VectorXd y = oracles::random_matrix(25, 1, rng).col(0);
  for (PivotRule rule : {PivotRule::kMaxResidual, PivotRule::kUniformRandom}) {
    StackedFactorModel model(x, {KernelFunction::linear()}, 3, rule, 4);
    model.fit(y, 0.0);
    const MatrixXd f = model.train_features();
    const VectorXd yc = y.array() - y.mean();
    const VectorXd fitted = model.predict(x).array() - y.mean();
    EXPECT_LE((fitted - f * oracles::ols(f, yc)).cwiseAbs().maxCoeff(), 1e-6);
    const MatrixXd xs = Standardizer::fit(x).apply(x);
    EXPECT_LE((fitted - xs * oracles::ols(xs, yc)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(StackedFactorTest, ZeroRankThrows) {
  EXPECT_THROW(StackedFactorModel(MatrixXd::Ones(5, 2), {KernelFunction::linear()}, 0, PivotRule::kMaxResidual),
               InputError);
}

TEST(StackedFactorTest, RepeatedKernelsKeepSingleKernelRank) {
  std::mt19937_64 rng(102);
  const MatrixXd x = oracles::random_matrix(40, 2, rng);
  const VectorXd y = oracles::random_matrix(40, 1, rng).col(0);
  const KernelFunction k = KernelFunction::gaussian(0.5);
  StackedFactorModel single(x, {k}, 6, PivotRule::kMaxResidual);
  StackedFactorModel triple(x, {k, k, k}, 6, PivotRule::kMaxResidual);
  const auto rank_of = [](const MatrixXd& m) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    qr.setThreshold(1e-8);
    return qr.rank();
  };
  EXPECT_EQ(triple.train_features().cols(), 18);
  EXPECT_EQ(rank_of(triple.train_features()), rank_of(single.train_features()));
  triple.fit(y, 0.1);
  EXPECT_TRUE(triple.predict(x).allFinite());
}

TEST(StackedFactorTest, NystromPivotsAreSeeded) {
  std::mt19937_64 rng(103);
  const MatrixXd x = oracles::random_matrix(30, 2, rng);
  StackedFactorModel a(x, gaussian_bank(2), 3, PivotRule::kUniformRandom, 9);
  StackedFactorModel b(x, gaussian_bank(2), 3, PivotRule::kUniformRandom, 9);
  StackedFactorModel c(x, gaussian_bank(2), 3, PivotRule::kUniformRandom, 10);
  EXPECT_EQ(a.kernels()[0].active, b.kernels()[0].active);
  EXPECT_NE(a.kernels()[0].active, c.kernels()[0].active);
}

TEST(UniformRidgeTest, LinearKernelApproachesLeastSquares) {
  std::mt19937_64 rng(104);
  const MatrixXd x = oracles::random_matrix(30, 3, rng);
  const VectorXd y = x * VectorXd::LinSpaced(3, 1, 3) + oracles::random_matrix(30, 1, rng).col(0);
  UniformRidge model(x, y, {KernelFunction::linear()});
  model.fit(1e-7);
  const MatrixXd xs = Standardizer::fit(x).apply(x);
  const VectorXd yc = y.array() - y.mean();
  const VectorXd expected = (xs * oracles::ols(xs, yc)).array() + y.mean();
  EXPECT_LE((model.predict(x) - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(UniformRidgeTest, HugePenaltyPredictsMean) {
  std::mt19937_64 rng(105);
  const MatrixXd x = oracles::random_matrix(20, 2, rng);
  const VectorXd y = oracles::random_matrix(20, 1, rng).col(0).array() + 3.0;
  UniformRidge model(x, y, gaussian_bank(2));
  model.fit(1e12);
  EXPECT_LE((model.predict(oracles::random_matrix(5, 2, rng)).array() - y.mean()).abs().maxCoeff(), 1e-9);
}

TEST(UniformRidgeTest, MatchesDualClosedForm) {
  std::mt19937_64 rng(106);
  const MatrixXd x = oracles::random_matrix(15, 2, rng);
  const VectorXd y = oracles::random_matrix(15, 1, rng).col(0);
  const auto bank = gaussian_bank(2);
  UniformRidge model(x, y, bank);
  model.fit(0.5);
  const MatrixXd xs = Standardizer::fit(x).apply(x);
  MatrixXd k = MatrixXd::Zero(15, 15);
  for (const auto& kern : bank)
    for (Index i = 0; i < 15; ++i)
      for (Index j = 0; j < 15; ++j) k(i, j) += evaluate(kern, xs.row(i).transpose(), xs.row(j).transpose());
  const VectorXd alpha = (k + 0.5 * MatrixXd::Identity(15, 15)).ldlt().solve((y.array() - y.mean()).matrix());
  EXPECT_LE((model.alpha() - alpha).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(UniformRidgeTest, RefusesLargeInputs) {
  const MatrixXd x = MatrixXd::Zero(kUniformSampleLimit + 1, 1);
  const std::string msg = error_of([&] { UniformRidge(x, VectorXd::Zero(x.rows()), {KernelFunction::linear()}); });
  EXPECT_NE(msg.find("5001"), std::string::npos) << msg;
}

TEST(ExplainedVarianceTest, JumpsToOneAtTheGeneratingFeature) {
  MatrixXd x(8, 3);
  x << 1, 1, 1, -1, 1, -1, 1, -1, 1, -1, -1, -1, 1, 1, -1, -1, 1, 1, 1, -1, -1, -1, -1, 1;
  Dataset d;
  d.x = x;
  d.y = x.col(1);
  d.feature_names = {"a", "b", "c"};
  FitOptions opts;
  opts.rank = 3;
  opts.delta = 1;
  const MklarenModel model = fit(d.x, d.y, rank_one_bank(3), opts);
  const auto path = explained_variance_path(model, d);
  ASSERT_FALSE(path.empty());
  EXPECT_EQ(path.front().label, "b");
  EXPECT_NEAR(path.front().explained, 1.0, 1e-12);
  EXPECT_EQ(path.front().sign, 1);
}

TEST(ExplainedVarianceTest, NondecreasingAlongThePath) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = oracles::sparse_counts(150, 12, 3, seed);
    Dataset d;
    d.x = data.x;
    d.y = data.y;
    FitOptions opts;
    opts.rank = 8;
    opts.delta = 1;
    const auto path = explained_variance_path(fit(d.x, d.y, rank_one_bank(12), opts), d);
    for (size_t i = 1; i < path.size(); ++i) EXPECT_GE(path[i].explained, path[i - 1].explained - 1e-12);
    for (const auto& step : path) EXPECT_LE(step.explained, 1.0 + 1e-12);
  }
  Dataset g;
  std::mt19937_64 rng(7);
  g.x = oracles::random_matrix(60, 3, rng);
  g.y = g.x.col(0).array().sin().matrix();
  FitOptions opts;
  opts.rank = 10;
  const auto path = explained_variance_path(fit(g.x, g.y, gaussian_bank(3), opts), g);
  for (size_t i = 1; i < path.size(); ++i) EXPECT_GE(path[i].explained, path[i - 1].explained - 1e-12);
  EXPECT_THROW(explained_variance_path(fit(g.x, g.y, gaussian_bank(3), opts), Dataset{}), InputError);
}

TEST(MethodTest, Names) {
  for (Method m : {Method::kMklaren, Method::kIcdRidge, Method::kNystromRidge, Method::kUniformRidge})
    EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_EQ(method_from_string("icd_ridge"), Method::kIcdRidge);
  EXPECT_THROW(method_from_string("lasso"), InputError);
  EXPECT_EQ(default_lambda_grid().size(), 7u);
  EXPECT_DOUBLE_EQ(default_lambda_grid().front(), 1e-3);
  EXPECT_DOUBLE_EQ(default_lambda_grid().back(), 1e3);
}

TEST(RunCellTest, SelectedLambdaComesFromTheGrid) {
  const Dataset d = load_csv(fixture("synthetic.csv"), "y");
  const auto grid = default_lambda_grid();
  const auto bank = gaussian_bank(d.dim());
  for (Method m : {Method::kMklaren, Method::kIcdRidge, Method::kNystromRidge, Method::kUniformRidge}) {
    const ResultRow row = run_cell(d, "synthetic", bank, m, 14, 10, grid, 0, 3);
    EXPECT_NE(std::find(grid.begin(), grid.end(), row.lambda), grid.end());
    EXPECT_GT(row.rmse_test, 0.0);
    EXPECT_FALSE(row.skipped);
  }
  EXPECT_THROW(run_cell(d, "synthetic", bank, Method::kIcdRidge, 3, 10, grid, 0, 3), InputError);
}

ExperimentPlan fixture_plan() {
  ExperimentPlan plan;
  plan.datasets = {{"synthetic", fixture("synthetic.csv"), "y"}};
  plan.bank = {KernelFunction::gaussian(0.1), KernelFunction::gaussian(1.0)};
  plan.ranks = {4, 8};
  plan.folds = 2;
  return plan;
}

std::string csv_without_runtime(const std::vector<ResultRow>& rows) {
  std::vector<ResultRow> copy = rows;
  for (auto& r : copy) r.runtime_ms = 0.0;
  std::ostringstream out;
  write_results_csv(out, copy);
  return out.str();
}

TEST(RunPlanTest, DeterministicAcrossRunsAndWorkerCounts) {
  const ExperimentPlan plan = fixture_plan();
  const auto one = run_plan(plan, 1);
  const auto two = run_plan(plan, 3);
  EXPECT_EQ(one.size(), 4u * 2u * 2u - 2u);  // uniform ignores the rank list
  EXPECT_EQ(csv_without_runtime(one), csv_without_runtime(two));
  EXPECT_EQ(csv_without_runtime(one), csv_without_runtime(run_plan(plan, 1)));
}

TEST(RunPlanTest, MissingDatasetIsSkipped) {
  ExperimentPlan plan = fixture_plan();
  plan.datasets.push_back({"ghost", "/no/such/ghost.csv", ""});
  plan.methods = {Method::kMklaren};
  const auto rows = run_plan(plan, 2);
  Index skipped = 0, done = 0;
  for (const auto& r : rows) {
    if (r.dataset == "ghost") {
      EXPECT_TRUE(r.skipped);
      ++skipped;
    } else {
      EXPECT_FALSE(r.skipped);
      ++done;
    }
  }
  EXPECT_GT(skipped, 0);
  EXPECT_EQ(done, 4);
  std::ostringstream out;
  write_results_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "method,dataset,K,fold,lambda_selected,rmse_test,runtime_ms");
  EXPECT_NE(out.str().find("skipped"), std::string::npos);
}

TEST(RunPlanTest, InvalidPlans) {
  ExperimentPlan plan = fixture_plan();
  plan.folds = 1;
  EXPECT_THROW(run_plan(plan, 1), InputError);
  plan = fixture_plan();
  plan.lambdas.clear();
  EXPECT_THROW(run_plan(plan, 1), InputError);
}

TEST(SummaryTest, MeanSdAndParity) {
  std::vector<ResultRow> rows;
  const auto add = [&](const std::string& method, Index rank, double value) {
    ResultRow r;
    r.method = method;
    r.dataset = "d";
    r.rank = rank;
    r.rmse_test = value;
    rows.push_back(r);
  };
  add("uniform", 0, 1.0);
  add("uniform", 0, 3.0);
  add("mklaren", 7, 5.0);
  add("mklaren", 7, 5.0);
  add("mklaren", 14, 3.0);
  add("mklaren", 14, 3.4);
  add("icd", 7, 9.0);
  add("icd", 7, 9.0);
  const auto summaries = summarize(rows);
  const auto uniform = std::find_if(summaries.begin(), summaries.end(),
                                    [](const Summary& s) { return s.method == "uniform"; });
  ASSERT_NE(uniform, summaries.end());
  EXPECT_DOUBLE_EQ(uniform->mean, 2.0);
  EXPECT_DOUBLE_EQ(uniform->sd, std::sqrt(2.0));
  const auto parity = minimal_rank_to_parity(summaries);
  for (const auto& p : parity) {
    if (p.method == "mklaren") {
      ASSERT_TRUE(p.rank.has_value());
      EXPECT_EQ(*p.rank, 14);
    }
    if (p.method == "icd") {
      EXPECT_FALSE(p.rank.has_value());
    }
  }
  std::ostringstream out;
  print_summary(out, summaries, parity);
  EXPECT_NE(out.str().find("not reached"), std::string::npos);
}

}  // namespace
}  // namespace mklaren
