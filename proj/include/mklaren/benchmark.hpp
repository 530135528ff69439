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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mklaren/dataset.hpp"
#include "mklaren/kernels.hpp"

namespace mklaren {

enum class Method { kMklaren, kIcdRidge, kNystromRidge, kUniformRidge };

std::string to_string(Method method);
// Accepts "mklaren", "icd", "nystrom", "uniform" (and the *_ridge spellings).
Method method_from_string(const std::string& name);

// 10^-3 .. 10^3
std::vector<double> default_lambda_grid();

struct DatasetSource {
  std::string name;
  std::string path;
  std::string target;  // empty: last column
};

struct ExperimentPlan {
  std::vector<DatasetSource> datasets;
  std::vector<KernelFunction> bank;  // empty: named_bank(bank_name, dim)
  std::string bank_name = "gaussian7";
  std::vector<Method> methods{Method::kMklaren, Method::kIcdRidge, Method::kNystromRidge,
                              Method::kUniformRidge};
  std::vector<Index> ranks{14};  // total rank over all kernels
  Index delta = 10;
  std::vector<double> lambdas = default_lambda_grid();
  Index folds = 5;
  std::uint64_t seed = 42;
  Index max_samples = 1000;
};

struct ResultRow {
  std::string method;
  std::string dataset;
  Index rank = 0;  // 0 for the full-kernel method
  Index fold = 0;
  double lambda = 0.0;
  double rmse_test = 0.0;
  double runtime_ms = 0.0;
  bool skipped = false;
  std::string note;
};

// One cell of the protocol: split with seed + fold, fit on the 60% part for
// every lambda, pick lambda by validation RMSE, report test RMSE.
ResultRow run_cell(const Dataset& data, const std::string& dataset_name,
                   const std::vector<KernelFunction>& bank, Method method, Index rank, Index delta,
                   const std::vector<double>& lambdas, Index fold, std::uint64_t seed);

// Loads (and subsamples) a dataset as the plan prescribes.
Dataset prepare_dataset(const DatasetSource& source, Index max_samples, std::uint64_t seed);

// Runs every (dataset, method, rank, fold) cell on `workers` threads. Missing
// datasets produce skipped rows. Row order does not depend on `workers`.
std::vector<ResultRow> run_plan(const ExperimentPlan& plan, Index workers, std::ostream* log = nullptr);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

struct Summary {
  std::string dataset;
  std::string method;
  Index rank = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over folds
  Index folds = 0;
};

std::vector<Summary> summarize(const std::vector<ResultRow>& rows);

struct MinimalRank {
  std::string dataset;
  std::string method;
  std::optional<Index> rank;  // smallest K within one sd of the reference
  double reference_mean = 0.0;
  double reference_sd = 0.0;
};

// Smallest rank at which each method's mean test RMSE is at most the
// uniform method's mean plus one standard deviation.
std::vector<MinimalRank> minimal_rank_to_parity(const std::vector<Summary>& summaries);

void print_summary(std::ostream& out, const std::vector<Summary>& summaries,
                   const std::vector<MinimalRank>& parity);

}  // namespace mklaren
