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

#include "mklaren/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "mklaren/baselines.hpp"
#include "mklaren/errors.hpp"
#include "mklaren/inference.hpp"
#include "mklaren/mklaren.hpp"

namespace mklaren {

namespace {

template <class Fit, class Predict>
double select_lambda(const std::vector<double>& lambdas, const Dataset& validation, Fit&& fit_at,
                     Predict&& predict_with) {
  if (lambdas.empty()) throw InputError("lambda grid is empty");
  double best_lambda = lambdas.front();
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    fit_at(lambda);
    const double score = rmse(predict_with(validation.x), validation.y);
    if (score < best) {
      best = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kMklaren:
      return "mklaren";
    case Method::kIcdRidge:
      return "icd";
    case Method::kNystromRidge:
      return "nystrom";
    case Method::kUniformRidge:
      return "uniform";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "mklaren") return Method::kMklaren;
  if (name == "icd" || name == "icd_ridge") return Method::kIcdRidge;
  if (name == "nystrom" || name == "nystrom_ridge") return Method::kNystromRidge;
  if (name == "uniform" || name == "uniform_ridge") return Method::kUniformRidge;
  throw InputError("unknown method '" + name + "' (expected mklaren, icd, nystrom or uniform)");
}

std::vector<double> default_lambda_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

ResultRow run_cell(const Dataset& data, const std::string& dataset_name,
                   const std::vector<KernelFunction>& bank, Method method, Index rank, Index delta,
                   const std::vector<double>& lambdas, Index fold, std::uint64_t seed) {
  ResultRow row;
  row.method = to_string(method);
  row.dataset = dataset_name;
  row.rank = method == Method::kUniformRidge ? 0 : rank;
  row.fold = fold;

  const Split split = split_60_20_20(data.size(), seed + static_cast<std::uint64_t>(fold));
  const Dataset train = data.subset(split.train);
  const Dataset validation = data.subset(split.validation);
  const Dataset test = data.subset(split.test);
  const auto start = std::chrono::steady_clock::now();

  switch (method) {
    case Method::kMklaren: {
      FitOptions options;
      options.rank = rank;
      options.delta = delta;
      MklarenModel model;
      const auto fit_at = [&](double lambda) {
        options.lambda = lambda;
        model = fit(train.x, train.y, bank, options);
      };
      row.lambda = select_lambda(lambdas, validation, fit_at,
                                 [&](const MatrixXd& x) { return predict(model, x); });
      fit_at(row.lambda);
      row.rmse_test = rmse(predict(model, test.x), test.y);
      break;
    }
    case Method::kIcdRidge:
    case Method::kNystromRidge: {
      const Index per_kernel = rank / static_cast<Index>(bank.size());
      if (per_kernel < 1)
        throw InputError("rank " + std::to_string(rank) + " leaves no columns for " +
                         std::to_string(bank.size()) + " kernels");
      const PivotRule rule =
          method == Method::kIcdRidge ? PivotRule::kMaxResidual : PivotRule::kUniformRandom;
      StackedFactorModel model(train.x, bank, per_kernel, rule,
                               seed + static_cast<std::uint64_t>(fold));
      const auto fit_at = [&](double lambda) { model.fit(train.y, lambda); };
      row.lambda = select_lambda(lambdas, validation, fit_at,
                                 [&](const MatrixXd& x) { return model.predict(x); });
      fit_at(row.lambda);
      row.rmse_test = rmse(model.predict(test.x), test.y);
      break;
    }
    case Method::kUniformRidge: {
      UniformRidge model(train.x, train.y, bank);
      const auto fit_at = [&](double lambda) { model.fit(lambda); };
      row.lambda = select_lambda(lambdas, validation, fit_at,
                                 [&](const MatrixXd& x) { return model.predict(x); });
      fit_at(row.lambda);
      row.rmse_test = rmse(model.predict(test.x), test.y);
      break;
    }
  }
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

Dataset prepare_dataset(const DatasetSource& source, Index max_samples, std::uint64_t seed) {
  const Dataset full = load_csv(source.path, source.target);
  return full.subset(subsample(full.size(), max_samples, seed));
}

std::vector<ResultRow> run_plan(const ExperimentPlan& plan, Index workers, std::ostream* log) {
  if (plan.folds < 2) throw InputError("a plan needs at least two folds");
  if (plan.lambdas.empty()) throw InputError("lambda grid is empty");
  if (plan.methods.empty()) throw InputError("a plan needs at least one method");
  std::vector<KernelFunction> bank = plan.bank;

  struct Cell {
    size_t dataset;
    Method method;
    Index rank;
    Index fold;
  };
  std::vector<Dataset> data(plan.datasets.size());
  std::vector<std::string> load_error(plan.datasets.size());
  for (size_t d = 0; d < plan.datasets.size(); ++d) {
    try {
      data[d] = prepare_dataset(plan.datasets[d], plan.max_samples, plan.seed);
    } catch (const DataError& e) {
      load_error[d] = e.what();
      if (log) *log << "skipping dataset " << plan.datasets[d].name << ": " << e.what() << '\n';
    }
  }

  std::vector<Cell> cells;
  for (size_t d = 0; d < plan.datasets.size(); ++d)
    for (Method method : plan.methods) {
      const std::vector<Index> ranks =
          method == Method::kUniformRidge ? std::vector<Index>{0} : plan.ranks;
      for (Index rank : ranks)
        for (Index fold = 0; fold < plan.folds; ++fold) cells.push_back({d, method, rank, fold});
    }

  std::vector<ResultRow> rows(cells.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&]() {
    for (;;) {
      const size_t c = next.fetch_add(1);
      if (c >= cells.size()) return;
      const Cell& cell = cells[c];
      const DatasetSource& source = plan.datasets[cell.dataset];
      ResultRow& row = rows[c];
      if (!load_error[cell.dataset].empty()) {
        row.method = to_string(cell.method);
        row.dataset = source.name;
        row.rank = cell.rank;
        row.fold = cell.fold;
        row.skipped = true;
        row.note = load_error[cell.dataset];
        continue;
      }
      const Dataset& ds = data[cell.dataset];
      const std::vector<KernelFunction> cell_bank =
          bank.empty() ? named_bank(plan.bank_name.empty() ? "gaussian7" : plan.bank_name, ds.dim())
                       : bank;
      try {
        row = run_cell(ds, source.name, cell_bank, cell.method, cell.rank, plan.delta,
                       plan.lambdas, cell.fold, plan.seed);
      } catch (const NumericalError& e) {
        row.method = to_string(cell.method);
        row.dataset = source.name;
        row.rank = cell.rank;
        row.fold = cell.fold;
        row.skipped = true;
        row.note = e.what();
      }
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *log << row.dataset << ' ' << row.method << " K=" << row.rank << " fold=" << row.fold
             << (row.skipped ? " skipped: " + row.note : " rmse=" + format_number(row.rmse_test))
             << '\n';
      }
    }
  };
  const Index count = std::max<Index>(1, std::min<Index>(workers, static_cast<Index>(cells.size())));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (Index t = 0; t < count; ++t)
    pool.emplace_back([&]() {
      try {
        worker();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cells.size());
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,dataset,K,fold,lambda_selected,rmse_test,runtime_ms\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << r.rank << ',' << r.fold << ',';
    if (r.skipped) {
      out << ",skipped,\n";
      continue;
    }
    out << format_number(r.lambda) << ',' << format_number(r.rmse_test) << ','
        << std::fixed << std::setprecision(1) << r.runtime_ms << std::defaultfloat << '\n';
  }
}

std::vector<Summary> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, std::string, Index>, std::vector<double>> groups;
  std::vector<std::tuple<std::string, std::string, Index>> order;
  for (const auto& r : rows) {
    if (r.skipped) continue;
    const auto key = std::make_tuple(r.dataset, r.method, r.rank);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.rmse_test);
  }
  std::vector<Summary> out;
  for (const auto& key : order) {
    const auto& v = groups[key];
    Summary s;
    std::tie(s.dataset, s.method, s.rank) = key;
    s.folds = static_cast<Index>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    out.push_back(s);
  }
  return out;
}

std::vector<MinimalRank> minimal_rank_to_parity(const std::vector<Summary>& summaries) {
  std::vector<MinimalRank> out;
  std::vector<std::string> datasets;
  for (const auto& s : summaries)
    if (std::find(datasets.begin(), datasets.end(), s.dataset) == datasets.end())
      datasets.push_back(s.dataset);
  for (const auto& dataset : datasets) {
    const Summary* reference = nullptr;
    std::vector<std::string> methods;
    for (const auto& s : summaries) {
      if (s.dataset != dataset) continue;
      if (s.method == "uniform")
        reference = &s;
      else if (std::find(methods.begin(), methods.end(), s.method) == methods.end())
        methods.push_back(s.method);
    }
    if (!reference) continue;
    for (const auto& method : methods) {
      MinimalRank m;
      m.dataset = dataset;
      m.method = method;
      m.reference_mean = reference->mean;
      m.reference_sd = reference->sd;
      for (const auto& s : summaries) {
        if (s.dataset != dataset || s.method != method) continue;
        if (s.mean <= reference->mean + reference->sd && (!m.rank || s.rank < *m.rank))
          m.rank = s.rank;
      }
      out.push_back(m);
    }
  }
  return out;
}

void print_summary(std::ostream& out, const std::vector<Summary>& summaries,
                   const std::vector<MinimalRank>& parity) {
  out << std::left << std::setw(12) << "dataset" << std::setw(10) << "method" << std::right
      << std::setw(6) << "K" << std::setw(14) << "rmse_mean" << std::setw(12) << "rmse_sd"
      << std::setw(7) << "folds" << '\n';
  for (const auto& s : summaries) {
    out << std::left << std::setw(12) << s.dataset << std::setw(10) << s.method << std::right
        << std::setw(6) << (s.rank == 0 ? std::string("full") : std::to_string(s.rank))
        << std::setw(14) << std::fixed << std::setprecision(4) << s.mean << std::setw(12) << s.sd
        << std::setw(7) << s.folds << std::defaultfloat << '\n';
  }
  if (parity.empty()) return;
  out << "\nminimal rank within one sd of uniform:\n";
  for (const auto& m : parity) {
    out << "  " << std::left << std::setw(12) << m.dataset << std::setw(10) << m.method
        << std::right << (m.rank ? std::to_string(*m.rank) : std::string("not reached")) << '\n';
  }
}

}  // namespace mklaren
