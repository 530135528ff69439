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

#include "mklaren/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mklaren/errors.hpp"

namespace mklaren {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(begin, end - begin + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  Table table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (table.header.empty()) {
      table.header = split_line(line);
      continue;
    }
    const auto cells = split_line(line);
    if (cells.size() != table.header.size())
      throw DataError(path + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(table.header.size()));
    std::vector<double> row(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string& text = cells[c];
      char* end = nullptr;
      errno = 0;
      const double value = text.empty() ? 0.0 : std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE ||
          !std::isfinite(value))
        throw DataError(path + ": row " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + " ('" + table.header[c] +
                        "') is not a finite number: '" + text + "'");
      row[c] = value;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

Standardizer Standardizer::fit(const MatrixXd& x) {
  Standardizer s;
  const double n = static_cast<double>(std::max<Index>(x.rows(), 1));
  s.mean = x.colwise().mean().transpose();
  if (x.rows() == 0) s.mean = VectorXd::Zero(x.cols());
  s.scale = VectorXd::Ones(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    if (x.rows() == 0) break;
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean(j)))) s.scale(j) = sd;
  }
  return s;
}

Standardizer Standardizer::identity(Index dim) {
  return Standardizer{VectorXd::Zero(dim), VectorXd::Ones(dim)};
}

MatrixXd Standardizer::apply(const MatrixXd& x) const {
  if (x.cols() != dim())
    throw InputError("expected " + std::to_string(dim()) + " features, got " +
                     std::to_string(x.cols()));
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.x.resize(static_cast<Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= size()) throw InputError("subset: row index out of range");
    out.x.row(static_cast<Index>(i)) = x.row(rows[i]);
    out.y(static_cast<Index>(i)) = y(rows[i]);
  }
  return out;
}

Dataset load_csv(const std::string& path, const std::string& target) {
  const Table table = read_table(path);
  if (table.header.size() < 2) throw DataError(path + ": need at least one feature and a target");
  size_t t = table.header.size() - 1;
  if (!target.empty()) {
    const auto it = std::find(table.header.begin(), table.header.end(), target);
    if (it == table.header.end()) throw DataError(path + ": no target column '" + target + "'");
    t = static_cast<size_t>(it - table.header.begin());
  }
  Dataset data;
  data.target_name = table.header[t];
  for (size_t c = 0; c < table.header.size(); ++c)
    if (c != t) data.feature_names.push_back(table.header[c]);
  const Index n = static_cast<Index>(table.rows.size());
  data.x.resize(n, static_cast<Index>(data.feature_names.size()));
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<size_t>(i)];
    Index f = 0;
    for (size_t c = 0; c < row.size(); ++c) {
      if (c == t)
        data.y(i) = row[c];
      else
        data.x(i, f++) = row[c];
    }
  }
  return data;
}

MatrixXd load_feature_csv(const std::string& path, std::vector<std::string>* header) {
  const Table table = read_table(path);
  if (header) *header = table.header;
  MatrixXd x(static_cast<Index>(table.rows.size()), static_cast<Index>(table.header.size()));
  for (size_t i = 0; i < table.rows.size(); ++i)
    for (size_t c = 0; c < table.header.size(); ++c)
      x(static_cast<Index>(i), static_cast<Index>(c)) = table.rows[i][c];
  return x;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index j = 0; j < data.dim(); ++j) {
    const auto idx = static_cast<size_t>(j);
    out << (idx < data.feature_names.size() ? data.feature_names[idx] : "x" + std::to_string(j))
        << ',';
  }
  out << (data.target_name.empty() ? "y" : data.target_name) << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) out << data.x(i, j) << ',';
    out << data.y(i) << '\n';
  }
}

Split split_60_20_20(Index n, std::uint64_t seed) {
  if (n < 5) throw InputError("split_60_20_20 needs at least 5 samples, got " + std::to_string(n));
  std::vector<Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const size_t n_train = static_cast<size_t>(n * 6 / 10);
  const size_t n_val = static_cast<size_t>(n * 2 / 10);
  Split split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                          perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  return split;
}

std::vector<Index> subsample(Index n, Index limit, std::uint64_t seed) {
  if (limit < 0) throw InputError("subsample limit must be nonnegative");
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (n <= limit) return idx;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<size_t>(limit));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace mklaren
