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

#include "mklaren/serialization.hpp"

#include <fstream>
#include <sstream>

#include "mklaren/errors.hpp"

namespace mklaren {

using nlohmann::json;

namespace {

json matrix_to_json(const MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd matrix_from_json(const json& doc) {
  const Index rows = doc.at("rows").get<Index>();
  const Index cols = doc.at("cols").get<Index>();
  const auto data = doc.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
    throw DataError("model file: matrix payload has the wrong size");
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<size_t>(i * cols + j)];
  return m;
}

json vector_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const json& doc) {
  const auto data = doc.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(data.data(), static_cast<Index>(data.size()));
}

FitStatus status_from_string(const std::string& s) {
  if (s == "rank_reached") return FitStatus::kRankReached;
  if (s == "exhausted") return FitStatus::kExhausted;
  if (s == "no_signal") return FitStatus::kNoSignal;
  throw DataError("model file: unknown status '" + s + "'");
}

}  // namespace

json kernel_to_json(const KernelFunction& kernel) {
  if (std::holds_alternative<LinearKernel>(kernel.kind)) return json{{"kind", "linear"}};
  if (const auto* k = std::get_if<PolynomialKernel>(&kernel.kind))
    return json{{"kind", "polynomial"}, {"degree", k->degree}, {"bias", k->bias}};
  if (const auto* k = std::get_if<GaussianKernel>(&kernel.kind))
    return json{{"kind", "gaussian"}, {"gamma", k->gamma}};
  const auto& k = std::get<RankOneKernel>(kernel.kind);
  return json{{"kind", "rank_one"}, {"feature", k.feature}};
}

KernelFunction kernel_from_json(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind"))
    throw InputError("kernel spec must be an object with a \"kind\" field");
  const std::string kind = spec.at("kind").get<std::string>();
  try {
    if (kind == "linear") return KernelFunction::linear();
    if (kind == "polynomial")
      return KernelFunction::polynomial(spec.at("degree").get<int>(), spec.value("bias", 0.0));
    if (kind == "gaussian") {
      const double gamma = spec.at("gamma").get<double>();
      if (!(gamma > 0.0)) throw InputError("gaussian gamma must be positive");
      return KernelFunction::gaussian(gamma);
    }
    if (kind == "rank_one") return KernelFunction::rank_one(spec.at("feature").get<Index>());
  } catch (const json::exception& e) {
    throw InputError("kernel spec '" + spec.dump() + "': " + e.what());
  }
  throw InputError("unknown kernel kind '" + kind + "'");
}

json model_to_json(const MklarenModel& model) {
  json kernels = json::array();
  for (const auto& comp : model.kernels) {
    kernels.push_back(json{{"kernel", kernel_to_json(comp.kernel)},
                           {"active", comp.active},
                           {"active_points", matrix_to_json(comp.active_points)},
                           {"factor", matrix_to_json(comp.factor)},
                           {"transform", matrix_to_json(comp.transform)}});
  }
  json columns = json::array();
  for (const auto& c : model.space.columns) {
    columns.push_back(json{{"kernel", c.kernel},
                           {"pivot", c.pivot},
                           {"local", c.local},
                           {"sign", c.sign},
                           {"mean", c.mean},
                           {"norm", c.norm}});
  }
  return json{{"format", "mklaren-model"},
              {"version", kModelFormatVersion},
              {"samples", model.space.samples},
              {"lambda", model.lambda},
              {"delta", model.delta},
              {"rank", model.rank},
              {"y_mean", model.y_mean},
              {"status", to_string(model.status)},
              {"path_complete", model.path_complete},
              {"rank_deficient", model.rank_deficient},
              {"standardizer",
               {{"mean", vector_to_json(model.standardizer.mean)},
                {"scale", vector_to_json(model.standardizer.scale)}}},
              {"kernels", kernels},
              {"columns", columns},
              {"beta", vector_to_json(model.beta)},
              {"mu", vector_to_json(model.mu)},
              {"gram_inverse", matrix_to_json(model.gram_inverse)}};
}

MklarenModel model_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != "mklaren-model")
      throw DataError("not a model file (missing format tag)");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("unsupported model format version " + std::to_string(version));
    MklarenModel model;
    model.space.samples = doc.at("samples").get<Index>();
    model.lambda = doc.at("lambda").get<double>();
    model.space.lambda = model.lambda;
    model.delta = doc.at("delta").get<Index>();
    model.rank = doc.at("rank").get<Index>();
    model.y_mean = doc.at("y_mean").get<double>();
    model.status = status_from_string(doc.at("status").get<std::string>());
    model.path_complete = doc.at("path_complete").get<bool>();
    model.rank_deficient = doc.at("rank_deficient").get<bool>();
    model.standardizer.mean = vector_from_json(doc.at("standardizer").at("mean"));
    model.standardizer.scale = vector_from_json(doc.at("standardizer").at("scale"));
    if (model.standardizer.mean.size() != model.standardizer.scale.size())
      throw DataError("model file: standardizer mean and scale differ in length");
    for (const auto& k : doc.at("kernels")) {
      KernelComponent comp;
      comp.kernel = kernel_from_json(k.at("kernel"));
      comp.active = k.at("active").get<std::vector<Index>>();
      comp.active_points = matrix_from_json(k.at("active_points"));
      comp.factor = matrix_from_json(k.at("factor"));
      comp.transform = matrix_from_json(k.at("transform"));
      const auto j = static_cast<Index>(comp.active.size());
      if (comp.active_points.rows() != j || comp.transform.rows() != j ||
          comp.transform.cols() != j || (j > 0 && comp.active_points.cols() != model.dim()))
        throw DataError("model file: kernel component shapes are inconsistent");
      model.kernels.push_back(std::move(comp));
    }
    for (const auto& c : doc.at("columns")) {
      SpaceColumn col;
      col.kernel = c.at("kernel").get<Index>();
      col.pivot = c.at("pivot").get<Index>();
      col.local = c.at("local").get<Index>();
      col.sign = c.at("sign").get<int>();
      col.mean = c.at("mean").get<double>();
      col.norm = c.at("norm").get<double>();
      if (col.kernel < 0 || col.kernel >= static_cast<Index>(model.kernels.size()) ||
          col.local < 0 ||
          col.local >= static_cast<Index>(model.kernels[static_cast<size_t>(col.kernel)].active.size()))
        throw DataError("model file: column provenance out of range");
      model.space.columns.push_back(col);
    }
    model.beta = vector_from_json(doc.at("beta"));
    if (model.beta.size() != model.space.size())
      throw DataError("model file: coefficient count does not match the columns");
    model.mu = vector_from_json(doc.at("mu"));
    model.gram_inverse = matrix_from_json(doc.at("gram_inverse"));
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const MklarenModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw DataError("failed writing model file '" + path + "'");
}

MklarenModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace mklaren
