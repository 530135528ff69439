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

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mklaren/baselines.hpp"
#include "mklaren/benchmark.hpp"
#include "mklaren/dataset.hpp"
#include "mklaren/errors.hpp"
#include "mklaren/inference.hpp"
#include "mklaren/lar.hpp"
#include "mklaren/mklaren.hpp"
#include "mklaren/serialization.hpp"

namespace mklaren::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string env_data_dir() {
  const char* dir = std::getenv(kDataDirEnv);
  return dir ? std::string(dir) : std::string();
}

// Relative paths are looked up in `dir` when they do not exist as given.
std::string resolve(const std::string& path, const std::string& dir) {
  if (path.empty() || dir.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  return (fs::path(dir) / path).string();
}

std::vector<KernelFunction> build_bank(const json& spec, Index dim) {
  if (spec.is_string()) return named_bank(spec.get<std::string>(), dim);
  if (!spec.is_array() || spec.empty())
    throw InputError("\"kernels\" must be a bank name or a nonempty list of kernel specs");
  std::vector<KernelFunction> bank;
  for (const auto& k : spec) bank.push_back(kernel_from_json(k));
  return bank;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw DataError("cannot write '" + path + "'");
  return file;
}

int fit_command(FitConfig config, std::ostream& out) {
  if (config.rank < 1) throw InputError("rank K must be at least 1");
  if (config.delta < 0) throw InputError("delta must be nonnegative");
  if (!(config.lambda >= 0.0)) throw InputError("lambda must be nonnegative");
  if (config.data.empty()) throw InputError("no data file given (--data or \"data\" in the config)");
  const Dataset data = load_csv(resolve(config.data, env_data_dir()), config.target);
  const std::vector<KernelFunction> bank = build_bank(config.kernels, data.dim());

  FitOptions options;
  options.rank = config.rank;
  options.delta = config.delta;
  options.lambda = config.lambda;
  options.standardize = config.standardize;
  const MklarenModel model = fit(data.x, data.y, bank, options);

  json doc = model_to_json(model);
  doc["feature_names"] = data.feature_names;
  doc["target"] = data.target_name;
  {
    std::ofstream file(config.model);
    if (!file) throw DataError("cannot write model file '" + config.model + "'");
    file << doc.dump(1) << '\n';
  }

  json ranks = json::array();
  const auto per_kernel = model.kernel_ranks();
  for (size_t q = 0; q < bank.size(); ++q)
    ranks.push_back({{"kernel", bank[q].name}, {"rank", per_kernel[q]}});
  json selection = json::array();
  for (const auto& c : model.space.columns)
    selection.push_back({{"kernel", bank[static_cast<size_t>(c.kernel)].name},
                         {"kernel_index", c.kernel},
                         {"pivot", c.pivot}});

  out << "status: " << to_string(model.status) << '\n';
  out << "columns: " << model.space.size() << " of " << config.rank << '\n';
  for (size_t q = 0; q < bank.size(); ++q)
    out << "  " << bank[q].name << ": " << per_kernel[q] << '\n';
  out << "selection:";
  for (const auto& c : model.space.columns) out << ' ' << c.kernel << ':' << c.pivot;
  out << '\n';
  out << "training rmse: " << std::sqrt((model.mu.array() + model.y_mean - data.y.array()).square().mean())
      << '\n';
  out << "model written to " << config.model << '\n';

  if (!config.report.empty()) {
    const VectorXd fitted = model.mu.array() + model.y_mean;
    json report = {{"status", to_string(model.status)},
                   {"path_complete", model.path_complete},
                   {"kernel_ranks", ranks},
                   {"selection", selection},
                   {"y_mean", model.y_mean},
                   {"fitted", std::vector<double>(fitted.data(), fitted.data() + fitted.size())},
                   {"config", config.to_json()}};
    std::ofstream file(config.report);
    if (!file) throw DataError("cannot write report '" + config.report + "'");
    file << report.dump(1) << '\n';
  }
  return kOk;
}

int predict_command(const std::string& model_path, const std::string& data_path,
                    const std::string& output, std::ostream& out) {
  const json doc = read_json_file(model_path);
  const MklarenModel model = model_from_json(doc);
  std::vector<std::string> header;
  const MatrixXd raw = load_feature_csv(resolve(data_path, env_data_dir()), &header);

  std::ofstream file;
  std::ostream& sink = open_output(output, file, out);
  if (raw.rows() == 0) {
    sink << "prediction\n";
    return kOk;
  }

  std::vector<Index> use;
  const auto names = doc.value("feature_names", std::vector<std::string>());
  bool by_name = static_cast<Index>(names.size()) == model.dim();
  for (const auto& name : names) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      by_name = false;
      break;
    }
    use.push_back(static_cast<Index>(it - header.begin()));
  }
  if (!by_name) {
    use.clear();
    const std::string target = doc.value("target", std::string());
    for (Index c = 0; c < raw.cols(); ++c)
      if (target.empty() || header[static_cast<size_t>(c)] != target) use.push_back(c);
    if (static_cast<Index>(use.size()) != model.dim())
      throw DataError("data has " + std::to_string(use.size()) + " feature columns, model expects " +
                      std::to_string(model.dim()));
  }
  MatrixXd x(raw.rows(), static_cast<Index>(use.size()));
  for (size_t j = 0; j < use.size(); ++j) x.col(static_cast<Index>(j)) = raw.col(use[j]);

  const VectorXd pred = predict(model, x);
  sink << "prediction\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < pred.size(); ++i) sink << pred(i) << '\n';
  return kOk;
}

struct BenchmarkFlags {
  std::string plan;
  std::string output = "results.csv";
  Index workers = 1;
  std::string data_dir;
  std::vector<Index> ranks;
  std::vector<std::string> methods;
  Index folds = 0;
  long long seed = -1;
  Index max_samples = -1;
};

// Relative dataset paths resolve against --data-dir, then the environment
// variable, then the plan's "data_dir", then the plan's own directory.
ExperimentPlan parse_plan(const json& doc, const std::string& flag_dir, const std::string& plan_dir) {
  ExperimentPlan plan;
  try {
    if (doc.contains("kernels")) {
      if (doc["kernels"].is_string()) {
        plan.bank_name = doc["kernels"].get<std::string>();
        named_bank(plan.bank_name, 1);
      } else {
        plan.bank = build_bank(doc["kernels"], 0);
      }
    }
    if (doc.contains("methods")) {
      plan.methods.clear();
      for (const auto& m : doc["methods"]) plan.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (doc.contains("ranks")) plan.ranks = doc["ranks"].get<std::vector<Index>>();
    plan.delta = doc.value("delta", plan.delta);
    if (doc.contains("lambdas")) plan.lambdas = doc["lambdas"].get<std::vector<double>>();
    plan.folds = doc.value("folds", plan.folds);
    plan.seed = doc.value("seed", plan.seed);
    plan.max_samples = doc.value("max_samples", plan.max_samples);
    std::string dir = plan_dir;
    if (doc.contains("data_dir")) dir = (fs::path(plan_dir) / doc["data_dir"].get<std::string>()).string();
    if (!env_data_dir().empty()) dir = env_data_dir();
    if (!flag_dir.empty()) dir = flag_dir;
    for (const auto& d : doc.at("datasets")) {
      DatasetSource src;
      if (d.is_string()) {
        src.name = d.get<std::string>();
      } else {
        src.name = d.at("name").get<std::string>();
        src.path = d.value("path", std::string());
        src.target = d.value("target", std::string());
      }
      if (src.path.empty()) src.path = src.name + ".csv";
      if (!dir.empty() && !fs::path(src.path).is_absolute()) src.path = (fs::path(dir) / src.path).string();
      plan.datasets.push_back(src);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed plan: ") + e.what());
  }
  for (Index k : plan.ranks)
    if (k < 1) throw InputError("plan ranks must be at least 1");
  if (plan.delta < 0) throw InputError("plan delta must be nonnegative");
  return plan;
}

int benchmark_command(const BenchmarkFlags& flags, std::ostream& out, std::ostream& err) {
  const json doc = read_json_file(flags.plan);
  ExperimentPlan plan = parse_plan(doc, flags.data_dir, fs::path(flags.plan).parent_path().string());
  if (!flags.ranks.empty()) plan.ranks = flags.ranks;
  if (!flags.methods.empty()) {
    plan.methods.clear();
    for (const auto& m : flags.methods) plan.methods.push_back(method_from_string(m));
  }
  if (flags.folds > 0) plan.folds = flags.folds;
  if (flags.seed >= 0) plan.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.max_samples > 0) plan.max_samples = flags.max_samples;
  if (flags.workers < 1) throw InputError("--workers must be at least 1");

  const auto rows = run_plan(plan, flags.workers, &err);
  {
    std::ofstream file;
    std::ostream& sink = open_output(flags.output, file, out);
    write_results_csv(sink, rows);
  }
  const auto summaries = summarize(rows);
  print_summary(out, summaries, minimal_rank_to_parity(summaries));
  bool skipped = false;
  for (const auto& r : rows) skipped = skipped || r.skipped;
  if (skipped) {
    err << "some cells were skipped; see the results file\n";
    return kData;
  }
  return kOk;
}

int lar_command(const std::string& data_path, const std::string& target, Index steps,
                const std::string& output, std::ostream& out) {
  const Dataset data = load_csv(resolve(data_path, env_data_dir()), target);
  const MatrixXd x = unit_norm_columns(Standardizer::fit(data.x).apply(data.x));
  const VectorXd y = data.y.array() - data.y.mean();
  const auto path = lar_path(x, y, steps < 0 ? x.cols() : steps);

  std::ofstream file;
  std::ostream& sink = open_output(output, file, out);
  sink << "step,entered,c_max,gamma,residual_norm";
  for (const auto& name : data.feature_names) sink << ",beta_" << name;
  sink << '\n' << std::setprecision(12);
  for (size_t s = 0; s < path.size(); ++s) {
    const LarState& st = path[s];
    sink << s << ','
         << (st.entered >= 0 ? data.feature_names[static_cast<size_t>(st.entered)] : std::string())
         << ',' << st.c_max << ',' << st.gamma << ',' << st.r.norm();
    for (Index j = 0; j < st.beta.size(); ++j) sink << ',' << st.beta(j);
    sink << '\n';
  }
  return kOk;
}

}  // namespace

json FitConfig::to_json() const {
  return json{{"data", data},       {"target", target},       {"kernels", kernels},
              {"rank", rank},       {"delta", delta},         {"lambda", lambda},
              {"standardize", standardize}, {"model", model}, {"report", report}};
}

FitConfig FitConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  static const std::vector<std::string> known{"data",   "target", "kernels", "rank",  "delta",
                                              "lambda", "standardize", "model", "report"};
  for (const auto& item : doc.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw InputError("unknown config key '" + item.key() + "'");
  FitConfig c;
  try {
    c.data = doc.value("data", c.data);
    c.target = doc.value("target", c.target);
    if (doc.contains("kernels")) c.kernels = doc["kernels"];
    c.rank = doc.value("rank", c.rank);
    c.delta = doc.value("delta", c.delta);
    c.lambda = doc.value("lambda", c.lambda);
    c.standardize = doc.value("standardize", c.standardize);
    c.model = doc.value("model", c.model);
    c.report = doc.value("report", c.report);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  return c;
}

json parse_kernel_flag(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.empty()) throw InputError("empty kernel spec");
  const auto number = [&](size_t i) {
    if (i >= parts.size()) throw InputError("kernel spec '" + text + "' is missing a parameter");
    try {
      size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::logic_error&) {
      throw InputError("kernel spec '" + text + "': '" + parts[i] + "' is not a number");
    }
  };
  const std::string& kind = parts[0];
  json spec;
  if (kind == "linear" && parts.size() == 1) {
    spec = {{"kind", "linear"}};
  } else if (kind == "gaussian" && parts.size() == 2) {
    spec = {{"kind", "gaussian"}, {"gamma", number(1)}};
  } else if ((kind == "poly" || kind == "polynomial") && (parts.size() == 2 || parts.size() == 3)) {
    spec = {{"kind", "polynomial"},
            {"degree", static_cast<int>(number(1))},
            {"bias", parts.size() == 3 ? number(2) : 0.0}};
  } else if (kind == "rank_one" && parts.size() == 2) {
    spec = {{"kind", "rank_one"}, {"feature", static_cast<Index>(number(1))}};
  } else {
    throw InputError("cannot parse kernel spec '" + text +
                     "' (expected linear, gaussian:G, poly:D[:B] or rank_one:F)");
  }
  kernel_from_json(spec);
  return spec;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple kernel low-rank regression with least-angle pivot selection", "mklaren"};
  app.require_subcommand(1);

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it as JSON");
  std::string config_path;
  FitConfig flags;
  std::string bank_name;
  std::vector<std::string> kernel_flags;
  bool no_standardize = false;
  bool print_config = false;
  fit_cmd->add_option("-c,--config", config_path, "JSON config file; flags override its values");
  auto* opt_data = fit_cmd->add_option("-d,--data", flags.data, "Training CSV with a header row");
  auto* opt_target = fit_cmd->add_option("-t,--target", flags.target, "Target column (default: last)");
  auto* opt_bank = fit_cmd->add_option("--kernels", bank_name, "Kernel bank: gaussian7, rank_one or linear");
  auto* opt_kernel = fit_cmd->add_option("--kernel", kernel_flags,
                                         "Kernel spec, repeatable: linear, gaussian:G, poly:D[:B], rank_one:F");
  auto* opt_rank = fit_cmd->add_option("-K,--rank", flags.rank, "Total rank over all kernels")->capture_default_str();
  auto* opt_delta = fit_cmd->add_option("--delta", flags.delta, "Look-ahead columns per kernel")->capture_default_str();
  auto* opt_lambda = fit_cmd->add_option("--lambda", flags.lambda, "Ridge penalty")->capture_default_str();
  auto* opt_nostd = fit_cmd->add_flag("--no-standardize", no_standardize, "Use raw features");
  auto* opt_model = fit_cmd->add_option("-o,--model", flags.model, "Model output path")->capture_default_str();
  auto* opt_report = fit_cmd->add_option("--report", flags.report, "Optional JSON fit report");
  fit_cmd->add_flag("--print-config", print_config, "Print the normalized config and exit");

  auto* predict_cmd = app.add_subcommand("predict", "Predict with a saved model");
  std::string model_path;
  std::string predict_data;
  std::string predict_out;
  predict_cmd->add_option("-m,--model", model_path, "Model file")->required();
  predict_cmd->add_option("-d,--data", predict_data, "CSV with the training feature columns")->required();
  predict_cmd->add_option("-o,--output", predict_out, "Predictions CSV (default: stdout)");

  auto* bench_cmd = app.add_subcommand("benchmark", "Run the cross-validation benchmark");
  BenchmarkFlags bench;
  bench_cmd->add_option("-p,--plan", bench.plan, "Benchmark plan (JSON)")->required();
  bench_cmd->add_option("-o,--output", bench.output, "Results CSV")->capture_default_str();
  bench_cmd->add_option("-j,--workers", bench.workers, "Worker threads")->capture_default_str();
  bench_cmd->add_option("--data-dir", bench.data_dir,
                        std::string("Directory for relative dataset paths (overrides ") + kDataDirEnv + ")");
  bench_cmd->add_option("-K,--rank", bench.ranks, "Override the plan's ranks");
  bench_cmd->add_option("--method", bench.methods, "Override the plan's methods");
  bench_cmd->add_option("--folds", bench.folds, "Override the number of folds");
  bench_cmd->add_option("--seed", bench.seed, "Override the plan's seed");
  bench_cmd->add_option("--max-samples", bench.max_samples, "Override the subsampling limit");

  auto* lar_cmd = app.add_subcommand("lar", "Least-angle regression path on standardized features");
  std::string lar_data;
  std::string lar_target;
  std::string lar_out;
  Index lar_steps = -1;
  lar_cmd->add_option("-d,--data", lar_data, "CSV with a header row")->required();
  lar_cmd->add_option("-t,--target", lar_target, "Target column (default: last)");
  lar_cmd->add_option("--steps", lar_steps, "Maximum number of steps (default: all features)");
  lar_cmd->add_option("-o,--output", lar_out, "Path CSV (default: stdout)");

  auto* version_cmd = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*version_cmd) {
      out << "mklaren " << kVersion << '\n';
      return kOk;
    }
    if (*fit_cmd) {
      FitConfig config = config_path.empty() ? FitConfig{} : FitConfig::from_json(read_json_file(config_path));
      if (*opt_data) config.data = flags.data;
      if (*opt_target) config.target = flags.target;
      if (*opt_bank) config.kernels = bank_name;
      if (*opt_kernel) {
        config.kernels = json::array();
        for (const auto& k : kernel_flags) config.kernels.push_back(parse_kernel_flag(k));
      }
      if (*opt_rank) config.rank = flags.rank;
      if (*opt_delta) config.delta = flags.delta;
      if (*opt_lambda) config.lambda = flags.lambda;
      if (*opt_nostd) config.standardize = !no_standardize;
      if (*opt_model) config.model = flags.model;
      if (*opt_report) config.report = flags.report;
      if (print_config) {
        out << config.to_json().dump(2) << '\n';
        return kOk;
      }
      return fit_command(config, out);
    }
    if (*predict_cmd) return predict_command(model_path, predict_data, predict_out, out);
    if (*bench_cmd) return benchmark_command(bench, out, err);
    if (*lar_cmd) return lar_command(lar_data, lar_target, lar_steps, lar_out, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace mklaren::cli
