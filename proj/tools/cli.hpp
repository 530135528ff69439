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

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mklaren/kernels.hpp"

namespace mklaren::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kDataDirEnv = "MKLAREN_DATA_DIR";

struct FitConfig {
  std::string data;
  std::string target;        // empty: last column
  nlohmann::json kernels = "gaussian7";  // bank name or list of kernel specs
  Index rank = 10;
  Index delta = 10;
  double lambda = 0.0;
  bool standardize = true;
  std::string model = "model.json";
  std::string report;        // optional JSON report path

  nlohmann::json to_json() const;
  static FitConfig from_json(const nlohmann::json& doc);
};

// "gaussian:0.5", "poly:2:1", "rank_one:3", "linear".
nlohmann::json parse_kernel_flag(const std::string& text);

// Runs one command line. All output goes to `out` and `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mklaren::cli
