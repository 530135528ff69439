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

#include <string>
#include <vector>

#include "json.hpp"
#include "mklaren/mklaren.hpp"

namespace mklaren {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json kernel_to_json(const KernelFunction& kernel);
// Accepts {"kind": "gaussian", "gamma": 0.5}, {"kind": "polynomial", "degree": 2,
// "bias": 1}, {"kind": "linear"}, {"kind": "rank_one", "feature": 3}. Throws
// InputError on unknown kinds or missing parameters.
KernelFunction kernel_from_json(const nlohmann::json& spec);

nlohmann::json model_to_json(const MklarenModel& model);
MklarenModel model_from_json(const nlohmann::json& doc);

void save_model(const MklarenModel& model, const std::string& path);
MklarenModel load_model(const std::string& path);

}  // namespace mklaren
