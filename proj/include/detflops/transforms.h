/**
 * Copyright (c) detflops contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <set>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "detflops/cost_model.h"
#include "detflops/model_config.h"

namespace detflops {

/// Swap the trunk of the listed branches at the listed levels for a
/// light-weight variant.
struct SubstituteHead {
  HeadVariant variant = HeadVariant::V3;
  std::set<Branch> branches = {Branch::Classification, Branch::Regression};
  std::set<int> levels = {3};
  PredictorPolicy predictor_policy = PredictorPolicy::KeepPredictor3x3;
  friend bool operator==(const SubstituteHead&, const SubstituteHead&) = default;
};

struct SetSharing {
  SharingScheme scheme = SharingScheme::FullyShared;
  friend bool operator==(const SetSharing&, const SetSharing&) = default;
};

struct ScaleInput {
  Count target_size = 800;
  friend bool operator==(const ScaleInput&, const ScaleInput&) = default;
};

using Transform = std::variant<SubstituteHead, SetSharing, ScaleInput>;

/// Returns the rewritten config; the input is untouched. A substitution on a
/// strict subset of levels switches sharing to PartialD3Independent.
/// Throws ConfigError if the result violates a ModelConfig invariant.
ModelConfig apply(const ModelConfig& config, const Transform& t);

ModelConfig apply_all(const ModelConfig& config,
                      std::span<const Transform> chain);

/// Builds and costs a config.
CostReport profile_config(const ModelConfig& config,
                          const CostOptions& opts = {});

/// (params_after - params_before) / params_before with shared weight groups
/// counted once.
double param_overhead(const ModelConfig& before, const ModelConfig& after);

nlohmann::json transform_to_json(const Transform& t);
/// Throws ConfigError on an unknown "type" or malformed fields.
Transform transform_from_json(const nlohmann::json& j);
/// Accepts a single transform object or an array of them.
std::vector<Transform> transforms_from_json(const nlohmann::json& j);

}  // namespace detflops
