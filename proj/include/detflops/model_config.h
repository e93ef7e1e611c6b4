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
#include <string>

#include <nlohmann/json.hpp>

#include "detflops/graph.h"

namespace detflops {

/// Detection head trunk designs.
///   Original  4 x (3x3 conv + ReLU)
///   V1        each 3x3 -> depthwise 3x3 + ReLU, 1x1 + ReLU
///   V2        3x3, 1x1, 3x3, 1x1 at constant width
///   V3        every 3x3 -> 1x1
enum class HeadVariant { Original, V1, V2, V3 };

/// FullyShared: D3..D7 reuse one parameter set per branch.
/// PartialD3Independent: D4..D7 share; D3 owns its parameters in the branches
/// listed in ModelConfig::independent_branches.
enum class SharingScheme { FullyShared, PartialD3Independent };

/// Whether light-weight substitution also rewrites the 3x3 predictor conv.
/// Only V1 and V3 react to ReplacePredictorToo.
enum class PredictorPolicy { KeepPredictor3x3, ReplacePredictorToo };

inline constexpr int kMinPyramidLevel = 3;
inline constexpr int kMaxPyramidLevel = 7;
inline constexpr Count kMinInputSize = 128;

struct ModelConfig {
  Count input_size = 800;
  Count num_classes = 80;
  Count anchors_per_location = 9;
  Count head_channels = 256;
  Count head_depth = 4;
  Count fpn_channels = 256;
  HeadVariant variant_cls = HeadVariant::Original;
  HeadVariant variant_reg = HeadVariant::Original;
  std::set<int> lw_levels = {3};
  SharingScheme sharing = SharingScheme::FullyShared;
  /// Branches whose D3 weights are separate under PartialD3Independent. Must
  /// hold both branches under FullyShared so equal graphs have equal configs.
  std::set<Branch> independent_branches = {Branch::Classification,
                                           Branch::Regression};
  PredictorPolicy predictor_policy = PredictorPolicy::KeepPredictor3x3;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Variant actually used by `branch` at pyramid `level`.
HeadVariant variant_at(const ModelConfig& config, Branch branch, int level);

/// True when `branch` at D3 has its own weight groups.
bool d3_independent(const ModelConfig& config, Branch branch);

/// Throws ConfigError describing the first violated invariant.
void validate_config(const ModelConfig& config);

std::string to_string(HeadVariant v);
std::string to_string(SharingScheme s);
std::string to_string(PredictorPolicy p);
HeadVariant parse_head_variant(const std::string& s);
SharingScheme parse_sharing_scheme(const std::string& s);
PredictorPolicy parse_predictor_policy(const std::string& s);
Branch parse_branch(const std::string& s);

nlohmann::json config_to_json(const ModelConfig& config);
/// Missing fields take their defaults; unknown fields are rejected.
/// Throws ConfigError. Does not call validate_config.
ModelConfig config_from_json(const nlohmann::json& doc);

}  // namespace detflops
