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
#include "detflops/model_config.h"

#include <algorithm>

#include "detflops/error.h"

namespace detflops {

using nlohmann::json;

HeadVariant variant_at(const ModelConfig& config, Branch branch, int level) {
  if (!config.lw_levels.count(level)) return HeadVariant::Original;
  return branch == Branch::Classification ? config.variant_cls
                                          : config.variant_reg;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// Levels of `branch` that resolve to one physical weight set.
std::vector<std::vector<int>> sharing_sets(const ModelConfig& c, Branch b) {
  if (!d3_independent(c, b)) return {{3, 4, 5, 6, 7}};
  return {{3}, {4, 5, 6, 7}};
}

const std::set<Branch> kBothBranches = {Branch::Classification,
                                        Branch::Regression};

}  // namespace

bool d3_independent(const ModelConfig& c, Branch b) {
  return c.sharing == SharingScheme::PartialD3Independent &&
         c.independent_branches.count(b) != 0;
}

void validate_config(const ModelConfig& c) {
  require(c.input_size >= kMinInputSize,
          "input_size must be >= " + std::to_string(kMinInputSize) + ", got " +
              std::to_string(c.input_size));
  require(c.num_classes >= 1, "num_classes must be >= 1");
  require(c.anchors_per_location >= 1, "anchors_per_location must be >= 1");
  require(c.head_channels >= 1, "head_channels must be >= 1");
  require(c.head_depth >= 1, "head_depth must be >= 1");
  require(c.fpn_channels >= 1, "fpn_channels must be >= 1");
  for (int level : c.lw_levels) {
    require(level >= kMinPyramidLevel && level <= kMaxPyramidLevel,
            "lw_levels entries must lie in 3..7, got " +
                std::to_string(level));
  }
  if (c.sharing == SharingScheme::FullyShared) {
    require(c.independent_branches == kBothBranches,
            "independent_branches only applies to PartialD3Independent");
  } else {
    require(!c.independent_branches.empty(),
            "PartialD3Independent needs at least one independent branch");
  }
  for (Branch b : {Branch::Classification, Branch::Regression}) {
    for (const auto& set : sharing_sets(c, b)) {
      const HeadVariant first = variant_at(c, b, set.front());
      for (int level : set) {
        const HeadVariant v = variant_at(c, b, level);
        require(v == first,
                "WeightGroupMismatch: the " +
                    branch_short(b) + " head at D" + std::to_string(level) +
                    " (" + to_string(v) + ") would share weights with D" +
                    std::to_string(set.front()) + " (" + to_string(first) +
                    "); give D3 of this branch its own weights "
                    "(PartialD3Independent) or substitute every level");
      }
    }
  }
}

std::string to_string(HeadVariant v) {
  switch (v) {
    case HeadVariant::Original: return "Original";
    case HeadVariant::V1: return "V1";
    case HeadVariant::V2: return "V2";
    case HeadVariant::V3: return "V3";
  }
  return "?";
}

std::string to_string(SharingScheme s) {
  return s == SharingScheme::FullyShared ? "FullyShared"
                                         : "PartialD3Independent";
}

std::string to_string(PredictorPolicy p) {
  return p == PredictorPolicy::KeepPredictor3x3 ? "KeepPredictor3x3"
                                                : "ReplacePredictorToo";
}

HeadVariant parse_head_variant(const std::string& s) {
  for (HeadVariant v : {HeadVariant::Original, HeadVariant::V1,
                        HeadVariant::V2, HeadVariant::V3}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown head variant '" + s + "'");
}

SharingScheme parse_sharing_scheme(const std::string& s) {
  for (SharingScheme v :
       {SharingScheme::FullyShared, SharingScheme::PartialD3Independent}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown sharing scheme '" + s + "'");
}

PredictorPolicy parse_predictor_policy(const std::string& s) {
  for (PredictorPolicy v : {PredictorPolicy::KeepPredictor3x3,
                            PredictorPolicy::ReplacePredictorToo}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown predictor policy '" + s + "'");
}

Branch parse_branch(const std::string& s) {
  if (s == "Classification") return Branch::Classification;
  if (s == "Regression") return Branch::Regression;
  throw ConfigError("unknown branch '" + s + "'");
}

json config_to_json(const ModelConfig& c) {
  json independent = json::array();
  for (Branch b : c.independent_branches) independent.push_back(to_string(b));
  return json{
      {"input_size", c.input_size},
      {"num_classes", c.num_classes},
      {"anchors_per_location", c.anchors_per_location},
      {"head_channels", c.head_channels},
      {"head_depth", c.head_depth},
      {"fpn_channels", c.fpn_channels},
      {"variant_cls", to_string(c.variant_cls)},
      {"variant_reg", to_string(c.variant_reg)},
      {"lw_levels", c.lw_levels},
      {"sharing", to_string(c.sharing)},
      {"independent_branches", independent},
      {"predictor_policy", to_string(c.predictor_policy)},
  };
}

ModelConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("model config must be a JSON object");
  static const char* kFields[] = {
      "input_size",   "num_classes", "anchors_per_location",
      "head_channels", "head_depth", "fpn_channels",
      "variant_cls",  "variant_reg", "lw_levels",
      "sharing",      "independent_branches", "predictor_policy"};
  for (const auto& [key, _] : doc.items()) {
    if (std::none_of(std::begin(kFields), std::end(kFields),
                     [&](const char* f) { return key == f; })) {
      throw ConfigError("unknown model config field '" + key + "'");
    }
  }
  ModelConfig c;
  try {
    auto count = [&](const char* key, Count& out) {
      if (doc.contains(key)) out = doc.at(key).get<Count>();
    };
    count("input_size", c.input_size);
    count("num_classes", c.num_classes);
    count("anchors_per_location", c.anchors_per_location);
    count("head_channels", c.head_channels);
    count("head_depth", c.head_depth);
    count("fpn_channels", c.fpn_channels);
    if (doc.contains("variant_cls"))
      c.variant_cls = parse_head_variant(doc.at("variant_cls").get<std::string>());
    if (doc.contains("variant_reg"))
      c.variant_reg = parse_head_variant(doc.at("variant_reg").get<std::string>());
    if (doc.contains("lw_levels"))
      c.lw_levels = doc.at("lw_levels").get<std::set<int>>();
    if (doc.contains("sharing"))
      c.sharing = parse_sharing_scheme(doc.at("sharing").get<std::string>());
    if (doc.contains("independent_branches")) {
      c.independent_branches.clear();
      for (const auto& b : doc.at("independent_branches")) {
        c.independent_branches.insert(parse_branch(b.get<std::string>()));
      }
    }
    if (doc.contains("predictor_policy"))
      c.predictor_policy =
          parse_predictor_policy(doc.at("predictor_policy").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  return c;
}

}  // namespace detflops
