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
#include "detflops/presets.h"

namespace detflops {

namespace {

ModelConfig light_weight(HeadVariant cls, HeadVariant reg,
                         PredictorPolicy policy) {
  ModelConfig c;
  c.variant_cls = cls;
  c.variant_reg = reg;
  c.lw_levels = {3};
  c.sharing = SharingScheme::PartialD3Independent;
  c.independent_branches.clear();
  if (cls != HeadVariant::Original) {
    c.independent_branches.insert(Branch::Classification);
  }
  if (reg != HeadVariant::Original) {
    c.independent_branches.insert(Branch::Regression);
  }
  c.predictor_policy = policy;
  return c;
}

std::vector<Preset> make_presets() {
  using enum HeadVariant;
  constexpr auto keep = PredictorPolicy::KeepPredictor3x3;
  constexpr auto replace = PredictorPolicy::ReplacePredictorToo;
  return {
      {"baseline-800", "ResNet50-FPN RetinaNet, 800x800, fully shared heads",
       ModelConfig{}},
      {"lw-v1-reg", "D3 regression trunk: depthwise 3x3 + 1x1",
       light_weight(Original, V1, keep)},
      {"lw-v2-reg", "D3 regression trunk: alternating 3x3/1x1",
       light_weight(Original, V2, keep)},
      {"lw-v3-reg", "D3 regression trunk: all 1x1",
       light_weight(Original, V3, keep)},
      {"lw-v3-both", "D3 cls+reg trunks: all 1x1, 3x3 predictors",
       light_weight(V3, V3, keep)},
      {"lw-v3-both-pred", "D3 cls+reg trunks and predictors: all 1x1",
       light_weight(V3, V3, replace)},
  };
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = make_presets();
  return kPresets;
}

std::optional<ModelConfig> find_preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p.config;
  }
  return std::nullopt;
}

std::optional<std::string> preset_name(const ModelConfig& config) {
  for (const Preset& p : presets()) {
    if (p.config == config) return p.name;
  }
  return std::nullopt;
}

}  // namespace detflops
