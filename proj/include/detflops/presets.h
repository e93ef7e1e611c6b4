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

#include <optional>
#include <string>
#include <vector>

#include "detflops/model_config.h"

namespace detflops {

/// Named configurations. The light-weight presets substitute on D3 only; the
/// rewritten branches get their own D3 weights and everything else stays
/// shared.
struct Preset {
  std::string name;
  std::string description;
  ModelConfig config;
};

const std::vector<Preset>& presets();
std::optional<ModelConfig> find_preset(const std::string& name);
/// Name of the preset equal to `config`, if any.
std::optional<std::string> preset_name(const ModelConfig& config);

}  // namespace detflops
