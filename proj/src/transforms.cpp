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
#include "detflops/transforms.h"

#include <algorithm>

#include "detflops/builders.h"
#include "detflops/error.h"

namespace detflops {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const std::set<int> kAllLevels = {3, 4, 5, 6, 7};

ModelConfig substitute(const ModelConfig& config, const SubstituteHead& t) {
  if (t.branches.empty()) throw ConfigError("SubstituteHead needs a branch");
  if (t.levels.empty()) throw ConfigError("SubstituteHead needs a level");
  for (int level : t.levels) {
    if (level < kMinPyramidLevel || level > kMaxPyramidLevel) {
      throw ConfigError("SubstituteHead level " + std::to_string(level) +
                        " outside 3..7");
    }
  }
  ModelConfig out = config;
  for (Branch b : {Branch::Classification, Branch::Regression}) {
    HeadVariant& v =
        b == Branch::Classification ? out.variant_cls : out.variant_reg;
    if (t.branches.count(b)) {
      v = t.variant;
    } else if (v != HeadVariant::Original && config.lw_levels != t.levels) {
      // Both branches read the same lw_levels set.
      throw ConfigError("SubstituteHead levels conflict with the " +
                        branch_short(b) +
                        " branch's existing light-weight levels");
    }
  }
  out.lw_levels = t.levels;
  out.predictor_policy = t.predictor_policy;
  if (t.levels != kAllLevels) {
    // Only the rewritten branches need their own D3 weights; an untouched
    // branch keeps whatever sharing it had.
    if (out.sharing == SharingScheme::FullyShared) {
      out.independent_branches.clear();
    }
    out.sharing = SharingScheme::PartialD3Independent;
    out.independent_branches.insert(t.branches.begin(), t.branches.end());
  }
  return out;
}

std::set<int> levels_from_json(const json& j) {
  return j.get<std::set<int>>();
}

}  // namespace

ModelConfig apply(const ModelConfig& config, const Transform& t) {
  ModelConfig out = std::visit(
      Overloaded{
          [&](const SubstituteHead& s) { return substitute(config, s); },
          [&](const SetSharing& s) {
            ModelConfig c = config;
            c.sharing = s.scheme;
            c.independent_branches = {Branch::Classification,
                                      Branch::Regression};
            return c;
          },
          [&](const ScaleInput& s) {
            if (s.target_size < kMinInputSize) {
              throw ConfigError("ScaleInput target_size must be >= " +
                                std::to_string(kMinInputSize));
            }
            ModelConfig c = config;
            c.input_size = s.target_size;
            return c;
          },
      },
      t);
  validate_config(out);
  return out;
}

ModelConfig apply_all(const ModelConfig& config,
                      std::span<const Transform> chain) {
  ModelConfig c = config;
  for (const Transform& t : chain) c = detflops::apply(c, t);
  return c;
}

CostReport profile_config(const ModelConfig& config, const CostOptions& opts) {
  return cost_report(build_retinanet(config), {}, opts);
}

double param_overhead(const ModelConfig& before, const ModelConfig& after) {
  const Count p0 = profile_config(before).totals.params;
  const Count p1 = profile_config(after).totals.params;
  return static_cast<double>(p1 - p0) / static_cast<double>(p0);
}

json transform_to_json(const Transform& t) {
  return std::visit(
      Overloaded{
          [](const SubstituteHead& s) {
            json branches = json::array();
            for (Branch b : s.branches) branches.push_back(to_string(b));
            return json{{"type", "SubstituteHead"},
                        {"variant", to_string(s.variant)},
                        {"branches", std::move(branches)},
                        {"levels", s.levels},
                        {"predictor_policy", to_string(s.predictor_policy)}};
          },
          [](const SetSharing& s) {
            return json{{"type", "SetSharing"}, {"scheme", to_string(s.scheme)}};
          },
          [](const ScaleInput& s) {
            return json{{"type", "ScaleInput"}, {"target_size", s.target_size}};
          },
      },
      t);
}

Transform transform_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "SubstituteHead") {
      SubstituteHead s;
      s.variant = parse_head_variant(j.at("variant").get<std::string>());
      if (j.contains("branches")) {
        s.branches.clear();
        for (const json& b : j.at("branches")) {
          s.branches.insert(parse_branch(b.get<std::string>()));
        }
      }
      if (j.contains("levels")) s.levels = levels_from_json(j.at("levels"));
      if (j.contains("predictor_policy")) {
        s.predictor_policy =
            parse_predictor_policy(j.at("predictor_policy").get<std::string>());
      }
      return s;
    }
    if (type == "SetSharing") {
      return SetSharing{parse_sharing_scheme(j.at("scheme").get<std::string>())};
    }
    if (type == "ScaleInput") {
      return ScaleInput{j.at("target_size").get<Count>()};
    }
    throw ConfigError("unknown transform type '" + type + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed transform: ") + e.what());
  }
}

std::vector<Transform> transforms_from_json(const json& j) {
  std::vector<Transform> out;
  if (j.is_array()) {
    for (const json& t : j) out.push_back(transform_from_json(t));
  } else {
    out.push_back(transform_from_json(j));
  }
  return out;
}

}  // namespace detflops
