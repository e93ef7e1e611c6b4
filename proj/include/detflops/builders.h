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

#include <array>
#include <string>
#include <string_view>

#include "detflops/graph.h"
#include "detflops/model_config.h"

namespace detflops {

/// Backbone feature taps at strides 8, 16 and 32.
struct BackboneTaps {
  NodeId c3{};
  NodeId c4{};
  NodeId c5{};
};

/// Pyramid outputs P3..P7.
struct PyramidTaps {
  std::array<NodeId, 5> levels{};
  NodeId at(int level) const { return levels.at(level - kMinPyramidLevel); }
};

/// ResNet-50 without the classifier: 7x7/2 stem, 3x3/2 max-pool and
/// bottleneck stages [3, 4, 6, 3]. Downsampling stages stride on their first
/// 1x1 conv. Convs are bias-free and followed by BatchNorm.
///
/// Throws ShapeError when the input is smaller than the backbone's output
/// stride (32) in either dimension or is not 3-channel.
BackboneTaps build_backbone_resnet50(GraphBuilder& builder, NodeId input);

/// Standalone backbone graph whose outputs are {C3, C4, C5}.
Graph build_backbone_graph(const TensorShape& input);

/// Top-down FPN producing P3..P5 from laterals, P6 from C5 and P7 from
/// ReLU(P6). Every level has `channels` channels.
PyramidTaps build_fpn(GraphBuilder& builder, const BackboneTaps& taps,
                      Count channels);

/// One detection branch at one pyramid level. `scope` namespaces the weight
/// groups ("shared", "P3", "P4-7"); levels built with the same scope and
/// branch share weights. Returns the branch output (after Sigmoid for
/// classification).
NodeId build_head_block(GraphBuilder& builder, NodeId level_input,
                        HeadVariant variant, Branch branch, int level,
                        const ModelConfig& config, std::string_view scope);

/// Weight-group scope of one branch at one level: "shared" unless that
/// branch's D3 is independent, then "P3" / "P4-7".
std::string weight_scope(const ModelConfig& config, Branch branch, int level);

/// Full RetinaNet graph. Validates the config first (ConfigError). Outputs are
/// ordered D3.cls, D3.reg, ..., D7.cls, D7.reg.
Graph build_retinanet(const ModelConfig& config);

}  // namespace detflops
