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
#include "detflops/builders.h"

#include "detflops/error.h"

namespace detflops {

namespace {

constexpr Count kBackboneStride = 32;

ConvOp conv(Count kernel, Count stride, Count in, Count out, bool bias,
            Count groups = 1) {
  ConvOp op;
  op.kernel_h = op.kernel_w = kernel;
  op.stride = stride;
  op.padding = kernel / 2;
  op.in_channels = in;
  op.out_channels = out;
  op.groups = groups;
  op.has_bias = bias;
  return op;
}

// conv -> BN [-> ReLU]
NodeId conv_bn(GraphBuilder& b, NodeId x, const ConvOp& op, BlockTag tag,
               bool relu) {
  NodeId y = b.add(op, {x}, tag);
  y = b.add(BatchNormOp{op.out_channels}, {y}, tag);
  if (relu) y = b.add(ReluOp{}, {y}, tag);
  return y;
}

NodeId bottleneck(GraphBuilder& b, NodeId x, Count mid, Count out,
                  Count stride, BlockTag tag) {
  const Count in = b.shape(x).c;
  NodeId y = conv_bn(b, x, conv(1, stride, in, mid, false), tag, true);
  y = conv_bn(b, y, conv(3, 1, mid, mid, false), tag, true);
  y = conv_bn(b, y, conv(1, 1, mid, out, false), tag, false);
  NodeId shortcut = x;
  if (stride != 1 || in != out) {
    shortcut = conv_bn(b, x, conv(1, stride, in, out, false), tag, false);
  }
  y = b.add(AddOp{}, {y, shortcut}, tag);
  return b.add(ReluOp{}, {y}, tag);
}

struct Stage {
  BlockKind kind;
  int blocks;
  Count mid;
  Count out;
  Count stride;
};

constexpr Stage kStages[] = {
    {BlockKind::Res2, 3, 64, 256, 1},
    {BlockKind::Res3, 4, 128, 512, 2},
    {BlockKind::Res4, 6, 256, 1024, 2},
    {BlockKind::Res5, 3, 512, 2048, 2},
};

Count predictor_width(const ModelConfig& c, Branch branch) {
  return branch == Branch::Classification
             ? c.num_classes * c.anchors_per_location
             : 4 * c.anchors_per_location;
}

}  // namespace

BackboneTaps build_backbone_resnet50(GraphBuilder& b, NodeId input) {
  const TensorShape& in = b.shape(input);
  if (in.c != 3) {
    throw ShapeError("backbone expects 3 input channels, got " +
                     std::to_string(in.c));
  }
  if (in.h < kBackboneStride || in.w < kBackboneStride) {
    throw ShapeError("input " + to_string(in) +
                     " too small to reach C5 (needs >= 32x32)");
  }
  const BlockTag stem{BlockKind::Stem};
  NodeId x = b.add(ConvOp{7, 7, 2, 3, 3, 64, 1, false}, {input}, stem);
  x = b.add(BatchNormOp{64}, {x}, stem);
  x = b.add(ReluOp{}, {x}, stem);
  x = b.add(MaxPoolOp{3, 2, 1}, {x}, stem);

  BackboneTaps taps;
  for (const Stage& s : kStages) {
    const BlockTag tag{s.kind};
    for (int i = 0; i < s.blocks; ++i) {
      x = bottleneck(b, x, s.mid, s.out, i == 0 ? s.stride : 1, tag);
    }
    if (s.kind == BlockKind::Res3) taps.c3 = x;
    if (s.kind == BlockKind::Res4) taps.c4 = x;
    if (s.kind == BlockKind::Res5) taps.c5 = x;
  }
  return taps;
}

Graph build_backbone_graph(const TensorShape& input) {
  GraphBuilder b;
  const NodeId in = b.input(input);
  const BackboneTaps taps = build_backbone_resnet50(b, in);
  return std::move(b).build({taps.c3, taps.c4, taps.c5});
}

PyramidTaps build_fpn(GraphBuilder& b, const BackboneTaps& taps,
                      Count channels) {
  const BlockTag tag{BlockKind::FPN};
  auto lateral = [&](NodeId c) {
    return b.add(conv(1, 1, b.shape(c).c, channels, true), {c}, tag);
  };
  auto smooth = [&](NodeId x) {
    return b.add(conv(3, 1, channels, channels, true), {x}, tag);
  };
  auto merge = [&](NodeId coarse, NodeId lat) {
    const TensorShape& target = b.shape(lat);
    const NodeId up =
        b.add(UpsampleOp{2, target.h, target.w}, {coarse}, tag);
    return b.add(AddOp{}, {lat, up}, tag);
  };

  const NodeId inner5 = lateral(taps.c5);
  const NodeId inner4 = merge(inner5, lateral(taps.c4));
  const NodeId inner3 = merge(inner4, lateral(taps.c3));

  PyramidTaps p;
  p.levels[0] = smooth(inner3);
  p.levels[1] = smooth(inner4);
  p.levels[2] = smooth(inner5);
  p.levels[3] =
      b.add(conv(3, 2, b.shape(taps.c5).c, channels, true), {taps.c5}, tag);
  const NodeId relu6 = b.add(ReluOp{}, {p.levels[3]}, tag);
  p.levels[4] = b.add(conv(3, 2, channels, channels, true), {relu6}, tag);
  return p;
}

std::string weight_scope(const ModelConfig& config, Branch branch, int level) {
  if (!d3_independent(config, branch)) return "shared";
  return level == 3 ? "P3" : "P4-7";
}

NodeId build_head_block(GraphBuilder& b, NodeId level_input,
                        HeadVariant variant, Branch branch, int level,
                        const ModelConfig& config, std::string_view scope) {
  if (b.shape(level_input).c != config.fpn_channels) {
    throw ShapeError("head input has " +
                     std::to_string(b.shape(level_input).c) +
                     " channels, expected fpn_channels=" +
                     std::to_string(config.fpn_channels));
  }
  const BlockTag tag = BlockTag::head(level, branch);
  const std::string prefix =
      "head." + branch_short(branch) + "." + std::string(scope) + ".";
  auto group = [&](const std::string& name) {
    return WeightGroupId{prefix + name};
  };
  auto conv_relu = [&](NodeId x, const ConvOp& op, const std::string& name) {
    const NodeId y = b.add(op, {x}, tag, group(name));
    return b.add(ReluOp{}, {y}, tag);
  };

  const Count width = config.head_channels;
  NodeId x = level_input;
  for (Count i = 0; i < config.head_depth; ++i) {
    const Count in = b.shape(x).c;
    const std::string name = "trunk" + std::to_string(i);
    switch (variant) {
      case HeadVariant::Original:
        x = conv_relu(x, conv(3, 1, in, width, true), name);
        break;
      case HeadVariant::V1:
        x = conv_relu(x, conv(3, 1, in, in, true, in), name + ".dw");
        x = conv_relu(x, conv(1, 1, in, width, true), name + ".pw");
        break;
      case HeadVariant::V2:
        x = conv_relu(x, conv(i % 2 == 0 ? 3 : 1, 1, in, width, true), name);
        break;
      case HeadVariant::V3:
        x = conv_relu(x, conv(1, 1, in, width, true), name);
        break;
    }
  }

  const Count out = predictor_width(config, branch);
  const bool replace =
      config.predictor_policy == PredictorPolicy::ReplacePredictorToo;
  const Count in = b.shape(x).c;
  if (replace && variant == HeadVariant::V3) {
    x = b.add(conv(1, 1, in, out, true), {x}, tag, group("pred"));
  } else if (replace && variant == HeadVariant::V1) {
    x = b.add(conv(3, 1, in, in, true, in), {x}, tag, group("pred.dw"));
    x = b.add(conv(1, 1, in, out, true), {x}, tag, group("pred.pw"));
  } else {
    x = b.add(conv(3, 1, in, out, true), {x}, tag, group("pred"));
  }
  if (branch == Branch::Classification) x = b.add(SigmoidOp{}, {x}, tag);
  return x;
}

Graph build_retinanet(const ModelConfig& config) {
  validate_config(config);
  GraphBuilder b;
  const NodeId image =
      b.input({1, 3, config.input_size, config.input_size});
  const BackboneTaps taps = build_backbone_resnet50(b, image);
  const PyramidTaps pyramid = build_fpn(b, taps, config.fpn_channels);

  std::vector<NodeId> outputs;
  for (int level = kMinPyramidLevel; level <= kMaxPyramidLevel; ++level) {
    for (Branch branch : {Branch::Classification, Branch::Regression}) {
      outputs.push_back(build_head_block(
          b, pyramid.at(level), variant_at(config, branch, level), branch,
          level, config, weight_scope(config, branch, level)));
    }
  }
  return std::move(b).build(std::move(outputs));
}

}  // namespace detflops
