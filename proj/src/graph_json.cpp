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
#include "detflops/graph_json.h"

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

json attrs_to_json(const OpKind& kind) {
  return std::visit(
      Overloaded{
          [](const InputOp& op) { return shape_to_json(op.shape); },
          [](const ConvOp& op) {
            return json{{"kernel_h", op.kernel_h},
                        {"kernel_w", op.kernel_w},
                        {"stride", op.stride},
                        {"padding", op.padding},
                        {"in_channels", op.in_channels},
                        {"out_channels", op.out_channels},
                        {"groups", op.groups},
                        {"has_bias", op.has_bias}};
          },
          [](const BatchNormOp& op) { return json{{"channels", op.channels}}; },
          [](const MaxPoolOp& op) {
            return json{{"kernel", op.kernel},
                        {"stride", op.stride},
                        {"padding", op.padding}};
          },
          [](const UpsampleOp& op) {
            json j{{"factor", op.factor}};
            if (op.out_h) j["out_h"] = *op.out_h;
            if (op.out_w) j["out_w"] = *op.out_w;
            return j;
          },
          [](const auto&) { return json::object(); },
      },
      kind);
}

OpKind kind_from_json(const std::string& name, const json& a) {
  if (name == "Input") return InputOp{shape_from_json(a)};
  if (name == "Conv") {
    ConvOp op;
    op.kernel_h = a.at("kernel_h").get<Count>();
    op.kernel_w = a.at("kernel_w").get<Count>();
    op.stride = a.at("stride").get<Count>();
    op.padding = a.at("padding").get<Count>();
    op.in_channels = a.at("in_channels").get<Count>();
    op.out_channels = a.at("out_channels").get<Count>();
    op.groups = a.at("groups").get<Count>();
    op.has_bias = a.at("has_bias").get<bool>();
    return op;
  }
  if (name == "BatchNorm") return BatchNormOp{a.at("channels").get<Count>()};
  if (name == "ReLU") return ReluOp{};
  if (name == "Sigmoid") return SigmoidOp{};
  if (name == "Add") return AddOp{};
  if (name == "MaxPool") {
    return MaxPoolOp{a.at("kernel").get<Count>(), a.at("stride").get<Count>(),
                     a.at("padding").get<Count>()};
  }
  if (name == "NearestUpsample") {
    UpsampleOp op{a.at("factor").get<Count>(), std::nullopt, std::nullopt};
    if (a.contains("out_h")) op.out_h = a.at("out_h").get<Count>();
    if (a.contains("out_w")) op.out_w = a.at("out_w").get<Count>();
    return op;
  }
  throw GraphError("UnknownOpKind: '" + name + "'");
}

}  // namespace

json shape_to_json(const TensorShape& s) {
  return json{{"n", s.n}, {"c", s.c}, {"h", s.h}, {"w", s.w}};
}

TensorShape shape_from_json(const json& j) {
  return {j.at("n").get<Count>(), j.at("c").get<Count>(),
          j.at("h").get<Count>(), j.at("w").get<Count>()};
}

json graph_to_json(const Graph& graph) {
  json nodes = json::array();
  for (const Node& n : graph.nodes()) {
    json inputs = json::array();
    for (NodeId in : n.inputs) inputs.push_back(raw(in));
    nodes.push_back({
        {"id", raw(n.id)},
        {"kind", op_name(n.kind)},
        {"attrs", attrs_to_json(n.kind)},
        {"inputs", std::move(inputs)},
        {"block", n.block ? json(to_string(*n.block)) : json(nullptr)},
        {"weight_group",
         n.weight_group ? json(n.weight_group->label) : json(nullptr)},
    });
  }
  json outputs = json::array();
  for (NodeId id : graph.outputs()) outputs.push_back(raw(id));
  return json{{"nodes", std::move(nodes)}, {"outputs", std::move(outputs)}};
}

Graph graph_from_json(const json& doc) {
  try {
    std::vector<Node> nodes;
    for (const json& j : doc.at("nodes")) {
      Node n;
      n.id = NodeId{j.at("id").get<std::uint32_t>()};
      const json attrs = j.contains("attrs") ? j.at("attrs") : json::object();
      n.kind = kind_from_json(j.at("kind").get<std::string>(), attrs);
      for (const json& in : j.at("inputs")) {
        n.inputs.push_back(NodeId{in.get<std::uint32_t>()});
      }
      if (j.contains("block") && !j.at("block").is_null()) {
        n.block = parse_block_tag(j.at("block").get<std::string>());
      }
      if (j.contains("weight_group") && !j.at("weight_group").is_null()) {
        n.weight_group = WeightGroupId{j.at("weight_group").get<std::string>()};
      }
      nodes.push_back(std::move(n));
    }
    std::vector<NodeId> outputs;
    for (const json& o : doc.at("outputs")) {
      outputs.push_back(NodeId{o.get<std::uint32_t>()});
    }
    return Graph(std::move(nodes), std::move(outputs));
  } catch (const json::exception& e) {
    throw GraphError(std::string("malformed graph document: ") + e.what());
  }
}

}  // namespace detflops
