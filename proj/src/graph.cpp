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
#include "detflops/graph.h"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "detflops/error.h"

namespace detflops {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string node_str(NodeId id) { return "node " + std::to_string(raw(id)); }

// Attributes that determine the shape of a weight tensor. Stride and padding
// do not, so two convs with equal weights may still differ there.
bool same_weight_layout(const OpKind& a, const OpKind& b) {
  if (a.index() != b.index()) return false;
  if (auto* ca = std::get_if<ConvOp>(&a)) {
    const auto& cb = std::get<ConvOp>(b);
    return ca->kernel_h == cb.kernel_h && ca->kernel_w == cb.kernel_w &&
           ca->in_channels == cb.in_channels &&
           ca->out_channels == cb.out_channels && ca->groups == cb.groups &&
           ca->has_bias == cb.has_bias;
  }
  if (auto* ba = std::get_if<BatchNormOp>(&a)) {
    return ba->channels == std::get<BatchNormOp>(b).channels;
  }
  return true;
}

std::optional<std::string> attribute_problem(const OpKind& kind) {
  return std::visit(
      Overloaded{
          [](const InputOp& op) -> std::optional<std::string> {
            if (!op.shape.valid()) return "input extents must be >= 1";
            return std::nullopt;
          },
          [](const ConvOp& op) -> std::optional<std::string> {
            if (op.kernel_h < 1 || op.kernel_w < 1 || op.stride < 1)
              return "conv kernel and stride must be >= 1";
            if (op.padding < 0) return "conv padding must be >= 0";
            if (op.groups < 1 || op.in_channels < 1 || op.out_channels < 1)
              return "conv channels and groups must be >= 1";
            if (op.in_channels % op.groups != 0 ||
                op.out_channels % op.groups != 0)
              return "conv channels must be divisible by groups";
            return std::nullopt;
          },
          [](const BatchNormOp& op) -> std::optional<std::string> {
            if (op.channels < 1) return "batchnorm channels must be >= 1";
            return std::nullopt;
          },
          [](const MaxPoolOp& op) -> std::optional<std::string> {
            if (op.kernel < 1 || op.stride < 1 || op.padding < 0)
              return "maxpool kernel/stride must be >= 1, padding >= 0";
            return std::nullopt;
          },
          [](const UpsampleOp& op) -> std::optional<std::string> {
            if (op.factor < 1) return "upsample factor must be >= 1";
            if (op.out_h.has_value() != op.out_w.has_value())
              return "upsample target needs both out_h and out_w";
            return std::nullopt;
          },
          [](const auto&) -> std::optional<std::string> {
            return std::nullopt;
          },
      },
      kind);
}

}  // namespace

std::string to_string(const TensorShape& s) {
  std::ostringstream os;
  os << s.n << "x" << s.c << "x" << s.h << "x" << s.w;
  return os.str();
}

std::string op_name(const OpKind& kind) {
  return std::visit(Overloaded{
                        [](const InputOp&) { return std::string("Input"); },
                        [](const ConvOp&) { return std::string("Conv"); },
                        [](const BatchNormOp&) {
                          return std::string("BatchNorm");
                        },
                        [](const ReluOp&) { return std::string("ReLU"); },
                        [](const SigmoidOp&) { return std::string("Sigmoid"); },
                        [](const AddOp&) { return std::string("Add"); },
                        [](const MaxPoolOp&) { return std::string("MaxPool"); },
                        [](const UpsampleOp&) {
                          return std::string("NearestUpsample");
                        },
                    },
                    kind);
}

std::size_t op_arity(const OpKind& kind) {
  if (std::holds_alternative<InputOp>(kind)) return 0;
  if (std::holds_alternative<AddOp>(kind)) return 2;
  return 1;
}

std::string to_string(Branch b) {
  return b == Branch::Classification ? "Classification" : "Regression";
}

std::string branch_short(Branch b) {
  return b == Branch::Classification ? "cls" : "reg";
}

std::string to_string(const BlockTag& tag) {
  switch (tag.kind) {
    case BlockKind::Stem: return "Stem";
    case BlockKind::Res2: return "Res2";
    case BlockKind::Res3: return "Res3";
    case BlockKind::Res4: return "Res4";
    case BlockKind::Res5: return "Res5";
    case BlockKind::FPN: return "FPN";
    case BlockKind::Head:
      return "D" + std::to_string(tag.level) + "." + branch_short(tag.branch);
  }
  return "?";
}

BlockTag parse_block_tag(const std::string& text) {
  static const std::pair<const char*, BlockKind> kFixed[] = {
      {"Stem", BlockKind::Stem}, {"Res2", BlockKind::Res2},
      {"Res3", BlockKind::Res3}, {"Res4", BlockKind::Res4},
      {"Res5", BlockKind::Res5}, {"FPN", BlockKind::FPN}};
  for (const auto& [name, kind] : kFixed) {
    if (text == name) return {kind, 0, Branch::Classification};
  }
  // D<level>.<cls|reg>
  if (text.size() == 6 && text[0] == 'D' && text[2] == '.' &&
      text[1] >= '3' && text[1] <= '7') {
    const std::string br = text.substr(3);
    if (br == "cls" || br == "reg") {
      return BlockTag::head(text[1] - '0', br == "cls" ? Branch::Classification
                                                       : Branch::Regression);
    }
  }
  throw GraphError("unknown block tag '" + text + "'");
}

std::string to_string(StructuralErrorKind kind) {
  switch (kind) {
    case StructuralErrorKind::DuplicateId: return "DuplicateId";
    case StructuralErrorKind::DanglingEdge: return "DanglingEdge";
    case StructuralErrorKind::Cycle: return "Cycle";
    case StructuralErrorKind::ArityMismatch: return "ArityMismatch";
    case StructuralErrorKind::MissingBlockTag: return "MissingBlockTag";
    case StructuralErrorKind::InvalidAttributes: return "InvalidAttributes";
    case StructuralErrorKind::WeightGroupMismatch: return "WeightGroupMismatch";
    case StructuralErrorKind::EmptyOutputs: return "EmptyOutputs";
    case StructuralErrorKind::DanglingOutput: return "DanglingOutput";
  }
  return "?";
}

// ---------------------------------------------------------------------------

Graph::Graph(std::vector<Node> nodes, std::vector<NodeId> outputs)
    : nodes_(std::move(nodes)), outputs_(std::move(outputs)) {
  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    // First occurrence wins; duplicates are reported by validate().
    index_.emplace(nodes_[i].id, i);
  }
}

const Node& Graph::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw GraphError("unknown " + node_str(id));
  return nodes_[it->second];
}

// ---------------------------------------------------------------------------

namespace {

// Kahn's algorithm over resolvable edges. Returns the order and the set of
// nodes left over (members of, or downstream of, a cycle).
std::pair<std::vector<NodeId>, std::vector<NodeId>> kahn(const Graph& graph) {
  std::map<NodeId, std::size_t> indegree;
  std::map<NodeId, std::vector<NodeId>> consumers;
  for (const Node& n : graph.nodes()) {
    indegree.emplace(n.id, 0);
  }
  for (const Node& n : graph.nodes()) {
    for (NodeId in : n.inputs) {
      if (!graph.contains(in)) continue;
      ++indegree[n.id];
      consumers[in].push_back(n.id);
    }
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  order.reserve(indegree.size());
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId c : consumers[id]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  std::vector<NodeId> stuck;
  for (const auto& [id, deg] : indegree) {
    if (deg != 0) stuck.push_back(id);
  }
  return {std::move(order), std::move(stuck)};
}

}  // namespace

std::vector<StructuralError> validate(const Graph& graph) {
  std::vector<StructuralError> errors;
  auto report = [&](StructuralErrorKind k, std::optional<NodeId> id,
                    std::string msg) {
    errors.push_back({k, id, std::move(msg)});
  };

  std::set<NodeId> seen;
  for (const Node& n : graph.nodes()) {
    if (!seen.insert(n.id).second) {
      report(StructuralErrorKind::DuplicateId, n.id,
             node_str(n.id) + " defined more than once");
    }
  }

  std::map<WeightGroupId, const Node*> group_owner;
  for (const Node& n : graph.nodes()) {
    for (NodeId in : n.inputs) {
      if (!graph.contains(in)) {
        report(StructuralErrorKind::DanglingEdge, n.id,
               node_str(n.id) + " references missing " + node_str(in));
      }
    }
    if (n.inputs.size() != op_arity(n.kind)) {
      report(StructuralErrorKind::ArityMismatch, n.id,
             node_str(n.id) + " (" + op_name(n.kind) + ") expects " +
                 std::to_string(op_arity(n.kind)) + " inputs, has " +
                 std::to_string(n.inputs.size()));
    }
    if (!std::holds_alternative<InputOp>(n.kind) && !n.block) {
      report(StructuralErrorKind::MissingBlockTag, n.id,
             node_str(n.id) + " has no block tag");
    }
    if (auto problem = attribute_problem(n.kind)) {
      report(StructuralErrorKind::InvalidAttributes, n.id,
             node_str(n.id) + ": " + *problem);
    }
    if (n.weight_group) {
      auto [it, inserted] = group_owner.emplace(*n.weight_group, &n);
      if (!inserted && !same_weight_layout(it->second->kind, n.kind)) {
        report(StructuralErrorKind::WeightGroupMismatch, n.id,
               "weight group '" + n.weight_group->label + "': " +
                   node_str(n.id) + " differs from " +
                   node_str(it->second->id));
      }
    }
  }

  for (NodeId id : kahn(graph).second) {
    report(StructuralErrorKind::Cycle, id,
           node_str(id) + " is on or behind a cycle");
  }

  if (graph.outputs().empty()) {
    report(StructuralErrorKind::EmptyOutputs, std::nullopt,
           "graph declares no outputs");
  }
  for (NodeId out : graph.outputs()) {
    if (!graph.contains(out)) {
      report(StructuralErrorKind::DanglingOutput, out,
             "output references missing " + node_str(out));
    }
  }
  return errors;
}

std::vector<NodeId> topo_order(const Graph& graph) {
  for (const Node& n : graph.nodes()) {
    for (NodeId in : n.inputs) {
      if (!graph.contains(in)) {
        throw GraphError("DanglingEdge: " + node_str(n.id) +
                         " references missing " + node_str(in));
      }
    }
  }
  auto [order, stuck] = kahn(graph);
  if (!stuck.empty()) {
    throw GraphError("Cycle: " + node_str(stuck.front()) +
                     " is on or behind a cycle");
  }
  return order;
}

// ---------------------------------------------------------------------------

Count window_output_extent(Count in, Count kernel, Count stride,
                           Count padding) {
  const Count span = in + 2 * padding - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

TensorShape infer_node_shape(const OpKind& kind,
                             std::span<const TensorShape> inputs) {
  if (inputs.size() != op_arity(kind)) {
    throw ShapeError(op_name(kind) + " expects " +
                     std::to_string(op_arity(kind)) + " inputs");
  }
  auto check = [&](const TensorShape& s) {
    if (!s.valid()) {
      throw ShapeError(op_name(kind) + " produces non-positive extent " +
                       to_string(s));
    }
    return s;
  };
  return std::visit(
      Overloaded{
          [&](const InputOp& op) { return check(op.shape); },
          [&](const ConvOp& op) {
            const TensorShape& in = inputs[0];
            if (in.c != op.in_channels) {
              throw ShapeError("Conv expects " +
                               std::to_string(op.in_channels) +
                               " input channels, got " + std::to_string(in.c));
            }
            return check({in.n, op.out_channels,
                          window_output_extent(in.h, op.kernel_h, op.stride,
                                               op.padding),
                          window_output_extent(in.w, op.kernel_w, op.stride,
                                               op.padding)});
          },
          [&](const BatchNormOp& op) {
            if (inputs[0].c != op.channels) {
              throw ShapeError("BatchNorm channel mismatch: " +
                               std::to_string(op.channels) + " vs " +
                               std::to_string(inputs[0].c));
            }
            return check(inputs[0]);
          },
          [&](const AddOp&) {
            if (!(inputs[0] == inputs[1])) {
              throw ShapeError("Add operand shapes differ: " +
                               to_string(inputs[0]) + " vs " +
                               to_string(inputs[1]));
            }
            return check(inputs[0]);
          },
          [&](const MaxPoolOp& op) {
            const TensorShape& in = inputs[0];
            return check({in.n, in.c,
                          window_output_extent(in.h, op.kernel, op.stride,
                                               op.padding),
                          window_output_extent(in.w, op.kernel, op.stride,
                                               op.padding)});
          },
          [&](const UpsampleOp& op) {
            const TensorShape& in = inputs[0];
            auto target = [&](Count extent, std::optional<Count> want) {
              const Count full = extent * op.factor;
              if (!want) return full;
              if (*want > full || *want <= (extent - 1) * op.factor) {
                throw ShapeError("NearestUpsample target " +
                                 std::to_string(*want) +
                                 " unreachable from extent " +
                                 std::to_string(extent) + " at factor " +
                                 std::to_string(op.factor));
              }
              return *want;
            };
            return check({in.n, in.c, target(in.h, op.out_h),
                          target(in.w, op.out_w)});
          },
          [&](const auto&) { return check(inputs[0]); },
      },
      kind);
}

ShapeMap infer_shapes(const Graph& graph, const ShapeMap& input_shapes) {
  ShapeMap shapes;
  std::vector<TensorShape> operands;
  for (NodeId id : topo_order(graph)) {
    const Node& n = graph.node(id);
    if (auto* in = std::get_if<InputOp>(&n.kind)) {
      auto given = input_shapes.find(id);
      const TensorShape s = given != input_shapes.end() ? given->second
                                                        : in->shape;
      if (!s.valid()) {
        throw ShapeError("input " + node_str(id) + " has invalid shape " +
                         to_string(s));
      }
      shapes.emplace(id, s);
      continue;
    }
    operands.clear();
    for (NodeId src : n.inputs) operands.push_back(shapes.at(src));
    try {
      shapes.emplace(id, infer_node_shape(n.kind, operands));
    } catch (const ShapeError& e) {
      throw ShapeError(node_str(id) + ": " + e.what());
    }
  }
  return shapes;
}

// ---------------------------------------------------------------------------

NodeId GraphBuilder::input(const TensorShape& shape) {
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  shapes_.push_back(infer_node_shape(InputOp{shape}, {}));
  nodes_.push_back({id, InputOp{shape}, {}, std::nullopt, std::nullopt});
  return id;
}

NodeId GraphBuilder::add(OpKind kind, std::vector<NodeId> inputs,
                         BlockTag block, std::optional<WeightGroupId> group) {
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  std::vector<TensorShape> operands;
  for (NodeId in : inputs) operands.push_back(shape(in));
  try {
    shapes_.push_back(infer_node_shape(kind, operands));
  } catch (const ShapeError& e) {
    throw ShapeError(node_str(id) + " in " + to_string(block) + ": " +
                     e.what());
  }
  nodes_.push_back(
      {id, std::move(kind), std::move(inputs), block, std::move(group)});
  return id;
}

const TensorShape& GraphBuilder::shape(NodeId id) const {
  if (raw(id) >= shapes_.size()) throw GraphError("unknown " + node_str(id));
  return shapes_[raw(id)];
}

Graph GraphBuilder::build(std::vector<NodeId> outputs) && {
  return Graph(std::move(nodes_), std::move(outputs));
}

}  // namespace detflops
