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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace detflops {

using Count = std::int64_t;

/// NCHW extents. Batch is 1 for every analysis in this library.
struct TensorShape {
  Count n = 1;
  Count c = 1;
  Count h = 1;
  Count w = 1;

  Count elements() const { return n * c * h * w; }
  bool valid() const { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

std::string to_string(const TensorShape& s);

// ---------------------------------------------------------------------------
// Operation vocabulary
// ---------------------------------------------------------------------------

struct InputOp {
  TensorShape shape;
  friend bool operator==(const InputOp&, const InputOp&) = default;
};

/// 2-D convolution. Depthwise is groups == in_channels == out_channels.
struct ConvOp {
  Count kernel_h = 1;
  Count kernel_w = 1;
  Count stride = 1;
  Count padding = 0;
  Count in_channels = 1;
  Count out_channels = 1;
  Count groups = 1;
  bool has_bias = false;

  bool is_depthwise() const {
    return groups > 1 && groups == in_channels && groups == out_channels;
  }
  friend bool operator==(const ConvOp&, const ConvOp&) = default;
};

struct BatchNormOp {
  Count channels = 1;
  friend bool operator==(const BatchNormOp&, const BatchNormOp&) = default;
};

struct ReluOp {
  friend bool operator==(const ReluOp&, const ReluOp&) = default;
};

struct SigmoidOp {
  friend bool operator==(const SigmoidOp&, const SigmoidOp&) = default;
};

struct AddOp {
  friend bool operator==(const AddOp&, const AddOp&) = default;
};

struct MaxPoolOp {
  Count kernel = 1;
  Count stride = 1;
  Count padding = 0;
  friend bool operator==(const MaxPoolOp&, const MaxPoolOp&) = default;
};

/// Nearest-neighbour upsample. With an explicit target size the output is
/// cropped to it (FPN top-down path at input sizes not divisible by 32); the
/// target must lie in ((in - 1) * factor, in * factor].
struct UpsampleOp {
  Count factor = 2;
  std::optional<Count> out_h;
  std::optional<Count> out_w;
  friend bool operator==(const UpsampleOp&, const UpsampleOp&) = default;
};

using OpKind = std::variant<InputOp, ConvOp, BatchNormOp, ReluOp, SigmoidOp,
                            AddOp, MaxPoolOp, UpsampleOp>;

/// Canonical name of the op kind ("Conv", "NearestUpsample", ...).
std::string op_name(const OpKind& kind);

/// Number of inputs the op consumes.
std::size_t op_arity(const OpKind& kind);

// ---------------------------------------------------------------------------
// Block tags
// ---------------------------------------------------------------------------

enum class BlockKind : std::uint8_t { Stem, Res2, Res3, Res4, Res5, FPN, Head };
enum class Branch : std::uint8_t { Classification, Regression };

/// Which architectural block a node belongs to. Head blocks D3..D7 carry the
/// pyramid level they consume and their branch.
struct BlockTag {
  BlockKind kind = BlockKind::Stem;
  int level = 0;
  Branch branch = Branch::Classification;

  static BlockTag head(int level, Branch branch) {
    return {BlockKind::Head, level, branch};
  }
  bool is_head() const { return kind == BlockKind::Head; }

  friend auto operator<=>(const BlockTag& a, const BlockTag& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (a.kind != BlockKind::Head) return std::strong_ordering::equal;
    if (auto c = a.level <=> b.level; c != 0) return c;
    return a.branch <=> b.branch;
  }
  friend bool operator==(const BlockTag& a, const BlockTag& b) {
    return (a <=> b) == 0;
  }
};

/// "Stem", "Res2".."Res5", "FPN", "D3.cls", "D7.reg".
std::string to_string(const BlockTag& tag);
BlockTag parse_block_tag(const std::string& text);
std::string to_string(Branch b);
/// Short branch label used in tables: "cls" / "reg".
std::string branch_short(Branch b);

// ---------------------------------------------------------------------------
// Nodes and graphs
// ---------------------------------------------------------------------------

enum class NodeId : std::uint32_t {};

inline std::uint32_t raw(NodeId id) { return static_cast<std::uint32_t>(id); }

/// Nodes that carry the same label share one physical weight tensor.
struct WeightGroupId {
  std::string label;
  friend auto operator<=>(const WeightGroupId&, const WeightGroupId&) = default;
};

struct Node {
  NodeId id{};
  OpKind kind;
  std::vector<NodeId> inputs;
  std::optional<BlockTag> block;
  std::optional<WeightGroupId> weight_group;
};

/// Immutable DAG of nodes. Construction does not validate; call validate().
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<Node> nodes, std::vector<NodeId> outputs);

  /// Nodes in ascending id order.
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const NodeId> outputs() const { return outputs_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(NodeId id) const { return index_.count(id) != 0; }
  /// Throws GraphError if the id is unknown.
  const Node& node(NodeId id) const;

 private:
  std::vector<Node> nodes_;
  std::vector<NodeId> outputs_;
  std::unordered_map<NodeId, std::size_t> index_;
};

using ShapeMap = std::map<NodeId, TensorShape>;

// ---------------------------------------------------------------------------
// Validation, ordering, shape inference
// ---------------------------------------------------------------------------

enum class StructuralErrorKind {
  DuplicateId,
  DanglingEdge,
  Cycle,
  ArityMismatch,
  MissingBlockTag,
  InvalidAttributes,
  WeightGroupMismatch,
  EmptyOutputs,
  DanglingOutput,
};

std::string to_string(StructuralErrorKind kind);

struct StructuralError {
  StructuralErrorKind kind;
  std::optional<NodeId> node;
  std::string message;
};

/// Every violated structural invariant. Empty means valid.
std::vector<StructuralError> validate(const Graph& graph);

/// Kahn order with ties broken by ascending id. Throws GraphError on a cycle
/// or dangling edge.
std::vector<NodeId> topo_order(const Graph& graph);

/// Output shape of a single op given its input shapes. Throws ShapeError.
TensorShape infer_node_shape(const OpKind& kind,
                             std::span<const TensorShape> inputs);

/// Shapes for every node. `input_shapes` overrides the shape stored in an
/// Input node's attributes when present.
ShapeMap infer_shapes(const Graph& graph, const ShapeMap& input_shapes = {});

/// floor((in + 2*padding - kernel) / stride) + 1, may be < 1.
Count window_output_extent(Count in, Count kernel, Count stride,
                           Count padding);

// ---------------------------------------------------------------------------
// Incremental construction
// ---------------------------------------------------------------------------

/// Appends nodes with sequential ids and infers each node's shape on insert,
/// so shape errors surface at the offending op.
class GraphBuilder {
 public:
  NodeId input(const TensorShape& shape);
  NodeId add(OpKind kind, std::vector<NodeId> inputs, BlockTag block,
             std::optional<WeightGroupId> group = std::nullopt);

  const TensorShape& shape(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  Graph build(std::vector<NodeId> outputs) &&;

 private:
  std::vector<Node> nodes_;
  std::vector<TensorShape> shapes_;
};

}  // namespace detflops
