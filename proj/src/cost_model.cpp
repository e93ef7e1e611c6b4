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
#include "detflops/cost_model.h"

#include <cstdio>
#include <set>
#include <sstream>

#include "detflops/error.h"

namespace detflops {

using nlohmann::json;

namespace {

bool is_elementwise(const OpKind& kind) {
  return std::holds_alternative<BatchNormOp>(kind) ||
         std::holds_alternative<ReluOp>(kind) ||
         std::holds_alternative<SigmoidOp>(kind) ||
         std::holds_alternative<AddOp>(kind);
}

std::string format_fraction(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", f);
  return buf;
}

}  // namespace

Count op_macs(const Node& node, const TensorShape& out,
              const CostOptions& opts) {
  if (const auto* c = std::get_if<ConvOp>(&node.kind)) {
    return out.n * out.h * out.w * out.c * (c->in_channels / c->groups) *
           c->kernel_h * c->kernel_w;
  }
  if (opts.count_elementwise && is_elementwise(node.kind)) {
    return out.elements();
  }
  return 0;
}

Count op_params(const Node& node) {
  if (const auto* c = std::get_if<ConvOp>(&node.kind)) {
    return c->out_channels * (c->in_channels / c->groups) * c->kernel_h *
               c->kernel_w +
           (c->has_bias ? c->out_channels : 0);
  }
  if (const auto* bn = std::get_if<BatchNormOp>(&node.kind)) {
    return 2 * bn->channels;
  }
  return 0;
}

CostReport cost_report(const Graph& graph, const ShapeMap& input_shapes,
                       const CostOptions& opts) {
  if (auto errors = validate(graph); !errors.empty()) {
    throw GraphError(to_string(errors.front().kind) + ": " +
                     errors.front().message);
  }
  const ShapeMap shapes = infer_shapes(graph, input_shapes);

  CostReport report;
  report.options = opts;
  std::set<WeightGroupId> counted_groups;
  std::map<BlockTag, std::set<WeightGroupId>> block_groups;

  for (const Node& n : graph.nodes()) {
    auto shape = shapes.find(n.id);
    if (shape == shapes.end()) {
      throw ShapeError("no shape for node " + std::to_string(raw(n.id)));
    }
    const Cost cost{op_macs(n, shape->second, opts), op_params(n)};
    report.per_node.emplace(n.id, cost);
    report.totals.macs += cost.macs;

    const bool first_use =
        !n.weight_group || counted_groups.insert(*n.weight_group).second;
    if (first_use) report.totals.params += cost.params;

    if (!n.block) continue;  // Input nodes carry no cost
    Cost& block = report.per_block[*n.block];
    block.macs += cost.macs;
    if (!n.weight_group || block_groups[*n.block].insert(*n.weight_group).second) {
      block.params += cost.params;
    }
  }

  for (const auto& [tag, cost] : report.per_block) {
    report.block_fractions[tag] =
        report.totals.macs == 0 ? 0.0
                                : static_cast<double>(cost.macs) /
                                      static_cast<double>(report.totals.macs);
  }
  return report;
}

Count level_macs(const CostReport& report, int level) {
  Count total = 0;
  for (Branch b : {Branch::Classification, Branch::Regression}) {
    auto it = report.per_block.find(BlockTag::head(level, b));
    if (it != report.per_block.end()) total += it->second.macs;
  }
  return total;
}

std::vector<BlockSummary> summarize_blocks(const CostReport& report) {
  std::vector<BlockSummary> rows;
  for (const auto& [tag, cost] : report.per_block) {
    const std::string label =
        tag.is_head() ? "D" + std::to_string(tag.level) : to_string(tag);
    if (rows.empty() || rows.back().label != label) {
      rows.push_back({label, {}, 0.0});
    }
    rows.back().cost.macs += cost.macs;
    rows.back().cost.params += cost.params;
  }
  for (BlockSummary& row : rows) {
    row.mac_fraction =
        report.totals.macs == 0
            ? 0.0
            : static_cast<double>(row.cost.macs) /
                  static_cast<double>(report.totals.macs);
  }
  return rows;
}

json report_to_json(const CostReport& r) {
  json per_node = json::array();
  for (const auto& [id, cost] : r.per_node) {
    per_node.push_back(
        {{"id", raw(id)}, {"macs", cost.macs}, {"params", cost.params}});
  }
  json per_block = json::array();
  json fractions = json::object();
  for (const auto& [tag, cost] : r.per_block) {
    per_block.push_back({{"block", to_string(tag)},
                         {"macs", cost.macs},
                         {"params", cost.params}});
  }
  for (const auto& [tag, f] : r.block_fractions) fractions[to_string(tag)] = f;
  return json{
      {"per_node", std::move(per_node)},
      {"per_block", std::move(per_block)},
      {"totals",
       {{"macs", r.totals.macs},
        {"params", r.totals.params},
        {"flops", r.flops()}}},
      {"block_fractions", std::move(fractions)},
      {"options",
       {{"count_elementwise", r.options.count_elementwise},
        {"macs_per_flop", r.options.flops_per_mac()}}},
  };
}

CostReport report_from_json(const json& doc) {
  try {
    CostReport r;
    for (const json& j : doc.at("per_node")) {
      r.per_node.emplace(NodeId{j.at("id").get<std::uint32_t>()},
                         Cost{j.at("macs").get<Count>(),
                              j.at("params").get<Count>()});
    }
    for (const json& j : doc.at("per_block")) {
      r.per_block.emplace(parse_block_tag(j.at("block").get<std::string>()),
                          Cost{j.at("macs").get<Count>(),
                               j.at("params").get<Count>()});
    }
    r.totals = {doc.at("totals").at("macs").get<Count>(),
                doc.at("totals").at("params").get<Count>()};
    for (const auto& [key, value] : doc.at("block_fractions").items()) {
      r.block_fractions.emplace(parse_block_tag(key), value.get<double>());
    }
    if (doc.contains("options")) {
      const json& o = doc.at("options");
      r.options.count_elementwise = o.at("count_elementwise").get<bool>();
      r.options.macs_per_flop = o.at("macs_per_flop").get<int>() == 2
                                    ? MacConvention::MacIsTwoFlops
                                    : MacConvention::MacIsOneFlop;
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed cost report: ") + e.what());
  }
}

std::string report_to_csv(const CostReport& r) {
  std::ostringstream os;
  os << "block,branch,macs,params,fraction\n";
  for (const auto& [tag, cost] : r.per_block) {
    const std::string block =
        tag.is_head() ? "D" + std::to_string(tag.level) : to_string(tag);
    const std::string branch = tag.is_head() ? branch_short(tag.branch) : "";
    os << block << ',' << branch << ',' << cost.macs << ',' << cost.params
       << ',' << format_fraction(r.block_fractions.at(tag)) << '\n';
  }
  return os.str();
}

}  // namespace detflops
