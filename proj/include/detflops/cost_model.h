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

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detflops/graph.h"

namespace detflops {

enum class MacConvention { MacIsOneFlop, MacIsTwoFlops };

struct CostOptions {
  /// Count one MAC per output element of BatchNorm/ReLU/Sigmoid/Add.
  bool count_elementwise = false;
  MacConvention macs_per_flop = MacConvention::MacIsOneFlop;

  Count flops_per_mac() const {
    return macs_per_flop == MacConvention::MacIsTwoFlops ? 2 : 1;
  }
  friend bool operator==(const CostOptions&, const CostOptions&) = default;
};

struct Cost {
  Count macs = 0;
  Count params = 0;
  friend bool operator==(const Cost&, const Cost&) = default;
};

/// Per-node, per-block and total costs of one graph.
///
/// per_block params attribute a shared weight group to every block that uses
/// it; totals count each group once. Both views are kept because the block
/// view answers "what does D4 need resident" while the total answers "how
/// large is the checkpoint".
struct CostReport {
  std::map<NodeId, Cost> per_node;
  std::map<BlockTag, Cost> per_block;
  Cost totals;
  std::map<BlockTag, double> block_fractions;
  CostOptions options;

  Count flops() const { return totals.macs * options.flops_per_mac(); }
  double gmacs() const { return static_cast<double>(totals.macs) / 1e9; }
  friend bool operator==(const CostReport&, const CostReport&) = default;
};

/// Multiply-accumulates of one op producing `out`.
/// Conv: out_h * out_w * out_c * (in_c / groups) * kernel_h * kernel_w.
/// MaxPool, NearestUpsample and Input cost nothing.
Count op_macs(const Node& node, const TensorShape& out,
              const CostOptions& opts = {});

/// Conv: out_c * (in_c / groups) * kh * kw (+ out_c bias). BatchNorm:
/// 2 * channels. Everything else: 0.
Count op_params(const Node& node);

/// Throws GraphError if the graph is invalid, ShapeError from inference.
CostReport cost_report(const Graph& graph, const ShapeMap& input_shapes = {},
                       const CostOptions& opts = {});

/// One row of the coarse block view: Stem, Res2..Res5, FPN, D3..D7 with the
/// two head branches merged.
struct BlockSummary {
  std::string label;
  Cost cost;
  double mac_fraction = 0.0;
};

std::vector<BlockSummary> summarize_blocks(const CostReport& report);

/// MACs of both branches at pyramid `level`.
Count level_macs(const CostReport& report, int level);

nlohmann::json report_to_json(const CostReport& report);
/// Inverse of report_to_json. per_node entries are restored as well.
CostReport report_from_json(const nlohmann::json& doc);

/// CSV with header "block,branch,macs,params,fraction", one row per block tag.
std::string report_to_csv(const CostReport& report);

}  // namespace detflops
