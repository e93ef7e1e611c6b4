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

#include <nlohmann/json.hpp>

#include "detflops/cost_model.h"
#include "detflops/model_config.h"
#include "detflops/transforms.h"

namespace detflops {

enum class Family { Proposed, InputScaling };

std::string to_string(Family f);
Family parse_family(const std::string& s);

/// Accuracy is never computed here; it is only ever copied from the
/// AnnotationTable together with its source.
struct MapAnnotation {
  double value_percent = 0.0;
  std::string source;
  friend bool operator==(const MapAnnotation&, const MapAnnotation&) = default;
};

struct TradeoffPoint {
  std::string label;
  Count macs = 0;
  double gmacs = 0.0;
  std::optional<MapAnnotation> map_annotation;
  Family family = Family::Proposed;
  friend bool operator==(const TradeoffPoint&, const TradeoffPoint&) = default;
};

/// One reported accuracy. Either absolute (`relative_to` empty) or a delta
/// against another entry's resolved value.
struct AnnotationEntry {
  std::string preset;
  std::optional<std::string> relative_to;
  double value_percent = 0.0;
  std::string source;
};

class AnnotationTable {
 public:
  explicit AnnotationTable(std::vector<AnnotationEntry> entries);

  /// The reported COCO test-dev values this tool ships with.
  static const AnnotationTable& reported();

  std::span<const AnnotationEntry> entries() const { return entries_; }

  /// Annotation for a config equal to one of the annotated presets, provided
  /// its value resolves to an absolute number.
  std::optional<MapAnnotation> lookup(const ModelConfig& config) const;
  std::optional<MapAnnotation> lookup(const std::string& preset) const;

 private:
  std::vector<AnnotationEntry> entries_;
};

struct NamedChain {
  std::string label;
  std::vector<Transform> transforms;
};

struct SweepFailure {
  std::string label;
  std::string error;
};

struct SweepResult {
  std::vector<TradeoffPoint> points;
  std::vector<SweepFailure> failures;
};

TradeoffPoint make_point(const std::string& label, const ModelConfig& config,
                         Family family, const CostOptions& opts = {},
                         const AnnotationTable& table =
                             AnnotationTable::reported());

/// Base point first, then one point per chain in input order. Chains are
/// costed concurrently; a chain that fails to build is reported in
/// `failures` and skipped.
SweepResult sweep(const ModelConfig& base, const std::string& base_label,
                  const std::vector<NamedChain>& chains,
                  const CostOptions& opts = {});

/// One InputScaling point per size, labelled "input-<size>". Throws
/// ConfigError for sizes below the minimum input size.
std::vector<TradeoffPoint> input_scaling_baseline(
    const ModelConfig& base, const std::vector<Count>& sizes,
    const CostOptions& opts = {});

/// baseline.gmacs / point.gmacs. Throws Error on zero gmacs.
double reduction_factor(const TradeoffPoint& point,
                        const TradeoffPoint& baseline);

/// Outcome of scaling the MACs of both head branches at one level by
/// numerator/denominator while leaving the rest of the network alone.
struct WhatIf {
  Count original_macs = 0;
  Count level_macs = 0;
  Count scaled_macs = 0;
  /// (original - scaled) / original
  double reduction = 0.0;
};

WhatIf what_if_scale_level(const CostReport& report, int level,
                           Count numerator, Count denominator);

/// Suite file: {"chains":[{"label","transforms":[...]}],
///              "input_scaling_sizes":[...]}
struct Suite {
  std::vector<NamedChain> chains;
  std::vector<Count> input_scaling_sizes;
};

Suite suite_from_json(const nlohmann::json& doc);

/// label,family,gmacs,reduction_factor_vs_baseline,map_percent,map_source
/// gmacs is written in shortest round-trip form so it re-reads exactly.
std::string points_to_csv(const std::vector<TradeoffPoint>& points,
                          const TradeoffPoint& baseline);
std::vector<TradeoffPoint> points_from_csv(const std::string& text);

nlohmann::json points_to_json(const std::vector<TradeoffPoint>& points);
std::vector<TradeoffPoint> points_from_json(const nlohmann::json& doc);

}  // namespace detflops
