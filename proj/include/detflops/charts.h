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

#include <string>
#include <vector>

#include "detflops/cost_model.h"
#include "detflops/tradeoff.h"

namespace detflops {

inline constexpr int kChartWidth = 960;
inline constexpr int kChartHeight = 540;

/// Grouped bars, one (MACs %, params %) pair per coarse block in the order
/// Stem, Res2..Res5, FPN, D3..D7. Throws Error on an empty report.
std::string distribution_chart_svg(const CostReport& report);

/// GMACs on x, annotated mAP on y. Unannotated points go on a rug strip under
/// the plot; families with two or more annotated points get a polyline. The
/// points are embedded as JSON metadata so the chart can be read back.
/// Throws Error when `points` is empty.
std::string tradeoff_chart_svg(const std::vector<TradeoffPoint>& points);

/// Points embedded by tradeoff_chart_svg.
std::vector<TradeoffPoint> points_from_svg(const std::string& svg);

void emit_distribution_chart(const CostReport& report, const std::string& path);
void emit_tradeoff_chart(const std::vector<TradeoffPoint>& points,
                         const std::string& path);

/// Writes `content` to `path`, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& content);
/// Throws IoError when the file cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace detflops
