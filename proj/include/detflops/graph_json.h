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

#include <nlohmann/json.hpp>

#include "detflops/graph.h"

namespace detflops {

/// {"nodes":[{"id","kind","attrs","inputs","block","weight_group"}],
///  "outputs":[...]}
nlohmann::json graph_to_json(const Graph& graph);

/// Throws GraphError for unknown op kinds ("UnknownOpKind") and malformed
/// documents. The result is not validated.
Graph graph_from_json(const nlohmann::json& doc);

nlohmann::json shape_to_json(const TensorShape& s);
TensorShape shape_from_json(const nlohmann::json& j);

}  // namespace detflops
