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
#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <sstream>

#include "detflops/charts.h"
#include "detflops/cli.h"
#include "detflops/cost_model.h"
#include "detflops/error.h"
#include "detflops/presets.h"
#include "detflops/tradeoff.h"
#include "detflops/transforms.h"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace detflops;

namespace {

// Python objects cross the boundary as JSON text so the C++ parsers keep
// sole ownership of validation.
nlohmann::json to_json(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return nlohmann::json::parse(obj.cast<std::string>());
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

CostOptions options(bool include_elementwise, int macs_per_flop) {
  if (macs_per_flop != 1 && macs_per_flop != 2) {
    throw ConfigError("macs_per_flop must be 1 or 2");
  }
  CostOptions o;
  o.count_elementwise = include_elementwise;
  o.macs_per_flop = macs_per_flop == 2 ? MacConvention::MacIsTwoFlops
                                       : MacConvention::MacIsOneFlop;
  return o;
}

ModelConfig resolve(const py::object& config) {
  if (py::isinstance<ModelConfig>(config)) return config.cast<ModelConfig>();
  if (py::isinstance<py::str>(config)) {
    if (auto p = find_preset(config.cast<std::string>())) return *p;
    throw ConfigError("unknown preset '" + config.cast<std::string>() + "'");
  }
  ModelConfig c = config_from_json(to_json(config));
  validate_config(c);
  return c;
}

std::vector<Transform> transforms(const py::object& chain) {
  return transforms_from_json(to_json(chain));
}

py::dict point_dict(const TradeoffPoint& p) {
  py::object map = py::none();
  if (p.map_annotation) {
    map = py::dict("value_percent"_a = p.map_annotation->value_percent,
                   "source"_a = p.map_annotation->source);
  }
  return py::dict("label"_a = p.label, "macs"_a = p.macs, "gmacs"_a = p.gmacs,
                  "family"_a = to_string(p.family), "map"_a = map);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Static MAC and parameter analysis for RetinaNet-style detectors";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<HeadVariant>(m, "HeadVariant")
      .value("Original", HeadVariant::Original)
      .value("V1", HeadVariant::V1)
      .value("V2", HeadVariant::V2)
      .value("V3", HeadVariant::V3);
  py::enum_<SharingScheme>(m, "SharingScheme")
      .value("FullyShared", SharingScheme::FullyShared)
      .value("PartialD3Independent", SharingScheme::PartialD3Independent);
  py::enum_<PredictorPolicy>(m, "PredictorPolicy")
      .value("KeepPredictor3x3", PredictorPolicy::KeepPredictor3x3)
      .value("ReplacePredictorToo", PredictorPolicy::ReplacePredictorToo);
  py::enum_<Branch>(m, "Branch")
      .value("Classification", Branch::Classification)
      .value("Regression", Branch::Regression);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("input_size", &ModelConfig::input_size)
      .def_readwrite("num_classes", &ModelConfig::num_classes)
      .def_readwrite("anchors_per_location", &ModelConfig::anchors_per_location)
      .def_readwrite("head_channels", &ModelConfig::head_channels)
      .def_readwrite("head_depth", &ModelConfig::head_depth)
      .def_readwrite("fpn_channels", &ModelConfig::fpn_channels)
      .def_readwrite("variant_cls", &ModelConfig::variant_cls)
      .def_readwrite("variant_reg", &ModelConfig::variant_reg)
      .def_readwrite("lw_levels", &ModelConfig::lw_levels)
      .def_readwrite("sharing", &ModelConfig::sharing)
      .def_readwrite("independent_branches", &ModelConfig::independent_branches)
      .def_readwrite("predictor_policy", &ModelConfig::predictor_policy)
      .def("validate", &validate_config)
      .def("to_dict", [](const ModelConfig& c) { return to_python(config_to_json(c)); })
      .def_static("from_dict", [](const py::object& d) {
        return config_from_json(to_json(d));
      })
      .def(py::self == py::self)
      .def("__repr__", [](const ModelConfig& c) {
        return "ModelConfig(" + config_to_json(c).dump() + ")";
      });

  m.def("preset_names", [] {
    std::vector<std::string> names;
    for (const Preset& p : presets()) names.push_back(p.name);
    return names;
  });
  m.def("preset", [](const std::string& name) {
    if (auto p = find_preset(name)) return *p;
    throw ConfigError("unknown preset '" + name + "'");
  }, "name"_a);

  m.def("profile", [](const py::object& config, bool include_elementwise,
                      int macs_per_flop) {
    const CostReport r = profile_config(
        resolve(config), options(include_elementwise, macs_per_flop));
    return to_python(report_to_json(r));
  }, "Cost report of a config (ModelConfig, preset name or dict) as a dict.",
        "config"_a, "include_elementwise"_a = false, "macs_per_flop"_a = 1);

  m.def("profile_csv", [](const py::object& config) {
    return report_to_csv(profile_config(resolve(config)));
  }, "config"_a);

  m.def("apply", [](const py::object& config, const py::object& chain) {
    return apply_all(resolve(config), transforms(chain));
  }, "Apply one transform dict or a list of them.", "config"_a, "transforms"_a);

  m.def("param_overhead", [](const py::object& before, const py::object& after) {
    return param_overhead(resolve(before), resolve(after));
  }, "before"_a, "after"_a);

  m.def("sweep", [](const py::object& base, const std::string& base_label,
                    const py::dict& chains, const std::vector<Count>& sizes) {
    std::vector<NamedChain> named;
    for (const auto& [label, chain] : chains) {
      named.push_back({label.cast<std::string>(),
                       transforms(py::reinterpret_borrow<py::object>(chain))});
    }
    const ModelConfig cfg = resolve(base);
    SweepResult r;
    {
      py::gil_scoped_release release;
      r = sweep(cfg, base_label, named);
      const auto scaled = input_scaling_baseline(cfg, sizes);
      r.points.insert(r.points.end(), scaled.begin(), scaled.end());
    }
    py::list points;
    for (const TradeoffPoint& p : r.points) points.append(point_dict(p));
    py::dict failures;
    for (const SweepFailure& f : r.failures) failures[py::str(f.label)] = f.error;
    return py::make_tuple(points, failures);
  }, "Trade-off points for a base config, named transform chains and input "
     "sizes. Returns (points, failures).",
        "base"_a, "base_label"_a = "base", "chains"_a = py::dict(),
        "input_sizes"_a = std::vector<Count>{});

  m.def("distribution_chart_svg", [](const py::object& config) {
    return distribution_chart_svg(profile_config(resolve(config)));
  }, "config"_a);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, "Run the command-line tool in-process. Returns (exit_code, stdout, stderr).",
        "args"_a);
}
