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
#include "detflops/cli.h"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "detflops/charts.h"
#include "detflops/cost_model.h"
#include "detflops/error.h"
#include "detflops/presets.h"
#include "detflops/tradeoff.h"
#include "detflops/transforms.h"

namespace detflops::cli {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string gmacs_text(Count macs) {
  return fixed(static_cast<double>(macs) / 1e9, 3);
}

json read_json(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

struct ResolvedConfig {
  ModelConfig config;
  std::string label;
};

// A --config value is a JSON file path, or a preset name when no such file
// exists.
ResolvedConfig resolve_config(const std::string& value) {
  std::error_code ec;
  if (!std::filesystem::exists(value, ec)) {
    if (auto preset = find_preset(value)) {
      return {*preset, value};
    }
    std::string names;
    for (const Preset& p : presets()) names += " " + p.name;
    throw IoError("no config file or preset named '" + value +
                  "' (presets:" + names + ")");
  }
  ModelConfig c = config_from_json(read_json(value));
  validate_config(c);
  std::string label = preset_name(c).value_or(
      std::filesystem::path(value).stem().string());
  return {c, label};
}

void print_config(std::ostream& out, const ResolvedConfig& rc) {
  out << "config " << rc.label << ": " << config_to_json(rc.config).dump()
      << "\n";
}

CostOptions cost_options(bool elementwise, int macs_per_flop) {
  CostOptions o;
  o.count_elementwise = elementwise;
  o.macs_per_flop = macs_per_flop == 2 ? MacConvention::MacIsTwoFlops
                                       : MacConvention::MacIsOneFlop;
  return o;
}

void print_report(std::ostream& out, const CostReport& r) {
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-6s %16s %12s %9s\n", "block",
                "branch", "macs", "params", "fraction");
  out << line;
  for (const auto& [tag, cost] : r.per_block) {
    const std::string block =
        tag.is_head() ? "D" + std::to_string(tag.level) : to_string(tag);
    std::snprintf(line, sizeof line, "%-8s %-6s %16lld %12lld %9s\n",
                  block.c_str(),
                  tag.is_head() ? branch_short(tag.branch).c_str() : "-",
                  static_cast<long long>(cost.macs),
                  static_cast<long long>(cost.params),
                  fixed(r.block_fractions.at(tag), 6).c_str());
    out << line;
  }
  const Count d3 = level_macs(r, 3);
  out << "GMACs: " << gmacs_text(r.totals.macs) << "\n";
  out << "GFLOPs: " << gmacs_text(r.flops()) << " (" << r.options.flops_per_mac()
      << " FLOP/MAC)\n";
  out << "Params: " << r.totals.params << "\n";
  out << "D3 fraction: "
      << fixed(r.totals.macs ? static_cast<double>(d3) /
                                   static_cast<double>(r.totals.macs)
                             : 0.0,
               6)
      << "\n";
}

// ---------------------------------------------------------------------------

struct ProfileArgs {
  std::string config;
  std::string csv;
  std::string json_out;
  bool elementwise = false;
  int macs_per_flop = 1;
};

int do_profile(const ProfileArgs& a, std::ostream& out) {
  const ResolvedConfig rc = resolve_config(a.config);
  print_config(out, rc);
  const CostReport r =
      profile_config(rc.config, cost_options(a.elementwise, a.macs_per_flop));
  print_report(out, r);
  if (!a.csv.empty()) write_text_file(a.csv, report_to_csv(r));
  if (!a.json_out.empty()) {
    write_text_file(a.json_out, report_to_json(r).dump(2) + "\n");
  }
  return kOk;
}

struct TransformArgs {
  std::string config;
  std::string apply;
  std::string out;
};

int do_transform(const TransformArgs& a, std::ostream& out) {
  const ResolvedConfig rc = resolve_config(a.config);
  print_config(out, rc);
  const std::vector<Transform> chain = transforms_from_json(read_json(a.apply));
  const ModelConfig result = apply_all(rc.config, chain);
  for (const Transform& t : chain) {
    out << "applied " << transform_to_json(t).dump() << "\n";
  }
  out << "result: " << config_to_json(result).dump() << "\n";
  write_text_file(a.out, config_to_json(result).dump(2) + "\n");
  return kOk;
}

struct SweepArgs {
  std::string config;
  std::string suite;
  std::string csv;
  std::string json_out;
  bool elementwise = false;
  int macs_per_flop = 1;
};

int do_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const ResolvedConfig rc = resolve_config(a.config);
  print_config(out, rc);
  const Suite suite = a.suite.empty() ? Suite{} : suite_from_json(read_json(a.suite));
  const CostOptions opts = cost_options(a.elementwise, a.macs_per_flop);

  SweepResult result = sweep(rc.config, rc.label, suite.chains, opts);
  const auto scaled =
      input_scaling_baseline(rc.config, suite.input_scaling_sizes, opts);
  result.points.insert(result.points.end(), scaled.begin(), scaled.end());

  const TradeoffPoint& baseline = result.points.front();
  char line[200];
  std::snprintf(line, sizeof line, "%-24s %-13s %10s %9s %6s\n", "label",
                "family", "gmacs", "reduction", "mAP");
  out << line;
  for (const TradeoffPoint& p : result.points) {
    const std::string map =
        p.map_annotation ? fixed(p.map_annotation->value_percent, 1) : "-";
    std::snprintf(line, sizeof line, "%-24s %-13s %10s %9s %6s\n",
                  p.label.c_str(), to_string(p.family).c_str(),
                  fixed(p.gmacs, 3).c_str(),
                  fixed(reduction_factor(p, baseline), 3).c_str(),
                  map.c_str());
    out << line;
  }
  if (!a.csv.empty()) {
    write_text_file(a.csv, points_to_csv(result.points, baseline));
  }
  if (!a.json_out.empty()) {
    write_text_file(a.json_out, points_to_json(result.points).dump(2) + "\n");
  }
  for (const SweepFailure& f : result.failures) {
    err << "chain '" << f.label << "' failed: " << f.error << "\n";
  }
  return result.failures.empty() ? kOk : kConfig;
}

struct CompareArgs {
  std::string a;
  std::string b;
  bool all_presets = false;
};

void print_comparison(std::ostream& out, const std::string& label_b,
                      const CostReport& ra, const CostReport& rb) {
  const auto rows_a = summarize_blocks(ra);
  const auto rows_b = summarize_blocks(rb);
  char line[200];
  out << "== vs " << label_b << "\n";
  std::snprintf(line, sizeof line, "%-6s %12s %12s %12s %12s %12s %12s\n",
                "block", "gmacs_a", "gmacs_b", "d_gmacs", "params_a",
                "params_b", "d_params");
  out << line;
  for (std::size_t i = 0; i < rows_a.size() && i < rows_b.size(); ++i) {
    const Cost& ca = rows_a[i].cost;
    const Cost& cb = rows_b[i].cost;
    std::snprintf(line, sizeof line,
                  "%-6s %12s %12s %12s %12lld %12lld %12lld\n",
                  rows_a[i].label.c_str(), gmacs_text(ca.macs).c_str(),
                  gmacs_text(cb.macs).c_str(),
                  gmacs_text(cb.macs - ca.macs).c_str(),
                  static_cast<long long>(ca.params),
                  static_cast<long long>(cb.params),
                  static_cast<long long>(cb.params - ca.params));
    out << line;
  }
  const double overhead =
      static_cast<double>(rb.totals.params - ra.totals.params) /
      static_cast<double>(ra.totals.params);
  out << "total GMACs: " << gmacs_text(ra.totals.macs) << " -> "
      << gmacs_text(rb.totals.macs) << "\n";
  out << "reduction factor: "
      << fixed(static_cast<double>(ra.totals.macs) /
                   static_cast<double>(rb.totals.macs),
               4)
      << "\n";
  out << "total params: " << ra.totals.params << " -> " << rb.totals.params
      << "\n";
  out << "param_overhead: " << fixed(overhead * 100.0, 4) << "%\n";
}

int do_compare(const CompareArgs& a, std::ostream& out) {
  if (a.b.empty() && !a.all_presets) {
    throw CLI::ValidationError("compare needs --b or --all-presets");
  }
  const ResolvedConfig ra = resolve_config(a.a);
  print_config(out, ra);
  const CostReport rep_a = profile_config(ra.config);
  if (!a.b.empty()) {
    const ResolvedConfig rb = resolve_config(a.b);
    print_config(out, rb);
    print_comparison(out, rb.label, rep_a, profile_config(rb.config));
  }
  if (a.all_presets) {
    for (const Preset& p : presets()) {
      print_comparison(out, p.name, rep_a, profile_config(p.config));
    }
  }
  return kOk;
}

struct RenderArgs {
  std::string points;
  std::string report;
  std::string out;
};

int do_render(const RenderArgs& a, std::ostream& out) {
  if (a.points.empty() == a.report.empty()) {
    throw CLI::ValidationError("render needs exactly one of --points/--report");
  }
  if (!a.points.empty()) {
    const auto points = points_from_csv(read_text_file(a.points));
    emit_tradeoff_chart(points, a.out);
    out << "rendered " << points.size() << " points to " << a.out << "\n";
  } else {
    const CostReport r = report_from_json(read_json(a.report));
    emit_distribution_chart(r, a.out);
    out << "rendered " << r.per_block.size() << " blocks to " << a.out << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Static MAC/parameter analysis for RetinaNet-style detectors",
               "detflops"};
  app.require_subcommand(1);

  ProfileArgs pa;
  auto* profile = app.add_subcommand("profile", "Cost report for one config");
  profile->add_option("--config", pa.config, "Model config JSON or preset name")
      ->required();
  profile->add_option("--csv", pa.csv, "Write per-block CSV here");
  profile->add_option("--json", pa.json_out, "Write full JSON report here");
  profile->add_flag("--include-elementwise", pa.elementwise,
                    "Count BN/ReLU/Sigmoid/Add output elements as MACs");
  profile->add_option("--macs-per-flop", pa.macs_per_flop,
                      "FLOPs per MAC when reporting GFLOPs (1 or 2)")
      ->check(CLI::IsMember({1, 2}));

  TransformArgs ta;
  auto* transform =
      app.add_subcommand("transform", "Apply transforms to a config");
  transform->add_option("--config", ta.config, "Model config JSON or preset")
      ->required();
  transform->add_option("--apply", ta.apply, "Transform JSON (object or array)")
      ->required();
  transform->add_option("--out", ta.out, "Write resulting config here")
      ->required();

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cost a suite of variants");
  sweep_cmd->add_option("--config", sa.config, "Base config JSON or preset")
      ->required();
  sweep_cmd->add_option("--suite", sa.suite,
                        "Suite JSON with chains and input_scaling_sizes");
  sweep_cmd->add_option("--csv", sa.csv, "Write trade-off points CSV here");
  sweep_cmd->add_option("--json", sa.json_out, "Write trade-off points JSON here");
  sweep_cmd->add_flag("--include-elementwise", sa.elementwise,
                      "Count elementwise ops as MACs");
  sweep_cmd->add_option("--macs-per-flop", sa.macs_per_flop,
                        "FLOPs per MAC (1 or 2)")
      ->check(CLI::IsMember({1, 2}));

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Per-block deltas between configs");
  compare->add_option("--a", ca.a, "Reference config JSON or preset")->required();
  compare->add_option("--b", ca.b, "Config to compare against the reference");
  compare->add_flag("--all-presets", ca.all_presets,
                    "Also compare the reference against every preset");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render SVG charts");
  render->add_option("--points", ra.points, "Trade-off points CSV");
  render->add_option("--report", ra.report, "Cost report JSON");
  render->add_option("--out", ra.out, "Output SVG path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (profile->parsed()) return do_profile(pa, out);
    if (transform->parsed()) return do_transform(ta, out);
    if (sweep_cmd->parsed()) return do_sweep(sa, out, err);
    if (compare->parsed()) return do_compare(ca, out);
    if (render->parsed()) return do_render(ra, out);
    return kUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }
}

}  // namespace detflops::cli
