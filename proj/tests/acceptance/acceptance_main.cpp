// Acceptance checks. One PASS/FAIL line per criterion.
//
// Exit status is 0 when the failing criteria are exactly those named with
// --known-failure (none by default), 1 otherwise. A known failure that starts
// passing is also an error so the list cannot go stale.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "detflops/builders.h"
#include "detflops/charts.h"
#include "detflops/cli.h"
#include "detflops/cost_model.h"
#include "detflops/error.h"
#include "detflops/presets.h"
#include "detflops/tradeoff.h"
#include "detflops/transforms.h"
#include "loop_oracle.h"

namespace fs = std::filesystem;
using namespace detflops;

namespace {

std::set<int> g_failed;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL",
              detail.c_str());
  if (!ok) g_failed.insert(id);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

TradeoffPoint preset_point(const std::string& name) {
  return make_point(name, *find_preset(name), Family::Proposed);
}

double factor_of(const std::string& name) {
  return reduction_factor(preset_point(name), preset_point("baseline-800"));
}

void baseline_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int code =
      cli::run({"profile", "--config", "baseline-800"}, out, err);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  const double g = profile_config(*find_preset("baseline-800")).gmacs();
  const bool line_ok =
      out.str().find("GMACs: " + fmt("%.3f", g) + "\n") != std::string::npos;
  report(1, code == 0 && line_ok && g >= 140.0 && g <= 172.0 && secs < 1.0,
         "GMACs " + fmt("%.3f", g) + " in [140, 172], runtime " +
             fmt("%.3f", secs) + " s");
}

void bottleneck_share() {
  const CostReport r = profile_config(ModelConfig{});
  const double f = static_cast<double>(level_macs(r, 3)) /
                   static_cast<double>(r.totals.macs);
  report(2, f >= 0.42 && f <= 0.52, "D3 fraction " + fmt("%.4f", f) +
                                        " in [0.42, 0.52]");
}

void halving_identity() {
  const CostReport r = profile_config(ModelConfig{});
  const WhatIf w = what_if_scale_level(r, 3, 1, 2);
  const bool exact = 2 * (w.original_macs - w.scaled_macs) == w.level_macs;
  const double expected = static_cast<double>(w.level_macs) / 2.0 /
                          static_cast<double>(w.original_macs);
  const bool ok = exact && w.reduction == expected && w.reduction >= 0.21 &&
                  w.reduction <= 0.26;
  report(3, ok, "reduction " + fmt("%.4f", w.reduction) +
                    " == fraction/2, in [0.21, 0.26]");
}

void small_reduction() {
  const double f = factor_of("lw-v2-reg");
  report(4, f >= 1.10 && f <= 1.20,
         "lw-v2-reg factor " + fmt("%.4f", f) + " in [1.10, 1.20]");
}

void large_reduction() {
  std::string detail;
  bool any = false;
  for (const char* name : {"lw-v3-both", "lw-v3-both-pred"}) {
    const double f = factor_of(name);
    const double g = preset_point(name).gmacs;
    const bool ok = f >= 1.6 && f <= 1.9 && g >= 80.0 && g <= 97.0;
    any = any || ok;
    detail += std::string(name) + " factor " + fmt("%.4f", f) + " GMACs " +
              fmt("%.3f", g) + (ok ? " ok; " : " out; ");
  }
  report(5, any, detail + "need factor in [1.6, 1.9] and GMACs in [80, 97]");
}

void sharing_overhead() {
  const double o =
      param_overhead(*find_preset("baseline-800"), *find_preset("lw-v3-reg"));
  std::ostringstream out, err;
  const int code =
      cli::run({"compare", "--a", "baseline-800", "--all-presets"}, out, err);
  std::size_t listed = 0;
  const std::string text = out.str();
  for (auto pos = text.find("param_overhead: "); pos != std::string::npos;
       pos = text.find("param_overhead: ", pos + 1)) {
    ++listed;
  }
  report(6, o < 0.01 && code == 0 && listed == presets().size(),
         "lw-v3-reg overhead " + fmt("%.4f", o * 100.0) + "% < 1%, " +
             std::to_string(listed) + " presets in compare");
}

void oracle_equivalence() {
  std::mt19937_64 rng(20261019);
  auto pick = [&](Count lo, Count hi) {
    return std::uniform_int_distribution<Count>(lo, hi)(rng);
  };
  const Count kernels[] = {1, 3, 7};
  int cases = 0, mismatches = 0;
  while (cases < 2000) {
    ConvOp op;
    op.kernel_h = op.kernel_w = kernels[pick(0, 2)];
    op.stride = pick(1, 2);
    op.padding = pick(0, op.kernel_h / 2);
    op.in_channels = pick(1, 8);
    const bool depthwise = pick(0, 1) == 1;
    op.groups = depthwise ? op.in_channels : 1;
    op.out_channels = depthwise ? op.in_channels : pick(1, 8);
    op.has_bias = pick(0, 1) == 1;
    const TensorShape in{1, op.in_channels, pick(1, 16), pick(1, 16)};
    TensorShape out;
    try {
      const TensorShape ins[] = {in};
      out = infer_node_shape(op, ins);
    } catch (const ShapeError&) {
      continue;
    }
    const Node node{NodeId{1}, op, {NodeId{0}}, BlockTag{}, std::nullopt};
    if (op_macs(node, out) != testing::loop_count_oracle(op, in)) ++mismatches;
    ++cases;
  }
  report(7, mismatches == 0,
         std::to_string(cases) + " random convs, " +
             std::to_string(mismatches) + " mismatches");
}

void invariants() {
  int violations = 0;
  for (const Preset& p : presets()) {
    const CostReport r = profile_config(p.config);
    Count sum = 0;
    for (const auto& [tag, c] : r.per_block) sum += c.macs;
    if (sum != r.totals.macs) ++violations;

    // Per-node params summed without dedup over-count shared heads.
    Count naive = 0;
    for (const auto& [id, c] : r.per_node) naive += c.params;
    if (naive <= r.totals.params) ++violations;

    for (SharingScheme s :
         {SharingScheme::FullyShared, SharingScheme::PartialD3Independent}) {
      ModelConfig c;
      try {
        c = apply(p.config, SetSharing{s});
      } catch (const ConfigError&) {
        continue;  // mixed variants cannot be fully shared
      }
      if (profile_config(c).totals.macs != r.totals.macs) ++violations;
    }
  }
  const ModelConfig base = *find_preset("baseline-800");
  const bool params_change =
      profile_config(apply(base, SetSharing{SharingScheme::PartialD3Independent}))
          .totals.params != profile_config(base).totals.params;
  report(8, violations == 0 && params_change,
         std::to_string(presets().size()) + " presets, " +
             std::to_string(violations) + " violations");
}

void input_scaling() {
  const auto pts =
      input_scaling_baseline(ModelConfig{}, {800, 700, 600, 500, 400});
  bool decreasing = true;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    decreasing = decreasing && pts[i].gmacs < pts[i - 1].gmacs;
  }
  const TradeoffPoint base = preset_point("baseline-800");
  const double ratio = pts.back().gmacs / base.gmacs;
  const bool exact = pts.front().macs == base.macs &&
                     pts.front().gmacs == base.gmacs;
  report(9, decreasing && exact && ratio >= 0.22 && ratio <= 0.35,
         "strictly decreasing, 400/800 ratio " + fmt("%.4f", ratio) +
             ", 800 bit-exact " + (exact ? "yes" : "no"));
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() /
                       ("detflops-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_text_file((dir / "suite.json").string(), R"({
    "chains": [
      {"label": "v3-both-pred", "transforms": [
        {"type": "SubstituteHead", "variant": "V3", "levels": [3],
         "predictor_policy": "ReplacePredictorToo"}]},
      {"label": "v2-reg", "transforms": [
        {"type": "SubstituteHead", "variant": "V2",
         "branches": ["Regression"], "levels": [3]}]}],
    "input_scaling_sizes": [800, 700, 600, 500, 400]})");
  write_text_file((dir / "t.json").string(),
                  R"({"type": "SubstituteHead", "variant": "V1"})");

  std::vector<std::string> outputs;
  int failures = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const std::string p = (dir / ("run" + std::to_string(pass))).string();
    const std::vector<std::vector<std::string>> cmds = {
        {"profile", "--config", "baseline-800", "--csv", p + ".profile.csv",
         "--json", p + ".profile.json"},
        {"transform", "--config", "baseline-800", "--apply",
         (dir / "t.json").string(), "--out", p + ".transform.json"},
        {"sweep", "--config", "baseline-800", "--suite",
         (dir / "suite.json").string(), "--csv", p + ".sweep.csv", "--json",
         p + ".sweep.json"},
        {"compare", "--a", "baseline-800", "--all-presets"},
        {"render", "--points", p + ".sweep.csv", "--out", p + ".tradeoff.svg"},
        {"render", "--report", p + ".profile.json", "--out",
         p + ".dist.svg"},
    };
    std::string stdout_all;
    for (const auto& c : cmds) {
      std::ostringstream out, err;
      if (cli::run(c, out, err) != 0) ++failures;
      stdout_all += out.str();
    }
    // render echoes its output path; drop the per-run directory name.
    for (auto pos = stdout_all.find(p); pos != std::string::npos;
         pos = stdout_all.find(p, pos)) {
      stdout_all.replace(pos, p.size(), "<run>");
    }
    outputs.push_back(stdout_all);
  }
  std::size_t compared = 1;
  bool same = outputs[0] == outputs[1];
  for (const char* ext :
       {".profile.csv", ".profile.json", ".transform.json", ".sweep.csv",
        ".sweep.json", ".tradeoff.svg", ".dist.svg"}) {
    same = same && read_text_file((dir / ("run0" + std::string(ext))).string()) ==
                       read_text_file((dir / ("run1" + std::string(ext))).string());
    ++compared;
  }
  fs::remove_all(dir);
  report(10, same && failures == 0,
         std::to_string(compared) + " artifacts compared across two runs, " +
             (same ? "identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--known-failure") {
      known.insert(std::stoi(argv[i + 1]));
    }
  }

  const std::pair<int, void (*)()> checks[] = {
      {1, baseline_calibration}, {2, bottleneck_share}, {3, halving_identity},
      {4, small_reduction},      {5, large_reduction},  {6, sharing_overhead},
      {7, oracle_equivalence},   {8, invariants},       {9, input_scaling},
      {10, determinism},
  };
  for (const auto& [id, fn] : checks) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  }
  std::string listed;
  for (int id : known) listed += " " + std::to_string(id);
  std::printf("%zu of %zu criteria failed; known failures:%s\n",
              g_failed.size(), std::size(checks),
              listed.empty() ? " none" : listed.c_str());
  return g_failed == known ? 0 : 1;
}
