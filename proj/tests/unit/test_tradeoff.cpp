#include <map>
#include <regex>

#include "detflops/charts.h"
#include "detflops/error.h"
#include "detflops/presets.h"
#include "detflops/tradeoff.h"
#include "doctest.h"

using namespace detflops;

namespace {

std::vector<Transform> preset_chain(const std::string& name) {
  const ModelConfig c = *find_preset(name);
  SubstituteHead s;
  s.branches.clear();
  if (c.variant_cls != HeadVariant::Original) s.branches.insert(Branch::Classification);
  if (c.variant_reg != HeadVariant::Original) s.branches.insert(Branch::Regression);
  s.variant = c.variant_reg;
  s.levels = c.lw_levels;
  s.predictor_policy = c.predictor_policy;
  return {s};
}

// block label -> bar value for one series of the distribution chart
std::map<std::string, double> bars(const std::string& svg,
                                   const std::string& series) {
  std::map<std::string, double> out;
  const std::regex re("<rect class=\"" + series +
                      "\" data-block=\"([^\"]+)\" data-value=\"([0-9.]+)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re);
       it != std::sregex_iterator(); ++it) {
    out[(*it)[1]] = std::stod((*it)[2]);
  }
  return out;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

TradeoffPoint point(std::string label, double gmacs, Family fam,
                    std::optional<double> map = std::nullopt) {
  TradeoffPoint p;
  p.label = std::move(label);
  p.gmacs = gmacs;
  p.macs = static_cast<Count>(gmacs * 1e9);
  p.family = fam;
  if (map) p.map_annotation = MapAnnotation{*map, "test"};
  return p;
}

}  // namespace

TEST_CASE("sweep of the base alone") {
  const SweepResult r = sweep(ModelConfig{}, "baseline-800", {});
  REQUIRE(r.points.size() == 1);
  CHECK(r.failures.empty());
  CHECK(r.points[0].gmacs >= 140.0);
  CHECK(r.points[0].gmacs <= 172.0);
  CHECK(r.points[0].family == Family::Proposed);
}

TEST_CASE("sweep keeps input order and isolates failures") {
  const std::vector<NamedChain> chains = {
      {"lw-v3-both-pred", preset_chain("lw-v3-both-pred")},
      {"broken", {ScaleInput{64}}},
      {"lw-v2-reg", preset_chain("lw-v2-reg")},
  };
  const SweepResult r = sweep(ModelConfig{}, "baseline-800", chains);
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[1].label == "lw-v3-both-pred");
  CHECK(r.points[2].label == "lw-v2-reg");
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].label == "broken");

  CHECK(r.points[1].gmacs >= 80.0);
  CHECK(r.points[1].gmacs <= 97.0);
  // Exact totals from the cost model; see test_cost_model for the
  // independent layer enumeration of the baseline.
  CHECK(r.points[0].macs == 146'245'594'112LL);
  CHECK(r.points[1].macs == 146'245'594'112LL - 57'425'920'000LL);
  CHECK(r.points[2].macs == 146'245'594'112LL - 10'485'760'000LL);

  const double f = reduction_factor(r.points[1], r.points[0]);
  CHECK(f >= 1.6);
  CHECK(f <= 1.9);
  CHECK(reduction_factor(r.points[0], r.points[0]) == 1.0);

  CHECK(r.points == sweep(ModelConfig{}, "baseline-800", chains).points);
}

TEST_CASE("reduction factor needs non-zero GMACs") {
  CHECK_THROWS_AS(reduction_factor(point("z", 0.0, Family::Proposed),
                                   point("b", 1.0, Family::Proposed)),
                  Error);
}

TEST_CASE("input scaling baseline") {
  const auto pts =
      input_scaling_baseline(ModelConfig{}, {800, 700, 600, 500, 400});
  REQUIRE(pts.size() == 5);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].gmacs < pts[i - 1].gmacs);
    CHECK(pts[i].family == Family::InputScaling);
  }
  const TradeoffPoint base =
      make_point("baseline-800", ModelConfig{}, Family::Proposed);
  CHECK(pts[0].macs == base.macs);
  CHECK(pts[0].gmacs == base.gmacs);
  const double ratio = pts[4].gmacs / base.gmacs;
  CHECK(ratio >= 0.22);
  CHECK(ratio <= 0.35);
  CHECK(pts[4].label == "input-400");
  CHECK_THROWS_AS(input_scaling_baseline(ModelConfig{}, {100}), ConfigError);
}

TEST_CASE("annotations only come from the table") {
  const AnnotationTable& t = AnnotationTable::reported();
  for (const AnnotationEntry& e : t.entries()) CHECK_FALSE(e.source.empty());

  const auto base = t.lookup(ModelConfig{});
  REQUIRE(base);
  CHECK(base->value_percent == 35.7);
  const auto v2 = t.lookup("lw-v2-reg");
  REQUIRE(v2);
  CHECK(v2->value_percent == doctest::Approx(35.6));
  CHECK_FALSE(t.lookup("lw-v3-reg"));
  CHECK_FALSE(t.lookup("lw-v1-reg"));  // relative to an unreported value
  CHECK_FALSE(t.lookup("lw-v3-both-pred"));

  const auto scaled = input_scaling_baseline(ModelConfig{}, {800, 400});
  CHECK(scaled[0].map_annotation == base);
  CHECK_FALSE(scaled[1].map_annotation);
}

TEST_CASE("what-if halving D3") {
  const CostReport r = profile_config(ModelConfig{});
  const WhatIf w = what_if_scale_level(r, 3, 1, 2);
  const double fraction = static_cast<double>(w.level_macs) /
                          static_cast<double>(w.original_macs);
  CHECK(w.original_macs - w.scaled_macs == w.level_macs / 2);
  CHECK(w.reduction == doctest::Approx(fraction / 2).epsilon(1e-15));
  CHECK(w.reduction >= 0.21);
  CHECK(w.reduction <= 0.26);
}

TEST_CASE("points CSV and JSON round trip") {
  std::vector<TradeoffPoint> pts = sweep(ModelConfig{}, "baseline-800",
                                         {{"v3, both \"pred\"",
                                           preset_chain("lw-v3-both-pred")}})
                                       .points;
  const auto scaled = input_scaling_baseline(ModelConfig{}, {800, 512});
  pts.insert(pts.end(), scaled.begin(), scaled.end());

  const std::string csv = points_to_csv(pts, pts[0]);
  CHECK(csv.rfind("label,family,gmacs,reduction_factor_vs_baseline,map_percent,"
                  "map_source\n",
                  0) == 0);
  const auto back = points_from_csv(csv);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].label == pts[i].label);
    CHECK(back[i].gmacs == pts[i].gmacs);
    CHECK(back[i].macs == pts[i].macs);
    CHECK(back[i].family == pts[i].family);
    CHECK(back[i].map_annotation == pts[i].map_annotation);
  }
  CHECK(points_from_json(points_to_json(pts)) == pts);
  CHECK_THROWS_AS(points_from_csv("a,b\n"), ConfigError);
}

TEST_CASE("suite JSON") {
  const auto doc = nlohmann::json::parse(R"({
    "chains": [{"label": "v3", "transforms": [
      {"type": "SubstituteHead", "variant": "V3", "branches": ["Regression"],
       "levels": [3]}]}],
    "input_scaling_sizes": [800, 400]})");
  const Suite s = suite_from_json(doc);
  REQUIRE(s.chains.size() == 1);
  CHECK(s.chains[0].label == "v3");
  CHECK(s.input_scaling_sizes == std::vector<Count>{800, 400});
  CHECK(suite_from_json(nlohmann::json::object()).chains.empty());
}

TEST_CASE("distribution chart") {
  const CostReport r = profile_config(ModelConfig{});
  const std::string svg = distribution_chart_svg(r);
  CHECK(svg.find("width=\"960\" height=\"540\"") != std::string::npos);
  CHECK(svg == distribution_chart_svg(r));

  const auto macs = bars(svg, "macs");
  const auto params = bars(svg, "params");
  REQUIRE(macs.size() == 11);
  std::string tallest;
  for (const auto& [k, v] : macs) {
    if (tallest.empty() || v > macs.at(tallest)) tallest = k;
  }
  CHECK(tallest == "D3");
  std::string heaviest;
  for (const auto& [k, v] : params) {
    if (heaviest.empty() || v > params.at(heaviest)) heaviest = k;
  }
  CHECK(heaviest.rfind("Res", 0) == 0);

  // Block order on the x axis.
  const std::vector<std::string> order = {"Stem", "Res2", "Res3", "Res4",
                                          "Res5", "FPN",  "D3",   "D4",
                                          "D5",   "D6",   "D7"};
  std::size_t last = 0;
  for (const std::string& b : order) {
    const auto pos = svg.find("class=\"macs\" data-block=\"" + b + "\"");
    REQUIRE(pos != std::string::npos);
    CHECK(pos > last);
    last = pos;
  }
}

TEST_CASE("distribution chart of a single block") {
  GraphBuilder b;
  const NodeId in = b.input({1, 3, 8, 8});
  const NodeId c = b.add(ConvOp{3, 3, 1, 1, 3, 4, 1, true}, {in},
                         BlockTag{BlockKind::FPN});
  const std::string svg =
      distribution_chart_svg(cost_report(std::move(b).build({c})));
  CHECK(count(svg, "<rect class=\"macs\"") == 1);
  CHECK(count(svg, "<rect class=\"params\"") == 1);

  Graph empty({{NodeId{0}, InputOp{{1, 3, 8, 8}}, {}, std::nullopt,
                std::nullopt}},
              {NodeId{0}});
  CHECK_THROWS_AS(distribution_chart_svg(cost_report(empty)), Error);
}

TEST_CASE("tradeoff chart") {
  SUBCASE("two annotated families give two polylines") {
    const std::vector<TradeoffPoint> pts = {
        point("a", 150, Family::Proposed, 35.7),
        point("b", 90, Family::Proposed, 35.0),
        point("c", 150, Family::InputScaling, 35.7),
        point("d", 90, Family::InputScaling, 34.5),
    };
    const std::string svg = tradeoff_chart_svg(pts);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find(">Proposed</text>") != std::string::npos);
    CHECK(svg.find(">InputScaling</text>") != std::string::npos);
    CHECK(points_from_svg(svg) == pts);
  }
  SUBCASE("unannotated points only go on the rug") {
    const std::vector<TradeoffPoint> pts = {
        point("a", 150, Family::Proposed), point("b", 90, Family::Proposed),
        point("c", 100, Family::InputScaling)};
    const std::string svg = tradeoff_chart_svg(pts);
    CHECK(count(svg, "<polyline") == 0);
    CHECK(count(svg, "class=\"rug-tick\"") == 3);
    CHECK(count(svg, "<circle") == 0);
  }
  SUBCASE("baseline to V3 spans the expected GMACs range") {
    const auto pts = sweep(ModelConfig{}, "baseline-800",
                           {{"lw-v3-both-pred", preset_chain("lw-v3-both-pred")}})
                         .points;
    const auto back = points_from_svg(tradeoff_chart_svg(pts));
    CHECK(back[0].gmacs == doctest::Approx(146.2).epsilon(0.01));
    CHECK(back[1].gmacs == doctest::Approx(88.8).epsilon(0.01));
  }
  CHECK_THROWS_AS(tradeoff_chart_svg({}), Error);
}

TEST_CASE("emitters report unwritable paths") {
  CHECK_THROWS_AS(emit_tradeoff_chart({point("a", 1, Family::Proposed)},
                                      "/nonexistent-dir/x.svg"),
                  IoError);
  CHECK_THROWS_AS(read_text_file("/nonexistent-dir/x.csv"), IoError);
}
