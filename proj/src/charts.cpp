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
#include "detflops/charts.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "detflops/error.h"

namespace detflops {

namespace {

constexpr double kLeft = 80;
constexpr double kRight = 30;
constexpr double kTop = 60;
constexpr double kBottom = 80;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string unescape(const std::string& s) {
  static const std::pair<const char*, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [entity, ch] : kEntities) {
        const std::string e(entity);
        if (s.compare(i, e.size(), e) == 0) {
          out += ch;
          i += e.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += s[i++];
  }
  return out;
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kChartWidth
     << "\" height=\"" << kChartHeight << "\" viewBox=\"0 0 " << kChartWidth
     << ' ' << kChartHeight << "\" font-family=\"sans-serif\">\n";
  os << "<title>" << escape(title) << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kChartWidth << "\" height=\""
     << kChartHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kChartWidth / 2 << "\" y=\"30\" text-anchor=\"middle\""
     << " font-size=\"18\">" << escape(title) << "</text>\n";
}

// 1, 2 or 5 times a power of ten, giving at most ~8 intervals.
double nice_step(double span) {
  if (span <= 0) return 1.0;
  const double raw = span / 8.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

const char* family_color(Family f) {
  return f == Family::Proposed ? "#d62728" : "#1f77b4";
}

}  // namespace

std::string distribution_chart_svg(const CostReport& report) {
  const std::vector<BlockSummary> rows = summarize_blocks(report);
  if (rows.empty()) throw Error("distribution chart needs a non-empty report");

  auto pct = [](Count part, Count whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) /
                                  static_cast<double>(whole);
  };
  double top = 0.0;
  for (const BlockSummary& r : rows) {
    top = std::max({top, pct(r.cost.macs, report.totals.macs),
                    pct(r.cost.params, report.totals.params)});
  }
  const double step = nice_step(std::max(top, 1.0));
  const double y_max = std::ceil(std::max(top, 1.0) / step) * step;

  const double plot_w = kChartWidth - kLeft - kRight;
  const double plot_h = kChartHeight - kTop - kBottom;
  const double base_y = kTop + plot_h;
  auto y_of = [&](double v) { return base_y - v / y_max * plot_h; };

  std::ostringstream os;
  open_svg(os, "MAC and parameter distribution by block");

  for (double v = 0.0; v <= y_max + 1e-9; v += step) {
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y_of(v))
       << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\"" << num(y_of(v))
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y_of(v) + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << num(v) << "</text>\n";
  }
  os << "<text x=\"20\" y=\"" << num(kTop + plot_h / 2)
     << "\" font-size=\"13\" transform=\"rotate(-90 20 " << num(kTop + plot_h / 2)
     << ")\" text-anchor=\"middle\">% of network total</text>\n";

  const double slot = plot_w / static_cast<double>(rows.size());
  const double bar = slot * 0.35;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BlockSummary& r = rows[i];
    const double x0 = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double mac = pct(r.cost.macs, report.totals.macs);
    const double par = pct(r.cost.params, report.totals.params);
    os << "<rect class=\"macs\" data-block=\"" << escape(r.label)
       << "\" data-value=\"" << num(mac) << "\" x=\"" << num(x0) << "\" y=\""
       << num(y_of(mac)) << "\" width=\"" << num(bar) << "\" height=\""
       << num(base_y - y_of(mac)) << "\" fill=\"#4c72b0\"/>\n";
    os << "<rect class=\"params\" data-block=\"" << escape(r.label)
       << "\" data-value=\"" << num(par) << "\" x=\"" << num(x0 + bar)
       << "\" y=\"" << num(y_of(par)) << "\" width=\"" << num(bar)
       << "\" height=\"" << num(base_y - y_of(par))
       << "\" fill=\"#dd8452\"/>\n";
    os << "<text x=\"" << num(x0 + bar) << "\" y=\"" << num(base_y + 20)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(r.label)
       << "</text>\n";
  }
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(base_y) << "\" x2=\""
     << num(kLeft + plot_w) << "\" y2=\"" << num(base_y)
     << "\" stroke=\"black\"/>\n";

  const double ly = kChartHeight - 25;
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(ly - 10)
     << "\" width=\"12\" height=\"12\" fill=\"#4c72b0\"/>\n"
     << "<text x=\"" << num(kLeft + 18) << "\" y=\"" << num(ly)
     << "\" font-size=\"12\">MACs</text>\n"
     << "<rect x=\"" << num(kLeft + 90) << "\" y=\"" << num(ly - 10)
     << "\" width=\"12\" height=\"12\" fill=\"#dd8452\"/>\n"
     << "<text x=\"" << num(kLeft + 108) << "\" y=\"" << num(ly)
     << "\" font-size=\"12\">params (shared heads shown per level)</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string tradeoff_chart_svg(const std::vector<TradeoffPoint>& points) {
  if (points.empty()) throw Error("tradeoff chart needs at least one point");

  const double rug_h = 40;
  const double plot_w = kChartWidth - kLeft - kRight;
  const double plot_h = kChartHeight - kTop - kBottom - rug_h;
  const double plot_bottom = kTop + plot_h;
  const double rug_top = plot_bottom + 10;

  double x_lo = points.front().gmacs, x_hi = points.front().gmacs;
  double y_lo = 0, y_hi = 0;
  bool any_map = false;
  for (const TradeoffPoint& p : points) {
    x_lo = std::min(x_lo, p.gmacs);
    x_hi = std::max(x_hi, p.gmacs);
    if (p.map_annotation) {
      const double v = p.map_annotation->value_percent;
      y_lo = any_map ? std::min(y_lo, v) : v;
      y_hi = any_map ? std::max(y_hi, v) : v;
      any_map = true;
    }
  }
  const double x_step = nice_step(std::max(x_hi - x_lo, 1.0));
  x_lo = std::floor(x_lo / x_step) * x_step - x_step;
  x_hi = std::ceil(x_hi / x_step) * x_step + x_step;
  if (x_lo < 0) x_lo = 0;
  y_lo = std::floor(y_lo) - 1.0;
  y_hi = std::ceil(y_hi) + 1.0;

  auto x_of = [&](double g) {
    return kLeft + (g - x_lo) / (x_hi - x_lo) * plot_w;
  };
  auto y_of = [&](double m) {
    return plot_bottom - (m - y_lo) / (y_hi - y_lo) * plot_h;
  };

  std::ostringstream os;
  open_svg(os, "GMACs vs mAP: light-weight heads and input scaling");
  os << "<metadata id=\"detflops-points\">"
     << escape(points_to_json(points).dump()) << "</metadata>\n";

  for (double g = x_lo; g <= x_hi + 1e-9; g += x_step) {
    os << "<line x1=\"" << num(x_of(g)) << "\" y1=\"" << num(kTop)
       << "\" x2=\"" << num(x_of(g)) << "\" y2=\"" << num(plot_bottom)
       << "\" stroke=\"#eeeeee\"/>\n";
    os << "<text x=\"" << num(x_of(g)) << "\" y=\""
       << num(rug_top + rug_h + 14) << "\" text-anchor=\"middle\""
       << " font-size=\"12\">" << num(g) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\""
     << num(kChartHeight - 12)
     << "\" text-anchor=\"middle\" font-size=\"13\">GMACs</text>\n";
  if (any_map) {
    const double y_step = nice_step(y_hi - y_lo);
    for (double m = y_lo; m <= y_hi + 1e-9; m += y_step) {
      os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y_of(m) + 4)
         << "\" text-anchor=\"end\" font-size=\"12\">" << num(m)
         << "</text>\n";
    }
  }
  os << "<text x=\"20\" y=\"" << num(kTop + plot_h / 2)
     << "\" font-size=\"13\" transform=\"rotate(-90 20 "
     << num(kTop + plot_h / 2)
     << ")\" text-anchor=\"middle\">reported mAP (%)</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
     << num(plot_w) << "\" height=\"" << num(plot_h)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<rect class=\"rug\" x=\"" << num(kLeft) << "\" y=\"" << num(rug_top)
     << "\" width=\"" << num(plot_w) << "\" height=\"" << num(rug_h)
     << "\" fill=\"#f7f7f7\" stroke=\"#cccccc\"/>\n";

  for (Family fam : {Family::Proposed, Family::InputScaling}) {
    std::vector<const TradeoffPoint*> annotated;
    for (const TradeoffPoint& p : points) {
      if (p.family == fam && p.map_annotation) annotated.push_back(&p);
    }
    if (annotated.size() < 2) continue;
    std::stable_sort(annotated.begin(), annotated.end(),
                     [](auto* a, auto* b) { return a->gmacs < b->gmacs; });
    os << "<polyline class=\"trend\" data-family=\"" << to_string(fam)
       << "\" fill=\"none\" stroke=\"" << family_color(fam)
       << "\" stroke-dasharray=\"4 3\" points=\"";
    for (std::size_t i = 0; i < annotated.size(); ++i) {
      os << (i ? " " : "") << num(x_of(annotated[i]->gmacs)) << ','
         << num(y_of(annotated[i]->map_annotation->value_percent));
    }
    os << "\"/>\n";
  }

  for (const TradeoffPoint& p : points) {
    const double x = x_of(p.gmacs);
    if (p.map_annotation) {
      const double y = y_of(p.map_annotation->value_percent);
      os << "<circle class=\"point\" data-family=\"" << to_string(p.family)
         << "\" cx=\"" << num(x) << "\" cy=\"" << num(y)
         << "\" r=\"5\" fill=\"" << family_color(p.family) << "\"><title>"
         << escape(p.label) << ": " << num(p.gmacs) << " GMACs, "
         << num(p.map_annotation->value_percent) << "% ("
         << escape(p.map_annotation->source) << ")</title></circle>\n";
      os << "<text x=\"" << num(x + 7) << "\" y=\"" << num(y - 7)
         << "\" font-size=\"11\">" << escape(p.label) << "</text>\n";
    } else {
      const double y0 = p.family == Family::Proposed ? rug_top + 4
                                                     : rug_top + rug_h / 2;
      os << "<line class=\"rug-tick\" data-family=\"" << to_string(p.family)
         << "\" x1=\"" << num(x) << "\" y1=\"" << num(y0) << "\" x2=\""
         << num(x) << "\" y2=\"" << num(y0 + rug_h / 2 - 6)
         << "\" stroke=\"" << family_color(p.family)
         << "\" stroke-width=\"2\"><title>" << escape(p.label) << ": "
         << num(p.gmacs) << " GMACs (no reported mAP)</title></line>\n";
    }
  }

  double lx = kLeft + 10;
  for (Family fam : {Family::Proposed, Family::InputScaling}) {
    os << "<rect x=\"" << num(lx) << "\" y=\"" << num(kTop + 10)
       << "\" width=\"12\" height=\"12\" fill=\"" << family_color(fam)
       << "\"/>\n<text class=\"legend\" x=\"" << num(lx + 18) << "\" y=\""
       << num(kTop + 21) << "\" font-size=\"12\">" << to_string(fam)
       << "</text>\n";
    lx += 130;
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<TradeoffPoint> points_from_svg(const std::string& svg) {
  const std::string open = "<metadata id=\"detflops-points\">";
  const auto begin = svg.find(open);
  const auto end = svg.find("</metadata>", begin);
  if (begin == std::string::npos || end == std::string::npos) {
    throw ConfigError("SVG carries no embedded points");
  }
  const std::string body =
      svg.substr(begin + open.size(), end - begin - open.size());
  try {
    return points_from_json(nlohmann::json::parse(unescape(body)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad embedded points: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_distribution_chart(const CostReport& report,
                             const std::string& path) {
  write_text_file(path, distribution_chart_svg(report));
}

void emit_tradeoff_chart(const std::vector<TradeoffPoint>& points,
                         const std::string& path) {
  write_text_file(path, tradeoff_chart_svg(points));
}

}  // namespace detflops
