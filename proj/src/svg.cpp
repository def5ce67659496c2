// Copyright 2026 The ELDM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eldm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace eldm::svg
{

namespace
{

constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 45.0;

const std::vector<std::string> & palette()
{
  static const std::vector<std::string> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors;
}

std::string escape(const std::string & s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x)
{
  const std::string s = fmt::format("{:.2f}", x);
  return s == "-0.00" ? "0.00" : s;
}

std::string tick_label(double x, double step)
{
  const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
  std::string s = fmt::format("{:.{}f}", x, std::clamp(decimals, 0, 6));
  if (s.find_first_not_of("-0.") == std::string::npos) {s = "0";}
  return s;
}

struct Range
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v)
  {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  void finish()
  {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      const double pad = std::max(1e-3, std::abs(lo) * 0.1);
      lo -= pad;
      hi += pad;
    }
  }
};

std::string header(double w, double h)
{
  return fmt::format(
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
    "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
    num(w), num(h), num(w), num(h));
}

/// Axes, ticks and labels for one plotting box; returns the mapping.
struct Frame
{
  double x0, y0, w, h;
  Range xr, yr;
  std::vector<double> xt, yt;

  double px(double x) const {return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w;}
  double py(double y) const {return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h;}
};

Frame make_frame(double x0, double y0, double w, double h, Range xr, Range yr)
{
  Frame f{x0, y0, w, h, xr, yr, nice_ticks(xr.lo, xr.hi), nice_ticks(yr.lo, yr.hi, 5)};
  f.xr.lo = std::min(f.xr.lo, f.xt.front());
  f.xr.hi = std::max(f.xr.hi, f.xt.back());
  f.yr.lo = std::min(f.yr.lo, f.yt.front());
  f.yr.hi = std::max(f.yr.hi, f.yt.back());
  return f;
}

std::string draw_axes(const Frame & f, const std::string & title, const std::string & xl,
  const std::string & yl, bool x_ticks = true)
{
  std::string out;
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"black\"/>\n", num(f.x0), num(f.y0), num(f.w), num(f.h));
  const double xstep = f.xt.size() > 1 ? f.xt[1] - f.xt[0] : 1.0;
  const double ystep = f.yt.size() > 1 ? f.yt[1] - f.yt[0] : 1.0;
  if (x_ticks) {
    for (double t : f.xt) {
      out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>\n"
          "<text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
          num(f.px(t)), num(f.y0), num(f.y0 + f.h), num(f.y0 + f.h + 15), tick_label(t, xstep));
    }
  }
  for (double t : f.yt) {
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>\n",
        num(f.x0), num(f.py(t)), num(f.x0 + f.w), num(f.x0 - 5), num(f.py(t) + 4),
        tick_label(t, ystep));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
    num(f.x0 + f.w / 2), num(f.y0 - 10), escape(title));
  if (!xl.empty()) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
      num(f.x0 + f.w / 2), num(f.y0 + f.h + 33), escape(xl));
  }
  out += fmt::format("<text transform=\"translate({},{}) rotate(-90)\" "
      "text-anchor=\"middle\">{}</text>\n", num(f.x0 - 50), num(f.y0 + f.h / 2), escape(yl));
  return out;
}

std::string polyline(const Frame & f, const std::vector<double> & x,
  const std::vector<double> & y, const std::string & color, double stroke = 1.5)
{
  std::string pts;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!pts.empty()) {pts += ' ';}
    pts += num(f.px(x[i])) + "," + num(f.py(y[i]));
  }
  return fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" points=\"{}\"/>\n",
    color, num(stroke), pts);
}

std::string dashed_h(const Frame & f, double y, const std::string & color)
{
  return fmt::format("<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{3}\" "
      "stroke-dasharray=\"6,4\"/>\n", num(f.x0), num(f.x0 + f.w), num(f.py(y)), color);
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int count)
{
  if (!(hi > lo)) {return {lo};}
  const double raw = (hi - lo) / std::max(1, count - 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) {break;}
  }
  std::vector<double> ticks;
  const double first = std::floor(lo / step + 1e-9) * step;
  for (int i = 0; first + i * step <= hi + step * (1.0 - 1e-9); ++i) {
    ticks.push_back(first + i * step);
    if (ticks.back() >= hi - 1e-9 * step) {break;}
  }
  return ticks;
}

std::string line_chart(const std::vector<Panel> & panels, double width, double panel_height)
{
  Range xr;
  for (const auto & p : panels) {
    for (const auto & s : p.series) {
      for (double x : s.x) {xr.add(x);}
    }
  }
  xr.finish();
  const double height = static_cast<double>(panels.size()) * (panel_height + kTop + kBottom);
  std::string out = header(width, height);
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto & p = panels[k];
    Range yr;
    for (const auto & s : p.series) {
      for (double y : s.y) {yr.add(y);}
    }
    for (double y : p.reference_y) {yr.add(y);}
    yr.finish();
    const double top = static_cast<double>(k) * (panel_height + kTop + kBottom) + kTop;
    const Frame f = make_frame(kLeft, top, width - kLeft - kRight, panel_height, xr, yr);
    out += draw_axes(f, p.title, p.x_label, p.y_label);
    for (double y : p.reference_y) {out += dashed_h(f, y, "#555");}
    double legend_y = f.y0 + 16;
    for (const auto & s : p.series) {
      out += polyline(f, s.x, s.y, s.color);
      if (s.markers) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
          out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
            num(f.px(s.x[i])), num(f.py(s.y[i])), s.color);
        }
      }
      if (!s.label.empty()) {
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" fill=\"{}\">{}</text>\n",
          num(f.x0 + f.w - 8), num(legend_y), s.color, escape(s.label));
        legend_y += 15;
      }
    }
  }
  out += "</svg>\n";
  return out;
}

std::string elbow_plot(const std::vector<ElbowPoint> & curve, Metric m)
{
  Series s{"inertia", {}, {}, palette()[0], true};
  for (const auto & p : curve) {
    s.x.push_back(p.k);
    s.y.push_back(p.inertia);
  }
  return line_chart({Panel{fmt::format("Elbow curve ({})", to_string(m)), "number of clusters k",
        "inertia", {s}, {}}});
}

std::string silhouette_plot(const SilhouetteCandidate & c, Metric m)
{
  const double bar = 8.0;
  const double gap = 12.0;
  double rows = 0.0;
  for (const auto & vals : c.per_cluster) {rows += static_cast<double>(vals.size());}
  const double plot_h = rows * bar + gap * static_cast<double>(c.per_cluster.size());
  const double width = 700.0;
  const double height = plot_h + kTop + kBottom;
  Range xr;
  xr.add(std::min(-0.1, c.silhouette.mean));
  xr.add(1.0);
  for (const auto & vals : c.per_cluster) {
    for (double v : vals) {xr.add(v);}
  }
  Range yr;
  yr.add(0.0);
  yr.add(plot_h);
  Frame f = make_frame(kLeft, kTop, width - kLeft - kRight, plot_h, xr, yr);
  f.yt.clear();
  f.yr = yr;
  std::string out = header(width, height);
  out += draw_axes(f, fmt::format("Silhouette, k = {} ({}), mean {:.4f}", c.k, to_string(m),
      c.silhouette.mean), "silhouette value", "cluster");
  double y = f.y0 + gap / 2;
  for (std::size_t l = 0; l < c.per_cluster.size(); ++l) {
    const auto & color = palette()[l % palette().size()];
    const double y_start = y;
    for (double v : c.per_cluster[l]) {
      const double a = f.px(std::min(0.0, v));
      const double b = f.px(std::max(0.0, v));
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
        num(a), num(y), num(b - a), num(bar - 1), color);
      y += bar;
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
      num(f.x0 - 5), num((y_start + y) / 2 + 4), l + 1);
    y += gap;
  }
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
    num(f.px(0.0)), num(f.y0), num(f.y0 + f.h));
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#d62728\" "
      "stroke-dasharray=\"6,4\"/>\n", num(f.px(c.silhouette.mean)), num(f.y0), num(f.y0 + f.h));
  out += "</svg>\n";
  return out;
}

std::string dendrogram_plot(const Dendrogram & d, const std::vector<std::string> & ids,
  double threshold, Metric m)
{
  const auto order = d.leaf_order();
  const double width = std::max(500.0, 40.0 * static_cast<double>(order.size()) + kLeft + kRight);
  const double plot_h = 360.0;
  Range xr;
  xr.add(0.0);
  xr.add(static_cast<double>(order.size()));
  Range yr;
  yr.add(0.0);
  yr.add(d.root_height());
  if (threshold > 0.0 && threshold < 2.0 * d.root_height()) {yr.add(threshold);}
  yr.finish();
  Frame f = make_frame(kLeft, kTop, width - kLeft - kRight, plot_h, xr, yr);
  f.xr = xr;
  std::string out = header(width, plot_h + kTop + kBottom + 20);
  out += draw_axes(f, fmt::format("Average-linkage dendrogram ({})", to_string(m)), "",
      "merge height", false);
  std::map<int, double> xpos;
  std::map<int, double> ypos;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int leaf = order[i];
    xpos[leaf] = static_cast<double>(i) + 0.5;
    ypos[leaf] = 0.0;
    const std::string name = static_cast<std::size_t>(leaf) < ids.size() ?
      ids[static_cast<std::size_t>(leaf)] : std::to_string(leaf);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
      num(f.px(xpos[leaf])), num(f.y0 + f.h + 15), escape(name));
  }
  for (std::size_t k = 0; k < d.merges.size(); ++k) {
    const auto & mg = d.merges[k];
    const int id = d.leaves + static_cast<int>(k);
    const double xa = xpos[mg.a];
    const double xb = xpos[mg.b];
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" "
        "points=\"{},{} {},{} {},{} {},{}\"/>\n", mg.height < threshold ? palette()[0] : "#333",
        num(f.px(xa)), num(f.py(ypos[mg.a])), num(f.px(xa)), num(f.py(mg.height)),
        num(f.px(xb)), num(f.py(mg.height)), num(f.px(xb)), num(f.py(ypos[mg.b])));
    xpos[id] = 0.5 * (xa + xb);
    ypos[id] = mg.height;
  }
  if (threshold >= f.yr.lo && threshold <= f.yr.hi) {out += dashed_h(f, threshold, "#d62728");}
  out += "</svg>\n";
  return out;
}

std::string trace_plot(const OffsetTrace & trace, const std::string & title)
{
  Series offset{"offset", {}, {}, palette()[0], false};
  Series kappa{"curvature", {}, {}, palette()[1], false};
  for (const auto & s : trace.samples) {
    offset.x.push_back(s.station);
    offset.y.push_back(s.offset);
    kappa.x.push_back(s.station);
    kappa.y.push_back(s.kappa);
  }
  return line_chart({
      Panel{title, "", "lateral offset [m]", {offset}, {0.0}},
      Panel{"Road curvature", "station [m]", "curvature [1/m]", {kappa}, {0.0}}});
}

std::string road_plot(const RoadCenterline & road)
{
  Series s{"centerline", {}, {}, palette()[0], false};
  for (const auto & p : road.poses()) {
    s.x.push_back(p.x);
    s.y.push_back(p.y);
  }
  return line_chart({Panel{fmt::format("Road plan view, length {:.0f} m", road.length()),
        "x [m]", "y [m]", {s}, {}}}, 800.0, 500.0);
}

}  // namespace eldm::svg
