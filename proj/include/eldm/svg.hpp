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

/// \file
/// \brief Static SVG charts. Output depends only on the inputs, so equal data
/// gives byte-identical files.

#ifndef ELDM__SVG_HPP_
#define ELDM__SVG_HPP_

#include <string>
#include <vector>

#include "eldm/clustering.hpp"
#include "eldm/road_geometry.hpp"
#include "eldm/simulation.hpp"

namespace eldm::svg
{

struct Series
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct Panel
{
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Dashed horizontal reference lines.
  std::vector<double> reference_y;
};

/// Panels stacked vertically over a shared x range.
std::string line_chart(const std::vector<Panel> & panels, double width = 800.0,
  double panel_height = 260.0);

/// Ticks covering [lo, hi] at a 1-2-5 step, about `count` of them.
std::vector<double> nice_ticks(double lo, double hi, int count = 6);

std::string elbow_plot(const std::vector<ElbowPoint> & curve, Metric m);
/// Horizontal bars per cluster, sorted within cluster, dashed line at the mean.
std::string silhouette_plot(const SilhouetteCandidate & candidate, Metric m);
/// Leaves along x in dendrogram order, merge height on y, dashed cut line.
std::string dendrogram_plot(const Dendrogram & d, const std::vector<std::string> & ids,
  double threshold, Metric m);
/// Offset over station with the curvature profile beneath.
std::string trace_plot(const OffsetTrace & trace, const std::string & title);
/// Plan view of the centerline.
std::string road_plot(const RoadCenterline & road);

}  // namespace eldm::svg

#endif  // ELDM__SVG_HPP_
