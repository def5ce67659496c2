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
/// \brief File formats: strict CSV readers and writers, JSON files, atomic writes.

#ifndef ELDM__IO_HPP_
#define ELDM__IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eldm/clustering.hpp"
#include "eldm/identification.hpp"
#include "eldm/road_geometry.hpp"
#include "eldm/simulation.hpp"

namespace eldm::io
{

/// Shortest decimal text that parses back to the same double.
std::string format_number(double x);

/// A header row plus text cells; every row has the header's column count.
struct CsvTable
{
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based file line of each row.
  std::vector<std::size_t> lines;

  /// Index of `name`, or npos.
  std::size_t find(std::string_view name) const;
  /// Index of `name`; throws ParseError naming the missing column.
  std::size_t column(std::string_view name) const;
  /// Finite number at (row, col); throws ParseError with line and column.
  double number(std::size_t row, std::size_t col) const;
};

/// Comma-separated, no quoting, header mandatory, blank lines and lines
/// starting with '#' skipped. Throws ParseError on a missing header or a
/// row with the wrong column count.
CsvTable parse_csv(std::string_view text, std::string source);
CsvTable read_csv(const std::filesystem::path & path);

/// Throws IoError.
std::string read_text(const std::filesystem::path & path);
/// Writes to a sibling temporary file and renames it into place. Throws IoError.
void write_atomic(const std::filesystem::path & path, std::string_view content);

nlohmann::ordered_json read_json(const std::filesystem::path & path);
/// Two-space indented JSON with a trailing newline.
std::string dump_json(const nlohmann::ordered_json & doc);

/// `x_m,y_m` polyline or `station_m,curvature_1pm` profile.
RoadCenterline road_from_csv(const CsvTable & table, double ds_grid = 1.0);
/// `station_m,x_m,y_m,heading_rad,curvature_1pm` on the road grid.
std::string road_to_csv(const RoadCenterline & road);

/// `station_m,offset_m,curvature_1pm[,speed_mps]`.
DriveLog drive_log_from_csv(const CsvTable & table);
std::string drive_log_to_csv(const DriveLog & log);

/// `id,p1..p19` in the parameter-vector layout.
DriverDataset dataset_from_csv(const CsvTable & table);
std::string dataset_to_csv(const DriverDataset & ds);

struct LabelRow
{
  std::string id;
  int label = 0;
};

/// `id,label`.
std::vector<LabelRow> labels_from_csv(const CsvTable & table);
std::string labels_to_csv(const std::vector<std::string> & ids, const Labels & labels);

/// `station_m,offset_m,kappa_1pm,x_m,y_m,heading_rad,steer_rad`.
std::string trace_to_csv(const OffsetTrace & trace);
OffsetTrace trace_from_csv(const CsvTable & table);

/// `a,b,height,size`.
std::string dendrogram_to_csv(const Dendrogram & d);

}  // namespace eldm::io

#endif  // ELDM__IO_HPP_
