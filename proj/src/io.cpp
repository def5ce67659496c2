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

#include "eldm/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

namespace eldm::io
{

namespace
{

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {s.remove_prefix(1);}
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split(std::string_view line)
{
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) {break;}
    start = comma + 1;
  }
  return cells;
}

Error parse_error(const CsvTable & t, std::size_t row, std::size_t col, const std::string & what)
{
  return Error(ErrorCode::ParseError,
    fmt::format("{}:{}: column {} ({}): {}", t.source, t.lines[row], col + 1, t.header[col], what));
}

void require_header(const CsvTable & t, const std::vector<std::string_view> & required,
  const std::vector<std::string_view> & optional = {})
{
  for (auto name : required) {t.column(name);}
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const auto & h = t.header[c];
    const bool known = std::find(required.begin(), required.end(), h) != required.end() ||
      std::find(optional.begin(), optional.end(), h) != optional.end();
    if (!known) {
      throw Error(ErrorCode::ParseError,
        fmt::format("{}:1: column {}: unexpected column '{}'", t.source, c + 1, h));
    }
  }
}

}  // namespace

std::string format_number(double x)
{
  if (x == 0.0) {return "0";}
  return fmt::format("{}", x);
}

std::size_t CsvTable::find(std::string_view name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {return i;}
  }
  return std::string::npos;
}

std::size_t CsvTable::column(std::string_view name) const
{
  const std::size_t i = find(name);
  if (i == std::string::npos) {
    throw Error(ErrorCode::ParseError,
      fmt::format("{}:1: missing column '{}'", source, name));
  }
  return i;
}

double CsvTable::number(std::size_t row, std::size_t col) const
{
  const std::string & cell = rows.at(row).at(col);
  double v = 0.0;
  const char * first = cell.data();
  const char * last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') {++first;}
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw parse_error(*this, row, col, fmt::format("'{}' is not a number", cell));
  }
  if (!std::isfinite(v)) {
    throw parse_error(*this, row, col, fmt::format("'{}' is not finite", cell));
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::string source)
{
  CsvTable t;
  t.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {end = text.size();}
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {continue;}
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::ParseError,
        fmt::format("{}:{}: expected {} columns, found {}", t.source, line_no, t.header.size(),
        cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(line_no);
  }
  if (t.header.empty()) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: missing header row", t.source));
  }
  return t;
}

std::string read_text(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));}
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path & path)
{
  return parse_csv(read_text(path), path.string());
}

void write_atomic(const std::filesystem::path & path, std::string_view content)
{
  std::error_code ec;
  if (path.has_parent_path()) {std::filesystem::create_directories(path.parent_path(), ec);}
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", tmp.string()));}
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {throw Error(ErrorCode::IoError, fmt::format("write failed '{}'", tmp.string()));}
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
      fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
  }
}

nlohmann::ordered_json read_json(const std::filesystem::path & path)
{
  try {
    return nlohmann::ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error & e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string dump_json(const nlohmann::ordered_json & doc)
{
  return doc.dump(2) + "\n";
}

RoadCenterline road_from_csv(const CsvTable & t, double ds_grid)
{
  if (t.find("x_m") != std::string::npos) {
    require_header(t, {"x_m", "y_m"});
    const std::size_t cx = t.column("x_m");
    const std::size_t cy = t.column("y_m");
    std::vector<Point2> pts;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      pts.push_back({t.number(r, cx), t.number(r, cy)});
    }
    return build_centerline(pts, ds_grid);
  }
  if (t.find("station_m") != std::string::npos) {
    require_header(t, {"station_m", "curvature_1pm"});
    const std::size_t cs = t.column("station_m");
    const std::size_t ck = t.column("curvature_1pm");
    std::vector<CurvatureKnot> knots;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      knots.push_back({t.number(r, cs), t.number(r, ck)});
    }
    return centerline_from_curvature(knots, Pose2{}, ds_grid);
  }
  throw Error(ErrorCode::ParseError,
    fmt::format("{}:1: road needs columns x_m,y_m or station_m,curvature_1pm", t.source));
}

std::string road_to_csv(const RoadCenterline & road)
{
  std::string out = "station_m,x_m,y_m,heading_rad,curvature_1pm\n";
  for (const auto & p : road.poses()) {
    out += fmt::format("{},{},{},{},{}\n", format_number(p.station), format_number(p.x),
      format_number(p.y), format_number(p.heading), format_number(p.curvature));
  }
  return out;
}

DriveLog drive_log_from_csv(const CsvTable & t)
{
  require_header(t, {"station_m", "offset_m", "curvature_1pm"}, {"speed_mps"});
  const std::size_t cs = t.column("station_m");
  const std::size_t co = t.column("offset_m");
  const std::size_t ck = t.column("curvature_1pm");
  const std::size_t cv = t.find("speed_mps");
  DriveLog log;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    DriveRecord rec{t.number(r, cs), t.number(r, co), t.number(r, ck), std::nullopt};
    if (cv != std::string::npos) {rec.speed = t.number(r, cv);}
    if (!log.records.empty() && rec.station <= log.records.back().station) {
      throw parse_error(t, r, cs, "stations must increase");
    }
    log.records.push_back(rec);
  }
  return log;
}

std::string drive_log_to_csv(const DriveLog & log)
{
  const bool speed = !log.records.empty() && log.records.front().speed.has_value();
  std::string out = speed ? "station_m,offset_m,curvature_1pm,speed_mps\n" :
    "station_m,offset_m,curvature_1pm\n";
  for (const auto & r : log.records) {
    out += fmt::format("{},{},{}", format_number(r.station), format_number(r.offset),
      format_number(r.curvature));
    if (speed) {out += "," + format_number(r.speed.value_or(0.0));}
    out += "\n";
  }
  return out;
}

DriverDataset dataset_from_csv(const CsvTable & t)
{
  std::vector<std::string> cols{"id"};
  for (std::size_t i = 1; i <= kParamCount; ++i) {cols.push_back(fmt::format("p{}", i));}
  std::vector<std::string_view> views(cols.begin(), cols.end());
  require_header(t, views);
  DriverDataset ds;
  const std::size_t cid = t.column("id");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ds.ids.push_back(t.rows[r][cid]);
    Vector v;
    for (std::size_t i = 1; i < cols.size(); ++i) {v.push_back(t.number(r, t.column(cols[i])));}
    ds.vectors.push_back(std::move(v));
  }
  ds.validate();
  return ds;
}

std::string dataset_to_csv(const DriverDataset & ds)
{
  std::string out = "id";
  for (std::size_t i = 1; i <= ds.dim(); ++i) {out += fmt::format(",p{}", i);}
  out += "\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out += ds.ids[r];
    for (double x : ds.vectors[r]) {out += "," + format_number(x);}
    out += "\n";
  }
  return out;
}

std::vector<LabelRow> labels_from_csv(const CsvTable & t)
{
  require_header(t, {"id", "label"});
  const std::size_t cid = t.column("id");
  const std::size_t cl = t.column("label");
  std::vector<LabelRow> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double v = t.number(r, cl);
    if (v != std::floor(v) || v < 1.0 || v > 1e9) {
      throw parse_error(t, r, cl, "label must be a positive integer");
    }
    rows.push_back({t.rows[r][cid], static_cast<int>(v)});
  }
  return rows;
}

std::string labels_to_csv(const std::vector<std::string> & ids, const Labels & labels)
{
  std::string out = "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {out += fmt::format("{},{}\n", ids[i], labels[i]);}
  return out;
}

std::string trace_to_csv(const OffsetTrace & trace)
{
  std::string out = "station_m,offset_m,kappa_1pm,x_m,y_m,heading_rad,steer_rad\n";
  for (const auto & s : trace.samples) {
    out += fmt::format("{},{},{},{},{},{},{}\n", format_number(s.station),
      format_number(s.offset), format_number(s.kappa), format_number(s.x), format_number(s.y),
      format_number(s.heading), format_number(s.steer));
  }
  return out;
}

OffsetTrace trace_from_csv(const CsvTable & t)
{
  const std::vector<std::string_view> cols{"station_m", "offset_m", "kappa_1pm", "x_m", "y_m",
    "heading_rad", "steer_rad"};
  require_header(t, cols);
  std::array<std::size_t, 7> c{};
  for (std::size_t i = 0; i < cols.size(); ++i) {c[i] = t.column(cols[i]);}
  OffsetTrace trace;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    trace.samples.push_back({t.number(r, c[0]), t.number(r, c[1]), t.number(r, c[2]),
        t.number(r, c[3]), t.number(r, c[4]), t.number(r, c[5]), t.number(r, c[6])});
  }
  return trace;
}

std::string dendrogram_to_csv(const Dendrogram & d)
{
  std::string out = "a,b,height,size\n";
  for (const auto & m : d.merges) {
    out += fmt::format("{},{},{},{}\n", m.a, m.b, format_number(m.height), m.size);
  }
  return out;
}

}  // namespace eldm::io
