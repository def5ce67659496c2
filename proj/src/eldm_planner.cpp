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

#include "eldm/eldm_planner.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace eldm
{
namespace
{

constexpr double kStationSlack = 1e-9;

Matrix3 read_matrix(const nlohmann::ordered_json & doc, const char * key)
{
  if (!doc.contains(key)) {
    throw Error(ErrorCode::ParseError, fmt::format("missing field '{}'", key));
  }
  const auto & m = doc.at(key);
  if (!m.is_array() || m.size() != kNodeCount) {
    throw Error(ErrorCode::ParseError, fmt::format("field '{}' must be a 3x3 array", key));
  }
  Matrix3 out{};
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    if (!m[i].is_array() || m[i].size() != kNodeCount) {
      throw Error(ErrorCode::ParseError, fmt::format("field '{}' row {} must have 3 entries",
        key, i));
    }
    for (std::size_t j = 0; j < kNodeCount; ++j) {
      if (!m[i][j].is_number()) {
        throw Error(ErrorCode::ParseError, fmt::format("field '{}'[{}][{}] is not a number", key,
          i, j));
      }
      out[i][j] = m[i][j].get<double>();
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void DriverParams::validate(double dy0_bound) const
{
  for (const auto & m : {p_left, p_right}) {
    for (const auto & row : m) {
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::InvalidConfig, "non-finite model coefficient");
        }
      }
    }
  }
  if (!std::isfinite(dy0) || std::abs(dy0) > dy0_bound) {
    throw Error(ErrorCode::InvalidConfig,
      fmt::format("straight offset {} outside the sanity bound {}", dy0, dy0_bound));
  }
}

DriverParams DriverParams::swapped_sides() const
{
  return {p_right, p_left, dy0};
}

void PlannerConfig::validate() const
{
  if (!(kappa_ref > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "kappa_ref must be positive");
  }
  if (!(node_stations[0] > 0.0 && node_stations[1] > node_stations[0] &&
    node_stations[2] > node_stations[1]))
  {
    throw Error(ErrorCode::InvalidConfig, "node stations must be positive and increasing");
  }
  if (std::abs(node_stations[2] - horizon) > kStationSlack) {
    throw Error(ErrorCode::InvalidConfig, "the last node station must equal the horizon");
  }
  if (!(replan_interval > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "replan interval must be positive");
  }
  if (!(min_speed > 0.0 && max_speed >= min_speed)) {
    throw Error(ErrorCode::InvalidConfig, "invalid speed band");
  }
}

double LocalPath::length() const
{
  double total = 0.0;
  for (const auto & s : segments) {total += s.length;}
  return total;
}

CenterlinePose LocalPath::evaluate(double s) const
{
  double remaining = std::max(0.0, s);
  double covered = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto & seg = segments[i];
    if (remaining <= seg.length || i + 1 == segments.size()) {
      auto pose = evaluate_clothoid(seg, std::min(remaining, seg.length));
      pose.station = covered + pose.station;
      return pose;
    }
    remaining -= seg.length;
    covered += seg.length;
  }
  return {};
}

// ---------------------------------------------------------------------------

Vector3 window_average_curvatures(const std::function<double(double)> & kappa, double s0,
  const Vector3 & node_stations, double spacing)
{
  Vector3 out{};
  double prev = 0.0;
  for (std::size_t j = 0; j < kNodeCount; ++j) {
    const double a = s0 + prev;
    const double b = s0 + node_stations[j];
    const auto steps = std::max<long>(1, std::lround((b - a) / spacing));
    double sum = 0.0;
    for (long k = 0; k <= steps; ++k) {
      sum += kappa(a + (b - a) * static_cast<double>(k) / static_cast<double>(steps));
    }
    out[j] = sum / static_cast<double>(steps + 1);
    prev = node_stations[j];
  }
  return out;
}

Vector3 segment_average_curvatures(const RoadCenterline & road, double s0,
  const Vector3 & node_stations)
{
  if (s0 < 0.0 || s0 + node_stations.back() > road.length() + kStationSlack) {
    throw Error(ErrorCode::HorizonExceedsRoad,
      fmt::format("lookahead to {} exceeds road length {}", s0 + node_stations.back(),
        road.length()));
  }
  const double end = road.length();
  return window_average_curvatures(
    [&](double s) {return road.curvature_at(std::min(s, end));}, s0, node_stations,
    road.spacing());
}

Vector3 compute_node_offsets(const DriverParams & params, const Vector3 & kappas,
  double kappa_ref, Gating gating)
{
  const double mean = (kappas[0] + kappas[1] + kappas[2]) / 3.0;
  Vector3 offsets{};
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < kNodeCount; ++j) {
      const double k = kappas[j];
      if (k == 0.0) {continue;}
      const double sign = (gating == Gating::MeanSign && mean != 0.0) ? mean : k;
      const Matrix3 & m = sign > 0.0 ? params.p_left : params.p_right;
      sum += m[i][j] * (k / kappa_ref);
    }
    offsets[i] = sum + params.dy0;
  }
  return offsets;
}

LocalPath plan_local_path(const RoadCenterline & road, double s0,
  const LateralCoordinate & current, double heading, const DriverParams & params,
  const PlannerConfig & cfg)
{
  if (s0 < 0.0 || s0 + cfg.horizon > road.length() + kStationSlack) {
    throw Error(ErrorCode::HorizonExceedsRoad,
      fmt::format("station {} + horizon {} exceeds road length {}", s0, cfg.horizon,
        road.length()));
  }
  LocalPath path;
  path.origin_station = s0;
  path.node_plan.segment_kappas = segment_average_curvatures(road, s0, cfg.node_stations);
  path.node_plan.offsets =
    compute_node_offsets(params, path.node_plan.segment_kappas, cfg.kappa_ref, cfg.gating);

  const Point2 start_xy = from_lateral(road, current);
  Pose2 from{start_xy.x, start_xy.y, heading};
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    const double station = std::min(s0 + cfg.node_stations[i], road.length());
    path.node_plan.stations[i] = station;
    const Point2 target = from_lateral(road, {station, path.node_plan.offsets[i]});
    const Pose2 to{target.x, target.y, road.heading_at(station)};
    try {
      path.segments[i] = fit_clothoid_g1(from, to);
    } catch (const ConvergenceError & e) {
      throw Error(ErrorCode::PlanInfeasible,
        fmt::format("segment {} from station {}: {} (residual {:.3e})", i + 1, s0, e.what(),
          e.residual()));
    } catch (const Error & e) {
      throw Error(ErrorCode::PlanInfeasible,
        fmt::format("segment {} from station {}: {}", i + 1, s0, e.what()));
    }
    from = to;
  }
  return path;
}

LocalPath planner_step(const VehicleLocation & vehicle, const RoadCenterline & road,
  const DriverParams & params, const PlannerConfig & cfg,
  const std::optional<LocalPath> & last_plan)
{
  if (last_plan &&
    vehicle.traveled - last_plan->travel_at_plan < cfg.replan_interval - kStationSlack)
  {
    return *last_plan;
  }
  const auto here = to_lateral(road, {vehicle.pose.x, vehicle.pose.y});
  LocalPath path = plan_local_path(road, here.station, here, vehicle.pose.heading, params, cfg);
  path.travel_at_plan = vehicle.traveled;
  return path;
}

// ---------------------------------------------------------------------------

ParamVector params_to_vector(const DriverParams & params)
{
  ParamVector v{};
  std::size_t k = 0;
  for (const auto * m : {&params.p_left, &params.p_right}) {
    for (const auto & row : *m) {
      for (double x : row) {v[k++] = x;}
    }
  }
  v[k] = params.dy0;
  return v;
}

DriverParams vector_to_params(const ParamVector & v)
{
  DriverParams p;
  std::size_t k = 0;
  for (auto * m : {&p.p_left, &p.p_right}) {
    for (auto & row : *m) {
      for (double & x : row) {x = v[k++];}
    }
  }
  p.dy0 = v[k];
  return p;
}

DriverParams vector_to_params(std::span<const double> v)
{
  if (v.size() != kParamCount) {
    throw Error(ErrorCode::WrongLength,
      fmt::format("parameter vector must have {} entries, got {}", kParamCount, v.size()));
  }
  ParamVector a{};
  std::copy(v.begin(), v.end(), a.begin());
  return vector_to_params(a);
}

nlohmann::ordered_json params_to_json(const DriverParams & params, double kappa_ref)
{
  nlohmann::ordered_json doc;
  doc["schema"] = kParamsSchema;
  doc["p_left"] = params.p_left;
  doc["p_right"] = params.p_right;
  doc["dy0"] = params.dy0;
  doc["kappa_ref"] = kappa_ref;
  return doc;
}

DriverParams params_from_json(const nlohmann::ordered_json & doc, double * kappa_ref)
{
  if (!doc.is_object() || doc.value("schema", std::string()) != kParamsSchema) {
    throw Error(ErrorCode::ParseError,
      fmt::format("expected a document with schema '{}'", kParamsSchema));
  }
  DriverParams p;
  p.p_left = read_matrix(doc, "p_left");
  p.p_right = read_matrix(doc, "p_right");
  if (!doc.contains("dy0") || !doc.at("dy0").is_number()) {
    throw Error(ErrorCode::ParseError, "missing numeric field 'dy0'");
  }
  p.dy0 = doc.at("dy0").get<double>();
  if (kappa_ref && doc.contains("kappa_ref")) {
    if (!doc.at("kappa_ref").is_number()) {
      throw Error(ErrorCode::ParseError, "field 'kappa_ref' is not a number");
    }
    *kappa_ref = doc.at("kappa_ref").get<double>();
  }
  return p;
}

}  // namespace eldm
