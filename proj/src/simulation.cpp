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

#include "eldm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

namespace eldm
{
namespace
{

struct Rate
{
  double x;
  double y;
  double heading;
};

Rate kinematics(double heading, double speed, double yaw_rate)
{
  return {speed * std::cos(heading), speed * std::sin(heading), yaw_rate};
}

double sign_of(CurveDirection d)
{
  return d == CurveDirection::Left ? 1.0 : -1.0;
}

const char * direction_name(CurveDirection d)
{
  return d == CurveDirection::Left ? "left" : "right";
}

struct CurveRegion
{
  CurveDirection direction;
  double entry;
  double apex;
  double exit;
};

std::vector<CurveRegion> detect_curves(const RoadCenterline & road, const FeatureThresholds & th)
{
  std::vector<CurveRegion> out;
  const auto & poses = road.poses();
  std::size_t i = 0;
  while (i < poses.size()) {
    const double k = poses[i].curvature;
    if (std::abs(k) <= th.kappa_min) {
      ++i;
      continue;
    }
    const bool left = k > 0.0;
    std::size_t j = i;
    double peak = 0.0;
    while (j < poses.size() && std::abs(poses[j].curvature) > th.kappa_min &&
      (poses[j].curvature > 0.0) == left)
    {
      peak = std::max(peak, std::abs(poses[j].curvature));
      ++j;
    }
    const double entry = poses[i].station;
    const double exit = poses[j - 1].station;
    if (exit - entry >= th.min_curve_length) {
      // Middle of the max-|kappa| plateau.
      const double tol = 1e-9 * std::max(peak, 1e-12);
      std::size_t first = j;
      std::size_t last = i;
      for (std::size_t m = i; m < j; ++m) {
        if (std::abs(poses[m].curvature) >= peak - tol) {
          first = std::min(first, m);
          last = m;
        }
      }
      const double apex = 0.5 * (poses[first].station + poses[last].station);
      out.push_back({left ? CurveDirection::Left : CurveDirection::Right, entry, apex, exit});
    }
    i = j;
  }
  return out;
}

/// Station interval represented by sample i: halfway to its neighbours.
std::pair<double, double> sample_cell(const std::vector<TraceSample> & s, std::size_t i)
{
  const double lo = i == 0 ? s[i].station : 0.5 * (s[i - 1].station + s[i].station);
  const double hi = i + 1 == s.size() ? s[i].station : 0.5 * (s[i].station + s[i + 1].station);
  return {lo, hi};
}

void check_trace(const OffsetTrace & trace)
{
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    if (!(trace.samples[i].station > trace.samples[i - 1].station)) {
      throw Error(ErrorCode::InvalidArgument,
        fmt::format("trace stations must increase (sample {})", i));
    }
  }
}

double json_number(const nlohmann::ordered_json & doc, const char * key)
{
  if (!doc.contains(key) || !doc.at(key).is_number()) {
    throw Error(ErrorCode::ParseError, fmt::format("missing numeric field '{}'", key));
  }
  return doc.at(key).get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------

void SimConfig::validate(const PlannerConfig & planner) const
{
  if (!(dt > 0.0)) {throw Error(ErrorCode::InvalidConfig, "dt must be positive");}
  if (!(pursuit_lookahead > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "pursuit lookahead must be positive");
  }
  if (!(wheelbase > 0.0)) {throw Error(ErrorCode::InvalidConfig, "wheelbase must be positive");}
  if (!(max_steering > 0.0 && max_steering < M_PI / 2)) {
    throw Error(ErrorCode::InvalidConfig, "max steering must lie in (0, pi/2)");
  }
  if (!(path_sample_spacing > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "path sample spacing must be positive");
  }
  if (!(speed >= 0.0) ||
    (enforce_speed_band && (speed < planner.min_speed || speed > planner.max_speed)))
  {
    throw Error(ErrorCode::InvalidConfig,
      fmt::format("speed {} m/s outside [{}, {}]", speed, planner.min_speed, planner.max_speed));
  }
}

VehicleState bicycle_step(const VehicleState & s, const SimConfig & cfg)
{
  const double v = s.speed;
  const double yaw = v * std::tan(s.steering) / cfg.wheelbase;
  const double h = cfg.dt;
  const Rate k1 = kinematics(s.heading, v, yaw);
  const Rate k2 = kinematics(s.heading + 0.5 * h * k1.heading, v, yaw);
  const Rate k3 = kinematics(s.heading + 0.5 * h * k2.heading, v, yaw);
  const Rate k4 = kinematics(s.heading + h * k3.heading, v, yaw);
  VehicleState out = s;
  out.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  out.heading += h / 6.0 * (k1.heading + 2.0 * k2.heading + 2.0 * k3.heading + k4.heading);
  out.time += h;
  return out;
}

// ---------------------------------------------------------------------------

PursuitPath::PursuitPath(LocalPath path, double spacing)
: path_(std::move(path))
{
  double covered = 0.0;
  for (const auto & seg : path_.segments) {
    const auto n = std::max<long>(1, static_cast<long>(std::ceil(seg.length / spacing)));
    for (long k = points_.empty() ? 0 : 1; k <= n; ++k) {
      const double s = k == n ? seg.length :
        seg.length * static_cast<double>(k) / static_cast<double>(n);
      const auto pose = evaluate_clothoid(seg, s);
      points_.push_back({pose.x, pose.y});
      arc_.push_back(covered + s);
    }
    covered += seg.length;
  }
  length_ = covered;
}

PursuitPath::Foot PursuitPath::locate(double x, double y) const
{
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double dx = points_[i].x - x;
    const double dy = points_[i].y - y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  double arc = arc_[best];
  double arc_d2 = best_d2;
  for (std::size_t a : {best == 0 ? best : best - 1, best}) {
    const std::size_t b = a + 1;
    if (b >= points_.size()) {continue;}
    const double ex = points_[b].x - points_[a].x;
    const double ey = points_[b].y - points_[a].y;
    const double len2 = ex * ex + ey * ey;
    if (len2 <= 0.0) {continue;}
    const double t = std::clamp(((x - points_[a].x) * ex + (y - points_[a].y) * ey) / len2,
      0.0, 1.0);
    const double px = points_[a].x + t * ex - x;
    const double py = points_[a].y + t * ey - y;
    const double d2 = px * px + py * py;
    if (d2 < arc_d2) {
      arc_d2 = d2;
      arc = arc_[a] + t * (arc_[b] - arc_[a]);
    }
  }
  return {arc, std::sqrt(arc_d2)};
}

double pure_pursuit_steer(const VehicleState & state, const PursuitPath & path,
  const SimConfig & cfg)
{
  const double here = path.project(state.x, state.y);
  const double goal_arc = here + cfg.pursuit_lookahead;
  if (goal_arc > path.length() + 1e-9) {
    throw Error(ErrorCode::GoalNotFound,
      fmt::format("goal at arc {:.3f} m beyond path length {:.3f} m", goal_arc, path.length()));
  }
  const auto goal = path.path().evaluate(goal_arc);
  const double alpha =
    std::atan2(goal.y - state.y, goal.x - state.x) - state.heading;
  const double delta = std::atan(
    2.0 * cfg.wheelbase * std::sin(alpha) / cfg.pursuit_lookahead);
  return std::clamp(delta, -cfg.max_steering, cfg.max_steering);
}

double pure_pursuit_steer(const VehicleState & state, const LocalPath & path,
  const SimConfig & cfg)
{
  return pure_pursuit_steer(state, PursuitPath(path, cfg.path_sample_spacing), cfg);
}

// ---------------------------------------------------------------------------

SimulationResult run_simulation(const RoadCenterline & road, const DriverParams & params,
  const PlannerConfig & planner_cfg, const SimConfig & sim_cfg)
{
  planner_cfg.validate();
  sim_cfg.validate(planner_cfg);
  if (!(road.length() > planner_cfg.horizon + 50.0)) {
    throw Error(ErrorCode::InvalidConfig,
      fmt::format("road length {} m must exceed horizon + 50 m", road.length()));
  }

  SimulationResult result;
  const Point2 start = from_lateral(road, {0.0, params.dy0});
  VehicleState state;
  state.x = start.x;
  state.y = start.y;
  state.heading = road.heading_at(0.0);
  state.speed = sim_cfg.speed;

  const double stop = road.length() - planner_cfg.horizon;
  std::optional<LocalPath> plan;
  std::optional<PursuitPath> pursuit;
  double traveled = 0.0;
  double last_station = -std::numeric_limits<double>::infinity();
  // Hard cap well above any sensible run time.
  const auto max_steps = static_cast<long>(
    10.0 * road.length() / std::max(sim_cfg.speed * sim_cfg.dt, 1e-6)) + 100;

  try {
    for (long step = 0; step < max_steps; ++step) {
      const auto lat = to_lateral(road, {state.x, state.y});
      if (lat.station > stop) {break;}

      LocalPath next = planner_step({{state.x, state.y, state.heading}, traveled}, road, params,
        planner_cfg, plan);
      if (!plan || !(next == *plan)) {
        pursuit.emplace(next, sim_cfg.path_sample_spacing);
        plan = std::move(next);
      }
      state.steering = pure_pursuit_steer(state, *pursuit, sim_cfg);
      result.tracking_error.push_back(pursuit->locate(state.x, state.y).distance);

      if (lat.station > last_station) {
        result.trace.samples.push_back({lat.station, lat.offset, road.curvature_at(lat.station),
          state.x, state.y, state.heading, state.steering});
        last_station = lat.station;
      }
      result.trajectory.push_back(state);

      state = bicycle_step(state, sim_cfg);
      traveled += state.speed * sim_cfg.dt;
    }
  } catch (const Error & e) {
    if (e.code() != ErrorCode::PlanInfeasible && e.code() != ErrorCode::GoalNotFound) {throw;}
    result.abort_code = e.code();
    result.diagnostic = fmt::format("aborted at t = {:.2f} s: {}", state.time, e.what());
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<CurvatureKnot> validation_road_profile(const ValidationRoadSpec & spec)
{
  const std::vector<std::pair<double, double>> pieces{
    {spec.gentle_right, spec.gentle_length},
    {0.0, spec.first_straight},
    {spec.sharp, spec.sharp_length},
    {-spec.sharp, spec.sharp_length},
    {0.0, spec.short_straight},
    {-spec.mild, spec.mild_length},
    {spec.mild, spec.mild_length},
    {0.0, spec.final_straight},
  };
  std::vector<CurvatureKnot> knots;
  double s = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0) {s += spec.transition;}
    knots.push_back({s, pieces[i].first});
    s += pieces[i].second;
    knots.push_back({s, pieces[i].first});
  }
  return knots;
}

RoadCenterline build_validation_road(const ValidationRoadSpec & spec, double ds_grid)
{
  const auto knots = validation_road_profile(spec);
  return centerline_from_curvature(knots, Pose2{}, ds_grid);
}

// ---------------------------------------------------------------------------

double CurveFeatureReport::peak_left() const
{
  double best = 0.0;
  for (const auto & c : curves) {
    if (c.direction == CurveDirection::Left) {best = std::max(best, std::abs(c.peak_cut_offset));}
  }
  return best;
}

double CurveFeatureReport::peak_right() const
{
  double best = 0.0;
  for (const auto & c : curves) {
    if (c.direction == CurveDirection::Right) {
      best = std::max(best, std::abs(c.peak_cut_offset));
    }
  }
  return best;
}

double straight_mean_offset(const OffsetTrace & trace, const RoadCenterline & road,
  const FeatureThresholds & th)
{
  check_trace(trace);
  const auto curves = detect_curves(road, th);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto & sample : trace.samples) {
    if (sample.station < th.initial_exclusion || sample.station > road.length()) {continue;}
    if (std::abs(road.curvature_at(sample.station)) >= th.kappa_min) {continue;}
    const bool clear = std::none_of(curves.begin(), curves.end(), [&](const CurveRegion & c) {
        return sample.station > c.entry - th.straight_clearance &&
               sample.station < c.exit + th.straight_clearance;
      });
    if (!clear) {continue;}
    sum += sample.offset;
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() :
         sum / static_cast<double>(count);
}

CurveFeatureReport extract_features(const OffsetTrace & trace, const RoadCenterline & road,
  const FeatureThresholds & th)
{
  check_trace(trace);
  const auto regions = detect_curves(road, th);
  if (regions.empty()) {
    throw Error(ErrorCode::NoCurvesDetected,
      fmt::format("no region with |kappa| > {} lasting {} m", th.kappa_min,
        th.min_curve_length));
  }
  const auto & s = trace.samples;
  CurveFeatureReport report;
  for (const auto & region : regions) {
    CurveFeatures f;
    f.direction = region.direction;
    f.entry = region.entry;
    f.apex = region.apex;
    f.exit = region.exit;
    const double sign = sign_of(region.direction);

    const double lo = region.entry - th.peak_margin;
    const double hi = region.exit + th.peak_margin;
    double best_in = -std::numeric_limits<double>::infinity();
    double best_out = -std::numeric_limits<double>::infinity();
    const double out_lo = region.entry - th.outward_before;
    const double out_hi = region.entry + th.outward_after;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double st = s[i].station;
      if (st >= lo && st <= hi) {
        if (sign * s[i].offset > best_in) {
          best_in = sign * s[i].offset;
          f.peak_cut_offset = s[i].offset;
          f.peak_cut_station = st;
        }
        if (sign * s[i].offset > th.cut_band) {
          const auto [a, b] = sample_cell(s, i);
          f.cut_length += std::max(0.0, std::min(b, hi) - std::max(a, lo));
        }
      }
      if (st >= out_lo && st <= out_hi && -sign * s[i].offset > best_out) {
        best_out = -sign * s[i].offset;
        f.precurve_outward_offset = s[i].offset;
        f.precurve_outward_station = st;
      }
    }
    if (!std::isfinite(best_in)) {
      throw Error(ErrorCode::InvalidArgument,
        fmt::format("trace does not cover the {} curve at {} m", direction_name(f.direction),
          f.entry));
    }
    f.peak_lag = f.peak_cut_station - f.entry;
    report.curves.push_back(f);
  }
  report.straight_mean_offset = straight_mean_offset(trace, road, th);
  return report;
}

TypeComparison compare_types(const CurveFeatureReport & a, const CurveFeatureReport & b)
{
  if (a.curves.size() != b.curves.size()) {
    throw Error(ErrorCode::RoadMismatch,
      fmt::format("reports cover {} and {} curves", a.curves.size(), b.curves.size()));
  }
  TypeComparison out;
  for (std::size_t i = 0; i < a.curves.size(); ++i) {
    const auto & ca = a.curves[i];
    const auto & cb = b.curves[i];
    if (ca.direction != cb.direction) {
      throw Error(ErrorCode::RoadMismatch, fmt::format("curve {} is {} in one report and {} "
        "in the other", i + 1, direction_name(ca.direction), direction_name(cb.direction)));
    }
    out.curves.push_back({ca.direction, ca.peak_cut_offset, cb.peak_cut_offset, ca.peak_lag,
      cb.peak_lag, ca.precurve_outward_offset, cb.precurve_outward_offset, ca.cut_length,
      cb.cut_length});
  }
  out.symmetry_a = a.peak_left() / a.peak_right();
  out.symmetry_b = b.peak_left() / b.peak_right();
  out.straight_a = a.straight_mean_offset;
  out.straight_b = b.straight_mean_offset;
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json report_to_json(const CurveFeatureReport & report)
{
  nlohmann::ordered_json doc;
  doc["schema"] = kFeaturesSchema;
  auto curves = nlohmann::ordered_json::array();
  for (const auto & c : report.curves) {
    nlohmann::ordered_json j;
    j["direction"] = direction_name(c.direction);
    j["entry_m"] = c.entry;
    j["apex_m"] = c.apex;
    j["exit_m"] = c.exit;
    j["peak_cut_offset_m"] = c.peak_cut_offset;
    j["peak_cut_station_m"] = c.peak_cut_station;
    j["peak_lag_m"] = c.peak_lag;
    j["precurve_outward_offset_m"] = c.precurve_outward_offset;
    j["precurve_outward_station_m"] = c.precurve_outward_station;
    j["cut_length_m"] = c.cut_length;
    curves.push_back(std::move(j));
  }
  doc["curves"] = std::move(curves);
  if (std::isfinite(report.straight_mean_offset)) {
    doc["straight_mean_offset_m"] = report.straight_mean_offset;
  } else {
    doc["straight_mean_offset_m"] = nullptr;
  }
  return doc;
}

CurveFeatureReport report_from_json(const nlohmann::ordered_json & doc)
{
  if (!doc.is_object() || doc.value("schema", std::string()) != kFeaturesSchema) {
    throw Error(ErrorCode::ParseError,
      fmt::format("expected a document with schema '{}'", kFeaturesSchema));
  }
  if (!doc.contains("curves") || !doc.at("curves").is_array()) {
    throw Error(ErrorCode::ParseError, "missing array field 'curves'");
  }
  CurveFeatureReport report;
  for (const auto & j : doc.at("curves")) {
    CurveFeatures c;
    const auto dir = j.value("direction", std::string());
    if (dir != "left" && dir != "right") {
      throw Error(ErrorCode::ParseError, fmt::format("bad curve direction '{}'", dir));
    }
    c.direction = dir == "left" ? CurveDirection::Left : CurveDirection::Right;
    c.entry = json_number(j, "entry_m");
    c.apex = json_number(j, "apex_m");
    c.exit = json_number(j, "exit_m");
    c.peak_cut_offset = json_number(j, "peak_cut_offset_m");
    c.peak_cut_station = json_number(j, "peak_cut_station_m");
    c.peak_lag = json_number(j, "peak_lag_m");
    c.precurve_outward_offset = json_number(j, "precurve_outward_offset_m");
    c.precurve_outward_station = json_number(j, "precurve_outward_station_m");
    c.cut_length = json_number(j, "cut_length_m");
    report.curves.push_back(c);
  }
  const auto & sm = doc.contains("straight_mean_offset_m") ?
    doc.at("straight_mean_offset_m") : nlohmann::ordered_json();
  report.straight_mean_offset = sm.is_number() ? sm.get<double>() :
    std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace eldm
