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
/// \brief Closed-loop validation: kinematic bicycle + pure pursuit following
/// the planner, offset traces, and per-curve behavioral features.

#ifndef ELDM__SIMULATION_HPP_
#define ELDM__SIMULATION_HPP_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eldm/eldm_planner.hpp"
#include "eldm/road_geometry.hpp"

namespace eldm
{

/// Rear-axle referenced kinematic bicycle state.
struct VehicleState
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double steering = 0.0;
  double time = 0.0;

  bool operator==(const VehicleState &) const = default;
};

struct SimConfig
{
  double wheelbase = 2.7;
  double dt = 0.01;
  double speed = 25.0;
  double pursuit_lookahead = 15.0;
  double max_steering = 0.5;
  /// Spacing of the polyline used to locate the vehicle on a plan.
  double path_sample_spacing = 0.5;
  bool enforce_speed_band = true;

  /// Throws InvalidConfig.
  void validate(const PlannerConfig & planner) const;
};

/// One RK4 step of x' = v cos(h), y' = v sin(h), h' = v tan(delta) / L with
/// speed and steering held over the step.
VehicleState bicycle_step(const VehicleState & state, const SimConfig & cfg);

/// A LocalPath with a dense polyline for locating the vehicle on it.
class PursuitPath
{
public:
  PursuitPath(LocalPath path, double spacing);

  const LocalPath & path() const {return path_;}
  double length() const {return length_;}
  struct Foot
  {
    double arc = 0.0;
    double distance = 0.0;
  };
  /// Closest point of the sampled path to (x, y).
  Foot locate(double x, double y) const;
  double project(double x, double y) const {return locate(x, y).arc;}

private:
  LocalPath path_;
  double length_ = 0.0;
  std::vector<double> arc_;
  std::vector<Point2> points_;
};

/// delta = atan(2 L sin(alpha) / L_d), alpha the goal bearing in the vehicle
/// frame, goal at arc distance L_d past the vehicle's projection on the path.
/// Clamped to +/- max_steering. Throws GoalNotFound when the path is too short.
double pure_pursuit_steer(const VehicleState & state, const PursuitPath & path,
  const SimConfig & cfg);
double pure_pursuit_steer(const VehicleState & state, const LocalPath & path,
  const SimConfig & cfg);

struct TraceSample
{
  double station = 0.0;
  double offset = 0.0;
  double kappa = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double steer = 0.0;

  bool operator==(const TraceSample &) const = default;
};

struct OffsetTrace
{
  std::vector<TraceSample> samples;

  bool operator==(const OffsetTrace &) const = default;
};

struct SimulationResult
{
  std::vector<VehicleState> trajectory;
  OffsetTrace trace;
  /// Distance from the vehicle to the plan it is following, per trajectory step.
  std::vector<double> tracking_error;
  /// Set when the run aborted early (PlanInfeasible or GoalNotFound); the
  /// trace then holds everything recorded up to the failure.
  std::optional<ErrorCode> abort_code;
  std::string diagnostic;

  bool completed() const {return !abort_code.has_value();}
};

/// Starts on the centerline at station 0 shifted by params.dy0, road-aligned,
/// and runs planner_step -> pure_pursuit_steer -> bicycle_step until the
/// projected station passes road length - horizon. Throws InvalidConfig when
/// the road is not longer than horizon + 50 m.
SimulationResult run_simulation(const RoadCenterline & road, const DriverParams & params,
  const PlannerConfig & planner_cfg, const SimConfig & sim_cfg);

/// Magnitudes of the synthetic curve combination used for type validation.
struct ValidationRoadSpec
{
  double gentle_right = -0.002;
  double gentle_length = 200.0;
  double first_straight = 300.0;
  double sharp = 0.01;
  double sharp_length = 150.0;
  double short_straight = 50.0;
  double mild = 0.006;
  double mild_length = 150.0;
  double final_straight = 300.0;
  double transition = 30.0;
};

/// Curvature knots: gentle right, straight, sharp S (left then right), short
/// straight, milder S (right then left), final straight, with linear
/// curvature transitions between pieces.
std::vector<CurvatureKnot> validation_road_profile(const ValidationRoadSpec & spec = {});
RoadCenterline build_validation_road(const ValidationRoadSpec & spec = {}, double ds_grid = 1.0);

enum class CurveDirection {Left, Right};

struct FeatureThresholds
{
  double kappa_min = 1e-3;
  double min_curve_length = 20.0;
  double peak_margin = 50.0;        // peak search in [entry - m, exit + m]
  double outward_before = 100.0;    // outward drift search in [entry - b, entry + a]
  double outward_after = 20.0;
  double cut_band = 0.2;
  double straight_clearance = 50.0;
  double initial_exclusion = 100.0;
};

struct CurveFeatures
{
  CurveDirection direction = CurveDirection::Left;
  double entry = 0.0;
  double apex = 0.0;
  double exit = 0.0;
  double peak_cut_offset = 0.0;
  double peak_cut_station = 0.0;
  double peak_lag = 0.0;
  double precurve_outward_offset = 0.0;
  double precurve_outward_station = 0.0;
  double cut_length = 0.0;
};

struct CurveFeatureReport
{
  std::vector<CurveFeatures> curves;
  double straight_mean_offset = 0.0;

  /// Largest |peak_cut_offset| over left (right) curves; 0 if none.
  double peak_left() const;
  double peak_right() const;
};

/// Curves are maximal same-sign runs of |kappa| > kappa_min on the road grid
/// lasting at least min_curve_length; apex is the middle of the max-|kappa|
/// plateau. Throws NoCurvesDetected.
CurveFeatureReport extract_features(const OffsetTrace & trace, const RoadCenterline & road,
  const FeatureThresholds & thresholds = {});

/// Mean offset over straight stations at least straight_clearance from any
/// curve and past initial_exclusion. NaN when no sample qualifies.
double straight_mean_offset(const OffsetTrace & trace, const RoadCenterline & road,
  const FeatureThresholds & thresholds = {});

struct CurveDelta
{
  CurveDirection direction = CurveDirection::Left;
  double peak_a = 0.0;
  double peak_b = 0.0;
  double lag_a = 0.0;
  double lag_b = 0.0;
  double outward_a = 0.0;
  double outward_b = 0.0;
  double cut_length_a = 0.0;
  double cut_length_b = 0.0;
};

struct TypeComparison
{
  std::vector<CurveDelta> curves;
  double symmetry_a = 0.0;  // |peak_left| / |peak_right|
  double symmetry_b = 0.0;
  double straight_a = 0.0;
  double straight_b = 0.0;
};

/// Throws RoadMismatch when the curve counts or directions differ.
TypeComparison compare_types(const CurveFeatureReport & a, const CurveFeatureReport & b);

inline constexpr const char * kFeaturesSchema = "eldm_features_v1";

nlohmann::ordered_json report_to_json(const CurveFeatureReport & report);
CurveFeatureReport report_from_json(const nlohmann::ordered_json & doc);

}  // namespace eldm

#endif  // ELDM__SIMULATION_HPP_
