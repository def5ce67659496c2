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
/// \brief Extended Linear Driver Model: curvature-driven node offsets and the
/// three-clothoid local path built through them.

#ifndef ELDM__ELDM_PLANNER_HPP_
#define ELDM__ELDM_PLANNER_HPP_

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eldm/road_geometry.hpp"

namespace eldm
{

inline constexpr std::size_t kNodeCount = 3;
inline constexpr std::size_t kParamCount = 19;

using Vector3 = std::array<double, kNodeCount>;
using Matrix3 = std::array<Vector3, kNodeCount>;
using ParamVector = std::array<double, kParamCount>;

/// The 19 model parameters. Row i of a matrix produces the offset at node i,
/// column j weighs the normalized mean curvature of lookahead segment j.
struct DriverParams
{
  Matrix3 p_left{};
  Matrix3 p_right{};
  double dy0 = 0.0;

  bool operator==(const DriverParams &) const = default;

  /// Throws InvalidConfig on non-finite entries or |dy0| > dy0_bound.
  void validate(double dy0_bound = 1.0) const;

  /// Same parameters with p_left and p_right exchanged.
  DriverParams swapped_sides() const;
};

/// How the left/right matrix is chosen for a curvature term.
enum class Gating
{
  Independent,  ///< each segment term by the sign of its own curvature
  MeanSign,     ///< all terms by the sign of the mean of the three curvatures
};

struct PlannerConfig
{
  double horizon = 150.0;
  Vector3 node_stations{50.0, 100.0, 150.0};
  double kappa_ref = 0.01;
  double replan_interval = 5.0;
  double min_speed = 60.0 / 3.6;
  double max_speed = 110.0 / 3.6;
  Gating gating = Gating::Independent;

  /// Throws InvalidConfig.
  void validate() const;
};

struct NodePointPlan
{
  Vector3 stations{};
  Vector3 offsets{};
  Vector3 segment_kappas{};

  bool operator==(const NodePointPlan &) const = default;
};

struct LocalPath
{
  std::array<ClothoidSegment, kNodeCount> segments{};
  double origin_station = 0.0;
  NodePointPlan node_plan;
  /// Distance the vehicle had travelled when this plan was made.
  double travel_at_plan = 0.0;

  double length() const;
  /// Pose at arc length s along the chained segments, clamped to [0, length].
  CenterlinePose evaluate(double s) const;

  bool operator==(const LocalPath &) const = default;
};

/// Mean of `kappa` sampled at `spacing` over each node interval
/// [s0 + node[j-1], s0 + node[j]] (node[-1] = 0). Both interval ends are
/// included once. Shared by the planner and the identification code.
Vector3 window_average_curvatures(const std::function<double(double)> & kappa, double s0,
  const Vector3 & node_stations, double spacing);

/// Throws HorizonExceedsRoad when the last node lies beyond the road end.
Vector3 segment_average_curvatures(const RoadCenterline & road, double s0,
  const Vector3 & node_stations);

/// offset_i = sum_j M(kappa_j)[i][j] * kappa_j / kappa_ref + dy0.
Vector3 compute_node_offsets(const DriverParams & params, const Vector3 & kappas,
  double kappa_ref, Gating gating = Gating::Independent);

/// Plans from the vehicle pose (lateral coordinate + Cartesian heading) at
/// station s0. Node targets are placed at from_lateral(node station, offset)
/// with the centerline heading. Throws HorizonExceedsRoad or PlanInfeasible.
LocalPath plan_local_path(const RoadCenterline & road, double s0,
  const LateralCoordinate & current, double heading, const DriverParams & params,
  const PlannerConfig & cfg);

struct VehicleLocation
{
  Pose2 pose;
  double traveled = 0.0;
};

/// Cyclic replanning by travelled distance. Returns `last_plan` unchanged while
/// less than cfg.replan_interval has been covered since it was made.
LocalPath planner_step(const VehicleLocation & vehicle, const RoadCenterline & road,
  const DriverParams & params, const PlannerConfig & cfg,
  const std::optional<LocalPath> & last_plan);

/// Layout: row-major p_left (9), row-major p_right (9), dy0 (1).
ParamVector params_to_vector(const DriverParams & params);
DriverParams vector_to_params(const ParamVector & v);
/// Throws WrongLength unless v.size() == 19.
DriverParams vector_to_params(std::span<const double> v);

/// Persisted form, schema `eldm_params_v1`.
nlohmann::ordered_json params_to_json(const DriverParams & params, double kappa_ref);
/// Returns the parameters and writes the stored kappa_ref (if any) to *kappa_ref.
DriverParams params_from_json(const nlohmann::ordered_json & doc, double * kappa_ref = nullptr);

inline constexpr const char * kParamsSchema = "eldm_params_v1";

}  // namespace eldm

#endif  // ELDM__ELDM_PLANNER_HPP_
