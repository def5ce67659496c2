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
/// \brief Lane centerlines, station/offset coordinates and clothoid segments.

#ifndef ELDM__ROAD_GEOMETRY_HPP_
#define ELDM__ROAD_GEOMETRY_HPP_

#include <span>
#include <vector>

#include "eldm/error.hpp"

namespace eldm
{

struct Point2
{
  double x = 0.0;
  double y = 0.0;
};

/// Planar pose; heading is CCW from +x in radians.
struct Pose2
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  bool operator==(const Pose2 &) const = default;
};

/// A sample of a centerline. Positive curvature is a left curve.
struct CenterlinePose
{
  double station = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double curvature = 0.0;
};

/// Signed lateral offset is positive to the left of the travel direction.
struct LateralCoordinate
{
  double station = 0.0;
  double offset = 0.0;
};

/// Arc-length parametrized centerline sampled on a uniform station grid.
///
/// Between grid samples the position is a cubic Hermite interpolant built from
/// the sampled positions and headings, so the curve is C1 and the left normal
/// used by from_lateral() is the exact normal of the curve that to_lateral()
/// projects onto. Curvature is interpolated linearly.
class RoadCenterline
{
public:
  /// Validates: at least 2 poses, uniform spacing (1e-9 m), station[0] == 0.
  explicit RoadCenterline(std::vector<CenterlinePose> poses);

  const std::vector<CenterlinePose> & poses() const {return poses_;}
  double spacing() const {return spacing_;}
  double length() const {return poses_.back().station;}
  std::size_t size() const {return poses_.size();}

  /// Interpolated pose; heading is the tangent direction of the interpolant.
  /// Throws StationOutOfRange outside [0, length].
  CenterlinePose pose_at(double station) const;
  Point2 position_at(double station) const;
  double heading_at(double station) const;
  double curvature_at(double station) const;

  /// Mirror image about the start tangent: y -> -y, heading -> -heading,
  /// curvature -> -curvature. Used for left/right symmetry checks.
  RoadCenterline mirrored() const;

  struct Derivatives
  {
    Point2 position;
    Point2 first;   // d/ds
    Point2 second;  // d2/ds2
  };
  Derivatives derivatives_at(double station) const;

private:
  std::size_t segment_index(double station) const;

  std::vector<CenterlinePose> poses_;
  double spacing_ = 1.0;
};

/// Resamples a polyline at uniform arc-length spacing and derives heading and
/// curvature by finite differences (central inside, second-order one-sided at
/// the ends). The polyline is smoothed by a chord-length cubic spline.
RoadCenterline build_centerline(std::span<const Point2> points, double ds_grid = 1.0);

struct CurvatureKnot
{
  double station = 0.0;
  double curvature = 0.0;
};

/// Integrates heading' = curvature, x' = cos(heading), y' = sin(heading) with
/// classical RK4 at ds_grid. Curvature is piecewise linear between knots. The
/// road length is the last knot station truncated to a whole number of steps.
RoadCenterline centerline_from_curvature(
  std::span<const CurvatureKnot> profile, const Pose2 & start, double ds_grid = 1.0);

struct Projection
{
  LateralCoordinate coordinate;
  double distance = 0.0;
  /// Another foot point lies within kAmbiguityTolerance of the same distance;
  /// `coordinate` then refers to the lower station.
  bool ambiguous = false;
};

inline constexpr double kDefaultCorridor = 20.0;
inline constexpr double kAmbiguityTolerance = 1e-3;

/// Foot-point projection: grid search for local distance minima, then Newton
/// refinement on the Hermite interpolant. Throws OutOfCorridor.
Projection project(const RoadCenterline & road, const Point2 & point,
  double corridor = kDefaultCorridor);

LateralCoordinate to_lateral(const RoadCenterline & road, const Point2 & point);

/// centerline(station) + offset * left_normal(station). Throws StationOutOfRange.
Point2 from_lateral(const RoadCenterline & road, const LateralCoordinate & coord);

/// Euler spiral: curvature(s) = kappa0 + kappa_rate * s for s in [0, length].
struct ClothoidSegment
{
  Pose2 start;
  double kappa0 = 0.0;
  double kappa_rate = 0.0;
  double length = 0.0;

  double curvature_at(double s) const {return kappa0 + kappa_rate * s;}
  double heading_at(double s) const
  {
    return start.heading + kappa0 * s + 0.5 * kappa_rate * s * s;
  }

  bool operator==(const ClothoidSegment &) const = default;
};

/// Pose at arc length s by adaptive Gauss-Kronrod quadrature. Throws OutOfRange.
CenterlinePose evaluate_clothoid(const ClothoidSegment & segment, double s);

/// Raised by fit_clothoid_g1 when Newton fails; carries the final residual.
class ConvergenceError : public Error
{
public:
  ConvergenceError(const std::string & message, double residual, int iterations)
  : Error(ErrorCode::NoConvergence, message), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept {return residual_;}
  int iterations() const noexcept {return iterations_;}

private:
  double residual_;
  int iterations_;
};

inline constexpr int kClothoidMaxIterations = 50;
inline constexpr double kClothoidTolerance = 1e-9;

/// G1 Hermite clothoid: finds (kappa0, kappa_rate, length) so the segment
/// starting at `start` ends at `end` with the end heading. Damped Newton on
/// the three endpoint residuals. Throws DegenerateInput or ConvergenceError.
ClothoidSegment fit_clothoid_g1(const Pose2 & start, const Pose2 & end);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace eldm

#endif  // ELDM__ROAD_GEOMETRY_HPP_
