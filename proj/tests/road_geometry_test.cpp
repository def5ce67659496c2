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

#include "eldm/road_geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace eldm
{
namespace
{

constexpr double kPi = std::numbers::pi;

std::vector<Point2> circle_points(double radius, double sweep, int count)
{
  // CCW circle starting at (0, 0) heading +x, center (0, radius).
  std::vector<Point2> pts;
  for (int i = 0; i < count; ++i) {
    const double a = sweep * i / (count - 1);
    pts.push_back({radius * std::sin(a), radius * (1.0 - std::cos(a))});
  }
  return pts;
}

RoadCenterline straight_road(double length)
{
  const std::vector<CurvatureKnot> profile = {{0.0, 0.0}, {length, 0.0}};
  return centerline_from_curvature(profile, {0.0, 0.0, 0.0}, 1.0);
}

RoadCenterline circle_road(double radius, double sweep)
{
  const std::vector<CurvatureKnot> profile = {{0.0, 1.0 / radius}, {radius * sweep, 1.0 / radius}};
  return centerline_from_curvature(profile, {0.0, 0.0, 0.0}, 1.0);
}

void expect_throws_code(auto && fn, ErrorCode code)
{
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// --- build_centerline -------------------------------------------------------

TEST(BuildCenterline, ColinearPointsAreStraight)
{
  const std::vector<Point2> pts = {{0, 0}, {10, 0}, {25, 0}, {40, 0}};
  const auto road = build_centerline(pts, 1.0);
  EXPECT_NEAR(road.length(), 40.0, 1e-9);
  for (const auto & p : road.poses()) {
    EXPECT_NEAR(p.heading, 0.0, 1e-12);
    EXPECT_NEAR(p.curvature, 0.0, 1e-12);
    EXPECT_NEAR(p.y, 0.0, 1e-12);
  }
}

TEST(BuildCenterline, CircleCurvatureMatchesRadius)
{
  const auto road = build_centerline(circle_points(100.0, kPi, 181), 1.0);
  EXPECT_NEAR(road.length(), 100.0 * kPi, 0.5);
  for (const auto & p : road.poses()) {
    EXPECT_NEAR(p.curvature, 0.01, 1e-4) << "station " << p.station;
  }
}

TEST(BuildCenterline, Errors)
{
  const std::vector<Point2> two = {{0, 0}, {1, 0}};
  expect_throws_code([&] {build_centerline(two, 1.0);}, ErrorCode::TooFewPoints);
  const std::vector<Point2> repeated = {{0, 0}, {1, 0}, {1, 0}, {3, 0}};
  expect_throws_code([&] {build_centerline(repeated, 1.0);}, ErrorCode::DegenerateSegment);
}

// --- centerline_from_curvature ---------------------------------------------

TEST(CenterlineFromCurvature, ZeroCurvatureIsStraight)
{
  const std::vector<CurvatureKnot> profile = {{0.0, 0.0}, {100.0, 0.0}};
  const auto road = centerline_from_curvature(profile, {1.0, 2.0, 0.5}, 1.0);
  EXPECT_NEAR(road.length(), 100.0, 1e-12);
  const auto & end = road.poses().back();
  EXPECT_NEAR(end.x, 1.0 + 100.0 * std::cos(0.5), 1e-9);
  EXPECT_NEAR(end.y, 2.0 + 100.0 * std::sin(0.5), 1e-9);
}

TEST(CenterlineFromCurvature, FullCircleCloses)
{
  const double length = 2.0 * kPi * 100.0;
  const std::vector<CurvatureKnot> profile = {{0.0, 0.01}, {length, 0.01}};
  // A grid step that divides the circumference exactly.
  const double ds = length / 628.0;
  const auto road = centerline_from_curvature(profile, {0.0, 0.0, 0.0}, ds);
  const auto & end = road.poses().back();
  EXPECT_NEAR(road.length(), length, 1e-9);
  EXPECT_LT(std::hypot(end.x, end.y), 1e-3);
}

TEST(CenterlineFromCurvature, NonMonotoneStations)
{
  const std::vector<CurvatureKnot> profile = {{0.0, 0.0}, {50.0, 0.0}, {40.0, 0.0}};
  expect_throws_code(
    [&] {centerline_from_curvature(profile, {}, 1.0);}, ErrorCode::NonMonotoneStations);
}

TEST(CenterlineFromCurvature, CurvatureRecoveredByPolylineIngestion)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> kappa(-0.015, 0.015);
  std::uniform_real_distribution<double> piece(40.0, 120.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CurvatureKnot> profile = {{0.0, 0.0}};
    double s = 0.0;
    for (int k = 0; k < 8; ++k) {
      s += piece(rng);
      profile.push_back({s, kappa(rng)});
    }
    const double ds = 0.5;
    const auto road = centerline_from_curvature(profile, {0.0, 0.0, 0.3}, ds);
    std::vector<Point2> pts;
    for (const auto & p : road.poses()) {pts.push_back({p.x, p.y});}
    const auto rebuilt = build_centerline(pts, ds);
    double worst = 0.0;
    for (const auto & p : rebuilt.poses()) {
      if (p.station > road.length()) {break;}
      worst = std::max(worst, std::abs(p.curvature - road.curvature_at(p.station)));
    }
    EXPECT_LT(worst, 1e-3) << "trial " << trial;
  }
}

// --- to_lateral / from_lateral ---------------------------------------------

TEST(Lateral, PointOnCenterline)
{
  const auto road = circle_road(80.0, 2.0);
  const auto p = road.position_at(40.0);
  const auto c = to_lateral(road, p);
  EXPECT_NEAR(c.station, 40.0, 1e-6);
  EXPECT_NEAR(c.offset, 0.0, 1e-6);
  const auto back = from_lateral(road, {40.0, 0.0});
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
}

TEST(Lateral, LeftOfTravelIsPositive)
{
  const auto road = straight_road(100.0);
  const auto c = to_lateral(road, {50.0, 2.0});
  EXPECT_NEAR(c.station, 50.0, 1e-9);
  EXPECT_NEAR(c.offset, 2.0, 1e-9);
  const auto p = from_lateral(road, {50.0, 2.0});
  EXPECT_NEAR(p.x, 50.0, 1e-12);
  EXPECT_NEAR(p.y, 2.0, 1e-12);
}

TEST(Lateral, InsideOfLeftCurveIsPositive)
{
  const double radius = 100.0;
  const auto road = circle_road(radius, kPi / 2.0);
  // Apex of the quarter circle at angle pi/4; 1 m toward the center (0, R).
  const double a = kPi / 4.0;
  const Point2 apex{radius * std::sin(a), radius * (1.0 - std::cos(a))};
  const Point2 inside{apex.x - std::sin(a), apex.y + std::cos(a)};
  const auto c = to_lateral(road, inside);
  EXPECT_NEAR(c.offset, 1.0, 1e-6);
  EXPECT_NEAR(c.station, radius * a, 1e-4);
}

TEST(Lateral, Errors)
{
  const auto road = straight_road(100.0);
  expect_throws_code([&] {to_lateral(road, {50.0, 25.0});}, ErrorCode::OutOfCorridor);
  expect_throws_code([&] {from_lateral(road, {120.0, 0.0});}, ErrorCode::StationOutOfRange);
  expect_throws_code([&] {from_lateral(road, {-1.0, 0.0});}, ErrorCode::StationOutOfRange);
}

TEST(Lateral, AmbiguousProjectionReportsLowerStation)
{
  // Hairpin: straight out along +x, half circle of radius 5, straight back.
  const std::vector<CurvatureKnot> profile = {
    {0.0, 0.0}, {60.0, 0.0}, {60.0 + 1e-9, 0.2}, {60.0 + 5.0 * kPi, 0.2},
    {60.0 + 5.0 * kPi + 1e-9, 0.0}, {140.0, 0.0}};
  const auto road = centerline_from_curvature(profile, {0.0, 0.0, 0.0}, 0.25);
  // Midway between a point on the return leg and its foot on the outgoing leg.
  const Point2 upper = road.position_at(60.0 + 5.0 * kPi + 30.0);
  const auto proj = project(road, {upper.x, 0.5 * upper.y});
  EXPECT_TRUE(proj.ambiguous);
  EXPECT_LT(proj.coordinate.station, 60.0);
}

TEST(Lateral, RoundTripProperty)
{
  std::mt19937_64 rng(2026);
  for (int r = 0; r < 5; ++r) {
    std::uniform_real_distribution<double> kappa(-0.02, 0.02);
    std::vector<CurvatureKnot> profile = {{0.0, kappa(rng)}};
    for (int k = 1; k <= 6; ++k) {profile.push_back({k * 60.0, kappa(rng)});}
    const auto road = centerline_from_curvature(profile, {0.0, 0.0, 1.0}, 1.0);
    // 0.5 * min radius = 0.5 / 0.02 = 25 m; stay within the 20 m corridor too.
    std::uniform_real_distribution<double> station(1.0, road.length() - 1.0);
    std::uniform_real_distribution<double> offset(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
      const LateralCoordinate c{station(rng), offset(rng)};
      const auto back = to_lateral(road, from_lateral(road, c));
      EXPECT_NEAR(back.station, c.station, 1e-6);
      EXPECT_NEAR(back.offset, c.offset, 1e-6);
    }
  }
}

// --- clothoids --------------------------------------------------------------

TEST(Clothoid, EvaluateStraight)
{
  const ClothoidSegment seg{{1.0, 1.0, 0.3}, 0.0, 0.0, 50.0};
  const auto p = evaluate_clothoid(seg, 20.0);
  EXPECT_NEAR(p.x, 1.0 + 20.0 * std::cos(0.3), 1e-12);
  EXPECT_NEAR(p.y, 1.0 + 20.0 * std::sin(0.3), 1e-12);
}

TEST(Clothoid, EvaluateArcMatchesCircle)
{
  const double radius = 40.0;
  const ClothoidSegment seg{{0.0, 0.0, 0.0}, 1.0 / radius, 0.0, 100.0};
  for (double s : {0.0, 10.0, 37.5, 100.0}) {
    const auto p = evaluate_clothoid(seg, s);
    EXPECT_NEAR(p.x, radius * std::sin(s / radius), 1e-9);
    EXPECT_NEAR(p.y, radius * (1.0 - std::cos(s / radius)), 1e-9);
    EXPECT_NEAR(p.heading, s / radius, 1e-15);
  }
  EXPECT_THROW(evaluate_clothoid(seg, 100.5), Error);
  EXPECT_THROW(evaluate_clothoid(seg, -0.1), Error);
}

TEST(Clothoid, CurvatureIsAffineInArcLength)
{
  const ClothoidSegment seg{{0.0, 0.0, 0.0}, -0.004, 1.3e-4, 120.0};
  // Least-squares line through 100 samples; residual must vanish.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 100;
  std::vector<double> s(n), k(n);
  for (int i = 0; i < n; ++i) {
    s[i] = seg.length * i / (n - 1);
    k[i] = evaluate_clothoid(seg, s[i]).curvature;
    sx += s[i]; sy += k[i]; sxx += s[i] * s[i]; sxy += s[i] * k[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  for (int i = 0; i < n; ++i) {
    EXPECT_LT(std::abs(k[i] - (icpt + slope * s[i])), 1e-12);
  }
}

TEST(ClothoidFit, StraightShortCircuit)
{
  const auto seg = fit_clothoid_g1({0, 0, 0}, {100, 0, 0});
  EXPECT_DOUBLE_EQ(seg.kappa0, 0.0);
  EXPECT_DOUBLE_EQ(seg.kappa_rate, 0.0);
  EXPECT_NEAR(seg.length, 100.0, 1e-12);
}

TEST(ClothoidFit, CircularArc)
{
  const double radius = 100.0;
  const Pose2 end{radius * std::sin(kPi / 4), radius * (1 - std::cos(kPi / 4)), kPi / 4};
  const auto seg = fit_clothoid_g1({0, 0, 0}, end);
  EXPECT_NEAR(seg.kappa0, 0.01, 1e-8);
  EXPECT_NEAR(seg.kappa_rate, 0.0, 1e-10);
  EXPECT_NEAR(seg.length, radius * kPi / 4, 1e-6);
}

TEST(ClothoidFit, DegenerateInput)
{
  expect_throws_code([] {fit_clothoid_g1({1, 1, 0}, {1, 1, 1});}, ErrorCode::DegenerateInput);
}

TEST(ClothoidFit, EndPoseReachedOnRandomProblems)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-1.25, 1.25);
  std::uniform_real_distribution<double> dist(5.0, 160.0);
  std::uniform_real_distribution<double> pos(-500.0, 500.0);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    const Pose2 start{pos(rng), pos(rng), heading(rng)};
    const double chord = heading(rng);
    const double d = dist(rng);
    const double phi0 = angle(rng);
    const double phi1 = angle(rng);
    const Pose2 start_aligned{start.x, start.y, chord + phi0};
    const Pose2 end{start.x + d * std::cos(chord), start.y + d * std::sin(chord), chord + phi1};
    const auto seg = fit_clothoid_g1(start_aligned, end);
    const auto p = evaluate_clothoid(seg, seg.length);
    EXPECT_LT(std::hypot(p.x - end.x, p.y - end.y), 1e-6) << "problem " << i;
    EXPECT_LT(std::abs(wrap_angle(p.heading - end.heading)), 1e-6) << "problem " << i;
  }
}

TEST(ClothoidFit, ChainIsG1Continuous)
{
  const std::vector<Pose2> nodes = {
    {0, 0, 0.1}, {50, 3, 0.05}, {100, 2, -0.1}, {150, -4, 0.0}};
  std::vector<ClothoidSegment> chain;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    chain.push_back(fit_clothoid_g1(nodes[i], nodes[i + 1]));
  }
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const auto end = evaluate_clothoid(chain[i], chain[i].length);
    const auto & next = chain[i + 1].start;
    EXPECT_LT(std::hypot(end.x - next.x, end.y - next.y), 1e-6);
    EXPECT_LT(std::abs(wrap_angle(end.heading - next.heading)), 1e-6);
  }
}

}  // namespace
}  // namespace eldm
