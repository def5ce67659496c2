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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace eldm
{
namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kSpacingTolerance = 1e-9;
constexpr double kQuadratureTolerance = 1e-10;

double dot(const Point2 & a, const Point2 & b) {return a.x * b.x + a.y * b.y;}
double cross(const Point2 & a, const Point2 & b) {return a.x * b.y - a.y * b.x;}
Point2 operator-(const Point2 & a, const Point2 & b) {return {a.x - b.x, a.y - b.y};}
double norm(const Point2 & a) {return std::hypot(a.x, a.y);}

// ---------------------------------------------------------------------------
// Chord-length clamped cubic spline used to smooth polyline input.

struct Spline1d
{
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> m;  // second derivatives at knots

  // Derivative at t[at] of the Lagrange polynomial through up to 4 knots.
  static double end_slope(std::span<const double> ts, std::span<const double> ys, double at)
  {
    double slope = 0.0;
    const std::size_t n = ts.size();
    for (std::size_t j = 0; j < n; ++j) {
      double denom = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != j) {denom *= ts[j] - ts[k];}
      }
      double numer = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) {continue;}
        double prod = 1.0;
        for (std::size_t l = 0; l < n; ++l) {
          if (l != j && l != k) {prod *= at - ts[l];}
        }
        numer += prod;
      }
      slope += ys[j] * numer / denom;
    }
    return slope;
  }

  Spline1d(std::vector<double> knots, std::vector<double> values)
  : t(std::move(knots)), y(std::move(values)), m(t.size(), 0.0)
  {
    const std::size_t n = t.size();
    const std::size_t w = std::min<std::size_t>(n, 4);
    const double d0 = end_slope(
      std::span(t).first(w), std::span(y).first(w), t.front());
    const double dn = end_slope(
      std::span(t).last(w), std::span(y).last(w), t.back());

    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
    const double h0 = t[1] - t[0];
    b[0] = 2.0 * h0;
    c[0] = h0;
    r[0] = 6.0 * ((y[1] - y[0]) / h0 - d0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = t[i] - t[i - 1];
      const double hr = t[i + 1] - t[i];
      a[i] = hl;
      b[i] = 2.0 * (hl + hr);
      c[i] = hr;
      r[i] = 6.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
    }
    const double hn = t[n - 1] - t[n - 2];
    a[n - 1] = hn;
    b[n - 1] = 2.0 * hn;
    r[n - 1] = 6.0 * (dn - (y[n - 1] - y[n - 2]) / hn);

    // Thomas algorithm.
    for (std::size_t i = 1; i < n; ++i) {
      const double f = a[i] / b[i - 1];
      b[i] -= f * c[i - 1];
      r[i] -= f * r[i - 1];
    }
    m[n - 1] = r[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0; ) {
      m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
    }
  }

  std::size_t interval(double at) const
  {
    auto it = std::upper_bound(t.begin(), t.end(), at);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
  }

  double value(double at) const
  {
    const std::size_t i = interval(at);
    const double h = t[i + 1] - t[i];
    const double A = (t[i + 1] - at) / h;
    const double B = (at - t[i]) / h;
    return A * y[i] + B * y[i + 1] +
           ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
  }

  double slope(double at) const
  {
    const std::size_t i = interval(at);
    const double h = t[i + 1] - t[i];
    const double A = (t[i + 1] - at) / h;
    const double B = (at - t[i]) / h;
    return (y[i + 1] - y[i]) / h -
           (3.0 * A * A - 1.0) / 6.0 * h * m[i] + (3.0 * B * B - 1.0) / 6.0 * h * m[i + 1];
  }
};

// 5-point Gauss-Legendre on [a, b].
template<class F>
double gauss_legendre5(F f, double a, double b)
{
  static constexpr std::array<double, 5> nodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
    0.2369268850561891};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    sum += weights[k] * f(mid + half * nodes[k]);
  }
  return sum * half;
}

double unwrap_near(double angle, double reference)
{
  return reference + wrap_angle(angle - reference);
}

// Headings by finite differences of positions, curvature by finite differences
// of unwrapped heading. Second-order everywhere.
void fill_heading_and_curvature(std::vector<CenterlinePose> & poses, double ds)
{
  const std::size_t n = poses.size();
  auto heading_from = [](double dx, double dy) {return std::atan2(dy, dx);};
  std::vector<double> heading(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dx = 0.0;
    double dy = 0.0;
    if (n == 2) {
      dx = poses[1].x - poses[0].x;
      dy = poses[1].y - poses[0].y;
    } else if (i == 0) {
      dx = -3.0 * poses[0].x + 4.0 * poses[1].x - poses[2].x;
      dy = -3.0 * poses[0].y + 4.0 * poses[1].y - poses[2].y;
    } else if (i + 1 == n) {
      dx = 3.0 * poses[n - 1].x - 4.0 * poses[n - 2].x + poses[n - 3].x;
      dy = 3.0 * poses[n - 1].y - 4.0 * poses[n - 2].y + poses[n - 3].y;
    } else {
      dx = poses[i + 1].x - poses[i - 1].x;
      dy = poses[i + 1].y - poses[i - 1].y;
    }
    heading[i] = heading_from(dx, dy);
    if (i > 0) {heading[i] = unwrap_near(heading[i], heading[i - 1]);}
  }
  for (std::size_t i = 0; i < n; ++i) {
    double k = 0.0;
    if (n == 2) {
      k = (heading[1] - heading[0]) / ds;
    } else if (i == 0) {
      k = (-3.0 * heading[0] + 4.0 * heading[1] - heading[2]) / (2.0 * ds);
    } else if (i + 1 == n) {
      k = (3.0 * heading[n - 1] - 4.0 * heading[n - 2] + heading[n - 3]) / (2.0 * ds);
    } else {
      k = (heading[i + 1] - heading[i - 1]) / (2.0 * ds);
    }
    poses[i].heading = heading[i];
    poses[i].curvature = k;
  }
}

// Safeguarded Newton on f(s) = (P(s) - q) . P'(s) inside [lo, hi].
double refine_foot_point(const RoadCenterline & road, const Point2 & q, double lo, double hi,
  double guess)
{
  auto f_and_df = [&](double s) {
      const auto d = road.derivatives_at(s);
      const Point2 diff = d.position - q;
      return std::pair{dot(diff, d.first), dot(d.first, d.first) + dot(diff, d.second)};
    };
  double f_lo = f_and_df(lo).first;
  double f_hi = f_and_df(hi).first;
  if (f_lo >= 0.0) {return lo;}  // distance increasing from lo
  if (f_hi <= 0.0) {return hi;}  // distance decreasing up to hi
  double s = std::clamp(guess, lo, hi);
  for (int it = 0; it < 60; ++it) {
    const auto [f, df] = f_and_df(s);
    if (f < 0.0) {lo = s;} else {hi = s;}
    double next = (df > 0.0) ? s - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) {next = 0.5 * (lo + hi);}
    if (std::abs(next - s) < 1e-13 * std::max(1.0, std::abs(s)) || hi - lo < 1e-12) {
      return next;
    }
    s = next;
  }
  return s;
}

struct ClothoidMoments
{
  std::complex<double> m0;  // int e^{i theta}
  std::complex<double> m1;  // int t e^{i theta}
  std::complex<double> m2;  // int t^2 e^{i theta}
};

std::complex<double> integrate_complex(auto f, double s)
{
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, 0.0, s, 15, kQuadratureTolerance, &error);
}

ClothoidMoments clothoid_moments(double heading0, double kappa0, double kappa_rate, double s)
{
  auto phase = [=](double t) {
      const double th = heading0 + kappa0 * t + 0.5 * kappa_rate * t * t;
      return std::complex<double>(std::cos(th), std::sin(th));
    };
  ClothoidMoments m;
  m.m0 = integrate_complex(phase, s);
  m.m1 = integrate_complex([&](double t) {return t * phase(t);}, s);
  m.m2 = integrate_complex([&](double t) {return t * t * phase(t);}, s);
  return m;
}

}  // namespace

double wrap_angle(double angle)
{
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) {a += 2.0 * kPi;}
  return a;
}

// ---------------------------------------------------------------------------
// RoadCenterline

RoadCenterline::RoadCenterline(std::vector<CenterlinePose> poses)
: poses_(std::move(poses))
{
  if (poses_.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "a centerline needs at least 2 poses");
  }
  if (std::abs(poses_.front().station) > kSpacingTolerance) {
    throw Error(ErrorCode::NonMonotoneStations, "centerline must start at station 0");
  }
  spacing_ = poses_[1].station - poses_[0].station;
  if (!(spacing_ > 0.0)) {
    throw Error(ErrorCode::NonMonotoneStations, "stations must be strictly increasing");
  }
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    const double step = poses_[i].station - poses_[i - 1].station;
    if (std::abs(step - spacing_) > kSpacingTolerance) {
      throw Error(ErrorCode::NonMonotoneStations,
        fmt::format("non-uniform station spacing at index {}", i));
    }
  }
}

std::size_t RoadCenterline::segment_index(double station) const
{
  if (!(station >= -kSpacingTolerance && station <= length() + kSpacingTolerance)) {
    throw Error(ErrorCode::StationOutOfRange,
      fmt::format("station {} outside [0, {}]", station, length()));
  }
  const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(station / spacing_)));
  return std::min(i, poses_.size() - 2);
}

RoadCenterline::Derivatives RoadCenterline::derivatives_at(double station) const
{
  const std::size_t i = segment_index(station);
  const CenterlinePose & p0 = poses_[i];
  const CenterlinePose & p1 = poses_[i + 1];
  const double h = spacing_;
  const double t = (station - p0.station) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const Point2 m0{h * std::cos(p0.heading), h * std::sin(p0.heading)};
  const Point2 m1{h * std::cos(p1.heading), h * std::sin(p1.heading)};

  const std::array<double, 4> w = {2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2};
  const std::array<double, 4> dw = {6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t,
    3 * t2 - 2 * t};
  const std::array<double, 4> ddw = {12 * t - 6, 6 * t - 4, -12 * t + 6, 6 * t - 2};
  auto combine = [&](const std::array<double, 4> & c, double scale) {
      return Point2{
        (c[0] * p0.x + c[1] * m0.x + c[2] * p1.x + c[3] * m1.x) * scale,
        (c[0] * p0.y + c[1] * m0.y + c[2] * p1.y + c[3] * m1.y) * scale};
    };
  return {combine(w, 1.0), combine(dw, 1.0 / h), combine(ddw, 1.0 / (h * h))};
}

Point2 RoadCenterline::position_at(double station) const
{
  return derivatives_at(station).position;
}

double RoadCenterline::heading_at(double station) const
{
  const auto d = derivatives_at(station);
  const std::size_t i = segment_index(station);
  return unwrap_near(std::atan2(d.first.y, d.first.x), poses_[i].heading);
}

double RoadCenterline::curvature_at(double station) const
{
  const std::size_t i = segment_index(station);
  const double t = std::clamp((station - poses_[i].station) / spacing_, 0.0, 1.0);
  return (1.0 - t) * poses_[i].curvature + t * poses_[i + 1].curvature;
}

CenterlinePose RoadCenterline::pose_at(double station) const
{
  const Point2 p = position_at(station);
  return {station, p.x, p.y, heading_at(station), curvature_at(station)};
}

RoadCenterline RoadCenterline::mirrored() const
{
  std::vector<CenterlinePose> out = poses_;
  const CenterlinePose & o = poses_.front();
  const double c = std::cos(o.heading);
  const double s = std::sin(o.heading);
  for (auto & p : out) {
    // Reflect across the line through the start pose along its heading.
    const double dx = p.x - o.x;
    const double dy = p.y - o.y;
    const double along = c * dx + s * dy;
    const double across = -s * dx + c * dy;
    p.x = o.x + c * along + s * across;
    p.y = o.y + s * along - c * across;
    p.heading = 2.0 * o.heading - p.heading;
    p.curvature = -p.curvature;
  }
  return RoadCenterline(std::move(out));
}

// ---------------------------------------------------------------------------
// Construction

RoadCenterline build_centerline(std::span<const Point2> points, double ds_grid)
{
  if (points.size() < 3) {
    throw Error(ErrorCode::TooFewPoints,
      fmt::format("need at least 3 points, got {}", points.size()));
  }
  if (!(ds_grid > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "ds_grid must be positive");
  }
  std::vector<double> t(points.size(), 0.0);
  std::vector<double> xs(points.size()), ys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    xs[i] = points[i].x;
    ys[i] = points[i].y;
    if (i > 0) {
      const double chord = norm(points[i] - points[i - 1]);
      if (!(chord > 0.0)) {
        throw Error(ErrorCode::DegenerateSegment,
          fmt::format("zero-length edge between points {} and {}", i - 1, i));
      }
      t[i] = t[i - 1] + chord;
    }
  }
  const Spline1d sx(t, xs);
  const Spline1d sy(t, ys);
  auto speed = [&](double u) {return std::hypot(sx.slope(u), sy.slope(u));};

  std::vector<double> cumulative(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + gauss_legendre5(speed, t[i - 1], t[i]);
  }
  const double total = cumulative.back();
  const auto count = static_cast<std::size_t>(std::floor(total / ds_grid + 1e-9)) + 1;
  if (count < 2) {
    throw Error(ErrorCode::TooFewPoints, "polyline shorter than one grid step");
  }

  std::vector<CenterlinePose> poses(count);
  std::size_t interval = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double station = static_cast<double>(k) * ds_grid;
    while (interval + 2 < t.size() && cumulative[interval + 1] < station) {++interval;}
    const double target = station - cumulative[interval];
    const double lo = t[interval];
    const double hi = t[interval + 1];
    const double span_arc = cumulative[interval + 1] - cumulative[interval];
    double u = lo + (hi - lo) * std::clamp(target / span_arc, 0.0, 1.0);
    for (int it = 0; it < 30; ++it) {
      const double g = gauss_legendre5(speed, lo, u) - target;
      const double step = g / speed(u);
      u = std::clamp(u - step, lo, hi);
      if (std::abs(step) < 1e-13 * std::max(1.0, hi)) {break;}
    }
    poses[k] = {station, sx.value(u), sy.value(u), 0.0, 0.0};
  }
  fill_heading_and_curvature(poses, ds_grid);
  return RoadCenterline(std::move(poses));
}

RoadCenterline centerline_from_curvature(
  std::span<const CurvatureKnot> profile, const Pose2 & start, double ds_grid)
{
  if (profile.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "curvature profile needs at least 2 knots");
  }
  if (!(ds_grid > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "ds_grid must be positive");
  }
  if (std::abs(profile.front().station) > kSpacingTolerance) {
    throw Error(ErrorCode::NonMonotoneStations, "curvature profile must start at station 0");
  }
  for (std::size_t i = 1; i < profile.size(); ++i) {
    if (!(profile[i].station > profile[i - 1].station)) {
      throw Error(ErrorCode::NonMonotoneStations,
        fmt::format("station {} at knot {} does not increase", profile[i].station, i));
    }
  }
  auto kappa = [&](double s) {
      if (s <= profile.front().station) {return profile.front().curvature;}
      if (s >= profile.back().station) {return profile.back().curvature;}
      auto it = std::upper_bound(profile.begin(), profile.end(), s,
          [](double v, const CurvatureKnot & k) {return v < k.station;});
      const auto & b = *it;
      const auto & a = *(it - 1);
      const double w = (s - a.station) / (b.station - a.station);
      return (1.0 - w) * a.curvature + w * b.curvature;
    };

  const auto steps = static_cast<std::size_t>(std::floor(profile.back().station / ds_grid + 1e-9));
  if (steps < 1) {
    throw Error(ErrorCode::TooFewPoints, "profile shorter than one grid step");
  }
  std::vector<CenterlinePose> poses(steps + 1);
  double x = start.x;
  double y = start.y;
  double th = start.heading;
  poses[0] = {0.0, x, y, th, kappa(0.0)};
  for (std::size_t k = 0; k < steps; ++k) {
    const double s = static_cast<double>(k) * ds_grid;
    const double h = ds_grid;
    // State (theta, x, y); derivative (kappa(s), cos theta, sin theta).
    const double k1t = kappa(s);
    const double k1x = std::cos(th), k1y = std::sin(th);
    const double th2 = th + 0.5 * h * k1t;
    const double k2t = kappa(s + 0.5 * h);
    const double k2x = std::cos(th2), k2y = std::sin(th2);
    const double th3 = th + 0.5 * h * k2t;
    const double k3t = k2t;
    const double k3x = std::cos(th3), k3y = std::sin(th3);
    const double th4 = th + h * k3t;
    const double k4t = kappa(s + h);
    const double k4x = std::cos(th4), k4y = std::sin(th4);
    th += h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t);
    x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    const double station = static_cast<double>(k + 1) * ds_grid;
    poses[k + 1] = {station, x, y, th, kappa(station)};
  }
  return RoadCenterline(std::move(poses));
}

// ---------------------------------------------------------------------------
// Frenet conversions

Projection project(const RoadCenterline & road, const Point2 & point, double corridor)
{
  const auto & poses = road.poses();
  const std::size_t n = poses.size();
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = poses[i].x - point.x;
    const double dy = poses[i].y - point.y;
    d2[i] = dx * dx + dy * dy;
  }

  struct Candidate
  {
    double station;
    double distance;
  };
  std::vector<Candidate> candidates;
  // Only grid minima that can plausibly be inside the corridor are refined.
  const double gate = (corridor + road.spacing()) * (corridor + road.spacing());
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || d2[i] <= d2[i - 1];
    const bool right_ok = i + 1 == n || d2[i] < d2[i + 1];
    if (!(left_ok && right_ok) || d2[i] > gate) {continue;}
    const double lo = poses[i == 0 ? 0 : i - 1].station;
    const double hi = poses[i + 1 == n ? n - 1 : i + 1].station;
    const double s = refine_foot_point(road, point, lo, hi, poses[i].station);
    candidates.push_back({s, norm(road.position_at(s) - point)});
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::OutOfCorridor,
      fmt::format("point ({}, {}) is more than {} m from the centerline", point.x, point.y,
        corridor));
  }
  auto best = std::min_element(candidates.begin(), candidates.end(),
      [](const Candidate & a, const Candidate & b) {return a.distance < b.distance;});
  if (best->distance > corridor) {
    throw Error(ErrorCode::OutOfCorridor,
      fmt::format("point ({}, {}) is {} m from the centerline (corridor {} m)", point.x,
        point.y, best->distance, corridor));
  }

  Projection out;
  Candidate chosen = *best;
  for (const auto & c : candidates) {
    const bool distinct = std::abs(c.station - best->station) > 2.0 * road.spacing();
    if (distinct && std::abs(c.distance - best->distance) < kAmbiguityTolerance) {
      out.ambiguous = true;
      if (c.station < chosen.station) {chosen = c;}
    }
  }

  const auto d = road.derivatives_at(chosen.station);
  const Point2 diff = point - d.position;
  const double tangent_norm = norm(d.first);
  const double side = cross(d.first, diff) / tangent_norm;
  const bool interior = chosen.station > 0.0 && chosen.station < road.length();
  out.coordinate.station = chosen.station;
  out.coordinate.offset = interior ? side : std::copysign(chosen.distance, side);
  out.distance = chosen.distance;
  return out;
}

LateralCoordinate to_lateral(const RoadCenterline & road, const Point2 & point)
{
  return project(road, point).coordinate;
}

Point2 from_lateral(const RoadCenterline & road, const LateralCoordinate & coord)
{
  if (!(coord.station >= 0.0 && coord.station <= road.length())) {
    throw Error(ErrorCode::StationOutOfRange,
      fmt::format("station {} outside [0, {}]", coord.station, road.length()));
  }
  const auto d = road.derivatives_at(coord.station);
  const double tn = norm(d.first);
  return {d.position.x - coord.offset * d.first.y / tn,
    d.position.y + coord.offset * d.first.x / tn};
}

// ---------------------------------------------------------------------------
// Clothoids

CenterlinePose evaluate_clothoid(const ClothoidSegment & segment, double s)
{
  if (!(s >= 0.0 && s <= segment.length)) {
    throw Error(ErrorCode::OutOfRange,
      fmt::format("arc length {} outside [0, {}]", s, segment.length));
  }
  CenterlinePose pose;
  pose.station = s;
  pose.heading = segment.heading_at(s);
  pose.curvature = segment.curvature_at(s);
  if (segment.kappa0 == 0.0 && segment.kappa_rate == 0.0) {
    pose.x = segment.start.x + s * std::cos(segment.start.heading);
    pose.y = segment.start.y + s * std::sin(segment.start.heading);
    return pose;
  }
  const double h0 = segment.start.heading;
  const double k0 = segment.kappa0;
  const double kr = segment.kappa_rate;
  const auto integral = integrate_complex(
    [=](double t) {
      const double th = h0 + k0 * t + 0.5 * kr * t * t;
      return std::complex<double>(std::cos(th), std::sin(th));
    }, s);
  pose.x = segment.start.x + integral.real();
  pose.y = segment.start.y + integral.imag();
  return pose;
}

ClothoidSegment fit_clothoid_g1(const Pose2 & start, const Pose2 & end)
{
  const double dx = end.x - start.x;
  const double dy = end.y - start.y;
  const double dist = std::hypot(dx, dy);
  if (!(dist > 1e-12) || !std::isfinite(dist)) {
    throw Error(ErrorCode::DegenerateInput, "start and end positions coincide");
  }
  const double turn = wrap_angle(end.heading - start.heading);
  const double chord = std::atan2(dy, dx);
  const double phi0 = wrap_angle(start.heading - chord);
  const double phi1 = phi0 + turn;

  ClothoidSegment seg;
  seg.start = start;

  const double lateral = std::abs(std::sin(phi0)) * dist;
  if (std::abs(turn) < 1e-6 && lateral < 1e-9) {
    seg.length = dist;
    return seg;
  }

  // Small-angle closed form in the chord frame: heading(tau) = phi0 + a tau + b tau^2
  // with the end on the chord and the end heading matched.
  const double b = 3.0 * (phi0 + phi1);
  const double a = -4.0 * phi0 - 2.0 * phi1;
  const double cos_mean = gauss_legendre5(
    [&](double tau) {return std::cos(phi0 + a * tau + b * tau * tau);}, 0.0, 1.0);
  double length = dist / std::max(cos_mean, 0.2);
  double k0 = a / length;
  double kr = 2.0 * b / (length * length);

  auto residual = [&](double kk0, double kkr, double len, ClothoidMoments * moments) {
      const ClothoidMoments m = clothoid_moments(start.heading, kk0, kkr, len);
      if (moments) {*moments = m;}
      return std::array<double, 3>{
      (m.m0.real() - dx) / dist,
      (m.m0.imag() - dy) / dist,
      kk0 * len + 0.5 * kkr * len * len - turn};
    };
  auto rnorm = [](const std::array<double, 3> & r) {
      return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    };

  ClothoidMoments m;
  auto r = residual(k0, kr, length, &m);
  double current = rnorm(r);
  int iteration = 0;
  for (; iteration < kClothoidMaxIterations; ++iteration) {
    if (current < kClothoidTolerance * 1e-2) {break;}
    // Jacobian columns: d/dk0, d/dkr, d/dL.
    const double th_end = start.heading + k0 * length + 0.5 * kr * length * length;
    const std::complex<double> i_unit(0.0, 1.0);
    const std::complex<double> dk0 = i_unit * m.m1;
    const std::complex<double> dkr = 0.5 * i_unit * m.m2;
    const std::complex<double> dl(std::cos(th_end), std::sin(th_end));
    const double J[3][3] = {
      {dk0.real() / dist, dkr.real() / dist, dl.real() / dist},
      {dk0.imag() / dist, dkr.imag() / dist, dl.imag() / dist},
      {length, 0.5 * length * length, k0 + kr * length}};
    // Cramer's rule on the 3x3 system J * delta = -r.
    auto det3 = [](const double M[3][3]) {
        return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
               M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
               M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
      };
    const double det = det3(J);
    if (!std::isfinite(det) || std::abs(det) < 1e-300) {break;}
    std::array<double, 3> delta{};
    for (int c = 0; c < 3; ++c) {
      double Mc[3][3];
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
          Mc[row][col] = col == c ? -r[row] : J[row][col];
        }
      }
      delta[c] = det3(Mc) / det;
    }
    // Backtracking: accept the first step size that reduces the residual.
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
      const double nl = length + step * delta[2];
      if (!(nl > 1e-9 * dist)) {continue;}
      const double nk0 = k0 + step * delta[0];
      const double nkr = kr + step * delta[1];
      ClothoidMoments nm;
      const auto nr = residual(nk0, nkr, nl, &nm);
      const double nn = rnorm(nr);
      if (nn < current) {
        k0 = nk0;
        kr = nkr;
        length = nl;
        r = nr;
        m = nm;
        current = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {break;}
  }

  if (!(current < kClothoidTolerance)) {
    throw ConvergenceError(
      fmt::format("G1 clothoid fit did not converge (residual {:.3e} after {} iterations)",
        current, iteration), current, iteration);
  }
  seg.kappa0 = k0;
  seg.kappa_rate = kr;
  seg.length = length;
  return seg;
}

}  // namespace eldm
