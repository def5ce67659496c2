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
/// \brief Least-squares estimation of the 19 model parameters from drive logs.

#ifndef ELDM__IDENTIFICATION_HPP_
#define ELDM__IDENTIFICATION_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eldm/eldm_planner.hpp"

namespace eldm
{

struct DriveRecord
{
  double station = 0.0;
  double offset = 0.0;
  double curvature = 0.0;
  std::optional<double> speed;

  bool operator==(const DriveRecord &) const = default;
};

struct DriveLog
{
  std::vector<DriveRecord> records;

  /// Throws InvalidArgument on decreasing stations or non-finite values.
  void validate() const;
  double span() const
  {
    return records.empty() ? 0.0 : records.back().station - records.front().station;
  }
};

inline constexpr double kDefaultStride = 10.0;
inline constexpr std::size_t kMinRows = 50;
inline constexpr double kOffsetSanityBound = 3.0;

/// Channel c < 3: left curvature of segment c; c >= 3: right curvature of
/// segment c - 3. Values are kappa / kappa_ref; per segment at most one of the
/// two channels is nonzero.
inline constexpr std::size_t kChannelCount = 6;
using Features = std::array<double, kChannelCount>;

struct DatasetRow
{
  double anchor = 0.0;
  Features features{};
  Vector3 targets{};
};

struct RegressionDataset
{
  std::vector<DatasetRow> rows;
  /// Anchors rejected by the gap rule and by the offset sanity bound.
  std::size_t dropped_gap = 0;
  std::size_t dropped_sanity = 0;
};

/// Splits segment curvatures into the signed channels with the planner's gating.
Features split_channels(const Vector3 & kappas, double kappa_ref, Gating gating);

/// Anchors at first station + k * stride while the last node fits in the log.
/// Curvatures are the log's curvature channel (linear between records)
/// averaged over the node windows at 1 m; targets are offsets interpolated at
/// the node stations. Rows whose window overlaps a record gap > 2 * stride, or
/// whose targets exceed kOffsetSanityBound, are dropped. Throws LogTooShort.
RegressionDataset extract_dataset(const DriveLog & log, const PlannerConfig & cfg,
  double stride = kDefaultStride);

struct FitReport
{
  std::size_t rows = 0;
  Vector3 residual_rms{};
  Vector3 intercepts{};
  /// false: channel never excited or linearly dependent; its 3 coefficients are 0.
  std::array<bool, kChannelCount> identified{};
  bool rank_deficient = false;

  /// Human-readable names of the unidentified channels, e.g. "left[2]".
  std::vector<std::string> unidentified() const;
};

struct FitResult
{
  DriverParams params;
  FitReport report;
};

/// Per node row, OLS of the target on the identified channels plus an
/// intercept (column-pivoting QR). dy0 is the mean of the three intercepts.
/// Throws LogTooShort with fewer than kMinRows rows.
FitResult fit_params(const RegressionDataset & dataset);

/// extract_dataset over every log, rows merged, then fit_params.
FitResult identify(std::span<const DriveLog> logs, const PlannerConfig & cfg,
  double stride = kDefaultStride);
ParamVector identify_driver(const DriveLog & log, const PlannerConfig & cfg,
  double stride = kDefaultStride);

// --- synthetic drives ------------------------------------------------------

struct CurvatureProfileOptions
{
  double min_knot_spacing = 20.0;
  double max_knot_spacing = 90.0;
  double max_curvature = 0.012;
  /// Probability that a knot is exactly straight.
  double straight_probability = 0.2;
};

/// Piecewise-linear curvature with random knots on [0, length].
std::vector<CurvatureKnot> random_curvature_profile(double length, std::uint64_t seed,
  const CurvatureProfileOptions & options = {});

struct SyntheticDriveConfig
{
  double length = 40000.0;
  double spacing = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  CurvatureProfileOptions profile;
};

/// A drive whose offsets follow the model exactly at the node stations of
/// anchors spaced one horizon apart (so no station is predicted twice) and
/// vary linearly in between, plus optional Gaussian offset noise. Fitting it
/// with stride = cfg.horizon recovers `params`.
DriveLog synthesize_drive_log(const DriverParams & params, const PlannerConfig & cfg,
  const SyntheticDriveConfig & synth);

/// Same, over a caller-supplied curvature profile.
DriveLog synthesize_drive_log(const DriverParams & params, const PlannerConfig & cfg,
  std::span<const CurvatureKnot> profile, const SyntheticDriveConfig & synth);

}  // namespace eldm

#endif  // ELDM__IDENTIFICATION_HPP_
