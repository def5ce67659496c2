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

#include "eldm/identification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace eldm
{
namespace
{

constexpr double kFeatureSpacing = 1.0;
constexpr double kRankThreshold = 1e-10;

/// Linear interpolation over nondecreasing stations; clamps outside.
class Interpolant
{
public:
  Interpolant(const std::vector<double> & x, const std::vector<double> & y)
  : x_(x), y_(y) {}

  double operator()(double s) const
  {
    if (s <= x_.front()) {return y_.front();}
    if (s >= x_.back()) {return y_.back();}
    const auto hi = static_cast<std::size_t>(
      std::upper_bound(x_.begin(), x_.end(), s) - x_.begin());
    const std::size_t lo = hi - 1;
    const double t = (s - x_[lo]) / (x_[hi] - x_[lo]);
    return (1.0 - t) * y_[lo] + t * y_[hi];
  }

private:
  const std::vector<double> & x_;
  const std::vector<double> & y_;
};

struct Columns
{
  std::vector<double> station;
  std::vector<double> offset;
  std::vector<double> curvature;
};

Columns columns_of(const DriveLog & log)
{
  Columns c;
  for (const auto & r : log.records) {
    c.station.push_back(r.station);
    c.offset.push_back(r.offset);
    c.curvature.push_back(r.curvature);
  }
  return c;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

}  // namespace

void DriveLog::validate() const
{
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto & r = records[i];
    if (!std::isfinite(r.station) || !std::isfinite(r.offset) || !std::isfinite(r.curvature) ||
      (r.speed && !std::isfinite(*r.speed)))
    {
      throw Error(ErrorCode::InvalidArgument, fmt::format("record {} is not finite", i));
    }
    if (i > 0 && r.station < records[i - 1].station) {
      throw Error(ErrorCode::InvalidArgument,
        fmt::format("station decreases at record {} ({} < {})", i, r.station,
          records[i - 1].station));
    }
  }
}

Features split_channels(const Vector3 & kappas, double kappa_ref, Gating gating)
{
  const double mean = (kappas[0] + kappas[1] + kappas[2]) / 3.0;
  Features f{};
  for (std::size_t j = 0; j < kNodeCount; ++j) {
    const double k = kappas[j];
    if (k == 0.0) {continue;}
    const double sign = (gating == Gating::MeanSign && mean != 0.0) ? mean : k;
    f[sign > 0.0 ? j : j + kNodeCount] = k / kappa_ref;
  }
  return f;
}

RegressionDataset extract_dataset(const DriveLog & log, const PlannerConfig & cfg,
  double stride)
{
  cfg.validate();
  if (!(stride > 0.0)) {throw Error(ErrorCode::InvalidArgument, "stride must be positive");}
  if (log.records.size() < 2 || log.span() < cfg.horizon + stride) {
    throw Error(ErrorCode::LogTooShort,
      fmt::format("log spans {:.1f} m, at least {:.1f} m needed", log.span(),
        cfg.horizon + stride));
  }
  log.validate();

  const Columns c = columns_of(log);
  const Interpolant kappa(c.station, c.curvature);
  const Interpolant offset(c.station, c.offset);

  std::vector<std::pair<double, double>> gaps;
  for (std::size_t i = 1; i < c.station.size(); ++i) {
    if (c.station[i] - c.station[i - 1] > 2.0 * stride) {
      gaps.emplace_back(c.station[i - 1], c.station[i]);
    }
  }

  RegressionDataset ds;
  const double first = c.station.front();
  const double last = c.station.back();
  for (long k = 0;; ++k) {
    const double anchor = first + static_cast<double>(k) * stride;
    if (anchor + cfg.node_stations.back() > last) {break;}
    const double end = anchor + cfg.node_stations.back();
    const bool in_gap = std::any_of(gaps.begin(), gaps.end(), [&](const auto & g) {
        return g.first < end && g.second > anchor;
      });
    if (in_gap) {
      ++ds.dropped_gap;
      continue;
    }
    DatasetRow row;
    row.anchor = anchor;
    bool sane = true;
    for (std::size_t i = 0; i < kNodeCount; ++i) {
      row.targets[i] = offset(anchor + cfg.node_stations[i]);
      sane = sane && std::abs(row.targets[i]) < kOffsetSanityBound;
    }
    if (!sane) {
      ++ds.dropped_sanity;
      continue;
    }
    const auto kappas = window_average_curvatures(kappa, anchor, cfg.node_stations,
      kFeatureSpacing);
    row.features = split_channels(kappas, cfg.kappa_ref, cfg.gating);
    ds.rows.push_back(row);
  }
  return ds;
}

std::vector<std::string> FitReport::unidentified() const
{
  std::vector<std::string> out;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (!identified[c]) {
      out.push_back(fmt::format("{}[{}]", c < kNodeCount ? "left" : "right", c % kNodeCount));
    }
  }
  return out;
}

FitResult fit_params(const RegressionDataset & dataset)
{
  const std::size_t n = dataset.rows.size();
  if (n < kMinRows) {
    throw Error(ErrorCode::LogTooShort,
      fmt::format("{} usable rows, at least {} needed", n, kMinRows));
  }

  // Candidate columns: excited channels, then the intercept.
  std::vector<std::size_t> candidates;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const bool excited = std::any_of(dataset.rows.begin(), dataset.rows.end(),
        [c](const DatasetRow & r) {return r.features[c] != 0.0;});
    if (excited) {candidates.push_back(c);}
  }
  candidates.push_back(kChannelCount);

  const auto design = [&](const std::vector<std::size_t> & cols) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
          x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
            cols[k] == kChannelCount ? 1.0 : dataset.rows[r].features[cols[k]];
        }
      }
      return x;
    };

  const Eigen::MatrixXd full = design(candidates);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> probe(full);
  probe.setThreshold(kRankThreshold);
  std::vector<std::size_t> kept;
  for (Eigen::Index k = 0; k < probe.rank(); ++k) {
    kept.push_back(candidates[static_cast<std::size_t>(probe.colsPermutation().indices()[k])]);
  }
  std::sort(kept.begin(), kept.end());

  FitResult result;
  auto & report = result.report;
  report.rows = n;
  for (std::size_t c : kept) {
    if (c < kChannelCount) {report.identified[c] = true;}
  }
  report.rank_deficient = kept.size() < kChannelCount + 1;

  const Eigen::MatrixXd x = design(kept);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  double dy0 = 0.0;
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      y(static_cast<Eigen::Index>(r)) = dataset.rows[r].targets[i];
    }
    const Eigen::VectorXd beta = qr.solve(y);
    report.residual_rms[i] = std::sqrt((x * beta - y).squaredNorm() / static_cast<double>(n));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const double b = beta(static_cast<Eigen::Index>(k));
      const std::size_t c = kept[k];
      if (c == kChannelCount) {
        report.intercepts[i] = b;
      } else if (c < kNodeCount) {
        result.params.p_left[i][c] = b;
      } else {
        result.params.p_right[i][c - kNodeCount] = b;
      }
    }
    dy0 += report.intercepts[i];
  }
  result.params.dy0 = dy0 / static_cast<double>(kNodeCount);
  return result;
}

FitResult identify(std::span<const DriveLog> logs, const PlannerConfig & cfg, double stride)
{
  if (logs.empty()) {throw Error(ErrorCode::LogTooShort, "no drive logs");}
  RegressionDataset merged;
  for (const auto & log : logs) {
    auto ds = extract_dataset(log, cfg, stride);
    merged.rows.insert(merged.rows.end(), ds.rows.begin(), ds.rows.end());
    merged.dropped_gap += ds.dropped_gap;
    merged.dropped_sanity += ds.dropped_sanity;
  }
  return fit_params(merged);
}

ParamVector identify_driver(const DriveLog & log, const PlannerConfig & cfg, double stride)
{
  return params_to_vector(identify(std::span<const DriveLog>(&log, 1), cfg, stride).params);
}

// ---------------------------------------------------------------------------

std::vector<CurvatureKnot> random_curvature_profile(double length, std::uint64_t seed,
  const CurvatureProfileOptions & options)
{
  if (!(length > 0.0) || !(options.min_knot_spacing > 0.0) ||
    options.max_knot_spacing < options.min_knot_spacing)
  {
    throw Error(ErrorCode::InvalidArgument, "invalid curvature profile options");
  }
  auto rng = stream(seed, 0);
  std::uniform_real_distribution<double> gap(options.min_knot_spacing, options.max_knot_spacing);
  std::uniform_real_distribution<double> kappa(-options.max_curvature, options.max_curvature);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&] {
      return unit(rng) < options.straight_probability ? 0.0 : kappa(rng);
    };
  std::vector<CurvatureKnot> knots{{0.0, draw()}};
  for (;;) {
    const double s = knots.back().station + gap(rng);
    if (s >= length) {break;}
    knots.push_back({s, draw()});
  }
  knots.push_back({length, draw()});
  return knots;
}

DriveLog synthesize_drive_log(const DriverParams & params, const PlannerConfig & cfg,
  std::span<const CurvatureKnot> profile, const SyntheticDriveConfig & synth)
{
  cfg.validate();
  if (profile.size() < 2 || !(synth.spacing > 0.0) || !(synth.noise_sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid synthetic drive configuration");
  }
  std::vector<double> ks;
  std::vector<double> kv;
  for (const auto & k : profile) {
    ks.push_back(k.station);
    kv.push_back(k.curvature);
  }
  const Interpolant profile_at(ks, kv);

  DriveLog log;
  const double start = ks.front();
  const auto count = static_cast<long>(std::floor((ks.back() - start) / synth.spacing));
  for (long i = 0; i <= count; ++i) {
    const double s = start + static_cast<double>(i) * synth.spacing;
    log.records.push_back({s, 0.0, profile_at(s), std::nullopt});
  }

  // Model offsets at the nodes of horizon-spaced anchors.
  const Columns c = columns_of(log);
  const Interpolant kappa(c.station, c.curvature);
  std::vector<double> ts{start};
  std::vector<double> tv{params.dy0};
  for (long k = 0;; ++k) {
    const double anchor = start + static_cast<double>(k) * cfg.horizon;
    if (anchor + cfg.node_stations.back() > c.station.back()) {break;}
    const auto kappas = window_average_curvatures(kappa, anchor, cfg.node_stations,
      kFeatureSpacing);
    const auto offsets = compute_node_offsets(params, kappas, cfg.kappa_ref, cfg.gating);
    for (std::size_t i = 0; i < kNodeCount; ++i) {
      ts.push_back(anchor + cfg.node_stations[i]);
      tv.push_back(offsets[i]);
    }
  }
  const Interpolant target(ts, tv);

  auto rng = stream(synth.seed, 1);
  std::normal_distribution<double> noise(0.0, synth.noise_sigma > 0.0 ? synth.noise_sigma : 1.0);
  for (auto & r : log.records) {
    r.offset = target(r.station);
    if (synth.noise_sigma > 0.0) {r.offset += noise(rng);}
  }
  return log;
}

DriveLog synthesize_drive_log(const DriverParams & params, const PlannerConfig & cfg,
  const SyntheticDriveConfig & synth)
{
  const auto profile = random_curvature_profile(synth.length, synth.seed, synth.profile);
  return synthesize_drive_log(params, cfg, profile, synth);
}

}  // namespace eldm
