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
/// \brief Command layer behind the `eldm` executable: configuration, command
/// execution, run manifests and replay.

#ifndef ELDM__CLI_HPP_
#define ELDM__CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eldm/clustering.hpp"
#include "eldm/eldm_planner.hpp"
#include "eldm/simulation.hpp"

namespace eldm::cli
{

inline constexpr const char * kManifestSchema = "eldm_manifest_v1";
inline constexpr const char * kConfigSchema = "eldm_config_v1";
inline constexpr const char * kFitSchema = "eldm_fit_report_v1";
inline constexpr const char * kClusterReportSchema = "eldm_cluster_report_v1";
inline constexpr const char * kToolVersion = "1.0.0";

struct ClusteringSettings
{
  int restarts = 20;
  int max_iterations = 300;
  std::vector<int> k_candidates{2, 3, 4, 5};
  double silhouette_margin = 0.0;
  double cut_threshold = 17.5;
  double min_type_fraction = kDefaultMinTypeFraction;
  int elbow_k_max = 10;
};

struct Config
{
  PlannerConfig planner;
  SimConfig simulation;
  FeatureThresholds features;
  ClusteringSettings clustering;
  double identification_stride = 10.0;
  double road_grid = 1.0;
};

/// Overlays the keys present in `doc` onto `base`. Unknown keys or wrong
/// types throw InvalidConfig.
Config config_from_json(const nlohmann::ordered_json & doc, const Config & base = {});
nlohmann::ordered_json config_to_json(const Config & cfg);

/// A fully resolved command: everything its outputs depend on.
struct Invocation
{
  /// "identify", "cluster", "simulate", "compare", "road build" or "synth-log".
  std::string command;
  /// Command options with input paths made absolute.
  nlohmann::ordered_json options = nlohmann::ordered_json::object();
  Config config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
};

struct OutputFile
{
  std::string name;
  std::string content;
};

struct CommandResult
{
  std::vector<OutputFile> files;
  std::vector<std::string> warnings;
};

/// Runs a command without touching the file system except to read inputs.
CommandResult execute(const Invocation & inv);

/// File name of the manifest the invocation writes, e.g. "manifest_cluster.json".
std::string manifest_name(const Invocation & inv);
nlohmann::ordered_json manifest_to_json(const Invocation & inv, const CommandResult & result);
Invocation invocation_from_manifest(const nlohmann::ordered_json & doc);

/// Writes every output and the manifest atomically into inv.out_dir.
void write_result(const Invocation & inv, const CommandResult & result);

/// Names of recorded outputs whose bytes differ from a fresh execution.
std::vector<std::string> verify_replay(const Invocation & inv);

/// Entry point of the executable. Exit codes: 0 success, 1 failure, 2 usage.
int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

}  // namespace eldm::cli

#endif  // ELDM__CLI_HPP_
