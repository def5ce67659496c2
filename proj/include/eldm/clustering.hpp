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
/// \brief Driver-type discovery over parameter vectors: k-means, silhouette,
/// average-linkage hierarchical clustering, cophenetic correlation, type models.

#ifndef ELDM__CLUSTERING_HPP_
#define ELDM__CLUSTERING_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eldm/error.hpp"

namespace eldm
{

enum class Metric {Euclidean, Manhattan};

const char * to_string(Metric m);
/// "euclidean" or "manhattan"; throws InvalidArgument.
Metric metric_from_string(std::string_view name);

using Vector = std::vector<double>;
/// Cluster labels, 1-based.
using Labels = std::vector<int>;

struct DriverDataset
{
  std::vector<std::string> ids;
  std::vector<Vector> vectors;

  std::size_t size() const {return vectors.size();}
  std::size_t dim() const {return vectors.empty() ? 0 : vectors.front().size();}
  /// Throws TooFewSamples, LengthMismatch or InvalidArgument (duplicate ids).
  void validate() const;
};

/// Throws LengthMismatch.
double distance(std::span<const double> a, std::span<const double> b, Metric m);

/// Renumbers labels 1.. in order of each cluster's first member.
Labels canonical_labels(const Labels & labels);

struct KMeansOptions
{
  std::uint64_t seed = 0;
  int restarts = 20;
  int max_iterations = 300;
};

struct KMeansResult
{
  int k = 0;
  Labels labels;
  std::vector<Vector> centers;
  /// Sum over samples of distance(x, center)^2 under the clustering metric.
  double inertia = 0.0;
  std::uint64_t seed = 0;
  int restarts = 0;
  /// Per restart, the Lloyd objective after every iteration: sum of squared
  /// distances (euclidean) or sum of distances (manhattan).
  std::vector<std::vector<double>> objective_history;
};

/// k-means++ seeding per restart from an RNG stream derived from (seed,
/// restart); Lloyd iterations with mean (euclidean) or coordinate median
/// (manhattan) centers; empty clusters take the point farthest from its
/// center; the restart with the lowest inertia wins (ties: earlier restart).
/// Throws KOutOfRange unless 2 <= k <= n.
KMeansResult kmeans(const DriverDataset & ds, int k, Metric m, const KMeansOptions & opts = {});

struct ElbowPoint
{
  int k = 0;
  double inertia = 0.0;
};

/// Inertia for k = 1..k_max (k = 1: single mean or median center).
std::vector<ElbowPoint> elbow_curve(const DriverDataset & ds, Metric m, int k_max,
  const KMeansOptions & opts = {});

struct SilhouetteResult
{
  std::vector<double> values;
  double mean = 0.0;
};

/// s(i) = (b - a) / max(a, b); 0 for members of singleton clusters and when
/// a = b = 0. Throws SingleCluster or LengthMismatch.
SilhouetteResult silhouette(const DriverDataset & ds, const Labels & labels, Metric m);

struct SilhouetteCandidate
{
  int k = 0;
  KMeansResult clustering;
  SilhouetteResult silhouette;
  /// Silhouette values of each cluster (label l at index l - 1), descending.
  std::vector<std::vector<double>> per_cluster;
  bool eligible = false;
};

struct SilhouetteSelection
{
  /// Empty when no candidate is eligible.
  std::optional<int> k;
  double margin = 0.0;
  std::vector<SilhouetteCandidate> candidates;

  const SilhouetteCandidate & chosen() const;
};

/// A candidate is eligible when every cluster holds a sample with
/// s(i) > mean + margin, and for manhattan also every s(i) > 0. The eligible
/// candidate with the largest mean wins; ties go to the smaller k. Throws
/// KOutOfRange for candidates outside [2, n - 1].
SilhouetteSelection select_k_silhouette(const DriverDataset & ds, Metric m,
  std::span<const int> candidates, const KMeansOptions & opts = {}, double margin = 0.0);

/// Mean distance over all cross pairs. Throws EmptyCluster.
double average_linkage_distance(const std::vector<Vector> & r, const std::vector<Vector> & s,
  Metric m);

/// Leaves are 0..n-1; merge k creates cluster n + k.
struct Merge
{
  int a = 0;
  int b = 0;
  double height = 0.0;
  int size = 0;

  bool operator==(const Merge &) const = default;
};

struct Dendrogram
{
  int leaves = 0;
  std::vector<Merge> merges;

  double root_height() const {return merges.empty() ? 0.0 : merges.back().height;}
  /// Leaf order of a depth-first walk from the root, a before b.
  std::vector<int> leaf_order() const;
  /// Leaf members of cluster `id`.
  std::vector<int> members(int id) const;

  bool operator==(const Dendrogram &) const = default;
};

/// Naive agglomeration merging the pair with the smallest average-linkage
/// distance; ties go to the lexicographically smallest id pair. Throws
/// TooFewSamples.
Dendrogram hierarchical_cluster(const DriverDataset & ds, Metric m);

/// Components formed by merges with height < threshold, numbered by first member.
Labels cut_dendrogram(const Dendrogram & d, double threshold);

struct CopheneticResult
{
  double value = 0.0;
  /// All original or all cophenetic distances equal; value is then 0.
  bool zero_variance = false;
};

/// n x n matrix of first-common-merge heights.
std::vector<std::vector<double>> cophenetic_matrix(const Dendrogram & d);

/// Pearson correlation of original and cophenetic pair distances. Throws TooFewSamples.
CopheneticResult cophenetic_correlation(const DriverDataset & ds, const Dendrogram & d,
  Metric m);

struct MetricScore
{
  Metric metric = Metric::Euclidean;
  CopheneticResult cophenetic;
  Dendrogram dendrogram;
};

struct MetricSelection
{
  Metric metric = Metric::Euclidean;
  std::vector<MetricScore> scores;
};

/// Arg-max cophenetic correlation; ties go to the earlier metric. Needs >= 2 metrics.
MetricSelection select_metric_cophenetic(const DriverDataset & ds, std::span<const Metric> metrics);

struct DriverTypeModel
{
  /// Type id (the cluster label) to centroid.
  std::map<int, Vector> centroids;
  Metric metric = Metric::Euclidean;
  std::vector<int> excluded_labels;
  std::vector<std::string> excluded_ids;
};

inline constexpr double kDefaultMinTypeFraction = 0.25;

/// Clusters smaller than ceil(min_type_fraction * n) are excluded; the rest
/// become types with the arithmetic mean of their members as centroid.
/// Throws LengthMismatch or NoTypesSurvive.
DriverTypeModel build_type_model(const DriverDataset & ds, const Labels & labels, Metric m,
  double min_type_fraction = kDefaultMinTypeFraction);

/// Nearest centroid; ties go to the lowest type id. Throws EmptyModel.
int classify_driver(std::span<const double> v, const DriverTypeModel & model);

struct LabelAgreement
{
  std::vector<int> labels_a;
  std::vector<int> labels_b;
  /// table[i][j]: samples with labels_a[i] in a and labels_b[j] in b.
  std::vector<std::vector<int>> table;
  double adjusted_rand = 0.0;
};

/// Throws LengthMismatch.
LabelAgreement label_agreement(const Labels & a, const Labels & b);

inline constexpr const char * kTypesSchema = "eldm_types_v1";

nlohmann::ordered_json type_model_to_json(const DriverTypeModel & model);
DriverTypeModel type_model_from_json(const nlohmann::ordered_json & doc);

}  // namespace eldm

#endif  // ELDM__CLUSTERING_HPP_
