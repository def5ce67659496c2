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

#include "eldm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "eldm/eldm_planner.hpp"
#include "eldm/fixtures.hpp"
#include "gtest/gtest.h"

namespace eldm
{
namespace
{

constexpr std::size_t kDim = 19;

ErrorCode code_of(const std::function<void()> & f)
{
  try {
    f();
  } catch (const Error & e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

DriverDataset dataset_of(const std::vector<Vector> & vectors)
{
  DriverDataset ds;
  ds.vectors = vectors;
  for (std::size_t i = 0; i < vectors.size(); ++i) {ds.ids.push_back(std::to_string(i));}
  return ds;
}

/// 1-D values embedded in the first coordinate of `dim`-vectors.
DriverDataset line(const std::vector<double> & xs, std::size_t dim = kDim)
{
  std::vector<Vector> v;
  for (double x : xs) {
    Vector p(dim, 0.0);
    p[0] = x;
    v.push_back(p);
  }
  return dataset_of(v);
}

struct Blobs
{
  DriverDataset ds;
  Labels truth;
};

Blobs blobs(int count, int per_blob, double sigma, double spacing, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Blobs b;
  std::vector<Vector> v;
  for (int c = 0; c < count; ++c) {
    for (int i = 0; i < per_blob; ++i) {
      Vector p(kDim, 0.0);
      for (double & x : p) {x = noise(rng);}
      p[static_cast<std::size_t>(c) % kDim] += spacing;
      v.push_back(p);
      b.truth.push_back(c + 1);
    }
  }
  b.ds = dataset_of(v);
  return b;
}

/// Silhouette by the definition, written independently of the library.
std::vector<double> brute_silhouette(const DriverDataset & ds, const Labels & labels, Metric m)
{
  const std::size_t n = ds.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t own = 0;
    for (std::size_t j = 0; j < n; ++j) {own += labels[j] == labels[i] ? 1 : 0;}
    if (own == 1) {continue;}
    double a = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && labels[j] == labels[i]) {a += distance(ds.vectors[i], ds.vectors[j], m);}
    }
    a /= static_cast<double>(own - 1);
    double b = 1e300;
    for (int other : std::set<int>(labels.begin(), labels.end())) {
      if (other == labels[i]) {continue;}
      double sum = 0.0;
      double cnt = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] == other) {
          sum += distance(ds.vectors[i], ds.vectors[j], m);
          cnt += 1.0;
        }
      }
      b = std::min(b, sum / cnt);
    }
    s[i] = std::max(a, b) > 0.0 ? (b - a) / std::max(a, b) : 0.0;
  }
  return s;
}

double pearson(const std::vector<double> & x, const std::vector<double> & y)
{
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Leaves of a random rooted tree whose leaves all sit at depth `height`;
/// each edge owns a coordinate, so manhattan distance is the tree path length
/// and the pairwise distances are ultrametric.
DriverDataset ultrametric_dataset(std::mt19937_64 & rng, int leaves)
{
  std::uniform_real_distribution<double> u(0.1, 1.0);
  struct Node
  {
    std::vector<std::pair<std::size_t, double>> path;  // (coordinate, weight)
    double depth;
  };
  const double height = 10.0;
  std::size_t next_coord = 0;
  std::vector<Node> frontier{{{}, 0.0}};
  // Split random frontier nodes until there are enough.
  while (static_cast<int>(frontier.size()) < leaves) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const std::size_t k = pick(rng);
    const Node parent = frontier[k];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(k));
    const double step = (height - parent.depth) * u(rng) * 0.5;
    for (int c = 0; c < 2; ++c) {
      Node child = parent;
      child.path.emplace_back(next_coord++, step);
      child.depth += step;
      frontier.push_back(child);
    }
  }
  std::vector<Vector> v;
  for (auto & node : frontier) {
    node.path.emplace_back(next_coord++, height - node.depth);
  }
  for (const auto & node : frontier) {
    Vector p(next_coord, 0.0);
    for (const auto & [c, w] : node.path) {p[c] = w;}
    v.push_back(p);
  }
  return dataset_of(v);
}

// --- distance ------------------------------------------------------------

TEST(Distance, HandValues)
{
  Vector a(kDim, 0.0);
  Vector b(kDim, 0.0);
  b[0] = 3.0;
  b[1] = 4.0;
  EXPECT_EQ(distance(a, b, Metric::Euclidean), 5.0);
  EXPECT_EQ(distance(a, b, Metric::Manhattan), 7.0);
  EXPECT_EQ(distance(b, b, Metric::Euclidean), 0.0);
  EXPECT_EQ(code_of([&] {distance(a, Vector(3, 0.0), Metric::Euclidean);}),
    ErrorCode::LengthMismatch);
}

TEST(Distance, MetricAxioms)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 2.0);
  const auto draw = [&] {
      Vector v(kDim);
      for (double & x : v) {x = g(rng);}
      return v;
    };
  for (Metric m : {Metric::Euclidean, Metric::Manhattan}) {
    for (int t = 0; t < 500; ++t) {
      const auto a = draw();
      const auto b = draw();
      const auto c = draw();
      EXPECT_EQ(distance(a, b, m), distance(b, a, m));
      EXPECT_EQ(distance(a, a, m), 0.0);
      EXPECT_LE(distance(a, c, m), distance(a, b, m) + distance(b, c, m) + 1e-12);
    }
  }
}

TEST(Metric, Names)
{
  EXPECT_EQ(metric_from_string("manhattan"), Metric::Manhattan);
  EXPECT_STREQ(to_string(Metric::Euclidean), "euclidean");
  EXPECT_EQ(code_of([] {metric_from_string("cosine");}), ErrorCode::InvalidArgument);
}

// --- k-means ---------------------------------------------------------------

TEST(KMeans, TwoSeparatedPairsForAnySeed)
{
  const auto ds = line({0.0, 0.1, 10.0, 10.1});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (Metric m : {Metric::Euclidean, Metric::Manhattan}) {
      const auto r = kmeans(ds, 2, m, {seed, 20, 300});
      EXPECT_EQ(r.labels, (Labels{1, 1, 2, 2}));
    }
  }
}

TEST(KMeans, KEqualsNGivesSingletons)
{
  const auto ds = line({0.0, 1.0, 3.0, 7.0, 8.5});
  const auto r = kmeans(ds, 5, Metric::Euclidean);
  EXPECT_EQ(r.inertia, 0.0);
  EXPECT_EQ(std::set<int>(r.labels.begin(), r.labels.end()).size(), 5u);
}

TEST(KMeans, BlobRecoveryAndInertia)
{
  const auto b = blobs(3, 30, 0.1, 10.0, 42);
  for (Metric m : {Metric::Euclidean, Metric::Manhattan}) {
    const auto r = kmeans(b.ds, 3, m, {42, 20, 300});
    EXPECT_EQ(label_agreement(r.labels, b.truth).adjusted_rand, 1.0);
    double inertia = 0.0;
    for (std::size_t i = 0; i < b.ds.size(); ++i) {
      const double d = distance(b.ds.vectors[i],
        r.centers[static_cast<std::size_t>(r.labels[i] - 1)], m);
      inertia += d * d;
    }
    EXPECT_NEAR(r.inertia, inertia, 1e-9);
  }
}

TEST(KMeans, LloydObjectiveNeverIncreases)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vector> v(40, Vector(kDim));
    for (auto & p : v) {
      for (double & x : p) {x = g(rng);}
    }
    const auto ds = dataset_of(v);
    for (Metric m : {Metric::Euclidean, Metric::Manhattan}) {
      const auto r = kmeans(ds, 4, m, {static_cast<std::uint64_t>(trial), 20, 300});
      ASSERT_EQ(r.objective_history.size(), 20u);
      for (const auto & h : r.objective_history) {
        for (std::size_t i = 1; i < h.size(); ++i) {
          EXPECT_LE(h[i], h[i - 1] * (1.0 + 1e-12) + 1e-12);
        }
      }
    }
  }
}

TEST(KMeans, KOutOfRangeAndDeterminism)
{
  const auto ds = line({0.0, 1.0, 2.0});
  EXPECT_EQ(code_of([&] {kmeans(ds, 1, Metric::Euclidean);}), ErrorCode::KOutOfRange);
  EXPECT_EQ(code_of([&] {kmeans(ds, 4, Metric::Euclidean);}), ErrorCode::KOutOfRange);
  const auto b = blobs(4, 8, 1.0, 3.0, 5);
  const auto r1 = kmeans(b.ds, 4, Metric::Manhattan, {9, 20, 300});
  const auto r2 = kmeans(b.ds, 4, Metric::Manhattan, {9, 20, 300});
  EXPECT_EQ(r1.labels, r2.labels);
  EXPECT_EQ(r1.inertia, r2.inertia);
  EXPECT_EQ(r1.centers, r2.centers);
}

TEST(Elbow, EndpointsAndShape)
{
  const auto b = blobs(3, 10, 0.1, 10.0, 42);
  const auto curve = elbow_curve(b.ds, Metric::Euclidean, 30, {42, 20, 300});
  ASSERT_EQ(curve.size(), 30u);
  Vector mean(kDim, 0.0);
  for (const auto & v : b.ds.vectors) {
    for (std::size_t d = 0; d < kDim; ++d) {mean[d] += v[d] / 30.0;}
  }
  double scatter = 0.0;
  for (const auto & v : b.ds.vectors) {
    scatter += std::pow(distance(v, mean, Metric::Euclidean), 2);
  }
  EXPECT_NEAR(curve[0].inertia, scatter, 1e-9);
  EXPECT_EQ(curve.back().inertia, 0.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].inertia, curve[i - 1].inertia * (1.0 + 1e-9));
  }
  // Large drop up to k = 3, flat afterwards.
  EXPECT_GT(curve[1].inertia - curve[2].inertia, 10.0 * (curve[2].inertia - curve[3].inertia));
  EXPECT_LT(curve[2].inertia, 0.01 * curve[0].inertia);
}

// --- silhouette ------------------------------------------------------------

TEST(Silhouette, HandExample)
{
  const auto ds = line({0.0, 1.0, 10.0, 11.0});
  const auto s = silhouette(ds, {1, 1, 2, 2}, Metric::Euclidean);
  EXPECT_NEAR(s.values[0], (10.5 - 1.0) / 10.5, 1e-15);
  EXPECT_NEAR(s.values[1], (9.5 - 1.0) / 9.5, 1e-15);
  EXPECT_NEAR(s.mean, ((10.5 - 1.0) / 10.5 + (9.5 - 1.0) / 9.5) / 2.0, 1e-15);
  EXPECT_NEAR(s.values[0], 0.9048, 1e-4);
}

TEST(Silhouette, IdenticalPairAndErrors)
{
  const auto ds = line({2.0, 2.0, 50.0, 51.0});
  const auto s = silhouette(ds, {1, 1, 2, 2}, Metric::Manhattan);
  EXPECT_EQ(s.values[0], 1.0);
  EXPECT_EQ(s.values[1], 1.0);
  EXPECT_EQ(code_of([&] {silhouette(ds, {1, 1, 1, 1}, Metric::Euclidean);}),
    ErrorCode::SingleCluster);
  const auto single = silhouette(ds, {1, 1, 2, 3}, Metric::Euclidean);
  EXPECT_EQ(single.values[2], 0.0);
  EXPECT_EQ(single.values[3], 0.0);
}

TEST(Silhouette, MatchesBruteForceAndPermutes)
{
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int n = std::uniform_int_distribution<int>(3, 25)(rng);
    const int k = std::uniform_int_distribution<int>(2, std::min(n, 6))(rng);
    std::vector<Vector> v(static_cast<std::size_t>(n), Vector(kDim));
    for (auto & p : v) {
      for (double & x : p) {x = g(rng);}
    }
    Labels labels(static_cast<std::size_t>(n));
    for (auto & l : labels) {l = std::uniform_int_distribution<int>(1, k)(rng);}
    labels[0] = 1;
    labels[1] = 2;
    const auto ds = dataset_of(v);
    const Metric m = t % 2 == 0 ? Metric::Euclidean : Metric::Manhattan;
    const auto s = silhouette(ds, labels, m);
    const auto oracle = brute_silhouette(ds, labels, m);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      ASSERT_NEAR(s.values[i], oracle[i], 1e-12);
      ASSERT_GE(s.values[i], -1.0);
      ASSERT_LE(s.values[i], 1.0);
    }
    std::vector<std::size_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vector> pv;
    Labels pl;
    for (std::size_t i : perm) {
      pv.push_back(v[i]);
      pl.push_back(labels[i]);
    }
    const auto ps = silhouette(dataset_of(pv), pl, m);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      ASSERT_NEAR(ps.values[i], s.values[perm[i]], 1e-12);
    }
  }
}

TEST(SelectK, Blobs)
{
  const std::vector<int> candidates{2, 3, 4};
  const auto three = blobs(3, 10, 0.1, 10.0, 42);
  const auto sel3 = select_k_silhouette(three.ds, Metric::Euclidean, candidates, {42, 20, 300});
  ASSERT_TRUE(sel3.k.has_value());
  EXPECT_EQ(*sel3.k, 3);
  EXPECT_EQ(sel3.candidates.size(), 3u);
  EXPECT_EQ(sel3.chosen().k, 3);

  const auto two = blobs(2, 10, 0.1, 10.0, 7);
  const auto sel2 = select_k_silhouette(two.ds, Metric::Manhattan, candidates, {7, 20, 300});
  ASSERT_TRUE(sel2.k.has_value());
  EXPECT_EQ(*sel2.k, 2);
}

TEST(SelectK, IdenticalPointsHaveNoEligibleK)
{
  const auto ds = line({1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
  const std::vector<int> candidates{2, 3, 4};
  const auto sel = select_k_silhouette(ds, Metric::Euclidean, candidates);
  EXPECT_FALSE(sel.k.has_value());
  EXPECT_EQ(sel.candidates.size(), 3u);
  EXPECT_EQ(code_of([&] {sel.chosen();}), ErrorCode::NoEligibleK);
  const std::vector<int> bad{2, 6};
  EXPECT_EQ(code_of([&] {select_k_silhouette(ds, Metric::Euclidean, bad);}),
    ErrorCode::KOutOfRange);
}

// --- hierarchical ------------------------------------------------------------

TEST(AverageLinkage, HandValues)
{
  const auto v = [](double x) {return Vector{x};};
  EXPECT_EQ(average_linkage_distance({v(0)}, {v(2), v(4)}, Metric::Manhattan), 3.0);
  EXPECT_EQ(average_linkage_distance({v(1)}, {v(4)}, Metric::Euclidean), 3.0);
  EXPECT_EQ(average_linkage_distance({v(0), v(0)}, {v(1), v(1)}, Metric::Euclidean), 1.0);
  EXPECT_EQ(code_of([&] {average_linkage_distance({}, {v(1)}, Metric::Euclidean);}),
    ErrorCode::EmptyCluster);
}

TEST(AverageLinkage, EqualsDoubleLoop)
{
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 10);
  for (int t = 0; t < 200; ++t) {
    std::vector<Vector> r(static_cast<std::size_t>(size(rng)), Vector(kDim));
    std::vector<Vector> s(static_cast<std::size_t>(size(rng)), Vector(kDim));
    for (auto * set : {&r, &s}) {
      for (auto & p : *set) {
        for (double & x : p) {x = g(rng);}
      }
    }
    for (Metric m : {Metric::Euclidean, Metric::Manhattan}) {
      double sum = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {sum += distance(r[i], s[j], m);}
      }
      const double expected = sum / (static_cast<double>(r.size()) *
        static_cast<double>(s.size()));
      ASSERT_EQ(average_linkage_distance(r, s, m), expected);
    }
  }
}

TEST(Hierarchical, HandExample)
{
  const auto d = hierarchical_cluster(line({0.0, 1.0, 5.0}), Metric::Manhattan);
  ASSERT_EQ(d.merges.size(), 2u);
  EXPECT_EQ(d.merges[0], (Merge{0, 1, 1.0, 2}));
  EXPECT_EQ(d.merges[1], (Merge{2, 3, 4.5, 3}));
  EXPECT_EQ(cut_dendrogram(d, 2.0), (Labels{1, 1, 2}));
  EXPECT_EQ(cut_dendrogram(d, 100.0), (Labels{1, 1, 1}));
  EXPECT_EQ(cut_dendrogram(d, 0.0), (Labels{1, 2, 3}));
  EXPECT_EQ(d.leaf_order(), (std::vector<int>{2, 0, 1}));
}

TEST(Hierarchical, SmallCases)
{
  const auto two = hierarchical_cluster(line({0.0, 3.0}), Metric::Euclidean);
  ASSERT_EQ(two.merges.size(), 1u);
  EXPECT_EQ(two.merges[0].height, 3.0);
  const auto same = hierarchical_cluster(line({2.0, 2.0, 2.0, 2.0}), Metric::Euclidean);
  for (const auto & m : same.merges) {EXPECT_EQ(m.height, 0.0);}
  // Ties go to the lowest id pair.
  EXPECT_EQ(same.merges[0], (Merge{0, 1, 0.0, 2}));
  EXPECT_EQ(code_of([] {hierarchical_cluster(line({1.0}), Metric::Euclidean);}),
    ErrorCode::TooFewSamples);
}

TEST(Hierarchical, HeightsNondecreasingAndComplete)
{
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<Vector> v(19, Vector(kDim));
    for (auto & p : v) {
      for (double & x : p) {x = g(rng);}
    }
    for (Metric m : {Metric::Euclidean, Metric::Manhattan}) {
      const auto d = hierarchical_cluster(dataset_of(v), m);
      ASSERT_EQ(d.merges.size(), 18u);
      for (std::size_t i = 1; i < d.merges.size(); ++i) {
        EXPECT_GE(d.merges[i].height, d.merges[i - 1].height);
      }
      EXPECT_EQ(d.merges.back().size, 19);
      auto order = d.leaf_order();
      std::sort(order.begin(), order.end());
      for (int i = 0; i < 19; ++i) {EXPECT_EQ(order[static_cast<std::size_t>(i)], i);}
    }
  }
}

TEST(Cophenetic, HandExample)
{
  const auto ds = line({0.0, 1.0, 5.0});
  const auto d = hierarchical_cluster(ds, Metric::Manhattan);
  const auto c = cophenetic_correlation(ds, d, Metric::Manhattan);
  EXPECT_FALSE(c.zero_variance);
  EXPECT_NEAR(c.value, pearson({1, 5, 4}, {1, 4.5, 4.5}), 1e-14);
  EXPECT_NEAR(c.value, 0.9707, 1e-4);
}

TEST(Cophenetic, UltrametricGivesOne)
{
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto ds = ultrametric_dataset(rng, std::uniform_int_distribution<int>(3, 19)(rng));
    const auto d = hierarchical_cluster(ds, Metric::Manhattan);
    const auto c = cophenetic_correlation(ds, d, Metric::Manhattan);
    EXPECT_NEAR(c.value, 1.0, 1e-12);
  }
}

TEST(Cophenetic, ZeroVariance)
{
  const auto ds = line({1.0, 1.0, 1.0});
  const auto c = cophenetic_correlation(ds, hierarchical_cluster(ds, Metric::Euclidean),
    Metric::Euclidean);
  EXPECT_TRUE(c.zero_variance);
  EXPECT_EQ(c.value, 0.0);
}

TEST(SelectMetric, TreeConsistentUnderManhattanOnly)
{
  // d1: ab = 2, ac = 3, bc = 3 (ultrametric); d2: 1.41, 3, 2.24 (not).
  const auto ds = dataset_of({{0.0, 0.0}, {1.0, 1.0}, {3.0, 0.0}});
  const std::vector<Metric> metrics{Metric::Euclidean, Metric::Manhattan};
  const auto sel = select_metric_cophenetic(ds, metrics);
  EXPECT_EQ(sel.metric, Metric::Manhattan);
  EXPECT_NEAR(sel.scores[1].cophenetic.value, 1.0, 1e-12);
  EXPECT_LT(sel.scores[0].cophenetic.value, 1.0 - 1e-3);
}

TEST(SelectMetric, TiesAndPreconditions)
{
  const auto ds = line({0.0, 1.0, 5.0});
  const std::vector<Metric> metrics{Metric::Manhattan, Metric::Euclidean};
  const auto sel = select_metric_cophenetic(ds, metrics);
  EXPECT_EQ(sel.scores[0].cophenetic.value, sel.scores[1].cophenetic.value);
  EXPECT_EQ(sel.metric, Metric::Manhattan);
  const std::vector<Metric> one{Metric::Euclidean};
  EXPECT_EQ(code_of([&] {select_metric_cophenetic(ds, one);}), ErrorCode::InvalidArgument);
}

// --- type model ------------------------------------------------------------

DriverDataset random_dataset(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<Vector> v(n, Vector(kDim));
  for (auto & p : v) {
    for (double & x : p) {x = g(rng);}
  }
  auto ds = dataset_of(v);
  ds.ids = fixtures::sample_ids();
  return ds;
}

TEST(TypeModel, FixtureLabelRowsExcludeTheOutlierGroup)
{
  const auto ds = random_dataset(19, 1);
  for (const auto & labels : {fixtures::kmeans_labels(), fixtures::hierarchical_labels()}) {
    const auto model = build_type_model(ds, labels, Metric::Manhattan);
    EXPECT_EQ(model.centroids.size(), 2u);
    EXPECT_TRUE(model.centroids.count(1));
    EXPECT_TRUE(model.centroids.count(3));
    EXPECT_EQ(model.excluded_labels, (std::vector<int>{2}));
    // Replacing members by their centroid leaves zero scatter.
    for (const auto & [id, c] : model.centroids) {
      Vector sum(kDim, 0.0);
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (labels[i] != id) {continue;}
        for (std::size_t d = 0; d < kDim; ++d) {sum[d] += ds.vectors[i][d] - c[d];}
      }
      for (double x : sum) {EXPECT_NEAR(x, 0.0, 1e-12);}
    }
  }
  const auto km = build_type_model(ds, fixtures::kmeans_labels(), Metric::Manhattan);
  EXPECT_EQ(km.excluded_ids, (std::vector<std::string>{"12"}));
}

TEST(TypeModel, SingleClusterAndNoSurvivors)
{
  const auto ds = line({0.0, 2.0, 4.0, 6.0});
  const auto one = build_type_model(ds, {1, 1, 1, 1}, Metric::Euclidean);
  ASSERT_EQ(one.centroids.size(), 1u);
  EXPECT_DOUBLE_EQ(one.centroids.at(1)[0], 3.0);
  EXPECT_EQ(code_of([&] {build_type_model(ds, {1, 2, 3, 4}, Metric::Euclidean, 0.5);}),
    ErrorCode::NoTypesSurvive);
  EXPECT_EQ(code_of([&] {build_type_model(ds, {1, 2, 3}, Metric::Euclidean);}),
    ErrorCode::LengthMismatch);
}

TEST(Classify, CentroidsAndTies)
{
  DriverTypeModel model;
  model.metric = Metric::Manhattan;
  const auto p1 = params_to_vector(fixtures::type1_centroid());
  const auto p3 = params_to_vector(fixtures::type3_centroid());
  model.centroids[1] = Vector(p1.begin(), p1.end());
  model.centroids[3] = Vector(p3.begin(), p3.end());
  EXPECT_EQ(classify_driver(model.centroids[1], model), 1);
  EXPECT_EQ(classify_driver(model.centroids[3], model), 3);
  Vector mid(kDim);
  for (std::size_t i = 0; i < kDim; ++i) {mid[i] = 0.5 * (p1[i] + p3[i]);}
  const double d1 = distance(mid, model.centroids[1], Metric::Manhattan);
  const double d3 = distance(mid, model.centroids[3], Metric::Manhattan);
  if (d1 == d3) {EXPECT_EQ(classify_driver(mid, model), 1);}

  DriverTypeModel tie;
  tie.metric = Metric::Euclidean;
  tie.centroids[4] = {1.0, 0.0};
  tie.centroids[2] = {-1.0, 0.0};
  EXPECT_EQ(classify_driver(Vector{0.0, 0.0}, tie), 2);
  EXPECT_EQ(code_of([] {classify_driver(Vector{0.0}, DriverTypeModel{});}),
    ErrorCode::EmptyModel);
}

TEST(TypeModel, JsonRoundTrip)
{
  const auto ds = random_dataset(19, 4);
  const auto model = build_type_model(ds, fixtures::hierarchical_labels(), Metric::Manhattan);
  const auto back = type_model_from_json(
    nlohmann::ordered_json::parse(type_model_to_json(model).dump()));
  EXPECT_EQ(back.centroids, model.centroids);
  EXPECT_EQ(back.metric, model.metric);
  EXPECT_EQ(back.excluded_ids, model.excluded_ids);
  EXPECT_EQ(code_of([] {type_model_from_json(nlohmann::ordered_json::object());}),
    ErrorCode::ParseError);
}

// --- agreement ---------------------------------------------------------------

/// ARI from pair counting over all sample pairs.
double pair_ari(const Labels & a, const Labels & b)
{
  double both = 0.0;
  double only_a = 0.0;
  double only_b = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      both += sa && sb ? 1.0 : 0.0;
      only_a += sa ? 1.0 : 0.0;
      only_b += sb ? 1.0 : 0.0;
      pairs += 1.0;
    }
  }
  const double expected = only_a * only_b / pairs;
  return (both - expected) / (0.5 * (only_a + only_b) - expected);
}

TEST(LabelAgreement, FixtureRows)
{
  const auto km = fixtures::kmeans_labels();
  const auto hi = fixtures::hierarchical_labels();
  const auto ids = fixtures::sample_ids();
  const auto ag = label_agreement(km, hi);
  EXPECT_EQ(ag.labels_a, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(ag.table[0][2], 0);  // k-means 1 -> hierarchical 3
  EXPECT_EQ(ag.table[2][0], 0);  // k-means 3 -> hierarchical 1
  std::vector<std::string> moved;
  for (std::size_t i = 0; i < km.size(); ++i) {
    if (km[i] != hi[i]) {
      EXPECT_EQ(hi[i], 2);
      moved.push_back(ids[i]);
    }
  }
  EXPECT_EQ(moved, (std::vector<std::string>{"2/3", "7", "13"}));
  EXPECT_NEAR(ag.adjusted_rand, pair_ari(km, hi), 1e-12);
}

TEST(LabelAgreement, IdenticalRandomAndErrors)
{
  const Labels a{1, 1, 2, 2, 3, 3, 3};
  EXPECT_EQ(label_agreement(a, a).adjusted_rand, 1.0);
  EXPECT_EQ(label_agreement(a, {5, 5, 9, 9, 4, 4, 4}).adjusted_rand, 1.0);
  std::mt19937_64 rng(37);
  Labels structured(2000);
  Labels random(2000);
  for (std::size_t i = 0; i < structured.size(); ++i) {
    structured[i] = static_cast<int>(i % 4) + 1;
    random[i] = std::uniform_int_distribution<int>(1, 4)(rng);
  }
  const double ari = label_agreement(structured, random).adjusted_rand;
  EXPECT_LT(std::abs(ari), 0.01);
  EXPECT_NEAR(ari, pair_ari(structured, random), 1e-9);
  EXPECT_EQ(code_of([] {label_agreement({1, 2}, {1});}), ErrorCode::LengthMismatch);
}

TEST(Fixtures, TableLabelCounts)
{
  std::map<int, int> km;
  std::map<int, int> hi;
  for (int l : fixtures::kmeans_labels()) {++km[l];}
  for (int l : fixtures::hierarchical_labels()) {++hi[l];}
  EXPECT_EQ(km, (std::map<int, int>{{1, 10}, {2, 1}, {3, 8}}));
  EXPECT_EQ(hi, (std::map<int, int>{{1, 8}, {2, 4}, {3, 7}}));
  EXPECT_EQ(fixtures::sample_ids().size(), 19u);
}

}  // namespace
}  // namespace eldm
