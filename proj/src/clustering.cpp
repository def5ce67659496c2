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
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

namespace eldm
{
namespace
{

using Matrix = std::vector<std::vector<double>>;

Matrix pairwise(const DriverDataset & ds, Metric m)
{
  const std::size_t n = ds.size();
  Matrix d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i][j] = d[j][i] = distance(ds.vectors[i], ds.vectors[j], m);
    }
  }
  return d;
}

std::mt19937_64 restart_stream(std::uint64_t seed, int restart)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(seq);
}

double lloyd_cost(double d, Metric m)
{
  return m == Metric::Euclidean ? d * d : d;
}

Vector center_of(const DriverDataset & ds, const std::vector<std::size_t> & members, Metric m)
{
  const std::size_t dim = ds.dim();
  Vector c(dim, 0.0);
  if (m == Metric::Euclidean) {
    for (std::size_t i : members) {
      for (std::size_t d = 0; d < dim; ++d) {c[d] += ds.vectors[i][d];}
    }
    for (double & x : c) {x /= static_cast<double>(members.size());}
    return c;
  }
  std::vector<double> column(members.size());
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t k = 0; k < members.size(); ++k) {column[k] = ds.vectors[members[k]][d];}
    std::sort(column.begin(), column.end());
    const std::size_t h = column.size() / 2;
    c[d] = column.size() % 2 == 1 ? column[h] : 0.5 * (column[h - 1] + column[h]);
  }
  return c;
}

struct Restart
{
  Labels labels;  // 0-based here
  std::vector<Vector> centers;
  double inertia = 0.0;
  std::vector<double> history;
};

Restart run_restart(const DriverDataset & ds, int k, Metric m, int max_iterations,
  std::mt19937_64 & rng)
{
  const std::size_t n = ds.size();
  const auto kk = static_cast<std::size_t>(k);

  // k-means++ seeding with D^2 weights under the metric.
  std::vector<std::size_t> chosen;
  chosen.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < kk) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = distance(ds.vectors[i], ds.vectors[chosen.back()], m);
      nearest[i] = std::min(nearest[i], d * d);
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (u < acc && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (nearest[pick] == 0.0 && pick > 0) {--pick;}
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {rest.push_back(i);}
      }
      pick = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
    }
    chosen.push_back(pick);
  }

  Restart r;
  for (std::size_t c : chosen) {r.centers.push_back(ds.vectors[c]);}
  r.labels.assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    Labels next(n, 0);
    std::vector<double> dist(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        const double d = distance(ds.vectors[i], r.centers[c], m);
        if (d < best) {
          best = d;
          next[i] = static_cast<int>(c);
        }
      }
      dist[i] = best;
    }
    // Empty clusters take the point farthest from its center.
    for (std::size_t c = 0; c < kk; ++c) {
      if (std::find(next.begin(), next.end(), static_cast<int>(c)) != next.end()) {continue;}
      std::vector<std::size_t> sizes(kk, 0);
      for (int l : next) {++sizes[static_cast<std::size_t>(l)];}
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(next[i])] < 2) {continue;}
        if (far == n || dist[i] > dist[far]) {far = i;}
      }
      next[far] = static_cast<int>(c);
      dist[far] = 0.0;
      r.centers[c] = ds.vectors[far];
    }
    std::vector<std::vector<std::size_t>> members(kk);
    for (std::size_t i = 0; i < n; ++i) {members[static_cast<std::size_t>(next[i])].push_back(i);}
    for (std::size_t c = 0; c < kk; ++c) {r.centers[c] = center_of(ds, members[c], m);}

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      objective += lloyd_cost(
        distance(ds.vectors[i], r.centers[static_cast<std::size_t>(next[i])], m), m);
    }
    r.history.push_back(objective);
    const bool converged = next == r.labels;
    r.labels = std::move(next);
    if (converged) {break;}
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = distance(ds.vectors[i], r.centers[static_cast<std::size_t>(r.labels[i])], m);
    r.inertia += d * d;
  }
  return r;
}

double comb2(double x)
{
  return x * (x - 1.0) / 2.0;
}

}  // namespace

// ---------------------------------------------------------------------------

const char * to_string(Metric m)
{
  return m == Metric::Euclidean ? "euclidean" : "manhattan";
}

Metric metric_from_string(std::string_view name)
{
  if (name == "euclidean") {return Metric::Euclidean;}
  if (name == "manhattan") {return Metric::Manhattan;}
  throw Error(ErrorCode::InvalidArgument,
    fmt::format("unknown metric '{}' (expected euclidean or manhattan)", name));
}

void DriverDataset::validate() const
{
  if (vectors.size() < 2) {
    throw Error(ErrorCode::TooFewSamples, fmt::format("{} samples, at least 2 needed",
      vectors.size()));
  }
  if (ids.size() != vectors.size()) {
    throw Error(ErrorCode::LengthMismatch, "ids and vectors differ in count");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim() || vectors[i].empty()) {
      throw Error(ErrorCode::LengthMismatch, fmt::format("sample '{}' has {} entries, "
        "expected {}", ids[i], vectors[i].size(), dim()));
    }
    for (double x : vectors[i]) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("sample '{}' is not finite", ids[i]));
      }
    }
  }
  std::set<std::string> seen;
  for (const auto & id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate sample id '{}'", id));
    }
  }
}

double distance(std::span<const double> a, std::span<const double> b, Metric m)
{
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch,
      fmt::format("vectors of length {} and {}", a.size(), b.size()));
  }
  double sum = 0.0;
  if (m == Metric::Euclidean) {
    for (std::size_t i = 0; i < a.size(); ++i) {sum += (a[i] - b[i]) * (a[i] - b[i]);}
    return std::sqrt(sum);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {sum += std::abs(a[i] - b[i]);}
  return sum;
}

Labels canonical_labels(const Labels & labels)
{
  std::map<int, int> renumber;
  Labels out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto it = renumber.find(l);
    if (it == renumber.end()) {
      it = renumber.emplace(l, static_cast<int>(renumber.size()) + 1).first;
    }
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------

KMeansResult kmeans(const DriverDataset & ds, int k, Metric m, const KMeansOptions & opts)
{
  ds.validate();
  if (k < 2 || static_cast<std::size_t>(k) > ds.size()) {
    throw Error(ErrorCode::KOutOfRange,
      fmt::format("k = {} outside [2, {}]", k, ds.size()));
  }
  if (opts.restarts < 1 || opts.max_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "restarts and iterations must be positive");
  }
  KMeansResult result;
  result.k = k;
  result.seed = opts.seed;
  result.restarts = opts.restarts;
  std::optional<Restart> best;
  for (int r = 0; r < opts.restarts; ++r) {
    auto rng = restart_stream(opts.seed, r);
    Restart run = run_restart(ds, k, m, opts.max_iterations, rng);
    result.objective_history.push_back(run.history);
    if (!best || run.inertia < best->inertia) {best = std::move(run);}
  }

  // Relabel 1.. by first member and permute centers to match.
  Labels shifted(best->labels.size());
  std::transform(best->labels.begin(), best->labels.end(), shifted.begin(),
    [](int l) {return l + 1;});
  result.labels = canonical_labels(shifted);
  result.centers.assign(static_cast<std::size_t>(k), {});
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    result.centers[static_cast<std::size_t>(result.labels[i] - 1)] =
      best->centers[static_cast<std::size_t>(best->labels[i])];
  }
  result.inertia = best->inertia;
  return result;
}

std::vector<ElbowPoint> elbow_curve(const DriverDataset & ds, Metric m, int k_max,
  const KMeansOptions & opts)
{
  ds.validate();
  if (k_max < 1 || static_cast<std::size_t>(k_max) > ds.size()) {
    throw Error(ErrorCode::KOutOfRange, fmt::format("k_max = {} outside [1, {}]", k_max,
      ds.size()));
  }
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  const Vector grand = center_of(ds, all, m);
  double scatter = 0.0;
  for (const auto & v : ds.vectors) {
    const double d = distance(v, grand, m);
    scatter += d * d;
  }
  std::vector<ElbowPoint> out{{1, scatter}};
  for (int k = 2; k <= k_max; ++k) {out.push_back({k, kmeans(ds, k, m, opts).inertia});}
  return out;
}

// ---------------------------------------------------------------------------

SilhouetteResult silhouette(const DriverDataset & ds, const Labels & labels, Metric m)
{
  if (labels.size() != ds.size()) {
    throw Error(ErrorCode::LengthMismatch,
      fmt::format("{} labels for {} samples", labels.size(), ds.size()));
  }
  const std::set<int> clusters(labels.begin(), labels.end());
  if (clusters.size() < 2) {
    throw Error(ErrorCode::SingleCluster, "silhouette needs at least two clusters");
  }
  const Matrix d = pairwise(ds, m);
  const std::size_t n = ds.size();
  SilhouetteResult out;
  out.values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> sums;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {continue;}
      auto & [sum, count] = sums[labels[j]];
      sum += d[i][j];
      ++count;
    }
    const auto own = sums.find(labels[i]);
    if (own == sums.end()) {continue;}  // singleton cluster
    const double a = own->second.first / own->second.second;
    double b = std::numeric_limits<double>::infinity();
    for (const auto & [label, sc] : sums) {
      if (label != labels[i]) {b = std::min(b, sc.first / sc.second);}
    }
    const double denom = std::max(a, b);
    out.values[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) /
    static_cast<double>(n);
  return out;
}

const SilhouetteCandidate & SilhouetteSelection::chosen() const
{
  if (!k) {throw Error(ErrorCode::NoEligibleK, "no candidate k is eligible");}
  for (const auto & c : candidates) {
    if (c.k == *k) {return c;}
  }
  throw Error(ErrorCode::NoEligibleK, "selected k missing from the report");
}

SilhouetteSelection select_k_silhouette(const DriverDataset & ds, Metric m,
  std::span<const int> candidates, const KMeansOptions & opts, double margin)
{
  ds.validate();
  const auto n = static_cast<int>(ds.size());
  for (int k : candidates) {
    if (k < 2 || k > n - 1) {
      throw Error(ErrorCode::KOutOfRange, fmt::format("candidate k = {} outside [2, {}]", k,
        n - 1));
    }
  }
  SilhouetteSelection sel;
  sel.margin = margin;
  double best = -std::numeric_limits<double>::infinity();
  for (int k : candidates) {
    SilhouetteCandidate c;
    c.k = k;
    c.clustering = kmeans(ds, k, m, opts);
    c.silhouette = silhouette(ds, c.clustering.labels, m);
    c.per_cluster.assign(static_cast<std::size_t>(k), {});
    for (std::size_t i = 0; i < ds.size(); ++i) {
      c.per_cluster[static_cast<std::size_t>(c.clustering.labels[i] - 1)].push_back(
        c.silhouette.values[i]);
    }
    for (auto & v : c.per_cluster) {std::sort(v.rbegin(), v.rend());}
    const double bar = c.silhouette.mean + margin;
    c.eligible = std::all_of(c.per_cluster.begin(), c.per_cluster.end(),
        [bar](const std::vector<double> & v) {return !v.empty() && v.front() > bar;});
    if (m == Metric::Manhattan) {
      c.eligible = c.eligible && std::all_of(c.silhouette.values.begin(),
          c.silhouette.values.end(), [](double s) {return s > 0.0;});
    }
    const bool better = c.silhouette.mean > best ||
      (c.silhouette.mean == best && sel.k && k < *sel.k);
    if (c.eligible && better) {
      best = c.silhouette.mean;
      sel.k = k;
    }
    sel.candidates.push_back(std::move(c));
  }
  return sel;
}

// ---------------------------------------------------------------------------

double average_linkage_distance(const std::vector<Vector> & r, const std::vector<Vector> & s,
  Metric m)
{
  if (r.empty() || s.empty()) {
    throw Error(ErrorCode::EmptyCluster, "average linkage of an empty cluster");
  }
  double sum = 0.0;
  for (const auto & x : r) {
    for (const auto & y : s) {sum += distance(x, y, m);}
  }
  return sum / (static_cast<double>(r.size()) * static_cast<double>(s.size()));
}

std::vector<int> Dendrogram::members(int id) const
{
  if (id < leaves) {return {id};}
  const auto & mg = merges.at(static_cast<std::size_t>(id - leaves));
  auto out = members(mg.a);
  const auto rest = members(mg.b);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<int> Dendrogram::leaf_order() const
{
  if (merges.empty()) {
    std::vector<int> out(static_cast<std::size_t>(leaves));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  return members(leaves + static_cast<int>(merges.size()) - 1);
}

Dendrogram hierarchical_cluster(const DriverDataset & ds, Metric m)
{
  ds.validate();
  const std::size_t n = ds.size();
  const Matrix d = pairwise(ds, m);
  struct Active
  {
    int id;
    std::vector<std::size_t> members;
  };
  std::vector<Active> active;
  for (std::size_t i = 0; i < n; ++i) {active.push_back({static_cast<int>(i), {i}});}

  Dendrogram out;
  out.leaves = static_cast<int>(n);
  double previous = 0.0;
  while (active.size() > 1) {
    std::size_t bi = 0;
    std::size_t bj = 1;
    double best = std::numeric_limits<double>::infinity();
    // `active` is sorted by id, so the first minimum is the lexicographic one.
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        double sum = 0.0;
        for (std::size_t x : active[i].members) {
          for (std::size_t y : active[j].members) {sum += d[x][y];}
        }
        const double h = sum / (static_cast<double>(active[i].members.size()) *
          static_cast<double>(active[j].members.size()));
        if (h < best) {
          best = h;
          bi = i;
          bj = j;
        }
      }
    }
    if (best < previous - 1e-12 * std::max(1.0, previous)) {
      throw Error(ErrorCode::InvalidArgument,
        fmt::format("merge height {} below the previous {}", best, previous));
    }
    previous = best;
    Active merged{out.leaves + static_cast<int>(out.merges.size()), active[bi].members};
    merged.members.insert(merged.members.end(), active[bj].members.begin(),
      active[bj].members.end());
    out.merges.push_back({active[bi].id, active[bj].id, best,
      static_cast<int>(merged.members.size())});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(std::move(merged));
  }
  return out;
}

Labels cut_dendrogram(const Dendrogram & d, double threshold)
{
  if (!(threshold >= 0.0)) {throw Error(ErrorCode::InvalidArgument, "negative threshold");}
  const auto n = static_cast<std::size_t>(d.leaves);
  std::vector<int> parent(n + d.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {x = parent[static_cast<std::size_t>(x)];}
      return x;
    };
  for (std::size_t k = 0; k < d.merges.size(); ++k) {
    const auto id = static_cast<int>(n + k);
    if (d.merges[k].height < threshold) {
      parent[static_cast<std::size_t>(find(d.merges[k].a))] = id;
      parent[static_cast<std::size_t>(find(d.merges[k].b))] = id;
    }
  }
  Labels roots(n);
  for (std::size_t i = 0; i < n; ++i) {roots[i] = find(static_cast<int>(i));}
  return canonical_labels(roots);
}

std::vector<std::vector<double>> cophenetic_matrix(const Dendrogram & d)
{
  const auto n = static_cast<std::size_t>(d.leaves);
  Matrix c(n, std::vector<double>(n, 0.0));
  for (const auto & mg : d.merges) {
    const auto a = d.members(mg.a);
    const auto b = d.members(mg.b);
    for (int x : a) {
      for (int y : b) {
        c[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = mg.height;
        c[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = mg.height;
      }
    }
  }
  return c;
}

CopheneticResult cophenetic_correlation(const DriverDataset & ds, const Dendrogram & d,
  Metric m)
{
  if (ds.size() < 3) {
    throw Error(ErrorCode::TooFewSamples, "cophenetic correlation needs at least 3 samples");
  }
  if (static_cast<std::size_t>(d.leaves) != ds.size()) {
    throw Error(ErrorCode::LengthMismatch, "dendrogram and dataset sizes differ");
  }
  const Matrix orig = pairwise(ds, m);
  const Matrix coph = cophenetic_matrix(d);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      x.push_back(orig[i][j]);
      y.push_back(coph[i][j]);
    }
  }
  const auto count = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / count;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / count;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {return {0.0, true};}
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

MetricSelection select_metric_cophenetic(const DriverDataset & ds, std::span<const Metric> metrics)
{
  if (metrics.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "metric selection needs at least two metrics");
  }
  MetricSelection out;
  double best = -std::numeric_limits<double>::infinity();
  for (Metric m : metrics) {
    MetricScore s;
    s.metric = m;
    s.dendrogram = hierarchical_cluster(ds, m);
    s.cophenetic = cophenetic_correlation(ds, s.dendrogram, m);
    if (s.cophenetic.value > best) {
      best = s.cophenetic.value;
      out.metric = m;
    }
    out.scores.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

DriverTypeModel build_type_model(const DriverDataset & ds, const Labels & labels, Metric m,
  double min_type_fraction)
{
  ds.validate();
  if (labels.size() != ds.size()) {
    throw Error(ErrorCode::LengthMismatch,
      fmt::format("{} labels for {} samples", labels.size(), ds.size()));
  }
  const auto min_size = static_cast<std::size_t>(
    std::ceil(min_type_fraction * static_cast<double>(ds.size()) - 1e-12));
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {groups[labels[i]].push_back(i);}

  DriverTypeModel model;
  model.metric = m;
  for (const auto & [label, members] : groups) {
    if (members.size() < min_size) {
      model.excluded_labels.push_back(label);
      for (std::size_t i : members) {model.excluded_ids.push_back(ds.ids[i]);}
      continue;
    }
    Vector c(ds.dim(), 0.0);
    for (std::size_t i : members) {
      for (std::size_t d = 0; d < c.size(); ++d) {c[d] += ds.vectors[i][d];}
    }
    for (double & x : c) {x /= static_cast<double>(members.size());}
    model.centroids.emplace(label, std::move(c));
  }
  if (model.centroids.empty()) {
    throw Error(ErrorCode::NoTypesSurvive,
      fmt::format("every cluster is smaller than {} samples", min_size));
  }
  return model;
}

int classify_driver(std::span<const double> v, const DriverTypeModel & model)
{
  if (model.centroids.empty()) {throw Error(ErrorCode::EmptyModel, "type model is empty");}
  int best_id = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto & [id, c] : model.centroids) {
    const double d = distance(v, c, model.metric);
    if (d < best) {
      best = d;
      best_id = id;
    }
  }
  return best_id;
}

LabelAgreement label_agreement(const Labels & a, const Labels & b)
{
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch,
      fmt::format("labelings of length {} and {}", a.size(), b.size()));
  }
  LabelAgreement out;
  const std::set<int> la(a.begin(), a.end());
  const std::set<int> lb(b.begin(), b.end());
  out.labels_a.assign(la.begin(), la.end());
  out.labels_b.assign(lb.begin(), lb.end());
  out.table.assign(out.labels_a.size(), std::vector<int>(out.labels_b.size(), 0));
  const auto index = [](const std::vector<int> & v, int l) {
      return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), l) - v.begin());
    };
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++out.table[index(out.labels_a, a[i])][index(out.labels_b, b[i])];
  }
  double index_sum = 0.0;
  std::vector<double> rows(out.labels_a.size(), 0.0);
  std::vector<double> cols(out.labels_b.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      index_sum += comb2(out.table[i][j]);
      rows[i] += out.table[i][j];
      cols[j] += out.table[i][j];
    }
  }
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double r : rows) {sum_a += comb2(r);}
  for (double c : cols) {sum_b += comb2(c);}
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) {
    // Both labelings trivial (all one cluster or all singletons).
    out.adjusted_rand = canonical_labels(a) == canonical_labels(b) ? 1.0 : 0.0;
  } else {
    out.adjusted_rand = (index_sum - expected) / (maximum - expected);
  }
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json type_model_to_json(const DriverTypeModel & model)
{
  nlohmann::ordered_json doc;
  doc["schema"] = kTypesSchema;
  doc["metric"] = to_string(model.metric);
  auto types = nlohmann::ordered_json::array();
  for (const auto & [id, c] : model.centroids) {
    nlohmann::ordered_json t;
    t["id"] = id;
    t["centroid"] = c;
    types.push_back(std::move(t));
  }
  doc["types"] = std::move(types);
  doc["excluded_labels"] = model.excluded_labels;
  doc["excluded_ids"] = model.excluded_ids;
  return doc;
}

DriverTypeModel type_model_from_json(const nlohmann::ordered_json & doc)
{
  if (!doc.is_object() || doc.value("schema", std::string()) != kTypesSchema) {
    throw Error(ErrorCode::ParseError,
      fmt::format("expected a document with schema '{}'", kTypesSchema));
  }
  DriverTypeModel model;
  try {
    model.metric = metric_from_string(doc.at("metric").get<std::string>());
    for (const auto & t : doc.at("types")) {
      model.centroids[t.at("id").get<int>()] = t.at("centroid").get<Vector>();
    }
    if (doc.contains("excluded_labels")) {
      model.excluded_labels = doc.at("excluded_labels").get<std::vector<int>>();
    }
    if (doc.contains("excluded_ids")) {
      model.excluded_ids = doc.at("excluded_ids").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::ParseError, fmt::format("type model: {}", e.what()));
  } catch (const Error & e) {
    throw Error(ErrorCode::ParseError, fmt::format("type model: {}", e.what()));
  }
  return model;
}

}  // namespace eldm
