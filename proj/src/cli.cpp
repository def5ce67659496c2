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

#include "eldm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "eldm/identification.hpp"
#include "eldm/io.hpp"
#include "eldm/svg.hpp"

namespace eldm::cli
{

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace
{

// --- configuration ---------------------------------------------------------

template<typename T>
void read_field(const json & obj, const std::string & section, const char * key, T & target)
{
  if (!obj.contains(key)) {return;}
  try {
    const auto & v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) {throw std::invalid_argument("expected a boolean");}
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) {throw std::invalid_argument("expected a number");}
      if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {throw std::invalid_argument("expected an integer");}
      }
    }
    target = v.get<T>();
  } catch (const std::exception & e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{}.{}: {}", section, key, e.what()));
  }
}

void check_keys(const json & obj, const std::string & section, std::set<std::string> allowed)
{
  if (!obj.is_object()) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("'{}' must be an object", section));
  }
  for (const auto & [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("unknown key '{}.{}'", section, key));
    }
  }
}

const char * gating_name(Gating g)
{
  return g == Gating::Independent ? "independent" : "mean_sign";
}

// --- helpers -----------------------------------------------------------------

std::string slug(const std::string & s)
{
  std::string out;
  for (char c : s) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  }
  return out.empty() ? "_" : out;
}

void check_cell(const std::string & s, const char * what)
{
  if (s.empty() || s.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument,
      fmt::format("{} '{}' must be non-empty without commas or line breaks", what, s));
  }
}

std::string path_opt(const json & opts, const char * key)
{
  if (!opts.contains(key) || !opts.at(key).is_string()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("missing option '{}'", key));
  }
  return opts.at(key).get<std::string>();
}

bool has(const json & opts, const char * key)
{
  return opts.contains(key) && !opts.at(key).is_null();
}

double rms(const std::vector<double> & v)
{
  double s = 0.0;
  for (double x : v) {s += x * x;}
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

double max_abs(const std::vector<double> & v)
{
  double m = 0.0;
  for (double x : v) {m = std::max(m, std::abs(x));}
  return m;
}

json nan_to_null(double x)
{
  return std::isfinite(x) ? json(x) : json(nullptr);
}

DriverParams load_params(const std::string & path, double kappa_ref,
  std::vector<std::string> & warnings)
{
  double recorded = kappa_ref;
  auto params = params_from_json(io::read_json(path), &recorded);
  if (recorded != kappa_ref) {
    warnings.push_back(fmt::format(
        "{} was identified with kappa_ref {} but the run uses {}", path, recorded, kappa_ref));
  }
  return params;
}

RoadCenterline load_road(const std::string & spec, const Config & cfg)
{
  if (spec == "builtin") {return build_validation_road({}, cfg.road_grid);}
  return io::road_from_csv(io::read_csv(spec), cfg.road_grid);
}

// --- identify ------------------------------------------------------------------

CommandResult cmd_identify(const Invocation & inv)
{
  const auto & o = inv.options;
  const std::string id = o.value("id", std::string("driver"));
  std::vector<DriveLog> logs;
  for (const auto & p : o.at("logs")) {
    logs.push_back(io::drive_log_from_csv(io::read_csv(p.get<std::string>())));
  }
  if (logs.empty()) {throw Error(ErrorCode::InvalidArgument, "identify needs at least one --log");}
  const auto fit = identify(logs, inv.config.planner, inv.config.identification_stride);

  CommandResult result;
  auto params = params_to_json(fit.params, inv.config.planner.kappa_ref);
  params["id"] = id;
  json report;
  report["schema"] = kFitSchema;
  report["id"] = id;
  report["rows"] = fit.report.rows;
  report["residual_rms_m"] = fit.report.residual_rms;
  report["intercepts_m"] = fit.report.intercepts;
  report["identified"] = fit.report.identified;
  report["rank_deficient"] = fit.report.rank_deficient;
  report["unidentified"] = fit.report.unidentified();
  if (fit.report.rank_deficient) {
    std::string names;
    for (const auto & n : fit.report.unidentified()) {names += (names.empty() ? "" : ", ") + n;}
    result.warnings.push_back(fmt::format("channels not identified (set to 0): {}", names));
  }
  result.files.push_back({fmt::format("params_{}.json", slug(id)), io::dump_json(params)});
  result.files.push_back({fmt::format("fit_{}.json", slug(id)), io::dump_json(report)});
  return result;
}

// --- cluster -------------------------------------------------------------------

DriverDataset load_dataset(const json & o)
{
  DriverDataset ds;
  if (has(o, "dataset")) {
    ds = io::dataset_from_csv(io::read_csv(path_opt(o, "dataset")));
  }
  if (o.contains("params")) {
    for (const auto & p : o.at("params")) {
      const std::string path = p.get<std::string>();
      const auto doc = io::read_json(path);
      const auto v = params_to_vector(params_from_json(doc));
      ds.ids.push_back(doc.contains("id") && doc.at("id").is_string() ?
        doc.at("id").get<std::string>() : fs::path(path).stem().string());
      ds.vectors.emplace_back(v.begin(), v.end());
    }
  }
  for (const auto & id : ds.ids) {check_cell(id, "sample id");}
  ds.validate();
  return ds;
}

DriverDataset standardized(const DriverDataset & ds)
{
  DriverDataset out = ds;
  const double n = static_cast<double>(ds.size());
  for (std::size_t d = 0; d < ds.dim(); ++d) {
    double mean = 0.0;
    for (const auto & v : ds.vectors) {mean += v[d] / n;}
    double var = 0.0;
    for (const auto & v : ds.vectors) {var += (v[d] - mean) * (v[d] - mean) / n;}
    const double sd = std::sqrt(var);
    for (auto & v : out.vectors) {v[d] = sd > 0.0 ? (v[d] - mean) / sd : 0.0;}
  }
  return out;
}

SilhouetteCandidate describe_partition(const DriverDataset & ds, const Labels & labels, Metric m)
{
  SilhouetteCandidate c;
  c.k = *std::max_element(labels.begin(), labels.end());
  c.clustering.labels = labels;
  c.silhouette = silhouette(ds, labels, m);
  c.per_cluster.resize(static_cast<std::size_t>(c.k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    c.per_cluster[static_cast<std::size_t>(labels[i] - 1)].push_back(c.silhouette.values[i]);
  }
  for (auto & v : c.per_cluster) {std::sort(v.rbegin(), v.rend());}
  return c;
}

json silhouette_json(const SilhouetteCandidate & c)
{
  json j;
  j["k"] = c.k;
  j["mean"] = c.silhouette.mean;
  j["eligible"] = c.eligible;
  j["values"] = c.silhouette.values;
  json per = json::array();
  for (const auto & v : c.per_cluster) {per.push_back(v.empty() ? 0.0 : v.front());}
  j["cluster_max"] = per;
  return j;
}

CommandResult cmd_cluster(const Invocation & inv)
{
  const auto & o = inv.options;
  const auto & cs = inv.config.clustering;
  CommandResult result;
  const DriverDataset ds = load_dataset(o);
  const bool standardize = o.value("standardize", false);
  const DriverDataset work = standardize ? standardized(ds) : ds;
  const std::string method = o.value("method", std::string("kmeans"));
  const std::string metric_opt = o.value("metric", std::string("euclidean"));

  json report;
  report["schema"] = kClusterReportSchema;
  report["method"] = method;
  report["standardized"] = standardize;
  report["samples"] = ds.size();

  Metric metric = Metric::Euclidean;
  if (metric_opt == "auto") {
    const std::vector<Metric> metrics{Metric::Euclidean, Metric::Manhattan};
    const auto sel = select_metric_cophenetic(work, metrics);
    metric = sel.metric;
    json scores = json::array();
    for (const auto & s : sel.scores) {
      scores.push_back({{"metric", to_string(s.metric)},
          {"cophenetic", s.cophenetic.value}, {"zero_variance", s.cophenetic.zero_variance}});
    }
    report["metric_selection"] = scores;
  } else {
    metric = metric_from_string(metric_opt);
  }
  report["metric"] = to_string(metric);

  std::optional<int> k;
  if (has(o, "k") && o.at("k").is_number_integer()) {k = o.at("k").get<int>();}
  const KMeansOptions kopts{inv.seed, cs.restarts, cs.max_iterations};
  Labels labels;

  if (method == "kmeans") {
    const int k_max = std::min(cs.elbow_k_max, static_cast<int>(work.size()));
    const auto elbow = elbow_curve(work, metric, k_max, kopts);
    json ej = json::array();
    for (const auto & p : elbow) {ej.push_back({{"k", p.k}, {"inertia", p.inertia}});}
    report["elbow"] = ej;
    result.files.push_back({"elbow.svg", svg::elbow_plot(elbow, metric)});
    if (k) {
      const auto r = kmeans(work, *k, metric, kopts);
      labels = r.labels;
      report["k"] = *k;
      report["inertia"] = r.inertia;
    } else {
      std::vector<int> cands;
      for (int c : cs.k_candidates) {
        if (c >= 2 && c <= static_cast<int>(work.size()) - 1) {cands.push_back(c);}
      }
      if (cands.empty()) {throw Error(ErrorCode::KOutOfRange, "no k candidate in [2, n - 1]");}
      const auto sel = select_k_silhouette(work, metric, cands, kopts, cs.silhouette_margin);
      json cj = json::array();
      const SilhouetteCandidate * best = &sel.candidates.front();
      for (const auto & c : sel.candidates) {
        cj.push_back(silhouette_json(c));
        result.files.push_back({fmt::format("silhouette_k{}.svg", c.k),
            svg::silhouette_plot(c, metric)});
        if (c.silhouette.mean > best->silhouette.mean) {best = &c;}
      }
      report["silhouette"] = {{"margin", cs.silhouette_margin}, {"candidates", cj}};
      if (sel.k) {
        best = &sel.chosen();
      } else {
        result.warnings.push_back(fmt::format(
            "no candidate k passed the silhouette rule; using k = {} (largest mean)", best->k));
      }
      labels = best->clustering.labels;
      report["k"] = best->k;
      report["k_eligible"] = sel.k.has_value();
      report["inertia"] = best->clustering.inertia;
    }
  } else if (method == "hier") {
    const auto d = hierarchical_cluster(work, metric);
    const int n = static_cast<int>(work.size());
    double threshold = cs.cut_threshold;
    if (k) {
      if (*k < 2 || *k > n) {
        throw Error(ErrorCode::KOutOfRange, fmt::format("k = {} outside [2, {}]", *k, n));
      }
      if (*k == n) {
        threshold = 0.0;
      } else {
        const double below = d.merges[static_cast<std::size_t>(n - *k - 1)].height;
        const double above = d.merges[static_cast<std::size_t>(n - *k)].height;
        if (below == above) {
          result.warnings.push_back(fmt::format("merge heights tie at k = {}", *k));
        }
        threshold = 0.5 * (below + above);
      }
    } else if (has(o, "threshold_fraction")) {
      threshold = o.at("threshold_fraction").get<double>() * d.root_height();
    } else if (has(o, "threshold")) {
      threshold = o.at("threshold").get<double>();
    }
    labels = cut_dendrogram(d, threshold);
    const auto coph = cophenetic_correlation(work, d, metric);
    report["threshold"] = threshold;
    report["root_height"] = d.root_height();
    report["cophenetic"] = coph.value;
    report["k"] = *std::max_element(labels.begin(), labels.end());
    result.files.push_back({"dendrogram.csv", io::dendrogram_to_csv(d)});
    result.files.push_back({"dendrogram.svg", svg::dendrogram_plot(d, ds.ids, threshold, metric)});
  } else if (method == "labels") {
    const auto rows = io::labels_from_csv(io::read_csv(path_opt(o, "labels")));
    std::map<std::string, int> by_id;
    for (const auto & r : rows) {by_id[r.id] = r.label;}
    for (const auto & id : ds.ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::LengthMismatch, fmt::format("no label for sample '{}'", id));
      }
      labels.push_back(it->second);
    }
    report["k"] = std::set<int>(labels.begin(), labels.end()).size();
  } else {
    throw Error(ErrorCode::InvalidArgument,
      fmt::format("unknown method '{}' (kmeans, hier, labels)", method));
  }

  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() >= 2 && distinct.size() < ds.size() && !(method == "kmeans" && !k)) {
    Labels canon = canonical_labels(labels);
    const auto c = describe_partition(work, canon, metric);
    report["silhouette_mean"] = c.silhouette.mean;
    result.files.push_back({"silhouette.svg", svg::silhouette_plot(c, metric)});
  }

  const auto model = build_type_model(ds, labels, metric, cs.min_type_fraction);
  report["labels"] = labels;
  std::map<int, int> sizes;
  for (int l : labels) {++sizes[l];}
  json sj = json::object();
  for (const auto & [l, s] : sizes) {sj[std::to_string(l)] = s;}
  report["sizes"] = sj;
  report["excluded_labels"] = model.excluded_labels;
  report["excluded_ids"] = model.excluded_ids;

  auto types = type_model_to_json(model);
  types["diagnostics"] = report;
  result.files.push_back({"labels.csv", io::labels_to_csv(ds.ids, labels)});
  result.files.push_back({"types.json", io::dump_json(types)});
  result.files.push_back({"cluster_report.json", io::dump_json(report)});
  return result;
}

// --- simulate ------------------------------------------------------------------

CommandResult cmd_simulate(const Invocation & inv)
{
  const auto & o = inv.options;
  CommandResult result;
  DriverParams params;
  std::string title;
  if (has(o, "params")) {
    const std::string path = path_opt(o, "params");
    params = load_params(path, inv.config.planner.kappa_ref, result.warnings);
    title = fs::path(path).stem().string();
  } else if (has(o, "type")) {
    const int type = o.at("type").get<int>();
    const auto model = type_model_from_json(io::read_json(path_opt(o, "types")));
    const auto it = model.centroids.find(type);
    if (it == model.centroids.end()) {
      std::string avail;
      for (const auto & [id, c] : model.centroids) {
        avail += (avail.empty() ? "" : ", ") + std::to_string(id);
      }
      throw Error(ErrorCode::EmptyModel,
        fmt::format("type {} is not in the model; available types: {}", type,
        avail.empty() ? "none" : avail));
    }
    params = vector_to_params(std::span<const double>(it->second));
    title = fmt::format("type {}", type);
  } else {
    throw Error(ErrorCode::InvalidArgument, "simulate needs --params or --type with --types");
  }
  const std::string name = o.value("name", std::string("sim"));
  const auto road = load_road(o.value("road", std::string("builtin")), inv.config);
  const auto run = run_simulation(road, params, inv.config.planner, inv.config.simulation);
  if (!run.completed()) {throw Error(*run.abort_code, run.diagnostic);}

  CurveFeatureReport features;
  try {
    features = extract_features(run.trace, road, inv.config.features);
  } catch (const Error & e) {
    if (e.code() != ErrorCode::NoCurvesDetected) {throw;}
    features.straight_mean_offset = straight_mean_offset(run.trace, road, inv.config.features);
  }
  std::vector<double> offsets;
  for (const auto & s : run.trace.samples) {offsets.push_back(s.offset);}
  json summary;
  summary["completed"] = true;
  summary["samples"] = run.trace.samples.size();
  summary["steps"] = run.trajectory.size();
  summary["road_length_m"] = road.length();
  summary["offset_rms_m"] = rms(offsets);
  summary["offset_max_abs_m"] = max_abs(offsets);
  summary["tracking_error_rms_m"] = rms(run.tracking_error);
  summary["tracking_error_max_m"] = max_abs(run.tracking_error);
  summary["straight_mean_offset_m"] = nan_to_null(features.straight_mean_offset);
  summary["curves"] = features.curves.size();

  const std::string prefix = slug(name);
  result.files.push_back({prefix + "_trace.csv", io::trace_to_csv(run.trace)});
  result.files.push_back({prefix + "_trace.svg",
      svg::trace_plot(run.trace, fmt::format("Lateral offset, {}", title))});
  result.files.push_back({prefix + "_features.json", io::dump_json(report_to_json(features))});
  result.files.push_back({prefix + "_summary.json", io::dump_json(summary)});
  return result;
}

// --- compare -------------------------------------------------------------------

char dir_letter(CurveDirection d)
{
  return d == CurveDirection::Left ? 'L' : 'R';
}

std::string join(const std::vector<std::string> & parts)
{
  std::string out;
  for (const auto & p : parts) {out += (out.empty() ? "" : "; ") + p;}
  return out.empty() ? "-" : out;
}

std::array<std::string, 4> table_column(const CurveFeatureReport & r, double symmetry)
{
  std::vector<std::string> peak;
  std::vector<std::string> drift;
  std::vector<std::string> cut;
  for (std::size_t i = 0; i < r.curves.size(); ++i) {
    const auto & c = r.curves[i];
    const std::string tag = fmt::format("{}{}", dir_letter(c.direction), i + 1);
    peak.push_back(fmt::format("{} {:+.2f} m at {:+.0f} m from entry", tag, c.peak_cut_offset,
      c.peak_lag));
    drift.push_back(fmt::format("{} {:.2f} m at {:.0f} m before entry", tag,
      c.precurve_outward_offset, c.entry - c.precurve_outward_station));
    cut.push_back(fmt::format("{} {:.0f} m around {:.0f} m", tag, c.cut_length,
      c.peak_cut_station));
  }
  const double s = r.straight_mean_offset;
  const std::string straight = !std::isfinite(s) ? "n/a" :
    fmt::format("{:+.3f} m ({})", s, s < -0.02 ? "negative" : s > 0.02 ? "positive" : "near zero");
  return {join(peak) + fmt::format("; symmetry {:.2f}", symmetry), join(drift), join(cut),
    straight};
}

CommandResult cmd_compare(const Invocation & inv)
{
  const auto & o = inv.options;
  const auto a = report_from_json(io::read_json(path_opt(o, "a")));
  const auto b = report_from_json(io::read_json(path_opt(o, "b")));
  const std::string la = o.value("label_a", std::string("type A"));
  const std::string lb = o.value("label_b", std::string("type B"));
  check_cell(la, "label");
  check_cell(lb, "label");
  const auto cmp = compare_types(a, b);
  const auto ca = table_column(a, cmp.symmetry_a);
  const auto cb = table_column(b, cmp.symmetry_b);
  const std::array<const char *, 4> rows{"max offset (place; value)", "pre-curve outward drift",
    "curve cutting (place; length)", "straight offset"};

  std::string csv = fmt::format("feature,{},{}\n", la, lb);
  std::size_t wa = la.size();
  std::size_t wb = lb.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += fmt::format("{},{},{}\n", rows[i], ca[i], cb[i]);
    wa = std::max(wa, ca[i].size());
    wb = std::max(wb, cb[i].size());
  }
  std::string text = fmt::format("{:<30} | {:<{}} | {:<{}}\n", "feature", la, wa, lb, wb);
  text += std::string(30 + wa + wb + 6, '-') + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    text += fmt::format("{:<30} | {:<{}} | {:<{}}\n", rows[i], ca[i], wa, cb[i], wb);
  }

  std::string curves = "curve,direction,peak_a_m,peak_b_m,lag_a_m,lag_b_m,outward_a_m,"
    "outward_b_m,cut_length_a_m,cut_length_b_m\n";
  for (std::size_t i = 0; i < cmp.curves.size(); ++i) {
    const auto & c = cmp.curves[i];
    curves += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", i + 1,
      c.direction == CurveDirection::Left ? "left" : "right", io::format_number(c.peak_a),
      io::format_number(c.peak_b), io::format_number(c.lag_a), io::format_number(c.lag_b),
      io::format_number(c.outward_a), io::format_number(c.outward_b),
      io::format_number(c.cut_length_a), io::format_number(c.cut_length_b));
  }
  CommandResult result;
  result.files.push_back({"compare.csv", csv});
  result.files.push_back({"compare.txt", text});
  result.files.push_back({"compare_curves.csv", curves});
  return result;
}

// --- road build / synth-log --------------------------------------------------------

CommandResult cmd_road_build(const Invocation & inv)
{
  const auto road = load_road(inv.options.value("input", std::string("builtin")), inv.config);
  CommandResult result;
  result.files.push_back({"road.csv", io::road_to_csv(road)});
  result.files.push_back({"road.svg", svg::road_plot(road)});
  return result;
}

CommandResult cmd_synth_log(const Invocation & inv)
{
  const auto & o = inv.options;
  CommandResult result;
  const auto params = load_params(path_opt(o, "params"), inv.config.planner.kappa_ref,
      result.warnings);
  SyntheticDriveConfig synth;
  synth.length = o.value("length", synth.length);
  synth.noise_sigma = o.value("noise", 0.0);
  synth.seed = inv.seed;
  const auto log = synthesize_drive_log(params, inv.config.planner, synth);
  result.files.push_back({slug(o.value("name", std::string("synthetic_log"))) + ".csv",
      io::drive_log_to_csv(log)});
  return result;
}

std::vector<std::string> input_paths(const json & o)
{
  std::vector<std::string> out;
  for (const char * key : {"logs", "params", "dataset", "labels", "types", "a", "b", "road",
      "input"})
  {
    if (!o.contains(key)) {continue;}
    const auto & v = o.at(key);
    if (v.is_string() && v.get<std::string>() != "builtin") {out.push_back(v.get<std::string>());}
    if (v.is_array()) {
      for (const auto & p : v) {out.push_back(p.get<std::string>());}
    }
  }
  return out;
}

}  // namespace

Config config_from_json(const json & doc, const Config & base)
{
  Config c = base;
  check_keys(doc, "config", {"schema", "planner", "simulation", "features", "clustering",
      "identification", "road"});
  if (doc.contains("schema") && doc.at("schema") != kConfigSchema) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("expected schema '{}'", kConfigSchema));
  }
  if (doc.contains("planner")) {
    const auto & p = doc.at("planner");
    check_keys(p, "planner", {"horizon", "node_stations", "kappa_ref", "replan_interval",
        "min_speed_mps", "max_speed_mps", "gating"});
    read_field(p, "planner", "horizon", c.planner.horizon);
    read_field(p, "planner", "node_stations", c.planner.node_stations);
    read_field(p, "planner", "kappa_ref", c.planner.kappa_ref);
    read_field(p, "planner", "replan_interval", c.planner.replan_interval);
    read_field(p, "planner", "min_speed_mps", c.planner.min_speed);
    read_field(p, "planner", "max_speed_mps", c.planner.max_speed);
    std::string gating = gating_name(c.planner.gating);
    read_field(p, "planner", "gating", gating);
    if (gating == "independent") {
      c.planner.gating = Gating::Independent;
    } else if (gating == "mean_sign") {
      c.planner.gating = Gating::MeanSign;
    } else {
      throw Error(ErrorCode::InvalidConfig,
        fmt::format("planner.gating: '{}' is not independent or mean_sign", gating));
    }
  }
  if (doc.contains("simulation")) {
    const auto & s = doc.at("simulation");
    check_keys(s, "simulation", {"wheelbase", "dt", "speed_mps", "pursuit_lookahead",
        "max_steering", "path_sample_spacing", "enforce_speed_band"});
    read_field(s, "simulation", "wheelbase", c.simulation.wheelbase);
    read_field(s, "simulation", "dt", c.simulation.dt);
    read_field(s, "simulation", "speed_mps", c.simulation.speed);
    read_field(s, "simulation", "pursuit_lookahead", c.simulation.pursuit_lookahead);
    read_field(s, "simulation", "max_steering", c.simulation.max_steering);
    read_field(s, "simulation", "path_sample_spacing", c.simulation.path_sample_spacing);
    read_field(s, "simulation", "enforce_speed_band", c.simulation.enforce_speed_band);
  }
  if (doc.contains("features")) {
    const auto & f = doc.at("features");
    check_keys(f, "features", {"kappa_min", "min_curve_length", "peak_margin",
        "outward_before", "outward_after", "cut_band", "straight_clearance",
        "initial_exclusion"});
    read_field(f, "features", "kappa_min", c.features.kappa_min);
    read_field(f, "features", "min_curve_length", c.features.min_curve_length);
    read_field(f, "features", "peak_margin", c.features.peak_margin);
    read_field(f, "features", "outward_before", c.features.outward_before);
    read_field(f, "features", "outward_after", c.features.outward_after);
    read_field(f, "features", "cut_band", c.features.cut_band);
    read_field(f, "features", "straight_clearance", c.features.straight_clearance);
    read_field(f, "features", "initial_exclusion", c.features.initial_exclusion);
  }
  if (doc.contains("clustering")) {
    const auto & k = doc.at("clustering");
    check_keys(k, "clustering", {"restarts", "max_iterations", "k_candidates",
        "silhouette_margin", "cut_threshold", "min_type_fraction", "elbow_k_max"});
    read_field(k, "clustering", "restarts", c.clustering.restarts);
    read_field(k, "clustering", "max_iterations", c.clustering.max_iterations);
    read_field(k, "clustering", "k_candidates", c.clustering.k_candidates);
    read_field(k, "clustering", "silhouette_margin", c.clustering.silhouette_margin);
    read_field(k, "clustering", "cut_threshold", c.clustering.cut_threshold);
    read_field(k, "clustering", "min_type_fraction", c.clustering.min_type_fraction);
    read_field(k, "clustering", "elbow_k_max", c.clustering.elbow_k_max);
    if (c.clustering.restarts < 1 || c.clustering.max_iterations < 1 ||
      c.clustering.elbow_k_max < 1 || !(c.clustering.min_type_fraction >= 0.0) ||
      c.clustering.min_type_fraction > 1.0)
    {
      throw Error(ErrorCode::InvalidConfig, "clustering settings out of range");
    }
  }
  if (doc.contains("identification")) {
    const auto & i = doc.at("identification");
    check_keys(i, "identification", {"stride"});
    read_field(i, "identification", "stride", c.identification_stride);
    if (!(c.identification_stride > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "identification.stride must be positive");
    }
  }
  if (doc.contains("road")) {
    const auto & r = doc.at("road");
    check_keys(r, "road", {"grid_spacing"});
    read_field(r, "road", "grid_spacing", c.road_grid);
  }
  c.planner.validate();
  c.simulation.validate(c.planner);
  return c;
}

json config_to_json(const Config & c)
{
  json doc;
  doc["schema"] = kConfigSchema;
  doc["planner"] = {{"horizon", c.planner.horizon}, {"node_stations", c.planner.node_stations},
    {"kappa_ref", c.planner.kappa_ref}, {"replan_interval", c.planner.replan_interval},
    {"min_speed_mps", c.planner.min_speed}, {"max_speed_mps", c.planner.max_speed},
    {"gating", gating_name(c.planner.gating)}};
  doc["simulation"] = {{"wheelbase", c.simulation.wheelbase}, {"dt", c.simulation.dt},
    {"speed_mps", c.simulation.speed}, {"pursuit_lookahead", c.simulation.pursuit_lookahead},
    {"max_steering", c.simulation.max_steering},
    {"path_sample_spacing", c.simulation.path_sample_spacing},
    {"enforce_speed_band", c.simulation.enforce_speed_band}};
  doc["features"] = {{"kappa_min", c.features.kappa_min},
    {"min_curve_length", c.features.min_curve_length}, {"peak_margin", c.features.peak_margin},
    {"outward_before", c.features.outward_before}, {"outward_after", c.features.outward_after},
    {"cut_band", c.features.cut_band}, {"straight_clearance", c.features.straight_clearance},
    {"initial_exclusion", c.features.initial_exclusion}};
  doc["clustering"] = {{"restarts", c.clustering.restarts},
    {"max_iterations", c.clustering.max_iterations},
    {"k_candidates", c.clustering.k_candidates},
    {"silhouette_margin", c.clustering.silhouette_margin},
    {"cut_threshold", c.clustering.cut_threshold},
    {"min_type_fraction", c.clustering.min_type_fraction},
    {"elbow_k_max", c.clustering.elbow_k_max}};
  doc["identification"] = {{"stride", c.identification_stride}};
  doc["road"] = {{"grid_spacing", c.road_grid}};
  return doc;
}

CommandResult execute(const Invocation & inv)
{
  if (inv.command == "identify") {return cmd_identify(inv);}
  if (inv.command == "cluster") {return cmd_cluster(inv);}
  if (inv.command == "simulate") {return cmd_simulate(inv);}
  if (inv.command == "compare") {return cmd_compare(inv);}
  if (inv.command == "road build") {return cmd_road_build(inv);}
  if (inv.command == "synth-log") {return cmd_synth_log(inv);}
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown command '{}'", inv.command));
}

std::string manifest_name(const Invocation & inv)
{
  std::string name = "manifest_" + slug(inv.command);
  for (const char * key : {"id", "name"}) {
    if (inv.options.contains(key) && inv.options.at(key).is_string()) {
      name += "_" + slug(inv.options.at(key).get<std::string>());
    }
  }
  return name + ".json";
}

json manifest_to_json(const Invocation & inv, const CommandResult & result)
{
  json doc;
  doc["schema"] = kManifestSchema;
  doc["tool_version"] = kToolVersion;
  doc["command"] = inv.command;
  doc["options"] = inv.options;
  doc["inputs"] = input_paths(inv.options);
  doc["config"] = config_to_json(inv.config);
  doc["seed"] = inv.seed;
  doc["out_dir"] = inv.out_dir.string();
  doc["schemas"] = {{"params", kParamsSchema}, {"types", kTypesSchema},
    {"features", kFeaturesSchema}, {"fit_report", kFitSchema},
    {"cluster_report", kClusterReportSchema}, {"config", kConfigSchema}};
  json outputs = json::array();
  for (const auto & f : result.files) {
    outputs.push_back({{"name", f.name}, {"bytes", f.content.size()}});
  }
  doc["outputs"] = outputs;
  return doc;
}

Invocation invocation_from_manifest(const json & doc)
{
  if (!doc.is_object() || doc.value("schema", std::string()) != kManifestSchema) {
    throw Error(ErrorCode::ParseError, fmt::format("expected schema '{}'", kManifestSchema));
  }
  Invocation inv;
  try {
    inv.command = doc.at("command").get<std::string>();
    inv.options = doc.at("options");
    inv.seed = doc.at("seed").get<std::uint64_t>();
    inv.out_dir = doc.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::ParseError, fmt::format("manifest: {}", e.what()));
  }
  inv.config = config_from_json(doc.at("config"));
  return inv;
}

void write_result(const Invocation & inv, const CommandResult & result)
{
  for (const auto & f : result.files) {io::write_atomic(inv.out_dir / f.name, f.content);}
  io::write_atomic(inv.out_dir / manifest_name(inv),
    io::dump_json(manifest_to_json(inv, result)));
}

std::vector<std::string> verify_replay(const Invocation & inv)
{
  const auto result = execute(inv);
  std::vector<std::string> differing;
  for (const auto & f : result.files) {
    const auto path = inv.out_dir / f.name;
    if (!fs::exists(path) || io::read_text(path) != f.content) {differing.push_back(f.name);}
  }
  return differing;
}

int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  CLI::App app{"eldm: extended linear driver model toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_path;
  std::optional<double> kappa_ref;
  app.add_option("--seed", seed, "Seed for every random stream")->capture_default_str();
  auto * out_opt = app.add_option("--out-dir", out_dir, "Output directory")
    ->capture_default_str();
  app.add_option("--config", config_path, "JSON configuration file (eldm_config_v1)")
    ->check(CLI::ExistingFile);
  app.add_option("--kappa-ref", kappa_ref, "Curvature normalization in 1/m (calibration)");

  Invocation inv;
  json & o = inv.options;

  // identify
  std::vector<std::string> logs;
  std::string id = "driver";
  std::optional<double> stride;
  auto * identify = app.add_subcommand("identify", "Fit driver parameters from drive logs");
  identify->add_option("--log", logs, "Drive log CSV (repeatable)")->required()
    ->check(CLI::ExistingFile);
  identify->add_option("--id", id, "Driver id")->capture_default_str();
  identify->add_option("--stride", stride, "Anchor spacing in m");

  // cluster
  std::string dataset;
  std::vector<std::string> param_files;
  std::string method = "kmeans";
  std::string metric = "euclidean";
  std::string k_text = "auto";
  std::optional<double> threshold;
  std::optional<double> threshold_fraction;
  std::string labels_path;
  bool standardize = false;
  auto * cluster = app.add_subcommand("cluster", "Cluster parameter vectors into driver types");
  cluster->add_option("--dataset", dataset, "Dataset CSV id,p1..p19")->check(CLI::ExistingFile);
  cluster->add_option("--params", param_files, "Params JSON files (repeatable)")
    ->check(CLI::ExistingFile);
  cluster->add_option("--method", method, "kmeans, hier or labels")->capture_default_str()
    ->check(CLI::IsMember({"kmeans", "hier", "labels"}));
  cluster->add_option("--metric", metric, "euclidean, manhattan or auto")->capture_default_str()
    ->check(CLI::IsMember({"euclidean", "manhattan", "auto"}));
  cluster->add_option("--k", k_text, "Cluster count or auto")->capture_default_str();
  cluster->add_option("--threshold", threshold, "Dendrogram cut height");
  cluster->add_option("--threshold-fraction", threshold_fraction,
    "Dendrogram cut as a fraction of the root height");
  cluster->add_option("--labels", labels_path, "Label CSV id,label (method labels)")
    ->check(CLI::ExistingFile);
  cluster->add_flag("--standardize", standardize, "z-score each coordinate before clustering");

  // simulate
  std::string sim_params;
  std::optional<int> type_id;
  std::string types_path;
  std::string road = "builtin";
  std::string name = "sim";
  std::optional<double> speed;
  auto * simulate = app.add_subcommand("simulate", "Closed-loop run of one parameter set");
  simulate->add_option("--params", sim_params, "Params JSON")->check(CLI::ExistingFile);
  simulate->add_option("--type", type_id, "Type id from --types");
  simulate->add_option("--types", types_path, "Type model JSON")->check(CLI::ExistingFile);
  simulate->add_option("--road", road, "Road CSV or builtin")->capture_default_str();
  simulate->add_option("--name", name, "Output file prefix")->capture_default_str();
  simulate->add_option("--speed", speed, "Speed in m/s");

  // compare
  std::string fa;
  std::string fb;
  std::string label_a = "type A";
  std::string label_b = "type B";
  auto * compare = app.add_subcommand("compare", "Compare the feature reports of two types");
  compare->add_option("a", fa, "Feature report of the first type")->required()
    ->check(CLI::ExistingFile);
  compare->add_option("b", fb, "Feature report of the second type")->required()
    ->check(CLI::ExistingFile);
  compare->add_option("--label-a", label_a)->capture_default_str();
  compare->add_option("--label-b", label_b)->capture_default_str();

  // road build
  std::string road_input = "builtin";
  auto * road_cmd = app.add_subcommand("road", "Road utilities");
  road_cmd->require_subcommand(1);
  auto * road_build = road_cmd->add_subcommand("build", "Build a centerline from a road CSV");
  road_build->add_option("--input", road_input, "Road CSV or builtin")->capture_default_str();

  // synth-log
  std::string synth_params;
  double length = 40000.0;
  double noise = 0.0;
  std::string log_name = "synthetic_log";
  auto * synth = app.add_subcommand("synth-log", "Generate a drive log from parameters");
  synth->add_option("--params", synth_params, "Params JSON")->required()
    ->check(CLI::ExistingFile);
  synth->add_option("--length", length, "Drive length in m")->capture_default_str();
  synth->add_option("--noise", noise, "Offset noise sigma in m")->capture_default_str();
  synth->add_option("--name", log_name, "Output file stem")->capture_default_str();

  // replay
  std::string manifest_path;
  bool check = false;
  auto * replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", manifest_path, "Manifest JSON")->required()
    ->check(CLI::ExistingFile);
  replay->add_flag("--check", check, "Compare with the recorded outputs instead of writing");

  for (auto * sub : {identify, cluster, simulate, compare, road_cmd, road_build, synth, replay}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  const auto abs = [](const std::string & p) {
      return fs::absolute(p).lexically_normal().string();
    };

  try {
    if (replay->parsed()) {
      auto rinv = invocation_from_manifest(io::read_json(manifest_path));
      if (out_opt->count() > 0) {rinv.out_dir = abs(out_dir);}
      if (check) {
        const auto diff = verify_replay(rinv);
        for (const auto & f : diff) {err << "differs: " << f << "\n";}
        err << (diff.empty() ? "replay matches recorded outputs\n" : "replay differs\n");
        return diff.empty() ? 0 : 1;
      }
      const auto result = execute(rinv);
      for (const auto & w : result.warnings) {err << "warning: " << w << "\n";}
      write_result(rinv, result);
      return 0;
    }

    Config cfg;
    if (!config_path.empty()) {cfg = config_from_json(io::read_json(config_path));}
    if (kappa_ref) {cfg.planner.kappa_ref = *kappa_ref;}
    if (stride) {cfg.identification_stride = *stride;}
    if (speed) {cfg.simulation.speed = *speed;}
    cfg = config_from_json(config_to_json(cfg));

    inv.config = cfg;
    inv.seed = seed;
    inv.out_dir = abs(out_dir);
    if (identify->parsed()) {
      inv.command = "identify";
      json arr = json::array();
      for (const auto & l : logs) {arr.push_back(abs(l));}
      o["logs"] = arr;
      o["id"] = id;
    } else if (cluster->parsed()) {
      inv.command = "cluster";
      if (dataset.empty() && param_files.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cluster needs --dataset or --params");
      }
      o["dataset"] = dataset.empty() ? json(nullptr) : json(abs(dataset));
      json arr = json::array();
      for (const auto & p : param_files) {arr.push_back(abs(p));}
      o["params"] = arr;
      o["method"] = method;
      o["metric"] = metric;
      if (k_text == "auto") {
        o["k"] = "auto";
      } else {
        try {
          std::size_t used = 0;
          const int k = std::stoi(k_text, &used);
          if (used != k_text.size()) {throw std::invalid_argument(k_text);}
          o["k"] = k;
        } catch (const std::exception &) {
          throw Error(ErrorCode::InvalidArgument, fmt::format("--k '{}' is not an integer", k_text));
        }
      }
      o["threshold"] = threshold ? json(*threshold) : json(nullptr);
      o["threshold_fraction"] = threshold_fraction ? json(*threshold_fraction) : json(nullptr);
      o["labels"] = labels_path.empty() ? json(nullptr) : json(abs(labels_path));
      o["standardize"] = standardize;
      if (method == "labels" && labels_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "method labels needs --labels");
      }
    } else if (simulate->parsed()) {
      inv.command = "simulate";
      o["params"] = sim_params.empty() ? json(nullptr) : json(abs(sim_params));
      o["type"] = type_id ? json(*type_id) : json(nullptr);
      o["types"] = types_path.empty() ? json(nullptr) : json(abs(types_path));
      o["road"] = road == "builtin" ? road : abs(road);
      o["name"] = name;
      if (type_id && types_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--type needs --types");
      }
    } else if (compare->parsed()) {
      inv.command = "compare";
      o["a"] = abs(fa);
      o["b"] = abs(fb);
      o["label_a"] = label_a;
      o["label_b"] = label_b;
    } else if (road_build->parsed()) {
      inv.command = "road build";
      o["input"] = road_input == "builtin" ? road_input : abs(road_input);
    } else if (synth->parsed()) {
      inv.command = "synth-log";
      o["params"] = abs(synth_params);
      o["length"] = length;
      o["noise"] = noise;
      o["name"] = log_name;
    }
    const auto result = execute(inv);
    for (const auto & w : result.warnings) {err << "warning: " << w << "\n";}
    write_result(inv, result);
    err << fmt::format("{}: wrote {} files to {}\n", inv.command, result.files.size() + 1,
      inv.out_dir.string());
    return 0;
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace eldm::cli
