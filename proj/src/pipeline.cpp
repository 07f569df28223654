#include "vulnidx/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "vulnidx/csv.hpp"
#include "vulnidx/hash.hpp"
#include "vulnidx/ingest.hpp"
#include "vulnidx/profile.hpp"
#include "vulnidx/select.hpp"
#include "vulnidx/spatial.hpp"

namespace vulnidx {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw Error(Errc::precondition, std::string(name) + " must be positive");
  };
  positive(screening_fraction, "screening_fraction");
  positive(skew_threshold, "skew_threshold");
  positive(corr_threshold, "corr_threshold");
  positive(retention.parameter, "retention parameter");
  positive(loading_threshold, "loading_threshold");
  if (seeds.empty()) throw Error(Errc::precondition, "seeds must not be empty");
  if (k && *k < 1) throw Error(Errc::precondition, "k must be positive");
  if (k_max < 2) throw Error(Errc::precondition, "k_max must be at least 2");
  if (restarts < 1) throw Error(Errc::precondition, "restarts must be at least 1");
  if (max_iter < 1) throw Error(Errc::precondition, "max_iter must be at least 1");
  if (snap_tolerance < 0) throw Error(Errc::precondition, "snap_tolerance must be >= 0");
  if (output_dir.empty()) throw Error(Errc::precondition, "output directory is required");
}

KmeansOptions RunConfig::kmeans_options(int kk) const {
  return {kk, seeds.front(), init, restarts, max_iter, tol};
}

io::Json to_json(const RunConfig& c) {
  io::Json doc;
  doc["values"] = c.values.string();
  doc["regions"] = c.regions.string();
  doc["variables"] = c.variables.string();
  doc["boundaries"] = c.boundaries ? io::Json(c.boundaries->string()) : io::Json(nullptr);
  doc["adjacency"] = c.adjacency ? io::Json(c.adjacency->string()) : io::Json(nullptr);
  doc["snap_tolerance"] = c.snap_tolerance;
  doc["erp_variable"] = c.erp_variable;
  doc["screening_fraction"] = c.screening_fraction;
  doc["manual_removals"] = c.manual_removals;
  doc["skew_threshold"] = c.skew_threshold;
  doc["corr_threshold"] = c.corr_threshold;
  doc["retention"] = to_string(c.retention.strategy);
  doc["retention_parameter"] = c.retention.parameter;
  doc["loading_threshold"] = c.loading_threshold;
  doc["k"] = c.k ? io::Json(*c.k) : io::Json(nullptr);
  doc["k_max"] = c.k_max;
  doc["seeds"] = c.seeds;
  doc["init"] = to_string(c.init);
  doc["restarts"] = c.restarts;
  doc["max_iter"] = c.max_iter;
  doc["tol"] = c.tol;
  return doc;
}

RunConfig config_from_json(const io::Json& doc, RunConfig c) {
  try {
    auto path = [&](const char* key, fs::path& target) {
      if (doc.contains(key) && !doc[key].is_null()) target = doc[key].get<std::string>();
    };
    auto opt_path = [&](const char* key, std::optional<fs::path>& target) {
      if (doc.contains(key)) {
        if (doc[key].is_null())
          target.reset();
        else
          target = doc[key].get<std::string>();
      }
    };
    auto number = [&](const char* key, auto& target) {
      if (doc.contains(key)) target = doc[key].get<std::remove_reference_t<decltype(target)>>();
    };
    path("values", c.values);
    path("regions", c.regions);
    path("variables", c.variables);
    opt_path("boundaries", c.boundaries);
    opt_path("adjacency", c.adjacency);
    path("output_dir", c.output_dir);
    number("snap_tolerance", c.snap_tolerance);
    number("erp_variable", c.erp_variable);
    number("screening_fraction", c.screening_fraction);
    number("manual_removals", c.manual_removals);
    number("skew_threshold", c.skew_threshold);
    number("corr_threshold", c.corr_threshold);
    if (doc.contains("retention")) c.retention.strategy = parse_retention(doc["retention"].get<std::string>());
    number("retention_parameter", c.retention.parameter);
    number("loading_threshold", c.loading_threshold);
    if (doc.contains("k")) {
      if (doc["k"].is_null())
        c.k.reset();
      else
        c.k = doc["k"].get<int>();
    }
    number("k_max", c.k_max);
    number("seeds", c.seeds);
    if (doc.contains("init")) c.init = parse_init(doc["init"].get<std::string>());
    number("restarts", c.restarts);
    number("max_iter", c.max_iter);
    number("tol", c.tol);
    number("record_timestamps", c.record_timestamps);
  } catch (const io::Json::exception& e) {
    throw Error(Errc::malformed_input, std::string("config: ") + e.what());
  }
  return c;
}

std::string_view to_string(Step s) noexcept {
  switch (s) {
    case Step::ingest: return "ingest";
    case Step::select: return "select";
    case Step::pca: return "pca";
    case Step::elbow: return "elbow";
    case Step::cluster: return "cluster";
    case Step::stability: return "stability";
    case Step::profile: return "profile";
  }
  return "?";
}

std::optional<Step> parse_step(std::string_view text) {
  for (Step s : {Step::ingest, Step::select, Step::pca, Step::elbow, Step::cluster, Step::stability, Step::profile})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

StepError::StepError(Step step, const Error& cause)
    : Error(cause.code(), "[" + std::string(to_string(step)) + "] " + cause.what()), step_(step) {}

namespace {

fs::path require(const RunConfig& c, const char* name, Step step) {
  fs::path p = c.output_dir / name;
  if (!fs::exists(p))
    throw Error(Errc::missing_intermediate, std::string("missing intermediate '") + name +
                                                "'; run the step that produces it before '" +
                                                std::string(to_string(step)) + "'");
  return p;
}

DatasetPaths ingested(const fs::path& dir) {
  return {dir / files::ingested_values, dir / files::ingested_regions, dir / files::ingested_variables};
}
DatasetPaths selected(const fs::path& dir) {
  return {dir / files::selected_values, dir / files::selected_regions, dir / files::selected_variables};
}

StepRecord do_ingest(const RunConfig& c) {
  StepRecord rec{Step::ingest, {c.values, c.regions, c.variables}, {}, {}, {}};
  const Dataset raw = load_dataset({c.values, c.regions, c.variables});
  auto omitted = omit_unpopulated_regions(raw, c.erp_variable);
  const auto out = ingested(c.output_dir);
  write_dataset(omitted.dataset, out);
  io::write_omission_log(c.output_dir / files::omission_log, omitted.log);
  io::write_json(c.output_dir / files::validation, io::to_json(validate_dataset(omitted.dataset, c.screening_fraction)));
  rec.outputs = {out.values, out.regions, out.variables, c.output_dir / files::omission_log,
                 c.output_dir / files::validation};
  return rec;
}

AdjacencyGraph graph_for(const RunConfig& c, const Dataset& d, StepRecord& rec) {
  if (c.boundaries) {
    rec.inputs.push_back(*c.boundaries);
    return build_adjacency_from_polygons(*c.boundaries, c.snap_tolerance);
  }
  if (c.adjacency) {
    rec.inputs.push_back(*c.adjacency);
    // Omitted regions may appear in the list; they are valid nodes.
    std::vector<std::string> ids;
    for (const auto& r : d.regions()) ids.push_back(r.region_id);
    const auto omitted = csv::read(c.output_dir / files::omission_log);
    for (const auto& row : omitted.rows) ids.push_back(row.at(0));
    return load_adjacency_list(*c.adjacency, ids);
  }
  throw Error(Errc::precondition, "select needs --boundaries or --adjacency for neighbor imputation");
}

StepRecord do_select(const RunConfig& c) {
  StepRecord rec{Step::select, {}, {}, {}, {}};
  for (const char* f : {files::ingested_values, files::ingested_regions, files::ingested_variables, files::omission_log})
    rec.inputs.push_back(require(c, f, Step::select));
  const Dataset d = load_dataset(ingested(c.output_dir));
  const AdjacencyGraph g = graph_for(c, d, rec);

  SelectionConfig sc;
  sc.erp_variable = c.erp_variable;
  sc.skew_threshold = c.skew_threshold;
  sc.corr_threshold = c.corr_threshold;
  sc.screening_fraction = c.screening_fraction;
  sc.manual_removals = c.manual_removals;
  const auto outcome = run_selection(d, g, sc);

  const auto out = selected(c.output_dir);
  write_adjacency_list(c.output_dir / files::adjacency, g);
  write_imputation_log(c.output_dir / files::imputation_log, outcome.imputations);
  write_dataset(outcome.dataset, out);
  io::Json report = io::to_json(outcome.report);
  report["steps"] = outcome.steps;
  io::write_json(c.output_dir / files::selection_report, report);
  rec.outputs = {c.output_dir / files::adjacency, c.output_dir / files::imputation_log, out.values, out.regions,
                 out.variables, c.output_dir / files::selection_report};
  return rec;
}

StepRecord do_pca(const RunConfig& c) {
  StepRecord rec{Step::pca, {}, {}, {}, {}};
  for (const char* f : {files::selected_values, files::selected_regions, files::selected_variables})
    rec.inputs.push_back(require(c, f, Step::pca));
  const Dataset d = load_dataset(selected(c.output_dir));
  const Standardized z = standardize(d);
  const PcaModel m = retain_components(fit_pca(z), c.retention);
  std::vector<std::string> ids;
  for (const auto& r : d.regions()) ids.push_back(r.region_id);
  const IndexScores s = score(m, z.z, ids);

  io::write_json(c.output_dir / files::pca_model, io::to_json(m));
  io::write_scores(c.output_dir / files::scores, s);
  io::write_json(c.output_dir / files::index_skewness, io::to_json(index_skewness_report(s)));
  rec.outputs = {c.output_dir / files::pca_model, c.output_dir / files::scores, c.output_dir / files::index_skewness};
  return rec;
}

StepRecord do_elbow(const RunConfig& c) {
  StepRecord rec{Step::elbow, {require(c, files::scores, Step::elbow)}, {}, {}, {}};
  const IndexScores s = io::read_scores(rec.inputs[0]);
  const int k_max = std::min<int>(c.k_max, static_cast<int>(s.size()));
  const ElbowScan scan = elbow_scan(s.scores, k_max, c.kmeans_options(1));
  io::write_elbow(c.output_dir / files::elbow, scan);
  rec.outputs = {c.output_dir / files::elbow};
  rec.suggested_k = scan.suggested_k;
  return rec;
}

int resolve_k(const RunConfig& c, Step step, StepRecord& rec) {
  if (c.k) return *c.k;
  if (step == Step::stability && fs::exists(c.output_dir / files::cluster_model)) {
    rec.inputs.push_back(c.output_dir / files::cluster_model);
    return io::cluster_model_from_json(io::read_json(rec.inputs.back())).k;
  }
  rec.inputs.push_back(require(c, files::elbow, step));
  const auto scan = io::read_elbow(rec.inputs.back());
  if (!scan.suggested_k)
    throw Error(Errc::precondition, "elbow scan has no interior point to suggest k; pass --k");
  return *scan.suggested_k;
}

StepRecord do_cluster(const RunConfig& c) {
  StepRecord rec{Step::cluster, {require(c, files::scores, Step::cluster)}, {}, {}, {}};
  const IndexScores s = io::read_scores(rec.inputs[0]);
  const int k = resolve_k(c, Step::cluster, rec);
  const ClusterModel m = kmeans(s.scores, c.kmeans_options(k));
  io::write_json(c.output_dir / files::cluster_model, io::to_json(m));
  io::write_assignments(c.output_dir / files::assignments, s.region_ids, m);
  rec.outputs = {c.output_dir / files::cluster_model, c.output_dir / files::assignments};
  rec.k = k;
  return rec;
}

StepRecord do_stability(const RunConfig& c) {
  if (c.seeds.size() < 2) throw Error(Errc::precondition, "stability analysis needs at least 2 seeds");
  StepRecord rec{Step::stability, {require(c, files::scores, Step::stability)}, {}, {}, {}};
  const IndexScores s = io::read_scores(rec.inputs[0]);
  const int k = resolve_k(c, Step::stability, rec);
  const auto report = stability_analysis(s.scores, c.seeds, c.kmeans_options(k));
  io::Json doc = io::to_json(report);
  doc["k"] = k;
  doc["init"] = to_string(c.init);
  doc["restarts"] = c.restarts;
  io::write_json(c.output_dir / files::stability, doc);
  rec.outputs = {c.output_dir / files::stability};
  rec.k = k;
  return rec;
}

StepRecord do_profile(const RunConfig& c) {
  StepRecord rec{Step::profile, {}, {}, {}, {}};
  for (const char* f : {files::scores, files::cluster_model, files::pca_model, files::selected_regions,
                        files::selected_values, files::selected_variables})
    rec.inputs.push_back(require(c, f, Step::profile));
  const IndexScores s = io::read_scores(c.output_dir / files::scores);
  const ClusterModel m = io::cluster_model_from_json(io::read_json(c.output_dir / files::cluster_model));
  const PcaModel pca = io::pca_model_from_json(io::read_json(c.output_dir / files::pca_model));
  const Dataset d = load_dataset(selected(c.output_dir));
  if (m.assignments.size() != s.size())
    throw Error(Errc::precondition, "cluster model and scores disagree on the region count");

  std::vector<RegionRecord> regions;
  for (const auto& id : s.region_ids) {
    const auto i = d.region_index(id);
    if (!i) throw Error(Errc::unknown_key, "scored region '" + id + "' not in selected dataset");
    regions.push_back(d.regions()[*i]);
  }
  if (c.boundaries) rec.inputs.push_back(*c.boundaries);
  RunArtifacts art{&s, &m, &pca, regions, c.loading_threshold};
  rec.outputs = emit_outputs(art, c.output_dir, c.boundaries);
  return rec;
}

std::string display_path(const RunConfig& c, const fs::path& p) {
  if (p == c.output_dir / p.filename()) return p.filename().string();
  return p.string();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

io::Json record_json(const RunConfig& c, const StepRecord& r) {
  io::Json doc;
  doc["step"] = to_string(r.step);
  io::Json in = io::Json::object(), out = io::Json::object();
  for (const auto& p : r.inputs) in[display_path(c, p)] = sha256_file(p);
  for (const auto& p : r.outputs) out[display_path(c, p)] = sha256_file(p);
  doc["inputs"] = std::move(in);
  doc["outputs"] = std::move(out);
  if (r.suggested_k) doc["suggested_k"] = *r.suggested_k;
  if (r.k) doc["k"] = *r.k;
  if (c.record_timestamps) doc["finished_at"] = utc_now();
  return doc;
}

}  // namespace

StepRecord run_step(Step step, const RunConfig& c) {
  try {
    c.validate();
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    if (ec) throw Error(Errc::io, "cannot create " + c.output_dir.string() + ": " + ec.message());
    switch (step) {
      case Step::ingest: return do_ingest(c);
      case Step::select: return do_select(c);
      case Step::pca: return do_pca(c);
      case Step::elbow: return do_elbow(c);
      case Step::cluster: return do_cluster(c);
      case Step::stability: return do_stability(c);
      case Step::profile: return do_profile(c);
    }
    throw Error(Errc::precondition, "unknown step");
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(step, e);
  } catch (const std::filesystem::filesystem_error& e) {
    throw StepError(step, Error(Errc::io, e.what()));
  }
}

std::vector<StepRecord> run_pipeline(const RunConfig& c) {
  std::vector<StepRecord> records;
  for (Step s : {Step::ingest, Step::select, Step::pca}) records.push_back(run_step(s, c));
  RunConfig with_k = c;
  if (!c.k) {
    records.push_back(run_step(Step::elbow, c));
    if (!records.back().suggested_k)
      throw StepError(Step::elbow, Error(Errc::precondition, "elbow scan could not suggest k; pass --k"));
    with_k.k = records.back().suggested_k;
  }
  for (Step s : {Step::cluster, Step::stability, Step::profile}) records.push_back(run_step(s, with_k));
  update_manifest(c, records, true);
  return records;
}

void update_manifest(const RunConfig& c, const std::vector<StepRecord>& records, bool fresh) {
  const fs::path path = c.output_dir / files::manifest;
  io::Json steps = io::Json::array();
  if (!fresh && fs::exists(path)) {
    const io::Json old = io::read_json(path);
    if (old.contains("steps")) steps = old["steps"];
  }
  for (const auto& r : records) {
    io::Json entry = record_json(c, r);
    auto it = std::find_if(steps.begin(), steps.end(),
                           [&](const io::Json& s) { return s.value("step", "") == to_string(r.step); });
    if (it != steps.end())
      *it = std::move(entry);
    else
      steps.push_back(std::move(entry));
  }
  // Keep pipeline order regardless of invocation order.
  std::stable_sort(steps.begin(), steps.end(), [](const io::Json& a, const io::Json& b) {
    return *parse_step(a["step"].get<std::string>()) < *parse_step(b["step"].get<std::string>());
  });

  io::Json doc;
  doc["tool"] = "vulnidx";
  doc["version"] = kToolVersion;
  const io::Json config = to_json(c);
  doc["config"] = config;
  doc["config_sha256"] = sha256_hex(config.dump());
  doc["step_order"] = {"ingest", "select", "pca", "elbow", "cluster", "stability", "profile"};
  doc["selection_order"] = {"omit", "validate", "manual_removal", "impute", "screen_skewness", "prune_correlated"};
  doc["seeds"] = c.seeds;
  std::optional<int> suggested, chosen;
  for (const auto& s : steps) {
    if (s.contains("suggested_k")) suggested = s["suggested_k"].get<int>();
    if (s.value("step", "") == "cluster" && s.contains("k")) chosen = s["k"].get<int>();
  }
  doc["suggested_k"] = suggested ? io::Json(*suggested) : io::Json(nullptr);
  doc["k"] = chosen ? io::Json(*chosen) : io::Json(nullptr);
  doc["timestamps_recorded"] = c.record_timestamps;
  doc["steps"] = std::move(steps);
  io::write_json(path, doc);
}

}  // namespace vulnidx
