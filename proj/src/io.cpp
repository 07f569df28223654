#include "vulnidx/io.hpp"

#include <fstream>

#include "vulnidx/csv.hpp"
#include "vulnidx/error.hpp"

namespace vulnidx::io {

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::malformed_input, path.string() + ": " + e.what());
  }
}

namespace {

Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

Matrix matrix_from_rows(const Json& rows) {
  const std::size_t n = rows.size();
  const std::size_t p = n ? rows.at(0).size() : 0;
  Matrix m(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows.at(r).size() != p) throw Error(Errc::malformed_input, "ragged matrix in JSON");
    for (std::size_t c = 0; c < p; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

template <class T>
Json optional_number(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const OmissionLog& log) {
  Json arr = Json::array();
  for (const auto& e : log.removed) arr.push_back({{"region_id", e.region_id}, {"reason", to_string(e.reason)}});
  return arr;
}

Json to_json(const ValidationReport& report) {
  Json doc;
  doc["screening_fraction"] = report.screening_fraction;
  doc["n_regions"] = report.n_regions;
  doc["variables"] = Json::array();
  for (const auto& v : report.variables)
    doc["variables"].push_back({{"short_form", v.short_form},
                                {"missing", v.missing},
                                {"zeros", v.zeros},
                                {"missing_zero_fraction", v.missing_zero_fraction},
                                {"flagged", v.flagged}});
  doc["flagged"] = report.flagged();
  return doc;
}

Json to_json(const SelectionReport& report) {
  Json doc;
  doc["skew_threshold"] = report.skew_threshold;
  doc["corr_threshold"] = report.corr_threshold;
  doc["variables"] = Json::array();
  for (const auto& v : report.variables) {
    Json item{{"short_form", v.short_form},
              {"raw_skewness", optional_number(v.raw_skewness)},
              {"transformed_skewness", optional_number(v.transformed_skewness)},
              {"decision", to_string(v.decision)}};
    if (!v.note.empty()) item["note"] = v.note;
    doc["variables"].push_back(std::move(item));
  }
  doc["correlation_pairs"] = Json::array();
  for (const auto& p : report.correlation_pairs)
    doc["correlation_pairs"].push_back({{"a", p.a}, {"b", p.b}, {"r", p.r}});
  doc["removals"] = Json::array();
  for (const auto& r : report.removals)
    doc["removals"].push_back({{"removed", r.removed},
                               {"partner", r.partner},
                               {"r", r.r},
                               {"mean_abs_correlation", r.mean_abs_correlation}});
  doc["final_variables"] = report.final_variables;
  return doc;
}

Json to_json(const PcaModel& m) {
  Json doc;
  doc["variable_order"] = m.variable_order;
  doc["means"] = m.means;
  doc["sds"] = m.sds;
  doc["eigenvalues"] = m.eigenvalues;
  doc["variance_fraction"] = m.variance_fraction;
  doc["retained"] = m.retained;
  doc["retention"] = {{"strategy", to_string(m.rule.strategy)}, {"parameter", m.rule.parameter}};
  doc["sweeps"] = m.sweeps;
  doc["loadings"] = matrix_rows(m.loadings);
  return doc;
}

PcaModel pca_model_from_json(const Json& doc) {
  try {
    PcaModel m;
    m.variable_order = doc.at("variable_order").get<std::vector<std::string>>();
    m.means = doc.at("means").get<std::vector<double>>();
    m.sds = doc.at("sds").get<std::vector<double>>();
    m.eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
    m.variance_fraction = doc.at("variance_fraction").get<std::vector<double>>();
    m.retained = doc.at("retained").get<std::size_t>();
    m.rule.strategy = parse_retention(doc.at("retention").at("strategy").get<std::string>());
    m.rule.parameter = doc.at("retention").at("parameter").get<double>();
    m.sweeps = doc.at("sweeps").get<int>();
    m.loadings = matrix_from_rows(doc.at("loadings"));
    const std::size_t p = m.variable_order.size();
    if (m.means.size() != p || m.sds.size() != p || m.loadings.rows() != p || m.eigenvalues.size() != p)
      throw Error(Errc::malformed_input, "PCA model arrays disagree on the variable count");
    return m;
  } catch (const Json::exception& e) {
    throw Error(Errc::malformed_input, std::string("PCA model JSON: ") + e.what());
  }
}

Json to_json(const std::vector<IndexSkewness>& report) {
  Json arr = Json::array();
  for (const auto& s : report)
    arr.push_back({{"index", s.index},
                   {"skewness", s.skewness},
                   {"band", to_string(s.band)},
                   {"acceptable", s.acceptable}});
  return arr;
}

Json to_json(const ClusterModel& m) {
  Json doc;
  doc["k"] = m.k;
  doc["seed"] = m.seed;
  doc["init"] = to_string(m.init);
  doc["restarts"] = m.restarts;
  doc["best_restart"] = m.best_restart;
  doc["iterations"] = m.iterations;
  doc["wcss"] = m.wcss;
  doc["wcss_trace"] = m.wcss_trace;
  doc["sizes"] = m.sizes();
  doc["centroids"] = matrix_rows(m.centroids);
  doc["assignments"] = m.assignments;
  return doc;
}

ClusterModel cluster_model_from_json(const Json& doc) {
  try {
    ClusterModel m;
    m.k = doc.at("k").get<int>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.init = parse_init(doc.at("init").get<std::string>());
    m.restarts = doc.at("restarts").get<int>();
    m.best_restart = doc.at("best_restart").get<int>();
    m.iterations = doc.at("iterations").get<int>();
    m.wcss = doc.at("wcss").get<double>();
    m.wcss_trace = doc.at("wcss_trace").get<std::vector<double>>();
    m.centroids = matrix_from_rows(doc.at("centroids"));
    m.assignments = doc.at("assignments").get<std::vector<int>>();
    for (int label : m.assignments)
      if (label < 1 || label > m.k) throw Error(Errc::malformed_input, "cluster label out of range");
    return m;
  } catch (const Json::exception& e) {
    throw Error(Errc::malformed_input, std::string("cluster model JSON: ") + e.what());
  }
}

Json to_json(const ElbowScan& scan) {
  Json doc;
  doc["k"] = scan.k_values;
  doc["wcss"] = scan.wcss_per_k;
  doc["suggested_k"] = optional_number(scan.suggested_k);
  return doc;
}

Json to_json(const StabilityReport& report) {
  Json doc;
  doc["seeds"] = report.seeds;
  doc["cutoff"] = report.cutoff;
  doc["ari"] = matrix_rows(report.ari);
  doc["wcss"] = report.wcss;
  doc["flagged_pairs"] = Json::array();
  for (const auto& p : report.flagged_pairs)
    doc["flagged_pairs"].push_back({{"seed_a", p.seed_a}, {"seed_b", p.seed_b}, {"ari", p.ari}});
  return doc;
}

Json to_json(const ClusterProfile& profile) {
  Json arr = Json::array();
  for (const auto& c : profile.clusters) {
    Json item;
    item["cluster"] = c.cluster;
    item["size"] = c.size;
    item["singleton"] = c.singleton;
    Json stats = Json::array();
    for (std::size_t j = 0; j < profile.index_names.size(); ++j)
      stats.push_back({{"index", profile.index_names[j]}, {"mean", c.mean[j]}, {"sd", c.sd[j]}});
    item["indices"] = std::move(stats);
    std::vector<std::string> dominant;
    for (auto j : c.dominant) dominant.push_back(profile.index_names[j]);
    item["dominant"] = dominant;
    arr.push_back(std::move(item));
  }
  return arr;
}

Json to_json(const std::vector<ClusterCharacterization>& ch) {
  Json arr = Json::array();
  for (const auto& c : ch) {
    Json item;
    item["cluster"] = c.cluster;
    item["indices"] = Json::array();
    for (const auto& ic : c.indices) {
      Json vars = Json::array();
      for (const auto& v : ic.variables)
        vars.push_back({{"short_form", v.short_form}, {"weight", v.weight}, {"effect", to_string(v.effect)}});
      item["indices"].push_back({{"index", ic.index}, {"centroid", ic.centroid}, {"variables", std::move(vars)}});
    }
    arr.push_back(std::move(item));
  }
  return arr;
}

void write_omission_log(const std::filesystem::path& path, const OmissionLog& log) {
  csv::Table t;
  t.header = {"region_id", "reason"};
  for (const auto& e : log.removed) t.rows.push_back({e.region_id, std::string(to_string(e.reason))});
  csv::write(path, t);
}

void write_scores(const std::filesystem::path& path, const IndexScores& s) {
  csv::Table t;
  t.header = {"region_id"};
  t.header.insert(t.header.end(), s.index_names.begin(), s.index_names.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<std::string> row{s.region_ids[i]};
    for (std::size_t j = 0; j < s.dims(); ++j) row.push_back(csv::format_double(s.scores(i, j)));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

IndexScores read_scores(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  if (t.header.empty() || t.header[0] != "region_id")
    throw Error(Errc::malformed_input, path.string() + ": first column must be region_id");
  IndexScores s;
  s.index_names.assign(t.header.begin() + 1, t.header.end());
  s.scores = Matrix(t.rows.size(), s.index_names.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    s.region_ids.push_back(t.rows[i][0]);
    for (std::size_t j = 0; j < s.index_names.size(); ++j) {
      auto v = csv::parse_cell(t.rows[i][j + 1], path.string() + " row " + std::to_string(i + 1));
      if (!v) throw Error(Errc::malformed_input, path.string() + ": missing score");
      s.scores(i, j) = *v;
    }
  }
  return s;
}

void write_assignments(const std::filesystem::path& path, const std::vector<std::string>& region_ids,
                       const ClusterModel& m) {
  if (region_ids.size() != m.assignments.size())
    throw Error(Errc::precondition, "assignments and region ids are not aligned");
  csv::Table t;
  t.header = {"region_id", "cluster"};
  for (std::size_t i = 0; i < region_ids.size(); ++i)
    t.rows.push_back({region_ids[i], std::to_string(m.assignments[i])});
  csv::write(path, t);
}

void write_elbow(const std::filesystem::path& path, const ElbowScan& scan) {
  csv::Table t;
  t.header = {"k", "wcss"};
  for (std::size_t i = 0; i < scan.k_values.size(); ++i)
    t.rows.push_back({std::to_string(scan.k_values[i]), csv::format_double(scan.wcss_per_k[i])});
  csv::write(path, t);
}

ElbowScan read_elbow(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto kc = t.find("k"), wc = t.find("wcss");
  if (!kc || !wc) throw Error(Errc::malformed_input, path.string() + ": header must be k,wcss");
  ElbowScan scan;
  for (const auto& row : t.rows) {
    auto k = csv::parse_cell(row[*kc], path.string());
    auto w = csv::parse_cell(row[*wc], path.string());
    if (!k || !w) throw Error(Errc::malformed_input, path.string() + ": empty cell");
    scan.k_values.push_back(static_cast<int>(*k));
    scan.wcss_per_k.push_back(*w);
  }
  scan.suggested_k = suggest_elbow(scan.k_values, scan.wcss_per_k);
  return scan;
}

void write_crosstab(const std::filesystem::path& path, const CrossTab& t) {
  csv::Table out;
  out.header = {std::string(to_string(t.axis))};
  out.header.insert(out.header.end(), t.col_labels.begin(), t.col_labels.end());
  out.header.push_back("Total");
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    std::vector<std::string> row{t.row_labels[r]};
    for (auto c : t.counts[r]) row.push_back(std::to_string(c));
    row.push_back(std::to_string(t.row_totals[r]));
    out.rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"Total"};
  for (auto c : t.col_totals) total.push_back(std::to_string(c));
  total.push_back(std::to_string(t.grand_total));
  out.rows.push_back(std::move(total));
  csv::write(path, out);
}

}  // namespace vulnidx::io
