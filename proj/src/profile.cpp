#include "vulnidx/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "vulnidx/error.hpp"
#include "vulnidx/io.hpp"

namespace vulnidx {

ClusterProfile centroid_table(const ClusterModel& c, const IndexScores& s) {
  if (c.assignments.size() != s.size())
    throw Error(Errc::precondition, "cluster assignments and scores are not aligned");
  const auto k = static_cast<std::size_t>(c.k);
  const std::size_t d = s.dims();
  ClusterProfile p;
  p.index_names = s.index_names;
  p.clusters.resize(k);
  for (std::size_t ci = 0; ci < k; ++ci) {
    auto& cs = p.clusters[ci];
    cs.cluster = static_cast<int>(ci + 1);
    cs.mean.assign(d, 0.0);
    cs.sd.assign(d, 0.0);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto& cs = p.clusters[static_cast<std::size_t>(c.assignments[i] - 1)];
    ++cs.size;
    for (std::size_t j = 0; j < d; ++j) cs.mean[j] += s.scores(i, j);
  }
  for (auto& cs : p.clusters)
    if (cs.size)
      for (auto& m : cs.mean) m /= static_cast<double>(cs.size);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto& cs = p.clusters[static_cast<std::size_t>(c.assignments[i] - 1)];
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = s.scores(i, j) - cs.mean[j];
      cs.sd[j] += diff * diff;
    }
  }
  for (auto& cs : p.clusters) {
    cs.singleton = cs.size == 1;
    for (auto& v : cs.sd) v = cs.size > 1 ? std::sqrt(v / static_cast<double>(cs.size - 1)) : 0.0;
    cs.dominant.resize(d);
    std::iota(cs.dominant.begin(), cs.dominant.end(), std::size_t{0});
    std::stable_sort(cs.dominant.begin(), cs.dominant.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(cs.mean[a]) > std::abs(cs.mean[b]); });
  }
  return p;
}

std::string_view to_string(CrossTabAxis a) noexcept { return a == CrossTabAxis::state ? "state" : "remoteness"; }

CrossTabAxis parse_axis(std::string_view text) {
  if (text == "remoteness") return CrossTabAxis::remoteness;
  if (text == "state") return CrossTabAxis::state;
  throw Error(Errc::precondition, "unknown cross-tab axis '" + std::string(text) + "'");
}

CrossTab crosstab(const ClusterModel& c, std::span<const RegionRecord> regions, CrossTabAxis axis) {
  if (regions.size() != c.assignments.size())
    throw Error(Errc::precondition, "regions and cluster assignments are not aligned");
  CrossTab t;
  t.axis = axis;
  if (axis == CrossTabAxis::remoteness)
    t.row_labels.assign(kRemotenessNames.begin(), kRemotenessNames.end());
  else
    t.row_labels.assign(kStateCodes.begin(), kStateCodes.end());
  const auto k = static_cast<std::size_t>(c.k);
  for (std::size_t j = 0; j < k; ++j) t.col_labels.push_back("C" + std::to_string(j + 1));
  t.counts.assign(t.row_labels.size(), std::vector<std::size_t>(k, 0));
  t.row_totals.assign(t.row_labels.size(), 0);
  t.col_totals.assign(k, 0);

  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    std::size_t row = 0;
    if (axis == CrossTabAxis::remoteness) {
      if (!r.remoteness)
        throw Error(Errc::precondition, "region '" + r.region_id + "' has no remoteness category");
      row = static_cast<std::size_t>(*r.remoteness - 1);
    } else {
      auto it = std::find(kStateCodes.begin(), kStateCodes.end(), r.state);
      if (r.state.empty() || it == kStateCodes.end())
        throw Error(Errc::precondition, "region '" + r.region_id + "' has no state");
      row = static_cast<std::size_t>(it - kStateCodes.begin());
    }
    const auto col = static_cast<std::size_t>(c.assignments[i] - 1);
    ++t.counts[row][col];
    ++t.row_totals[row];
    ++t.col_totals[col];
    ++t.grand_total;
  }
  return t;
}

std::string_view to_string(Effect e) noexcept { return e == Effect::elevated ? "elevated" : "reduced"; }

std::vector<ClusterCharacterization> characterize(const ClusterModel& c, const PcaModel& m, double threshold) {
  const auto loadings = substantive_loadings(m, threshold);
  const std::size_t d = c.centroids.cols();
  if (d > loadings.size())
    throw Error(Errc::precondition, "cluster model has more indices than retained components");
  std::vector<ClusterCharacterization> out;
  for (std::size_t ci = 0; ci < static_cast<std::size_t>(c.k); ++ci) {
    ClusterCharacterization cc;
    cc.cluster = static_cast<int>(ci + 1);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(c.centroids(ci, a)) > std::abs(c.centroids(ci, b));
    });
    for (auto j : order) {
      const double centroid = c.centroids(ci, j);
      IndexCharacterization ic{index_name(j), centroid, {}};
      if (centroid != 0.0)
        for (const auto& l : loadings[j]) {
          const bool up = (centroid > 0) == (l.sign > 0);
          ic.variables.push_back({l.short_form, l.weight, up ? Effect::elevated : Effect::reduced});
        }
      cc.indices.push_back(std::move(ic));
    }
    out.push_back(std::move(cc));
  }
  return out;
}

namespace {

io::Json atlas(const RunArtifacts& run, const std::filesystem::path& boundaries) {
  std::ifstream in(boundaries, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + boundaries.string());
  io::Json src;
  try {
    src = io::Json::parse(in);
  } catch (const io::Json::parse_error& e) {
    throw Error(Errc::malformed_input, boundaries.string() + ": " + e.what());
  }
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < run.scores->size(); ++i) row_of.emplace(run.scores->region_ids[i], i);

  io::Json out;
  out["type"] = "FeatureCollection";
  out["features"] = io::Json::array();
  for (const auto& feature : src.at("features")) {
    const auto& id_json = feature.at("properties").at("region_id");
    const std::string id = id_json.is_string() ? id_json.get<std::string>() : id_json.dump();
    io::Json props;
    props["region_id"] = id;
    const auto it = row_of.find(id);
    for (std::size_t j = 0; j < run.scores->dims(); ++j) {
      if (it == row_of.end())
        props[run.scores->index_names[j]] = nullptr;
      else
        props[run.scores->index_names[j]] = run.scores->scores(it->second, j);
    }
    if (it == row_of.end())
      props["cluster"] = nullptr;
    else
      props["cluster"] = run.clusters->assignments[it->second];
    io::Json f;
    f["type"] = "Feature";
    f["properties"] = std::move(props);
    f["geometry"] = feature.at("geometry");
    out["features"].push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_outputs(const RunArtifacts& run, const std::filesystem::path& out_dir,
                                                const std::optional<std::filesystem::path>& boundaries) {
  if (!run.scores || !run.clusters || !run.pca)
    throw Error(Errc::precondition, "emit_outputs needs scores, clusters and a PCA model");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  auto path = [&](const char* name) {
    written.push_back(out_dir / name);
    return written.back();
  };
  io::write_scores(path("scores.csv"), *run.scores);
  io::write_assignments(path("assignments.csv"), run.scores->region_ids, *run.clusters);

  io::Json profile;
  profile["clusters"] = io::to_json(centroid_table(*run.clusters, *run.scores));
  profile["loading_threshold"] = run.loading_threshold;
  profile["characterization"] = io::to_json(characterize(*run.clusters, *run.pca, run.loading_threshold));
  io::write_json(path("profile.json"), profile);

  io::write_crosstab(path("crosstab_remoteness.csv"), crosstab(*run.clusters, run.regions, CrossTabAxis::remoteness));
  io::write_crosstab(path("crosstab_state.csv"), crosstab(*run.clusters, run.regions, CrossTabAxis::state));

  if (boundaries) io::write_json(path("atlas.geojson"), atlas(run, *boundaries));
  return written;
}

}  // namespace vulnidx
