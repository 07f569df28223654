#include "synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "vulnidx/csv.hpp"
#include "vulnidx/error.hpp"
#include "vulnidx/rng.hpp"

namespace fixture {

using vulnidx::Dataset;
using vulnidx::RegionGeometry;
using vulnidx::RegionRecord;
using vulnidx::Rng;
using vulnidx::VariableMeta;

// Rows: remoteness 1..5. Columns: clusters 1..4.
const int kRemotenessByCluster[5][4] = {
    {37, 0, 86, 66},
    {40, 0, 1, 35},
    {39, 1, 1, 7},
    {6, 4, 0, 2},
    {1, 4, 0, 5},
};

// Rows: vulnidx::kStateCodes order. Columns: remoteness 1..5.
const int kStateByRemoteness[9][5] = {
    {52, 25, 10, 2, 1},  // NSW
    {49, 17, 12, 2, 1},  // QLD
    {40, 20, 6, 0, 0},   // VIC
    {21, 2, 4, 4, 3},    // WA
    {18, 3, 5, 1, 0},    // SA
    {0, 7, 7, 1, 0},     // TAS
    {9, 1, 0, 0, 0},     // ACT
    {0, 0, 4, 2, 2},     // NT
    {0, 1, 0, 0, 3},     // OTHER
};

namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::string padded(std::size_t value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

constexpr std::size_t kCores = 25;
constexpr std::size_t kSpikes = 5;
constexpr std::size_t kDuplicates = 10;
constexpr std::array<std::size_t, 5> kLogNormalCores = {2, 7, 12, 17, 22};

// Latent cluster centres (3 dimensions).
constexpr double kCentres[4][3] = {
    {1.2, 0.6, 0.0},
    {3.2, 2.2, 0.4},
    {-1.8, 0.2, 1.2},
    {-0.4, -1.0, -1.0},
};

struct Draft {
  RegionRecord record;
  int cluster = 0;  // 0: omitted
  bool zero_population = false;
};

}  // namespace

NationalFixture make_national(std::uint64_t seed, double missing_rate) {
  Rng rng(seed, 0);

  std::vector<Draft> drafts;
  for (int r = 0; r < 5; ++r) {
    std::vector<std::string> states;
    for (std::size_t s = 0; s < vulnidx::kStateCodes.size(); ++s)
      for (int c = 0; c < kStateByRemoteness[s][r]; ++c) states.emplace_back(vulnidx::kStateCodes[s]);
    std::vector<int> clusters;
    for (int k = 0; k < 4; ++k)
      for (int c = 0; c < kRemotenessByCluster[r][k]; ++c) clusters.push_back(k + 1);
    if (states.size() != clusters.size()) throw std::logic_error("fixture tables disagree");
    shuffle(clusters, rng);
    for (std::size_t i = 0; i < states.size(); ++i) {
      Draft d;
      d.record.state = states[i];
      d.record.remoteness = r + 1;
      d.cluster = clusters[i];
      drafts.push_back(std::move(d));
    }
  }
  for (int i = 0; i < 5; ++i) {
    Draft d;
    d.record.state = std::string(vulnidx::kStateCodes[i]);
    d.record.remoteness = i + 1;
    d.zero_population = true;
    drafts.push_back(std::move(d));
  }
  for (std::size_t s = 0; s < vulnidx::kStateCodes.size(); ++s) {
    for (const char* kind : {"Migratory - Offshore - Shipping", "No usual address"}) {
      Draft d;
      d.record.state = std::string(vulnidx::kStateCodes[s]);
      d.record.name = std::string(kind) + " (" + d.record.state + ")";
      d.record.is_spatial = false;
      drafts.push_back(std::move(d));
    }
  }
  shuffle(drafts, rng);

  std::vector<RegionRecord> regions;
  std::vector<int> planted;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    RegionRecord rec = drafts[i].record;
    rec.region_id = "R" + padded(101 + i, 3);
    if (rec.name.empty()) rec.name = "Region " + padded(101 + i, 3);
    regions.push_back(std::move(rec));
    planted.push_back(drafts[i].cluster);
  }

  NationalFixture f;
  std::vector<VariableMeta> vars;
  vars.push_back({"ERP", "Estimated resident population", vulnidx::Transform::none});
  for (std::size_t j = 0; j < kCores; ++j) {
    const std::string name = "X" + padded(j + 1, 2);
    vars.push_back({name, "Core indicator " + padded(j + 1, 2), vulnidx::Transform::none});
  }
  for (const auto& v : vars) f.core_variables.push_back(v.short_form);
  for (std::size_t j = 0; j < kSpikes; ++j) {
    vars.push_back({"SPK" + padded(j + 1, 1), "Rare-event indicator " + padded(j + 1, 1), vulnidx::Transform::none});
    f.spike_variables.push_back(vars.back().short_form);
  }
  std::vector<std::size_t> duplicated;  // core index (0-based) of each duplicate
  for (std::size_t j = 0; duplicated.size() < kDuplicates; ++j)
    if (std::find(kLogNormalCores.begin(), kLogNormalCores.end(), j) == kLogNormalCores.end()) duplicated.push_back(j);
  for (std::size_t j = 0; j < kDuplicates; ++j) {
    const std::string core = "X" + padded(duplicated[j] + 1, 2);
    vars.push_back({"D" + core, "Alternative measure of " + core, vulnidx::Transform::none});
    f.duplicate_variables.push_back(vars.back().short_form);
  }

  const std::size_t n = regions.size();
  Dataset d(regions, vars);

  // Loading vectors of the core indicators on the latent space.
  std::vector<std::array<double, 3>> loadings(kCores);
  for (auto& b : loadings) {
    double norm = 0.0;
    for (auto& x : b) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : b) x /= norm;
  }

  std::vector<double> core_values(kCores);
  for (std::size_t i = 0; i < n; ++i) {
    const int cluster = planted[i];
    std::array<double, 3> g{};
    for (int a = 0; a < 3; ++a)
      g[a] = cluster > 0 ? kCentres[cluster - 1][a] + 0.3 * rng.normal() : rng.normal();

    const RegionRecord& rec = regions[i];
    if (!rec.is_spatial)
      d.set_missing(i, 0);
    else if (drafts[i].zero_population)
      d.set(i, 0, 0.0);
    else
      d.set(i, 0, std::round(std::exp(10.5 + 0.8 * rng.normal())));

    for (std::size_t j = 0; j < kCores; ++j) {
      double y = 0.8 * rng.normal();
      for (int a = 0; a < 3; ++a) y += loadings[j][a] * g[a];
      const bool lognormal = std::find(kLogNormalCores.begin(), kLogNormalCores.end(), j) != kLogNormalCores.end();
      core_values[j] = lognormal ? std::exp(2.5 + 0.9 * y) : 20.0 + 2.0 * y;
      d.set(i, 1 + j, core_values[j]);
    }
    for (std::size_t j = 0; j < kSpikes; ++j) {
      const double v = rng.uniform() < 0.03 ? std::round(std::exp(9.0 + 3.0 * rng.uniform())) : 0.0;
      d.set(i, 1 + kCores + j, v);
    }
    for (std::size_t j = 0; j < kDuplicates; ++j)
      d.set(i, 1 + kCores + kSpikes + j, core_values[duplicated[j]] + 0.25 * rng.normal());
  }

  // Every spike column needs some events among the populated regions.
  for (std::size_t j = 0; j < kSpikes; ++j) {
    const std::size_t col = 1 + kCores + j;
    std::size_t events = 0;
    for (std::size_t i = 0; i < n; ++i) events += planted[i] > 0 && d.value(i, col) > 0.0;
    for (std::size_t i = 0; events < 4 && i < n; ++i) {
      if (planted[i] > 0 && d.value(i, col) == 0.0) {
        d.set(i, col, std::round(std::exp(9.0 + 3.0 * rng.uniform())));
        ++events;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (planted[i] == 0) continue;
    for (std::size_t j = 1; j < vars.size(); ++j)
      if (rng.uniform() < missing_rate) d.set_missing(i, j);
  }

  // Spatial regions tile a 20 x 17 grid of unit squares in row order.
  std::size_t cell = 0;
  for (const auto& rec : regions) {
    if (!rec.is_spatial) continue;
    const double x = static_cast<double>(cell % 20);
    const double y = static_cast<double>(cell / 20);
    ++cell;
    vulnidx::Ring ring = {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}};
    f.geometry.push_back({rec.region_id, {vulnidx::Polygon{ring}}});
  }

  f.dataset = std::move(d);
  f.planted_cluster = std::move(planted);
  return f;
}

std::string to_geojson(const std::vector<RegionGeometry>& geometry) {
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& g : geometry) {
    nlohmann::ordered_json polys = nlohmann::ordered_json::array();
    for (const auto& poly : g.polygons) {
      nlohmann::ordered_json rings = nlohmann::ordered_json::array();
      for (const auto& ring : poly) {
        nlohmann::ordered_json pts = nlohmann::ordered_json::array();
        for (const auto& p : ring) pts.push_back({p.x, p.y});
        rings.push_back(std::move(pts));
      }
      polys.push_back(std::move(rings));
    }
    nlohmann::ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"] = {{"region_id", g.region_id}};
    if (polys.size() == 1)
      feature["geometry"] = {{"type", "Polygon"}, {"coordinates", polys[0]}};
    else
      feature["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", polys}};
    features.push_back(std::move(feature));
  }
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  return doc.dump(1) + "\n";
}

void write_national(const NationalFixture& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  vulnidx::write_dataset(f.dataset, {dir / "values.csv", dir / "regions.csv", dir / "variables.csv"});
  {
    std::ofstream out(dir / "boundaries.geojson", std::ios::binary);
    out << to_geojson(f.geometry);
    if (!out) throw vulnidx::Error(vulnidx::Errc::io, "cannot write " + (dir / "boundaries.geojson").string());
  }
  vulnidx::write_adjacency_list(dir / "adjacency.csv", vulnidx::build_adjacency(f.geometry));

  vulnidx::csv::Table planted;
  planted.header = {"region_id", "cluster"};
  for (std::size_t i = 0; i < f.dataset.n_regions(); ++i)
    if (f.planted_cluster[i] > 0)
      planted.rows.push_back({f.dataset.regions()[i].region_id, std::to_string(f.planted_cluster[i])});
  vulnidx::csv::write(dir / "planted_clusters.csv", planted);
}

Blobs make_blobs(const Matrix& centers, std::size_t per_blob, double spread, std::uint64_t seed) {
  Rng rng(seed, 1);
  Blobs b;
  b.points = Matrix(centers.rows() * per_blob, centers.cols());
  std::size_t row = 0;
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    for (std::size_t i = 0; i < per_blob; ++i, ++row) {
      for (std::size_t a = 0; a < centers.cols(); ++a) b.points(row, a) = centers(c, a) + spread * rng.normal();
      b.labels.push_back(static_cast<int>(c) + 1);
    }
  }
  return b;
}

Blobs four_blobs(double separation, double spread, std::size_t per_blob, std::uint64_t seed) {
  Matrix centers(4, 4);
  for (std::size_t c = 0; c < 4; ++c) centers(c, c) = separation;
  return make_blobs(centers, per_blob, spread, seed);
}

Matrix correlated_normals(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed, 2);
  Matrix mix(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) mix(a, b) = rng.normal();
  Matrix out(n, p);
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : z) x = rng.normal();
    for (std::size_t b = 0; b < p; ++b) {
      double s = 0.0;
      for (std::size_t a = 0; a < p; ++a) s += z[a] * mix(a, b);
      out(i, b) = s;
    }
  }
  return out;
}

Matrix random_correlation(std::size_t p, std::uint64_t seed) {
  const Matrix x = correlated_normals(2 * p + 2, p, seed);
  const std::size_t n = x.rows();
  std::vector<double> mean(p, 0.0), sd(p, 0.0);
  for (std::size_t b = 0; b < p; ++b) {
    for (std::size_t i = 0; i < n; ++i) mean[b] += x(i, b);
    mean[b] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) sd[b] += (x(i, b) - mean[b]) * (x(i, b) - mean[b]);
    sd[b] = std::sqrt(sd[b]);
  }
  Matrix r(p, p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
      r(a, b) = a == b ? 1.0 : s / (sd[a] * sd[b]);
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < a; ++b) r(a, b) = r(b, a);
  return r;
}

}  // namespace fixture
