#include "vulnidx/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "vulnidx/csv.hpp"
#include "vulnidx/error.hpp"

namespace vulnidx {

using nlohmann::json;

AdjacencyGraph::AdjacencyGraph(std::vector<std::string> region_ids)
    : region_ids_(std::move(region_ids)), neighbors_(region_ids_.size()) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < region_ids_.size(); ++i)
    if (!seen.emplace(region_ids_[i], i).second)
      throw Error(Errc::duplicate_key, "duplicate region_id '" + region_ids_[i] + "' in graph");
}

void AdjacencyGraph::connect(std::size_t a, std::size_t b) {
  if (a >= size() || b >= size()) throw Error(Errc::precondition, "graph index out of range");
  if (a == b) throw Error(Errc::precondition, "self-loop on region '" + region_ids_[a] + "'");
  auto insert = [](std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };
  insert(neighbors_[a], b);
  insert(neighbors_[b], a);
}

std::optional<std::size_t> AdjacencyGraph::index_of(std::string_view region_id) const {
  for (std::size_t i = 0; i < region_ids_.size(); ++i)
    if (region_ids_[i] == region_id) return i;
  return std::nullopt;
}

std::size_t AdjacencyGraph::edge_count() const noexcept {
  std::size_t total = 0;
  for (const auto& n : neighbors_) total += n.size();
  return total / 2;
}

bool AdjacencyGraph::adjacent(std::size_t a, std::size_t b) const {
  const auto& n = neighbors_.at(a);
  return std::binary_search(n.begin(), n.end(), b);
}

// ---------------------------------------------------------------- geometry

namespace {

Point parse_position(const json& pos, const std::string& ctx) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
    throw Error(Errc::invalid_geometry, ctx + ": position must be [x, y]");
  return {pos[0].get<double>(), pos[1].get<double>()};
}

Polygon parse_polygon(const json& rings, const std::string& ctx) {
  if (!rings.is_array() || rings.empty())
    throw Error(Errc::invalid_geometry, ctx + ": polygon needs at least one ring");
  Polygon poly;
  for (const auto& ring_json : rings) {
    if (!ring_json.is_array())
      throw Error(Errc::invalid_geometry, ctx + ": ring must be an array of positions");
    Ring ring;
    for (const auto& pos : ring_json) ring.push_back(parse_position(pos, ctx));
    if (ring.size() < 4)
      throw Error(Errc::invalid_geometry, ctx + ": ring has fewer than 4 positions");
    if (!(ring.front() == ring.back()))
      throw Error(Errc::invalid_geometry, ctx + ": ring is not closed");
    poly.push_back(std::move(ring));
  }
  return poly;
}

std::string region_id_of(const json& feature, const std::string& ctx) {
  const auto props = feature.find("properties");
  if (props == feature.end() || !props->is_object())
    throw Error(Errc::invalid_geometry, ctx + ": feature has no properties");
  const auto id = props->find("region_id");
  if (id == props->end() || id->is_null())
    throw Error(Errc::invalid_geometry, ctx + ": feature missing region_id");
  if (id->is_string()) return id->get<std::string>();
  if (id->is_number_integer()) return std::to_string(id->get<long long>());
  throw Error(Errc::invalid_geometry, ctx + ": region_id must be a string or integer");
}

struct Box {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(Point p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool overlaps(const Box& o, double tol) const {
    return min_x <= o.max_x + tol && o.min_x <= max_x + tol && min_y <= o.max_y + tol &&
           o.min_y <= max_y + tol;
  }
};

struct Segment {
  Point a, b;
  Box box;
};

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

int sign(double v) { return (v > 0) - (v < 0); }

bool within_box(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

std::vector<Segment> segments_of(const RegionGeometry& g) {
  std::vector<Segment> out;
  for (const auto& poly : g.polygons)
    for (const auto& ring : poly)
      for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        Segment s{ring[i], ring[i + 1], {}};
        s.box.add(s.a);
        s.box.add(s.b);
        out.push_back(s);
      }
  return out;
}

}  // namespace

bool segments_touch(Point a, Point b, Point c, Point d, double tolerance) {
  const int o1 = sign(cross(a, b, c));
  const int o2 = sign(cross(a, b, d));
  const int o3 = sign(cross(c, d, a));
  const int o4 = sign(cross(c, d, b));
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && within_box(a, b, c)) return true;
  if (o2 == 0 && within_box(a, b, d)) return true;
  if (o3 == 0 && within_box(c, d, a)) return true;
  if (o4 == 0 && within_box(c, d, b)) return true;
  if (tolerance <= 0.0) return false;
  const double dist = std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                                point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
  return dist <= tolerance;
}

std::vector<RegionGeometry> parse_boundaries(const std::string& geojson_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(geojson_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_input, source + ": " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw Error(Errc::malformed_input, source + ": expected a GeoJSON FeatureCollection");

  std::vector<RegionGeometry> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t index = 0;
  for (const auto& feature : doc["features"]) {
    const std::string ctx = source + " feature #" + std::to_string(index++);
    RegionGeometry g;
    g.region_id = region_id_of(feature, ctx);
    const auto geom = feature.find("geometry");
    if (geom == feature.end() || !geom->is_object())
      throw Error(Errc::invalid_geometry, ctx + ": missing geometry");
    const std::string type = geom->value("type", "");
    const auto coords = geom->find("coordinates");
    if (coords == geom->end()) throw Error(Errc::invalid_geometry, ctx + ": missing coordinates");
    if (type == "Polygon") {
      g.polygons.push_back(parse_polygon(*coords, ctx));
    } else if (type == "MultiPolygon") {
      if (!coords->is_array()) throw Error(Errc::invalid_geometry, ctx + ": bad MultiPolygon");
      for (const auto& part : *coords) g.polygons.push_back(parse_polygon(part, ctx));
    } else {
      throw Error(Errc::invalid_geometry, ctx + ": unsupported geometry type '" + type + "'");
    }
    if (!seen.emplace(g.region_id, out.size()).second)
      throw Error(Errc::duplicate_key, ctx + ": duplicate region_id '" + g.region_id + "'");
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<RegionGeometry> read_boundaries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_boundaries(buf.str(), path.string());
}

AdjacencyGraph build_adjacency(std::span<const RegionGeometry> regions, double snap_tolerance) {
  if (snap_tolerance < 0) throw Error(Errc::precondition, "snap tolerance must be >= 0");
  std::vector<std::string> ids;
  for (const auto& r : regions) ids.push_back(r.region_id);
  AdjacencyGraph g(std::move(ids));
  const std::size_t n = regions.size();

  std::vector<std::vector<Segment>> segs(n);
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    segs[i] = segments_of(regions[i]);
    for (const auto& s : segs[i]) {
      boxes[i].add(s.a);
      boxes[i].add(s.b);
    }
  }

  // Exact shared vertices settle most pairs without segment tests.
  std::vector<std::vector<unsigned char>> linked(n, std::vector<unsigned char>(n, 0));
  {
    std::map<std::pair<double, double>, std::vector<std::size_t>> owners;
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& s : segs[i]) {
        auto& v = owners[{s.a.x, s.a.y}];
        if (v.empty() || v.back() != i) v.push_back(i);
      }
    for (const auto& [pt, who] : owners)
      for (std::size_t a = 0; a < who.size(); ++a)
        for (std::size_t b = a + 1; b < who.size(); ++b)
          if (who[a] != who[b]) linked[who[a]][who[b]] = linked[who[b]][who[a]] = 1;
  }

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (linked[i][j] || !boxes[i].overlaps(boxes[j], snap_tolerance)) continue;
      bool touch = false;
      for (const auto& s : segs[i]) {
        if (!s.box.overlaps(boxes[j], snap_tolerance)) continue;
        for (const auto& t : segs[j]) {
          if (!s.box.overlaps(t.box, snap_tolerance)) continue;
          if (segments_touch(s.a, s.b, t.a, t.b, snap_tolerance)) {
            touch = true;
            break;
          }
        }
        if (touch) break;
      }
      if (touch) linked[i][j] = 1;  // row i is owned by this iteration
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (linked[i][j] || linked[j][i]) g.connect(i, j);
  return g;
}

AdjacencyGraph build_adjacency_from_polygons(const std::filesystem::path& geojson, double snap_tolerance) {
  const auto regions = read_boundaries(geojson);
  return build_adjacency(regions, snap_tolerance);
}

AdjacencyGraph load_adjacency_list(const std::filesystem::path& path,
                                   std::span<const std::string> region_ids) {
  const csv::Table t = csv::read(path);
  const std::string src = path.string();
  const auto a = t.find("region_id");
  const auto b = t.find("neighbor_id");
  if (!a || !b) throw Error(Errc::malformed_input, src + ": header must be region_id,neighbor_id");

  AdjacencyGraph g(std::vector<std::string>(region_ids.begin(), region_ids.end()));
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < region_ids.size(); ++i) index.emplace(region_ids[i], i);

  std::size_t line = 1;
  for (const auto& row : t.rows) {
    ++line;
    const auto ia = index.find(row[*a]);
    const auto ib = index.find(row[*b]);
    const std::string ctx = src + ":" + std::to_string(line);
    if (ia == index.end()) throw Error(Errc::unknown_key, ctx + ": unknown region_id '" + row[*a] + "'");
    if (ib == index.end()) throw Error(Errc::unknown_key, ctx + ": unknown region_id '" + row[*b] + "'");
    if (ia->second == ib->second)
      throw Error(Errc::precondition, ctx + ": self-loop on region '" + row[*a] + "'");
    g.connect(ia->second, ib->second);
  }
  return g;
}

void write_adjacency_list(const std::filesystem::path& path, const AdjacencyGraph& g) {
  csv::Table t;
  t.header = {"region_id", "neighbor_id"};
  for (std::size_t i = 0; i < g.size(); ++i)
    for (auto j : g.neighbors(i))
      if (i < j) t.rows.push_back({g.region_ids()[i], g.region_ids()[j]});
  csv::write(path, t);
}

// -------------------------------------------------------------- imputation

std::string_view to_string(ImputationSource s) noexcept {
  return s == ImputationSource::neighbor_mean ? "neighbor_mean" : "column_mean";
}

ImputationResult impute_neighbor_mean(const Dataset& d, const AdjacencyGraph& g) {
  const std::size_t n = d.n_regions();
  const std::size_t p = d.n_variables();

  // Dataset row -> graph node, and graph node -> dataset row (or npos).
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::unordered_map<std::string, std::size_t> node_of;
  for (std::size_t k = 0; k < g.size(); ++k) node_of.emplace(g.region_ids()[k], k);
  std::vector<std::size_t> row_of_node(g.size(), npos);
  std::vector<std::size_t> node_of_row(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = node_of.find(d.regions()[i].region_id);
    if (it == node_of.end())
      throw Error(Errc::unknown_key,
                  "adjacency graph has no node for region '" + d.regions()[i].region_id + "'");
    node_of_row[i] = it->second;
    row_of_node[it->second] = i;
  }

  for (std::size_t j = 0; j < p; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < n && !any; ++i) any = !d.missing(i, j);
    if (!any && n > 0)
      throw Error(Errc::unresolvable,
                  "variable '" + d.variables()[j].short_form + "' has no observed value to impute from");
  }

  struct Fill {
    double value;
    ImputationSource source;
  };
  // fills[i * p + j] is meaningful only for missing cells.
  std::vector<Fill> fills(n * p, Fill{0.0, ImputationSource::neighbor_mean});

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(p); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    double col_sum = 0.0;
    std::size_t col_count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!d.missing(i, j)) {
        col_sum += d.value(i, j);
        ++col_count;
      }
    const double col_mean = col_sum / static_cast<double>(col_count);

    for (std::size_t i = 0; i < n; ++i) {
      if (!d.missing(i, j)) continue;
      double sum = 0.0;
      std::size_t count = 0;
      for (auto node : g.neighbors(node_of_row[i])) {
        const auto r = row_of_node[node];
        if (r == npos || d.missing(r, j)) continue;
        sum += d.value(r, j);
        ++count;
      }
      fills[i * p + j] = count ? Fill{sum / static_cast<double>(count), ImputationSource::neighbor_mean}
                               : Fill{col_mean, ImputationSource::column_mean};
    }
  }

  ImputationResult result{d, {}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      if (!d.missing(i, j)) continue;
      const Fill& f = fills[i * p + j];
      result.dataset.set(i, j, f.value);
      result.log.entries.push_back(
          {d.regions()[i].region_id, d.variables()[j].short_form, f.value, f.source});
    }
  return result;
}

void write_imputation_log(const std::filesystem::path& path, const ImputationLog& log) {
  csv::Table t;
  t.header = {"region_id", "short_form", "value", "source"};
  for (const auto& e : log.entries)
    t.rows.push_back({e.region_id, e.short_form, csv::format_double(e.value), std::string(to_string(e.source))});
  csv::write(path, t);
}

}  // namespace vulnidx
