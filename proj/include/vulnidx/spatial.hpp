#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnidx/ingest.hpp"

namespace vulnidx {

/// Symmetric, irreflexive contiguity relation over an ordered region list.
/// Neighbor lists are sorted ascending.
class AdjacencyGraph {
 public:
  AdjacencyGraph() = default;
  explicit AdjacencyGraph(std::vector<std::string> region_ids);

  /// Adds the undirected edge {a, b}; throws Error(precondition) for a == b.
  void connect(std::size_t a, std::size_t b);

  std::size_t size() const noexcept { return region_ids_.size(); }
  const std::vector<std::string>& region_ids() const noexcept { return region_ids_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::optional<std::size_t> index_of(std::string_view region_id) const;
  std::size_t edge_count() const noexcept;
  bool adjacent(std::size_t a, std::size_t b) const;

 private:
  std::vector<std::string> region_ids_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Ring = std::vector<Point>;       // closed: front() == back()
using Polygon = std::vector<Ring>;     // outer ring then holes
struct RegionGeometry {
  std::string region_id;
  std::vector<Polygon> polygons;       // Polygon or MultiPolygon parts
};

/// Parses a GeoJSON FeatureCollection of Polygon / MultiPolygon features that
/// carry a `region_id` property (string or integer).
std::vector<RegionGeometry> parse_boundaries(const std::string& geojson_text, const std::string& source = "<memory>");
std::vector<RegionGeometry> read_boundaries(const std::filesystem::path& path);

/// Two segments share a point when their distance is <= tolerance.
/// With tolerance 0 the test is exact orientation arithmetic.
bool segments_touch(Point a, Point b, Point c, Point d, double tolerance = 0.0);

/// Queen contiguity: regions are neighbors when their boundaries share at
/// least one point (a common vertex or any edge/edge contact).
AdjacencyGraph build_adjacency(std::span<const RegionGeometry> regions, double snap_tolerance = 0.0);
AdjacencyGraph build_adjacency_from_polygons(const std::filesystem::path& geojson, double snap_tolerance = 0.0);

/// Reads `region_id,neighbor_id` pairs and returns their symmetric closure
/// over `region_ids` (which fixes the node order).
AdjacencyGraph load_adjacency_list(const std::filesystem::path& path,
                                   std::span<const std::string> region_ids);
void write_adjacency_list(const std::filesystem::path& path, const AdjacencyGraph& g);

enum class ImputationSource { neighbor_mean, column_mean };
std::string_view to_string(ImputationSource s) noexcept;

struct ImputationEntry {
  std::string region_id;
  std::string short_form;
  double value = 0.0;
  ImputationSource source = ImputationSource::neighbor_mean;
};

struct ImputationLog {
  std::vector<ImputationEntry> entries;  // row-major order of the filled cells
};

struct ImputationResult {
  Dataset dataset;
  ImputationLog log;
};

/// Fills each missing cell with the mean of that variable over the region's
/// neighbors, using observed values of the input only (single pass). Falls
/// back to the column mean of observed values when no neighbor is observed.
/// Neighbors present in `g` but absent from `d` are ignored.
ImputationResult impute_neighbor_mean(const Dataset& d, const AdjacencyGraph& g);

void write_imputation_log(const std::filesystem::path& path, const ImputationLog& log);

}  // namespace vulnidx
