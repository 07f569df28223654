#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnidx/cluster.hpp"
#include "vulnidx/ingest.hpp"
#include "vulnidx/pca.hpp"

namespace vulnidx {

struct ClusterSummary {
  int cluster = 0;
  std::size_t size = 0;
  std::vector<double> mean;  // per index
  std::vector<double> sd;    // sample sd, 0 for singletons
  bool singleton = false;
  std::vector<std::size_t> dominant;  // index positions by descending |mean|
};

struct ClusterProfile {
  std::vector<std::string> index_names;
  std::vector<ClusterSummary> clusters;  // cluster 1..k
};

/// Per-cluster mean and sample sd (divisor size - 1) of every index.
ClusterProfile centroid_table(const ClusterModel& c, const IndexScores& s);

enum class CrossTabAxis { remoteness, state };
std::string_view to_string(CrossTabAxis a) noexcept;
CrossTabAxis parse_axis(std::string_view text);

struct CrossTab {
  CrossTabAxis axis = CrossTabAxis::remoteness;
  std::vector<std::string> row_labels;  // all categories, fixed order
  std::vector<std::string> col_labels;  // C1..Ck
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::size_t> row_totals;
  std::vector<std::size_t> col_totals;
  std::size_t grand_total = 0;
};

/// Regions must be aligned with `c.assignments`. Throws Error(precondition)
/// when a region lacks the axis attribute.
CrossTab crosstab(const ClusterModel& c, std::span<const RegionRecord> regions, CrossTabAxis axis);

enum class Effect { elevated, reduced };
std::string_view to_string(Effect e) noexcept;

struct VariableEffect {
  std::string short_form;
  double weight = 0.0;
  Effect effect = Effect::elevated;
};

struct IndexCharacterization {
  std::string index;
  double centroid = 0.0;
  std::vector<VariableEffect> variables;
};

struct ClusterCharacterization {
  int cluster = 0;
  std::vector<IndexCharacterization> indices;  // by descending |centroid|
};

/// Effect direction is sign(centroid) * sign(loading); indices with a zero
/// centroid contribute nothing.
std::vector<ClusterCharacterization> characterize(const ClusterModel& c, const PcaModel& m,
                                                  double threshold = 0.20);

struct RunArtifacts {
  const IndexScores* scores = nullptr;
  const ClusterModel* clusters = nullptr;
  const PcaModel* pca = nullptr;
  std::span<const RegionRecord> regions;  // aligned with scores
  double loading_threshold = 0.20;
};

/// Writes scores.csv, assignments.csv, profile.json, crosstab_remoteness.csv,
/// crosstab_state.csv and, when `boundaries` is given, atlas.geojson.
/// Returns the written paths in write order.
std::vector<std::filesystem::path> emit_outputs(const RunArtifacts& run, const std::filesystem::path& out_dir,
                                                const std::optional<std::filesystem::path>& boundaries = std::nullopt);

}  // namespace vulnidx
