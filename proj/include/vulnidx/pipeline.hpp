#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vulnidx/cluster.hpp"
#include "vulnidx/error.hpp"
#include "vulnidx/io.hpp"
#include "vulnidx/pca.hpp"

namespace vulnidx {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
  std::filesystem::path values;
  std::filesystem::path regions;
  std::filesystem::path variables;
  std::optional<std::filesystem::path> boundaries;  // GeoJSON; contiguity + atlas
  std::optional<std::filesystem::path> adjacency;   // CSV region_id,neighbor_id
  double snap_tolerance = 0.0;

  std::string erp_variable = "ERP";
  double screening_fraction = 0.10;
  std::vector<std::string> manual_removals;
  double skew_threshold = 2.0;
  double corr_threshold = 0.90;
  RetentionRule retention{RetentionStrategy::kaiser, 1.0};
  double loading_threshold = 0.20;

  std::optional<int> k;  // elbow suggestion when absent
  int k_max = 10;
  std::vector<std::uint64_t> seeds{std::begin(kDefaultSeeds), std::end(kDefaultSeeds)};
  InitMethod init = InitMethod::forgy;
  int restarts = 25;
  int max_iter = 200;
  double tol = 1e-9;

  std::filesystem::path output_dir;
  bool record_timestamps = false;

  /// Throws Error(precondition) on non-positive thresholds, empty seeds, etc.
  void validate() const;

  /// Options for kmeans with the first seed.
  KmeansOptions kmeans_options(int k) const;
};

/// Config echo used in the manifest. Excludes output_dir (so that runs into
/// different directories stay byte-identical) and anything thread-related.
io::Json to_json(const RunConfig& c);

/// Applies the keys present in `doc` on top of `base`.
RunConfig config_from_json(const io::Json& doc, RunConfig base = {});

enum class Step { ingest, select, pca, elbow, cluster, stability, profile };
std::string_view to_string(Step s) noexcept;
std::optional<Step> parse_step(std::string_view text);

/// Error carrying the failing pipeline step.
class StepError : public Error {
 public:
  StepError(Step step, const Error& cause);
  Step step() const noexcept { return step_; }

 private:
  Step step_;
};

struct StepRecord {
  Step step;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::optional<int> suggested_k;  // elbow
  std::optional<int> k;            // cluster / stability
};

// Fixed file names inside the output directory.
namespace files {
inline constexpr const char* ingested_values = "ingested_values.csv";
inline constexpr const char* ingested_regions = "ingested_regions.csv";
inline constexpr const char* ingested_variables = "ingested_variables.csv";
inline constexpr const char* omission_log = "omission_log.csv";
inline constexpr const char* validation = "validation.json";
inline constexpr const char* adjacency = "adjacency.csv";
inline constexpr const char* imputation_log = "imputation_log.csv";
inline constexpr const char* selected_values = "selected_values.csv";
inline constexpr const char* selected_regions = "selected_regions.csv";
inline constexpr const char* selected_variables = "selected_variables.csv";
inline constexpr const char* selection_report = "selection_report.json";
inline constexpr const char* pca_model = "pca_model.json";
inline constexpr const char* scores = "scores.csv";
inline constexpr const char* index_skewness = "index_skewness.json";
inline constexpr const char* elbow = "elbow.csv";
inline constexpr const char* cluster_model = "cluster_model.json";
inline constexpr const char* assignments = "assignments.csv";
inline constexpr const char* stability = "stability.json";
inline constexpr const char* profile = "profile.json";
inline constexpr const char* crosstab_remoteness = "crosstab_remoteness.csv";
inline constexpr const char* crosstab_state = "crosstab_state.csv";
inline constexpr const char* atlas = "atlas.geojson";
inline constexpr const char* manifest = "manifest.json";
}  // namespace files

/// Runs one stage from the intermediates in `c.output_dir`. Throws StepError;
/// a missing intermediate is Errc::missing_intermediate.
StepRecord run_step(Step step, const RunConfig& c);

/// Full pipeline; rewrites the manifest from scratch. Returns the records.
std::vector<StepRecord> run_pipeline(const RunConfig& c);

/// Creates or updates `manifest.json` with the given step records (entries
/// for the same step are replaced).
void update_manifest(const RunConfig& c, const std::vector<StepRecord>& records, bool fresh);

}  // namespace vulnidx
