#pragma once

// JSON / CSV forms of the pipeline's intermediates and outputs.

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "vulnidx/cluster.hpp"
#include "vulnidx/pca.hpp"
#include "vulnidx/profile.hpp"
#include "vulnidx/select.hpp"

namespace vulnidx::io {

using Json = nlohmann::ordered_json;

void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

Json to_json(const OmissionLog& log);
Json to_json(const ValidationReport& report);
Json to_json(const SelectionReport& report);
Json to_json(const PcaModel& m);
PcaModel pca_model_from_json(const Json& doc);
Json to_json(const std::vector<IndexSkewness>& report);
Json to_json(const ClusterModel& m);
ClusterModel cluster_model_from_json(const Json& doc);
Json to_json(const ElbowScan& scan);
Json to_json(const StabilityReport& report);
Json to_json(const ClusterProfile& profile);
Json to_json(const std::vector<ClusterCharacterization>& ch);

void write_omission_log(const std::filesystem::path& path, const OmissionLog& log);

/// region_id,VI1,...,VIk with shortest round-trip numbers.
void write_scores(const std::filesystem::path& path, const IndexScores& s);
IndexScores read_scores(const std::filesystem::path& path);

/// region_id,cluster
void write_assignments(const std::filesystem::path& path, const std::vector<std::string>& region_ids,
                       const ClusterModel& m);

/// k,wcss
void write_elbow(const std::filesystem::path& path, const ElbowScan& scan);
ElbowScan read_elbow(const std::filesystem::path& path);

void write_crosstab(const std::filesystem::path& path, const CrossTab& t);

}  // namespace vulnidx::io
