#pragma once

// Deterministic synthetic inputs shared by the unit tests, the acceptance
// suite, the benchmark and tools/make_fixture.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vulnidx/ingest.hpp"
#include "vulnidx/matrix.hpp"
#include "vulnidx/spatial.hpp"

namespace fixture {

using vulnidx::Matrix;

/// Region table of the national-scale fixture.
///  * 335 populated spatial regions whose state x remoteness counts follow
///    the published national distribution (remoteness totals 189/76/48/12/10)
///    and whose planted cluster labels give remoteness x cluster counts with
///    column totals 123/9/88/115;
///  * 5 spatial regions with zero population;
///  * 18 non-spatial regions with no population figure.
/// 41 variables: ERP, 25 core indicators (a few log-normal), 5 spike
/// indicators that stay skewed after log1p, and 10 near-duplicates of core
/// indicators (|r| > 0.95). Selection therefore sheds exactly 15 variables.
struct NationalFixture {
  vulnidx::Dataset dataset;
  std::vector<vulnidx::RegionGeometry> geometry;  // spatial regions only, unit grid squares
  std::vector<int> planted_cluster;               // per dataset row; 0 for omitted regions
  std::vector<std::string> core_variables;        // ERP + 25 cores, in column order
  std::vector<std::string> spike_variables;
  std::vector<std::string> duplicate_variables;
};

inline constexpr std::uint64_t kNationalSeed = 20240611;
inline constexpr std::size_t kPopulatedRegions = 335;

NationalFixture make_national(std::uint64_t seed = kNationalSeed, double missing_rate = 0.01);

/// Writes values.csv, regions.csv, variables.csv, boundaries.geojson,
/// adjacency.csv and planted_clusters.csv into `dir`.
void write_national(const NationalFixture& f, const std::filesystem::path& dir);

std::string to_geojson(const std::vector<vulnidx::RegionGeometry>& geometry);

/// Remoteness x cluster counts and state x remoteness counts used above.
extern const int kRemotenessByCluster[5][4];
extern const int kStateByRemoteness[9][5];

struct Blobs {
  Matrix points;
  std::vector<int> labels;  // 1-based, blob of origin
};

/// Isotropic Gaussian blobs around `centers` (rows), `per_blob` points each,
/// emitted blob by blob.
Blobs make_blobs(const Matrix& centers, std::size_t per_blob, double spread, std::uint64_t seed);

/// Four blobs on a regular simplex (scaled basis vectors of R^4 plus the
/// origin shifted); separation/spread controls overlap.
Blobs four_blobs(double separation, double spread, std::size_t per_blob, std::uint64_t seed);

/// n x p matrix of standard normals mixed through a random p x p matrix so
/// that the columns are correlated.
Matrix correlated_normals(std::size_t n, std::size_t p, std::uint64_t seed);

/// Random p x p correlation matrix (from `correlated_normals` with n = 2p + 2).
Matrix random_correlation(std::size_t p, std::uint64_t seed);

}  // namespace fixture
