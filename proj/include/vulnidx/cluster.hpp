#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vulnidx/matrix.hpp"
#include "vulnidx/pca.hpp"

namespace vulnidx {

enum class InitMethod { forgy, kmeanspp };
std::string_view to_string(InitMethod m) noexcept;
InitMethod parse_init(std::string_view text);

struct KmeansOptions {
  int k = 4;
  std::uint64_t seed = 123;
  InitMethod init = InitMethod::forgy;
  int restarts = 25;
  int max_iter = 200;
  double tol = 1e-9;
};

struct ClusterModel {
  int k = 0;
  std::vector<int> assignments;  // labels 1..k, canonical order
  Matrix centroids;              // k x d
  double wcss = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::forgy;
  int restarts = 0;
  int best_restart = 0;
  std::vector<double> wcss_trace;  // after each update step of the chosen run

  std::vector<std::size_t> sizes() const;
};

/// One Lloyd run from a given initialization, before canonical renumbering.
struct LloydRun {
  std::vector<std::size_t> labels;  // 0-based
  Matrix centroids;
  double wcss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> wcss_trace;
};

/// Initial centroids for one restart: Forgy picks k distinct points; k-means++
/// samples proportionally to squared distance from the chosen set.
Matrix initial_centroids(const Matrix& points, int k, InitMethod init, std::uint64_t seed,
                         std::uint64_t restart);

/// Lloyd iterations (assign, update) until no label changes, the largest
/// centroid move is below `tol`, or `max_iter` updates. An empty cluster takes
/// the point farthest from its own centroid among clusters with >1 member.
LloydRun lloyd(const Matrix& points, Matrix centroids, int max_iter, double tol);

/// Best of `restarts` Lloyd runs by (wcss, restart index). Restart r draws its
/// initialization from Rng(seed, r). Clusters are renumbered 1..k by
/// descending size, ties by first member.
ClusterModel kmeans(const Matrix& points, const KmeansOptions& options);
ClusterModel kmeans(const IndexScores& scores, const KmeansOptions& options);

double within_cluster_ss(const Matrix& points, std::span<const int> labels, const Matrix& centroids);

struct ElbowScan {
  std::vector<int> k_values;
  std::vector<double> wcss_per_k;
  std::optional<int> suggested_k;
};

/// Suggested k maximizes wcss(k-1) - 2 wcss(k) + wcss(k+1) over interior k
/// (ties -> smallest k); absent when there is no interior point.
std::optional<int> suggest_elbow(std::span<const int> k_values, std::span<const double> wcss);

ElbowScan elbow_scan(const Matrix& points, int k_max, const KmeansOptions& base);

/// Hubert-Arabie adjusted Rand index. Labels are arbitrary integers.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

inline constexpr double kStabilityCutoff = 0.65;
inline constexpr std::uint64_t kDefaultSeeds[] = {123, 1767, 7462, 944, 3401};

struct StabilityReport {
  std::vector<std::uint64_t> seeds;
  Matrix ari;  // seeds x seeds
  double cutoff = kStabilityCutoff;
  struct Pair {
    std::uint64_t seed_a;
    std::uint64_t seed_b;
    double ari;
  };
  std::vector<Pair> flagged_pairs;  // ari < cutoff, i < j
  std::vector<double> wcss;         // per seed
};

/// One kmeans per seed (options.seed is ignored) and the pairwise ARI matrix.
StabilityReport stability_analysis(const Matrix& points, std::span<const std::uint64_t> seeds,
                                   const KmeansOptions& options, double cutoff = kStabilityCutoff);

}  // namespace vulnidx
