#include "vulnidx/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "vulnidx/error.hpp"
#include "vulnidx/kernels.hpp"
#include "vulnidx/rng.hpp"

namespace vulnidx {

std::string_view to_string(InitMethod m) noexcept { return m == InitMethod::kmeanspp ? "kmeanspp" : "forgy"; }

InitMethod parse_init(std::string_view text) {
  if (text == "forgy") return InitMethod::forgy;
  if (text == "kmeanspp" || text == "kmeans++") return InitMethod::kmeanspp;
  throw Error(Errc::precondition, "unknown init method '" + std::string(text) + "'");
}

std::vector<std::size_t> ClusterModel::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
  for (int label : assignments) ++out[static_cast<std::size_t>(label - 1)];
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

double wcss_of(const Matrix& points, std::span<const std::size_t> labels, const Matrix& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    total += squared_distance(points.row(i), centroids.row(labels[i]));
  return total;
}

void check_inputs(const Matrix& points, int k) {
  if (k <= 0) throw Error(Errc::precondition, "k must be positive");
  if (static_cast<std::size_t>(k) > points.rows())
    throw Error(Errc::precondition,
                "k = " + std::to_string(k) + " exceeds the number of points (" + std::to_string(points.rows()) + ")");
  for (double v : points.data())
    if (!std::isfinite(v)) throw Error(Errc::precondition, "non-finite score");
}

// Re-seeds every empty cluster with the point farthest from its current
// centroid, taken from a cluster that keeps at least one member.
void repair_empty_clusters(const Matrix& points, std::vector<std::size_t>& labels, Matrix& centroids,
                           std::vector<std::size_t>& counts) {
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(points.row(i), centroids.row(labels[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    const std::size_t donor = labels[far];
    --counts[donor];
    labels[far] = c;
    counts[c] = 1;
    std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(c).begin());
    // Donor mean without the moved point, summed in point order.
    auto row = centroids.row(donor);
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < points.rows(); ++i)
      if (labels[i] == donor)
        for (std::size_t d = 0; d < row.size(); ++d) row[d] += points(i, d);
    for (auto& v : row) v /= static_cast<double>(counts[donor]);
  }
}

}  // namespace

Matrix initial_centroids(const Matrix& points, int k, InitMethod init, std::uint64_t seed, std::uint64_t restart) {
  check_inputs(points, k);
  const std::size_t n = points.rows();
  const auto kk = static_cast<std::size_t>(k);
  Rng rng(seed, restart);
  Matrix c(kk, points.cols());
  std::vector<std::size_t> chosen;

  if (init == InitMethod::forgy) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < kk; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
      chosen.push_back(idx[i]);
    }
  } else {
    chosen.push_back(static_cast<std::size_t>(rng.below(n)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), points.row(chosen[0]));
    while (chosen.size() < kk) {
      double total = 0.0;
      for (double v : d2) total += v;
      std::size_t pick = n;
      if (total > 0) {
        const double u = rng.uniform() * total;
        double cum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] == 0.0) continue;
          cum += d2[i];
          pick = i;
          if (cum > u) break;
        }
      } else {
        // Every remaining point coincides with a chosen one.
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i)
          if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) rest.push_back(i);
        pick = rest[static_cast<std::size_t>(rng.below(rest.size()))];
      }
      chosen.push_back(pick);
      for (std::size_t i = 0; i < n; ++i)
        d2[i] = std::min(d2[i], squared_distance(points.row(i), points.row(pick)));
    }
  }
  for (std::size_t c_idx = 0; c_idx < kk; ++c_idx)
    std::copy(points.row(chosen[c_idx]).begin(), points.row(chosen[c_idx]).end(), c.row(c_idx).begin());
  return c;
}

LloydRun lloyd(const Matrix& points, Matrix centroids, int max_iter, double tol) {
  if (max_iter < 1) throw Error(Errc::precondition, "max_iter must be at least 1");
  const std::size_t n = points.rows(), k = centroids.rows();
  LloydRun run;
  run.labels.assign(n, k);  // no valid label yet
  std::vector<double> d2(n);
  std::vector<std::size_t> counts(k);
  Matrix previous;

  for (int iter = 0; iter < max_iter; ++iter) {
    const std::size_t changed = kernels::assign_nearest(points, centroids, run.labels, d2);
    if (iter > 0 && changed == 0) {
      run.converged = true;
      break;
    }
    previous = centroids;
    kernels::centroid_means(points, run.labels, centroids, counts);
    repair_empty_clusters(points, run.labels, centroids, counts);
    run.wcss_trace.push_back(wcss_of(points, run.labels, centroids));
    run.iterations = iter + 1;

    double move = 0.0;
    for (std::size_t c = 0; c < k; ++c) move = std::max(move, squared_distance(centroids.row(c), previous.row(c)));
    if (std::sqrt(move) < tol) {
      run.converged = true;
      break;
    }
  }
  run.centroids = std::move(centroids);
  run.wcss = run.wcss_trace.back();
  return run;
}

ClusterModel kmeans(const Matrix& points, const KmeansOptions& options) {
  check_inputs(points, options.k);
  if (options.restarts < 1) throw Error(Errc::precondition, "restarts must be at least 1");

  const auto restarts = static_cast<std::size_t>(options.restarts);
  std::vector<LloydRun> runs(restarts);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(restarts); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    runs[r] = lloyd(points, initial_centroids(points, options.k, options.init, options.seed, r),
                    options.max_iter, options.tol);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (runs[r].wcss < runs[best].wcss) best = r;
  LloydRun& run = runs[best];

  // Canonical numbering: descending size, then first member index.
  const auto k = static_cast<std::size_t>(options.k);
  std::vector<std::size_t> size(k, 0), first(k, points.rows());
  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    ++size[run.labels[i]];
    first[run.labels[i]] = std::min(first[run.labels[i]], i);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return first[a] < first[b];
  });
  std::vector<int> new_label(k);
  for (std::size_t pos = 0; pos < k; ++pos) new_label[order[pos]] = static_cast<int>(pos + 1);

  ClusterModel m;
  m.k = options.k;
  m.seed = options.seed;
  m.init = options.init;
  m.restarts = options.restarts;
  m.best_restart = static_cast<int>(best);
  m.iterations = run.iterations;
  m.wcss = run.wcss;
  m.wcss_trace = run.wcss_trace;
  m.assignments.resize(run.labels.size());
  for (std::size_t i = 0; i < run.labels.size(); ++i) m.assignments[i] = new_label[run.labels[i]];
  m.centroids = Matrix(k, points.cols());
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = run.centroids.row(c);
    std::copy(src.begin(), src.end(), m.centroids.row(static_cast<std::size_t>(new_label[c] - 1)).begin());
  }
  return m;
}

ClusterModel kmeans(const IndexScores& scores, const KmeansOptions& options) {
  return kmeans(scores.scores, options);
}

double within_cluster_ss(const Matrix& points, std::span<const int> labels, const Matrix& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    total += squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(labels[i] - 1)));
  return total;
}

std::optional<int> suggest_elbow(std::span<const int> k_values, std::span<const double> wcss) {
  std::optional<int> best;
  double best_curv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < wcss.size(); ++i) {
    const double curv = wcss[i - 1] - 2.0 * wcss[i] + wcss[i + 1];
    if (curv > best_curv) {
      best_curv = curv;
      best = k_values[i];
    }
  }
  return best;
}

ElbowScan elbow_scan(const Matrix& points, int k_max, const KmeansOptions& base) {
  if (k_max < 2) throw Error(Errc::precondition, "elbow scan needs k_max >= 2");
  ElbowScan scan;
  for (int k = 1; k <= k_max; ++k) {
    KmeansOptions opt = base;
    opt.k = k;
    scan.k_values.push_back(k);
    scan.wcss_per_k.push_back(kmeans(points, opt).wcss);
  }
  scan.suggested_k = suggest_elbow(scan.k_values, scan.wcss_per_k);
  return scan;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw Error(Errc::precondition, "ARI needs labelings of equal length");
  if (a.size() < 2) throw Error(Errc::precondition, "ARI needs at least 2 items");

  std::map<int, std::size_t> ia, ib;
  for (int v : a) ia.emplace(v, ia.size());
  for (int v : b) ib.emplace(v, ib.size());
  std::vector<std::int64_t> table(ia.size() * ib.size(), 0), row(ia.size(), 0), col(ib.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto r = ia[a[i]], c = ib[b[i]];
    ++table[r * ib.size() + c];
    ++row[r];
    ++col[c];
  }
  auto pairs = [](std::int64_t x) { return x * (x - 1) / 2; };
  std::int64_t sum_ij = 0, sum_a = 0, sum_b = 0;
  for (auto v : table) sum_ij += pairs(v);
  for (auto v : row) sum_a += pairs(v);
  for (auto v : col) sum_b += pairs(v);
  const auto total = static_cast<double>(pairs(static_cast<std::int64_t>(a.size())));

  const double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / total;
  const double max_index = 0.5 * static_cast<double>(sum_a + sum_b);
  const double denom = max_index - expected;
  // Zero only when both partitions are all-singletons or both are one block.
  if (denom == 0.0) return 1.0;
  return (static_cast<double>(sum_ij) - expected) / denom;
}

StabilityReport stability_analysis(const Matrix& points, std::span<const std::uint64_t> seeds,
                                   const KmeansOptions& options, double cutoff) {
  if (seeds.size() < 2) throw Error(Errc::precondition, "stability analysis needs at least 2 seeds");
  StabilityReport report;
  report.seeds.assign(seeds.begin(), seeds.end());
  report.cutoff = cutoff;
  std::vector<std::vector<int>> labels;
  for (auto seed : seeds) {
    KmeansOptions opt = options;
    opt.seed = seed;
    auto m = kmeans(points, opt);
    report.wcss.push_back(m.wcss);
    labels.push_back(std::move(m.assignments));
  }
  const std::size_t s = seeds.size();
  report.ari = Matrix(s, s);
  for (std::size_t i = 0; i < s; ++i) {
    report.ari(i, i) = 1.0;
    for (std::size_t j = i + 1; j < s; ++j) {
      const double v = adjusted_rand_index(labels[i], labels[j]);
      report.ari(i, j) = report.ari(j, i) = v;
      if (v < cutoff) report.flagged_pairs.push_back({seeds[i], seeds[j], v});
    }
  }
  return report;
}

}  // namespace vulnidx
