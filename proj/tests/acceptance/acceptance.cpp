// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"
#include "vulnidx/cluster.hpp"
#include "vulnidx/eigen.hpp"
#include "vulnidx/hash.hpp"
#include "vulnidx/kernels.hpp"
#include "vulnidx/pca.hpp"
#include "vulnidx/profile.hpp"
#include "vulnidx/rng.hpp"
#include "vulnidx/select.hpp"

using namespace vulnidx;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<std::string> names(std::size_t p, const char* prefix = "V") {
  std::vector<std::string> v;
  for (std::size_t j = 0; j < p; ++j) v.push_back(prefix + std::to_string(j));
  return v;
}

// 1. Kaiser retention on the published eigenvalue column.
Outcome kaiser_on_published() {
  const std::vector<double> eig = {11.19, 3.28, 2.74, 1.43, 1.10, 0.89, 0.82, 0.69, 0.63,
                                   0.59,  0.49, 0.45, 0.35, 0.30, 0.23, 0.20, 0.17, 0.11,
                                   0.10,  0.07, 0.05, 0.04, 0.04, 0.02, 0.02, 0.00};
  const auto t0 = Clock::now();
  const std::size_t k = retained_count(eig, {RetentionStrategy::kaiser, 1.0});
  double cum = 0.0;
  for (std::size_t j = 0; j < k; ++j) cum += eig[j];
  const double percent = 100.0 * cum / 26.0;
  const double elapsed = seconds_since(t0);
  const bool ok = k == 5 && std::abs(percent - 75.94) <= 0.05 && elapsed < 1e-3;
  return {ok, fmt("retained=%zu cumulative=%.4f%% (published 75.94) in %.1f us", k, percent, elapsed * 1e6)};
}

// 2. Trace witness on the 26-variable synthetic selection and random fits.
Outcome trace_witness() {
  const auto f = fixture::make_national();
  const auto t0 = Clock::now();
  const auto selected = run_selection(f.dataset, build_adjacency(f.geometry), {});
  const PcaModel m = fit_pca(standardize(selected.dataset));
  const double elapsed = seconds_since(t0);
  const double p = static_cast<double>(m.n_variables());
  const double trace = std::accumulate(m.eigenvalues.begin(), m.eigenvalues.end(), 0.0);
  double worst = std::abs(trace - p);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t q = 2 + seed % 15;
    const auto x = fixture::correlated_normals(3 * q + 5, q, seed);
    const PcaModel r = fit_pca(standardize(x, names(q)));
    worst = std::max(worst, std::abs(std::accumulate(r.eigenvalues.begin(), r.eigenvalues.end(), 0.0) -
                                     static_cast<double>(q)));
  }
  const bool ok = m.n_variables() == 26 && worst < 1e-9 && elapsed < 1.0;
  return {ok, fmt("p=%zu sum(lambda)=%.12f max|sum-p|=%.2e over 21 fits; selection+fit %.3f s", m.n_variables(),
                  trace, worst, elapsed)};
}

// 3. Jacobi vs characteristic-polynomial roots on 100 random 4x4 correlations.
Outcome eigensolver_oracle() {
  double worst_value = 0.0, worst_residual = 0.0;
  std::size_t root_failures = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Matrix r = fixture::random_correlation(4, 1000 + seed);
    const auto e = jacobi_eigen(r);
    auto roots = oracle::eigenvalues_by_roots(r, -1e-3L, 4.001L);
    if (roots.size() != 4) roots = oracle::eigenvalues_by_roots(r, -1e-3L, 4.001L, 400000);
    if (roots.size() != 4) {
      ++root_failures;
      continue;
    }
    for (std::size_t j = 0; j < 4; ++j) {
      worst_value = std::max(worst_value, std::abs(e.values[j] - roots[j]));
      double res = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        double rw = 0.0;
        for (std::size_t l = 0; l < 4; ++l) rw += r(i, l) * e.vectors(l, j);
        res += std::pow(rw - e.values[j] * e.vectors(i, j), 2);
      }
      worst_residual = std::max(worst_residual, std::sqrt(res));
    }
  }
  const bool ok = root_failures == 0 && worst_value < 1e-8 && worst_residual < 1e-8;
  return {ok, fmt("100 matrices: max|lambda-root|=%.2e max||Rw-lambda w||=%.2e oracle failures=%zu", worst_value,
                  worst_residual, root_failures)};
}

// 4. Score contract on 20 random n=200, p=10 fixtures.
Outcome score_contract() {
  double worst_var = 0.0, worst_mean = 0.0, worst_recon = 0.0;
  std::size_t retained_total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix x = fixture::correlated_normals(200, 10, 500 + seed);
    const Standardized s = standardize(x, names(10));
    const PcaModel fitted = fit_pca(s);
    const PcaModel kaiser = retain_components(fitted);
    retained_total += kaiser.retained;
    std::vector<std::string> ids(200);
    for (std::size_t i = 0; i < 200; ++i) ids[i] = std::to_string(i);
    const IndexScores sc = score(kaiser, s.z, ids);
    for (std::size_t j = 0; j < kaiser.retained; ++j) {
      double mean = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < 200; ++i) mean += sc.scores(i, j);
      mean /= 200.0;
      for (std::size_t i = 0; i < 200; ++i) ss += std::pow(sc.scores(i, j) - mean, 2);
      worst_mean = std::max(worst_mean, std::abs(mean));
      worst_var = std::max(worst_var, std::abs(ss / 199.0 - kaiser.eigenvalues[j]));
    }
    const PcaModel full = retain_components(fitted, {RetentionStrategy::cumulative, 1.0});
    const IndexScores all = score(full, s.z, ids);
    const Matrix back = kernels::multiply(all.scores, full.loadings.transposed());
    for (std::size_t i = 0; i < 200; ++i)
      for (std::size_t j = 0; j < 10; ++j) worst_recon = std::max(worst_recon, std::abs(back(i, j) - s.z(i, j)));
  }
  const bool ok = worst_var < 1e-6 && worst_mean < 1e-9 && worst_recon < 1e-8;
  return {ok, fmt("20 fits, %zu retained components: max|var-lambda|=%.2e max|mean|=%.2e max recon err=%.2e",
                  retained_total, worst_var, worst_mean, worst_recon)};
}

// 5. K-means optimum vs exhaustive enumeration; Lloyd traces monotone.
Outcome kmeans_oracle() {
  Rng rng(2024);
  int hits = 0;
  std::size_t traces = 0, bad_traces = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 4 + rng.below(5);
    const int k = 1 + static_cast<int>(rng.below(3));
    Matrix x(n, 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < 2; ++a) x(i, a) = rng.normal();
    KmeansOptions o;
    o.k = k;
    o.restarts = 200;
    o.seed = static_cast<std::uint64_t>(inst) + 1;
    const auto model = kmeans(x, o);
    const double best = oracle::optimal_wcss(x, k);
    hits += model.wcss <= best * (1 + 1e-9) + 1e-12;
    for (int r = 0; r < o.restarts; ++r) {
      const auto run = lloyd(x, initial_centroids(x, k, o.init, o.seed, static_cast<std::uint64_t>(r)), o.max_iter, o.tol);
      ++traces;
      for (std::size_t t = 1; t < run.wcss_trace.size(); ++t)
        if (run.wcss_trace[t] > run.wcss_trace[t - 1] * (1 + 1e-12)) {
          ++bad_traces;
          break;
        }
    }
  }
  const bool ok = hits >= 95 && bad_traces == 0;
  return {ok, fmt("optimum reached in %d/100 instances; %zu/%zu traces non-increasing", hits, traces - bad_traces, traces)};
}

// 6. ARI exactness and agreement with the contingency oracle.
Outcome ari_correctness() {
  const std::vector<int> a = {1, 1, 2, 2}, b = {1, 2, 1, 2};
  const double same = adjusted_rand_index(a, a);
  const double cross = adjusted_rand_index(a, b);
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> x(30), y(30);
    const auto kx = 1 + rng.below(6), ky = 1 + rng.below(6);
    for (std::size_t i = 0; i < 30; ++i) {
      x[i] = static_cast<int>(rng.below(kx));
      y[i] = static_cast<int>(rng.below(ky));
    }
    worst = std::max(worst, std::abs(adjusted_rand_index(x, y) - oracle::ari_contingency(x, y)));
  }
  const bool ok = same == 1.0 && std::abs(cross + 0.5) < 1e-12 && worst < 1e-12;
  return {ok, fmt("ARI(a,a)=%.17g ARI([1,1,2,2],[1,2,1,2])=%.17g; 1000 pairs max diff %.2e", same, cross, worst)};
}

// 7. Seed stability with the published seed set.
Outcome stability_harness() {
  const std::vector<std::uint64_t> seeds(std::begin(kDefaultSeeds), std::end(kDefaultSeeds));
  const auto t0 = Clock::now();
  const auto separated = fixture::four_blobs(10.0, 0.5, 50, 31);
  KmeansOptions o;
  o.k = 4;
  const auto good = stability_analysis(separated.points, seeds, o);
  double min_ari = 1.0;
  for (std::size_t i = 0; i < good.ari.rows(); ++i)
    for (std::size_t j = 0; j < good.ari.cols(); ++j) min_ari = std::min(min_ari, good.ari(i, j));

  const auto overlapping = fixture::four_blobs(1.0, 1.0, 50, 32);
  KmeansOptions single = o;
  single.restarts = 1;
  const auto bad = stability_analysis(overlapping.points, seeds, single);
  const double elapsed = seconds_since(t0);
  const bool ok = min_ari == 1.0 && good.flagged_pairs.empty() && !bad.flagged_pairs.empty() && elapsed < 10.0;
  return {ok, fmt("separated: min ARI=%.3f flagged=%zu; overlapping: flagged=%zu of 10 pairs; %.3f s", min_ari,
                  good.flagged_pairs.size(), bad.flagged_pairs.size(), elapsed)};
}

// 8. Selection on the 41-variable fixture.
Outcome selection_pipeline() {
  const auto f = fixture::make_national();
  const auto out = run_selection(f.dataset, build_adjacency(f.geometry), {});
  const Dataset& d = out.dataset;
  double max_skew = 0.0;
  for (std::size_t j = 0; j < d.n_variables(); ++j) max_skew = std::max(max_skew, std::abs(compute_skewness(d.observed_column(j))));
  const Matrix r = pearson_correlation_matrix(d);
  double max_r = 0.0;
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = i + 1; j < r.cols(); ++j) max_r = std::max(max_r, std::abs(r(i, j)));
  const bool ok = f.dataset.n_variables() == 41 && d.n_variables() == 26 && max_skew < 2.0 && max_r < 0.90;
  return {ok, fmt("%zu -> %zu variables; max|g1|=%.3f max|r|=%.3f", f.dataset.n_variables(), d.n_variables(), max_skew,
                  max_r)};
}

// 9. Skewness oracle and affine invariance.
Outcome skewness_oracle() {
  Rng rng(9);
  double worst = 0.0, worst_affine = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 3 + rng.below(200);
    std::vector<double> x(n), y(n);
    const bool heavy = rng.below(2) == 1;
    for (auto& v : x) v = heavy ? std::exp(rng.normal()) : rng.normal();
    const double g = compute_skewness(x);
    worst = std::max(worst, std::abs(g - oracle::skewness(x)));
    const double a = (rng.below(2) ? 1.0 : -1.0) * (0.1 + 10.0 * rng.uniform());
    const double b = 20.0 * rng.uniform() - 10.0;
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b;
    worst_affine = std::max(worst_affine, std::abs(compute_skewness(y) - (a > 0 ? g : -g)));
  }
  const bool ok = worst < 1e-12 && worst_affine < 1e-12;
  return {ok, fmt("1000 vectors: max|g1-oracle|=%.2e max affine deviation=%.2e", worst, worst_affine)};
}

// 10. Cross-tab margins on the planted national fixture.
Outcome crosstab_reconciliation() {
  const auto f = fixture::make_national();
  std::vector<RegionRecord> regions;
  ClusterModel m;
  m.k = 4;
  for (std::size_t i = 0; i < f.dataset.n_regions(); ++i) {
    if (f.planted_cluster[i] == 0) continue;
    regions.push_back(f.dataset.regions()[i]);
    m.assignments.push_back(f.planted_cluster[i]);
  }
  const auto t = crosstab(m, regions, CrossTabAxis::remoteness);
  const bool ok = t.col_totals == std::vector<std::size_t>{123, 9, 88, 115} &&
                  t.row_totals == std::vector<std::size_t>{189, 76, 48, 12, 10} && t.grand_total == 335;
  std::ostringstream s;
  s << "columns";
  for (auto v : t.col_totals) s << ' ' << v;
  s << "; rows";
  for (auto v : t.row_totals) s << ' ' << v;
  s << "; total " << t.grand_total;
  return {ok, s.str()};
}

std::map<std::string, std::string> hash_directory(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) out[entry.path().filename().string()] = sha256_file(entry.path());
  return out;
}

// 11. Byte-identical run directories, across thread counts.
Outcome determinism() {
  const fs::path data = VULNIDX_FIXTURE_DIR;
  fixture::TempDir a("accept-a"), b("accept-b"), c("accept-c");
  const std::string inputs = " --values " + (data / "values.csv").string() + " --regions " +
                             (data / "regions.csv").string() + " --variables " + (data / "variables.csv").string() +
                             " --boundaries " + (data / "boundaries.geojson").string();
  auto run = [&](const fs::path& out, const std::string& extra) {
    const std::string cmd = std::string(VULNIDX_CLI) + " run" + inputs + " --output-dir " + out.string() + extra +
                            " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const bool ran = run(a.path(), " --threads 1") && run(b.path(), " --threads 1") && run(c.path(), " --threads 4");
  if (!ran) return {false, "a CLI run exited nonzero"};
  const auto ha = hash_directory(a.path()), hb = hash_directory(b.path()), hc = hash_directory(c.path());
  const bool ok = !ha.empty() && ha == hb && ha == hc;
  return {ok, fmt("%zu files; repeat identical=%s; 1 vs 4 threads identical=%s", ha.size(), ha == hb ? "yes" : "no",
                  ha == hc ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kaiser retention on published eigenvalues", kaiser_on_published},
      {"eigenvalue trace equals p", trace_witness},
      {"Jacobi vs characteristic polynomial", eigensolver_oracle},
      {"score variance/mean/reconstruction", score_contract},
      {"k-means global optimum and monotone traces", kmeans_oracle},
      {"adjusted Rand index", ari_correctness},
      {"seed stability harness", stability_harness},
      {"41 -> 26 variable selection", selection_pipeline},
      {"skewness oracle and affine invariance", skewness_oracle},
      {"cross-tab reconciliation", crosstab_reconciliation},
      {"byte-identical runs across thread counts", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed;
}
