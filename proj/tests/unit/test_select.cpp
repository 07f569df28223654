#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "vulnidx/error.hpp"
#include "vulnidx/rng.hpp"
#include "vulnidx/select.hpp"

using namespace vulnidx;

namespace {

Errc error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected vulnidx::Error");
  return Errc::io;
}

Dataset columns_dataset(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols) {
  std::vector<RegionRecord> regions;
  for (std::size_t i = 0; i < cols.front().size(); ++i) regions.push_back({"R" + std::to_string(i), "", "NSW", 1, true});
  std::vector<VariableMeta> vars;
  for (const auto& n : names) vars.push_back({n, n, Transform::none});
  Dataset d(regions, vars);
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < cols[j].size(); ++i) d.set(i, j, cols[j][i]);
  return d;
}

std::vector<double> lognormal(std::size_t n, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = std::exp(2.0 + sigma * rng.normal());
  return x;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("skewness examples") {
  const std::vector<double> sym = {1, 2, 3};
  CHECK(compute_skewness(sym) == doctest::Approx(0.0));
  const std::vector<double> spike = {0, 0, 0, 1};
  CHECK(compute_skewness(spike) == doctest::Approx(1.1547).epsilon(1e-4));
  CHECK(compute_skewness(spike) == doctest::Approx(0.09375 / std::pow(0.1875, 1.5)).epsilon(1e-14));
  const std::vector<double> constant = {4, 4, 4, 4};
  CHECK(error_code([&] { compute_skewness(constant); }) == Errc::degenerate);
  const std::vector<double> two = {1, 2};
  CHECK(error_code([&] { compute_skewness(two); }) == Errc::precondition);
}

TEST_CASE("skewness: affine invariance and agreement with the oracle") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng.below(100);
    std::vector<double> x(n), y(n), z(n);
    for (auto& v : x) v = std::exp(rng.normal());
    const double a = 0.1 + 10 * rng.uniform(), b = 20 * rng.uniform() - 10;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = a * x[i] + b;
      z[i] = -a * x[i] + b;
    }
    const double g = compute_skewness(x);
    CHECK(std::abs(g - oracle::skewness(x)) < 1e-12);
    CHECK(std::abs(compute_skewness(y) - g) < 1e-12);
    CHECK(std::abs(compute_skewness(z) + g) < 1e-12);
  }
}

TEST_CASE("log1p transform") {
  const std::vector<double> zero = {0.0};
  CHECK(log_transform(zero)[0] == 0.0);
  const std::vector<double> e1 = {std::exp(1.0) - 1.0};
  CHECK(log_transform(e1)[0] == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> neg = {1.0, -0.5};
  CHECK(error_code([&] { log_transform(neg); }) == Errc::precondition);
}

TEST_CASE("skewness screen decisions") {
  const auto sym = normals(300, 1);
  const auto logn = lognormal(300, 1.0, 2);  // raw skew well above 2, log1p skew small
  std::vector<double> rare(300, 0.0);        // 2% events: skewed before and after log1p
  for (std::size_t i = 0; i < rare.size(); i += 50) rare[i] = 1e5;
  std::vector<double> sym_shift(sym);
  for (auto& v : sym_shift) v += 10;

  const Dataset d = columns_dataset({"SYM", "LOG", "RARE"}, {sym_shift, logn, rare});
  const auto r = screen_skewness(d, 2.0);

  REQUIRE(r.decisions.size() == 3);
  CHECK(r.decisions[0].decision == Decision::kept);
  CHECK(r.decisions[1].decision == Decision::kept_logged);
  CHECK(std::abs(*r.decisions[1].raw_skewness) >= 2.0);
  CHECK(std::abs(*r.decisions[1].transformed_skewness) < 2.0);
  CHECK(r.decisions[2].decision == Decision::removed_skew);
  CHECK(std::abs(*r.decisions[2].transformed_skewness) >= 2.0);

  REQUIRE(r.dataset.n_variables() == 2);
  CHECK(r.dataset.variables()[1].short_form == "LOG");
  CHECK(r.dataset.variables()[1].transform_applied == Transform::log1p);
  CHECK(r.dataset.value(5, 1) == std::log1p(logn[5]));
  for (std::size_t j = 0; j < r.dataset.n_variables(); ++j) {
    const auto col = r.dataset.observed_column(j);
    CHECK(std::abs(compute_skewness(col)) < 2.0);
  }
}

TEST_CASE("skewed column with negative values cannot be logged") {
  auto x = lognormal(200, 1.0, 5);
  x[0] = -1.0;
  const Dataset d = columns_dataset({"NEG"}, {x});
  const auto r = screen_skewness(d);
  CHECK(r.decisions[0].decision == Decision::removed_skew);
  CHECK_FALSE(r.decisions[0].note.empty());
}

TEST_CASE("Pearson correlation examples") {
  const std::vector<double> x = {1, 2, 4, 8, 3};
  std::vector<double> neg(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
  const Matrix r = pearson_correlation_matrix(columns_dataset({"X", "XX", "NX"}, {x, x, neg}));
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r(0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
  const Matrix o = pearson_correlation_matrix(columns_dataset({"A", "B"}, {{1, -1, 1, -1}, {1, 1, -1, -1}}));
  CHECK(o(0, 1) == 0.0);
  CHECK(error_code([] { pearson_correlation_matrix(columns_dataset({"A", "C"}, {{1, 2, 3}, {5, 5, 5}})); }) ==
        Errc::degenerate);
}

TEST_CASE("correlation pruning") {
  const auto a = normals(100, 11), b = normals(100, 12), c = normals(100, 13);
  SUBCASE("duplicate pair: exactly one removed, deterministically") {
    const Dataset d = columns_dataset({"A", "B", "A2"}, {a, b, a});
    const auto r1 = prune_correlated(d, 0.9);
    const auto r2 = prune_correlated(d, 0.9);
    REQUIRE(r1.removals.size() == 1);
    CHECK(r1.dataset.n_variables() == 2);
    CHECK(r1.removals[0].removed == r2.removals[0].removed);
    // Equal mean |r| for A and A2: the lexicographically later name goes.
    CHECK(r1.removals[0].removed == "A2");
    CHECK(r1.dataset.variables()[0].short_form == "A");
    CHECK(r1.dataset.variables()[1].short_form == "B");
  }
  SUBCASE("no pair above threshold leaves the data unchanged") {
    const Dataset d = columns_dataset({"A", "B", "C"}, {a, b, c});
    const auto r = prune_correlated(d, 0.9);
    CHECK(r.removals.empty());
    CHECK(r.dataset == d);
  }
  SUBCASE("three collinear columns keep one") {
    std::vector<double> a2(a), a3(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a2[i] = 2 * a[i] + 1;
      a3[i] = -3 * a[i];
    }
    const Dataset d = columns_dataset({"P", "Q", "R", "B"}, {a, a2, a3, b});
    const auto r = prune_correlated(d, 0.9);
    CHECK(r.removals.size() == 2);
    CHECK(r.dataset.n_variables() == 2);
    CHECK(r.dataset.variables()[1].short_form == "B");
  }
  SUBCASE("post-condition on the national fixture after skew screening") {
    const auto f = fixture::make_national(fixture::kNationalSeed, 0.0);
    const auto omitted = omit_unpopulated_regions(f.dataset, "ERP");
    const auto screened = screen_skewness(omitted.dataset);
    const auto r = prune_correlated(screened.dataset, 0.9);
    const Matrix corr = pearson_correlation_matrix(r.dataset);
    for (std::size_t i = 0; i < corr.rows(); ++i)
      for (std::size_t j = i + 1; j < corr.cols(); ++j) CHECK(std::abs(corr(i, j)) < 0.9);
    CHECK(r.removals.size() == f.duplicate_variables.size());
  }
}

TEST_CASE("run_selection") {
  const auto f = fixture::make_national();
  const auto graph = build_adjacency(f.geometry);

  SUBCASE("41 variables in, 26 out, report complete") {
    const auto out = run_selection(f.dataset, graph, {});
    CHECK(out.dataset.n_variables() == 26);
    CHECK(out.dataset.n_regions() == 335);
    CHECK(out.report.variables.size() == 41);
    CHECK(out.report.final_variables.size() == 26);
    std::size_t kept = 0, removed_skew = 0, removed_corr = 0;
    for (const auto& v : out.report.variables) {
      kept += v.decision == Decision::kept || v.decision == Decision::kept_logged;
      removed_skew += v.decision == Decision::removed_skew;
      removed_corr += v.decision == Decision::removed_corr;
    }
    CHECK(kept == 26);
    CHECK(removed_skew == f.spike_variables.size());
    CHECK(removed_corr == f.duplicate_variables.size());
    // Survivors keep their input order.
    std::size_t last = 0;
    for (const auto& name : out.report.final_variables) {
      const auto idx = *f.dataset.variable_index(name);
      CHECK(idx >= last);
      last = idx;
    }
    CHECK(out.steps.back() == "prune_correlated");
  }
  SUBCASE("manual removals") {
    SelectionConfig cfg;
    cfg.manual_removals = {"X05", "SPK1"};
    const auto out = run_selection(f.dataset, graph, cfg);
    CHECK(out.report.find("X05")->decision == Decision::removed_manual);
    CHECK(out.report.find("SPK1")->decision == Decision::removed_manual);
    CHECK_FALSE(out.dataset.variable_index("X05").has_value());
  }
  SUBCASE("unknown manual removal") {
    SelectionConfig cfg;
    cfg.manual_removals = {"NOPE"};
    CHECK(error_code([&] { run_selection(f.dataset, graph, cfg); }) == Errc::unknown_key);
  }
  SUBCASE("clean dataset is left unchanged") {
    const auto a = normals(50, 21), b = normals(50, 22);
    std::vector<double> erp(50);
    for (std::size_t i = 0; i < erp.size(); ++i) erp[i] = 1000.0 + static_cast<double>(i % 7);
    const Dataset d = columns_dataset({"ERP", "A", "B"}, {erp, a, b});
    AdjacencyGraph g;
    {
      std::vector<std::string> ids;
      for (const auto& r : d.regions()) ids.push_back(r.region_id);
      g = AdjacencyGraph(ids);
    }
    const auto out = run_selection(d, g, {});
    CHECK(out.dataset == d);
    for (const auto& v : out.report.variables) CHECK(v.decision == Decision::kept);
  }
}
