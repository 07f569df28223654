#include "vulnidx/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vulnidx/eigen.hpp"
#include "vulnidx/error.hpp"
#include "vulnidx/kernels.hpp"
#include "vulnidx/select.hpp"

namespace vulnidx {

Standardized standardize(const Matrix& values, std::vector<std::string> variables) {
  const std::size_t n = values.rows(), p = values.cols();
  if (variables.size() != p) throw Error(Errc::precondition, "variable names do not match columns");
  if (n < 2) throw Error(Errc::degenerate, "standardization needs at least 2 rows");
  Standardized out;
  out.variables = std::move(variables);
  out.means.resize(p);
  out.sds.resize(p);
  out.z = Matrix(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += values(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (values(i, j) - mean) * (values(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0))
      throw Error(Errc::degenerate, "zero-variance variable '" + out.variables[j] + "'");
    out.means[j] = mean;
    out.sds[j] = sd;
    for (std::size_t i = 0; i < n; ++i) out.z(i, j) = (values(i, j) - mean) / sd;
  }
  return out;
}

Standardized standardize(const Dataset& d) {
  std::vector<std::string> names;
  for (const auto& v : d.variables()) names.push_back(v.short_form);
  return standardize(d.complete_values(), std::move(names));
}

std::string_view to_string(RetentionStrategy s) noexcept {
  switch (s) {
    case RetentionStrategy::kaiser: return "kaiser";
    case RetentionStrategy::first_only: return "first";
    case RetentionStrategy::cumulative: return "cumulative";
  }
  return "?";
}

RetentionStrategy parse_retention(std::string_view text) {
  if (text == "kaiser") return RetentionStrategy::kaiser;
  if (text == "first" || text == "first_only") return RetentionStrategy::first_only;
  if (text == "cumulative") return RetentionStrategy::cumulative;
  throw Error(Errc::precondition, "unknown retention strategy '" + std::string(text) + "'");
}

PcaModel fit_pca(const Standardized& z, int max_sweeps) {
  const std::size_t n = z.z.rows(), p = z.z.cols();
  if (n < 2) throw Error(Errc::degenerate, "PCA needs at least 2 rows");
  if (p == 0) throw Error(Errc::degenerate, "PCA needs at least one variable");

  Matrix r = kernels::cross_product(z.z);
  for (double& v : r.data()) v /= static_cast<double>(n - 1);
  // Standardized columns have unit variance by construction; pin the diagonal
  // so rounding cannot push an exact eigenvalue of 1 below the Kaiser cutoff.
  for (std::size_t j = 0; j < p; ++j) r(j, j) = 1.0;

  auto eig = jacobi_eigen(r, max_sweeps);
  for (double& lambda : eig.values) {
    if (lambda < -1e-10)
      throw Error(Errc::degenerate, "correlation matrix has a negative eigenvalue " + std::to_string(lambda));
    if (lambda < 0) lambda = 0.0;
  }

  PcaModel m;
  m.variable_order = z.variables;
  m.means = z.means;
  m.sds = z.sds;
  m.loadings = std::move(eig.vectors);
  m.eigenvalues = std::move(eig.values);
  m.variance_fraction.resize(p);
  for (std::size_t j = 0; j < p; ++j) m.variance_fraction[j] = m.eigenvalues[j] / static_cast<double>(p);
  m.sweeps = eig.sweeps;
  return m;
}

std::size_t retained_count(std::span<const double> eigenvalues, const RetentionRule& rule) {
  const double p = static_cast<double>(eigenvalues.size());
  std::size_t k = 0;
  switch (rule.strategy) {
    case RetentionStrategy::kaiser:
      while (k < eigenvalues.size() && eigenvalues[k] >= rule.parameter) ++k;
      if (k == 0)
        throw Error(Errc::precondition, "no eigenvalue reaches the Kaiser threshold " +
                                            std::to_string(rule.parameter));
      return k;
    case RetentionStrategy::first_only:
      if (eigenvalues.empty()) throw Error(Errc::precondition, "no components to retain");
      return 1;
    case RetentionStrategy::cumulative: {
      if (!(rule.parameter > 0 && rule.parameter <= 1))
        throw Error(Errc::precondition, "cumulative variance threshold must be in (0, 1]");
      double cum = 0.0;
      while (k < eigenvalues.size()) {
        cum += eigenvalues[k++] / p;
        if (cum >= rule.parameter - 1e-12) return k;
      }
      throw Error(Errc::precondition, "cumulative variance never reaches the threshold");
    }
  }
  return k;
}

PcaModel retain_components(PcaModel m, const RetentionRule& rule) {
  m.retained = retained_count(m.eigenvalues, rule);
  m.rule = rule;
  return m;
}

std::string index_name(std::size_t component) { return "VI" + std::to_string(component + 1); }

IndexScores score(const PcaModel& m, const Matrix& z, std::vector<std::string> region_ids) {
  if (z.cols() != m.n_variables())
    throw Error(Errc::precondition, "score: standardized matrix has " + std::to_string(z.cols()) +
                                        " columns, model has " + std::to_string(m.n_variables()));
  if (region_ids.size() != z.rows()) throw Error(Errc::precondition, "score: region count mismatch");
  if (m.retained == 0 || m.retained > m.loadings.cols())
    throw Error(Errc::precondition, "score: model has no retained components");

  Matrix w(m.n_variables(), m.retained);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = m.loadings(r, c);

  IndexScores s;
  s.region_ids = std::move(region_ids);
  for (std::size_t c = 0; c < m.retained; ++c) s.index_names.push_back(index_name(c));
  s.scores = kernels::multiply(z, w);
  return s;
}

IndexScores score(const PcaModel& m, const Dataset& d) {
  const std::size_t n = d.n_regions(), p = m.n_variables();
  const Matrix& values = d.complete_values();
  Matrix z(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = d.variable_index(m.variable_order[j]);
    if (!col) throw Error(Errc::unknown_key, "dataset lacks model variable '" + m.variable_order[j] + "'");
    for (std::size_t i = 0; i < n; ++i) z(i, j) = (values(i, *col) - m.means[j]) / m.sds[j];
  }
  std::vector<std::string> ids;
  for (const auto& r : d.regions()) ids.push_back(r.region_id);
  return score(m, z, std::move(ids));
}

std::vector<std::vector<Loading>> substantive_loadings(const PcaModel& m, double threshold) {
  std::vector<std::vector<Loading>> out(m.retained);
  for (std::size_t c = 0; c < m.retained; ++c) {
    for (std::size_t r = 0; r < m.n_variables(); ++r) {
      const double w = m.loadings(r, c);
      if (std::abs(w) >= threshold) out[c].push_back({m.variable_order[r], w, w > 0 ? 1 : -1});
    }
    std::stable_sort(out[c].begin(), out[c].end(), [](const Loading& a, const Loading& b) {
      return std::abs(a.weight) > std::abs(b.weight);
    });
  }
  return out;
}

std::string_view to_string(SkewBand b) noexcept {
  switch (b) {
    case SkewBand::low: return "low";
    case SkewBand::medium: return "medium";
    case SkewBand::high: return "high";
  }
  return "?";
}

IndexSkewness classify_skewness(std::string index, double g1) {
  const double a = std::abs(g1);
  IndexSkewness out{std::move(index), g1, SkewBand::low, a < 2.0};
  if (a > 2.0)
    out.band = SkewBand::high;
  else if (a > 1.0)
    out.band = SkewBand::medium;
  return out;
}

std::vector<IndexSkewness> index_skewness_report(const IndexScores& s) {
  std::vector<IndexSkewness> out;
  for (std::size_t c = 0; c < s.dims(); ++c)
    out.push_back(classify_skewness(s.index_names[c], compute_skewness(s.scores.column(c))));
  return out;
}

}  // namespace vulnidx
