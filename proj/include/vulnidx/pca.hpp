#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnidx/ingest.hpp"
#include "vulnidx/matrix.hpp"

namespace vulnidx {

struct Standardized {
  std::vector<std::string> variables;
  std::vector<double> means;
  std::vector<double> sds;  // divisor n - 1
  Matrix z;                 // n x p, columns mean 0 / sd 1
};

Standardized standardize(const Matrix& values, std::vector<std::string> variables);
Standardized standardize(const Dataset& d);

enum class RetentionStrategy { kaiser, first_only, cumulative };
std::string_view to_string(RetentionStrategy s) noexcept;
RetentionStrategy parse_retention(std::string_view text);

struct RetentionRule {
  RetentionStrategy strategy = RetentionStrategy::kaiser;
  double parameter = 1.0;  // eigenvalue cutoff (kaiser) or variance fraction (cumulative)
};

struct PcaModel {
  std::vector<std::string> variable_order;
  std::vector<double> means;
  std::vector<double> sds;
  Matrix loadings;  // p x p, column j = component j
  std::vector<double> eigenvalues;
  std::vector<double> variance_fraction;  // eigenvalue / p
  std::size_t retained = 0;
  RetentionRule rule;
  int sweeps = 0;

  std::size_t n_variables() const noexcept { return variable_order.size(); }
};

/// Correlation-matrix PCA on standardized data: R = ZᵀZ / (n - 1),
/// eigendecomposed by cyclic Jacobi. Eigenvalues in [-1e-10, 0) are clamped
/// to 0. `retained` is left at 0 until retain_components is applied.
PcaModel fit_pca(const Standardized& z, int max_sweeps = 100);

/// Number of leading components a rule keeps. Variance fractions are
/// eigenvalue / eigenvalues.size(). Throws Error(precondition) when the rule
/// keeps nothing.
std::size_t retained_count(std::span<const double> eigenvalues, const RetentionRule& rule);

PcaModel retain_components(PcaModel m, const RetentionRule& rule = {});

struct IndexScores {
  std::vector<std::string> region_ids;
  std::vector<std::string> index_names;  // VI1..VIk
  Matrix scores;                         // n x k

  std::size_t size() const noexcept { return region_ids.size(); }
  std::size_t dims() const noexcept { return index_names.size(); }
};

/// Z · W restricted to the retained columns.
IndexScores score(const PcaModel& m, const Matrix& z, std::vector<std::string> region_ids);

/// Standardizes `d` with the model's means/sds (matching columns by name) and scores it.
IndexScores score(const PcaModel& m, const Dataset& d);

std::string index_name(std::size_t component);  // 0 -> "VI1"

struct Loading {
  std::string short_form;
  double weight = 0.0;
  int sign = 0;  // +1 / -1
};

/// Per retained component: variables with |weight| >= threshold, largest |weight| first.
std::vector<std::vector<Loading>> substantive_loadings(const PcaModel& m, double threshold = 0.20);

enum class SkewBand { low, medium, high };
std::string_view to_string(SkewBand b) noexcept;

struct IndexSkewness {
  std::string index;
  double skewness = 0.0;
  SkewBand band = SkewBand::low;
  bool acceptable = true;
};

/// |g1| <= 1 low, <= 2 medium, otherwise high; acceptable iff |g1| < 2.
IndexSkewness classify_skewness(std::string index, double g1);
std::vector<IndexSkewness> index_skewness_report(const IndexScores& s);

}  // namespace vulnidx
