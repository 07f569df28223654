#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnidx/ingest.hpp"
#include "vulnidx/matrix.hpp"
#include "vulnidx/spatial.hpp"

namespace vulnidx {

/// Moment-coefficient skewness g1 = m3 / m2^(3/2), with m_k the k-th central
/// moment using divisor n. Requires n >= 3 and a non-constant vector.
double compute_skewness(std::span<const double> x);

/// Elementwise ln(1 + x). Throws Error(precondition) on negative input.
std::vector<double> log_transform(std::span<const double> x);

enum class Decision { kept, kept_logged, removed_skew, removed_corr, removed_manual };
std::string_view to_string(Decision d) noexcept;

struct VariableDecision {
  std::string short_form;
  std::optional<double> raw_skewness;        // absent for removed_manual
  std::optional<double> transformed_skewness;  // present when log1p was tried
  Decision decision = Decision::kept;
  std::string note;
};

struct CorrelationPair {
  std::string a;
  std::string b;
  double r = 0.0;
};

struct CorrelationRemoval {
  std::string removed;
  std::string partner;
  double r = 0.0;
  double mean_abs_correlation = 0.0;
};

struct SelectionReport {
  double skew_threshold = 2.0;
  double corr_threshold = 0.90;
  std::vector<VariableDecision> variables;         // input order
  std::vector<CorrelationPair> correlation_pairs;  // |r| >= threshold before pruning
  std::vector<CorrelationRemoval> removals;        // pruning order
  std::vector<std::string> final_variables;

  const VariableDecision* find(std::string_view short_form) const;
};

struct SkewScreenResult {
  Dataset dataset;                            // survivors, logged columns replaced
  std::vector<VariableDecision> decisions;    // one per input variable
};

/// Keeps |g1| < threshold as is; otherwise applies log1p and keeps the
/// column if the transformed |g1| < threshold, else removes it.
SkewScreenResult screen_skewness(const Dataset& d, double threshold = 2.0);

/// Pearson correlations of the columns of a complete dataset.
Matrix pearson_correlation_matrix(const Dataset& d);
Matrix pearson_correlation_matrix(const Matrix& values);

struct PruneResult {
  Dataset dataset;
  std::vector<CorrelationRemoval> removals;
};

/// Repeatedly takes the pair with the largest |r| >= threshold (ties: the
/// lexicographically smallest pair of short_forms) and drops the member with
/// the larger mean |r| to the other remaining variables (ties: the
/// lexicographically later short_form).
PruneResult prune_correlated(const Dataset& d, double threshold = 0.90);

struct SelectionConfig {
  std::string erp_variable = "ERP";
  double skew_threshold = 2.0;
  double corr_threshold = 0.90;
  double screening_fraction = 0.10;
  std::vector<std::string> manual_removals;
};

struct SelectionOutcome {
  Dataset dataset;
  SelectionReport report;
  OmissionLog omissions;
  ImputationLog imputations;
  ValidationReport validation;
  std::vector<std::string> steps;  // executed step names, in order
};

/// omit -> manual removals -> impute -> skewness screen -> correlation pruning.
SelectionOutcome run_selection(const Dataset& d, const AdjacencyGraph& g, const SelectionConfig& config);

}  // namespace vulnidx
