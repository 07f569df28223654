#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnidx/matrix.hpp"

namespace vulnidx {

/// The nine state/territory codes, in reporting order.
inline constexpr std::array<std::string_view, 9> kStateCodes = {
    "NSW", "QLD", "VIC", "WA", "SA", "TAS", "ACT", "NT", "OTHER"};

/// Remoteness domains 1..5, in reporting order.
inline constexpr std::array<std::string_view, 5> kRemotenessNames = {
    "Major Cities", "Inner Regional", "Outer Regional", "Remote", "Very Remote"};

struct RegionRecord {
  std::string region_id;
  std::string name;
  std::string state;              // one of kStateCodes, or empty when unknown
  std::optional<int> remoteness;  // 1..5
  bool is_spatial = true;

  friend bool operator==(const RegionRecord&, const RegionRecord&) = default;
};

enum class Transform { none, log1p };

std::string_view to_string(Transform t) noexcept;
Transform parse_transform(std::string_view text);

struct VariableMeta {
  std::string short_form;
  std::string long_name;
  Transform transform_applied = Transform::none;

  friend bool operator==(const VariableMeta&, const VariableMeta&) = default;
};

/// Region x variable table. Cell (i, j) is missing iff `missing(i, j)`;
/// the stored value of a missing cell is 0 and carries no meaning.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<RegionRecord> regions, std::vector<VariableMeta> variables);

  std::size_t n_regions() const noexcept { return regions_.size(); }
  std::size_t n_variables() const noexcept { return variables_.size(); }

  const std::vector<RegionRecord>& regions() const noexcept { return regions_; }
  const std::vector<VariableMeta>& variables() const noexcept { return variables_; }
  std::vector<VariableMeta>& variables() noexcept { return variables_; }

  bool missing(std::size_t i, std::size_t j) const noexcept { return missing_[i * n_variables() + j] != 0; }
  double value(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  std::optional<double> cell(std::size_t i, std::size_t j) const {
    if (missing(i, j)) return std::nullopt;
    return values_(i, j);
  }

  /// Stores a finite value (throws on NaN/inf) and clears the missing flag.
  void set(std::size_t i, std::size_t j, double v);
  void set_missing(std::size_t i, std::size_t j) noexcept;

  std::size_t missing_count() const noexcept;
  std::optional<std::size_t> variable_index(std::string_view short_form) const;
  std::optional<std::size_t> region_index(std::string_view region_id) const;

  /// Observed values of one column (missing cells skipped).
  std::vector<double> observed_column(std::size_t j) const;

  /// Dense value matrix; throws Error(precondition) if any cell is missing.
  const Matrix& complete_values() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset select_columns(std::span<const std::size_t> cols) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<RegionRecord> regions_;
  std::vector<VariableMeta> variables_;
  Matrix values_;
  std::vector<unsigned char> missing_;
};

struct DatasetPaths {
  std::filesystem::path values;     // region_id,<short_form...>
  std::filesystem::path regions;    // region_id,name,state,remoteness,is_spatial
  std::filesystem::path variables;  // short_form,long_name[,transform]
};

Dataset load_dataset(const DatasetPaths& paths);

/// Writes the three CSV files; numbers use the shortest round-trip form,
/// missing cells are written as empty fields.
void write_dataset(const Dataset& d, const DatasetPaths& paths);

enum class OmissionReason { zero_erp, na_erp, non_spatial };
std::string_view to_string(OmissionReason r) noexcept;

struct OmissionEntry {
  std::string region_id;
  OmissionReason reason;
  friend bool operator==(const OmissionEntry&, const OmissionEntry&) = default;
};

struct OmissionLog {
  std::vector<OmissionEntry> removed;
};

struct OmissionResult {
  Dataset dataset;
  OmissionLog log;
};

/// Drops non-spatial regions and regions whose ERP is zero or missing.
/// A non-spatial region is logged as non_spatial even when its ERP is also
/// missing or zero.
OmissionResult omit_unpopulated_regions(const Dataset& d, std::string_view erp_variable);

struct VariableValidation {
  std::string short_form;
  std::size_t missing = 0;
  std::size_t zeros = 0;
  double missing_zero_fraction = 0.0;
  bool flagged = false;
};

struct ValidationReport {
  double screening_fraction = 0.10;
  std::size_t n_regions = 0;
  std::vector<VariableValidation> variables;
  std::vector<std::string> flagged() const;
};

/// Flags a variable when (missing + zero) / n is strictly above
/// `screening_fraction`. Report-only; nothing is removed.
ValidationReport validate_dataset(const Dataset& d, double screening_fraction = 0.10);

}  // namespace vulnidx
