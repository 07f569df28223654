#include "vulnidx/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "vulnidx/csv.hpp"
#include "vulnidx/error.hpp"

namespace vulnidx {

std::string_view to_string(Transform t) noexcept {
  return t == Transform::log1p ? "log1p" : "none";
}

Transform parse_transform(std::string_view text) {
  if (text.empty() || text == "none") return Transform::none;
  if (text == "log1p") return Transform::log1p;
  throw Error(Errc::malformed_input, "unknown transform '" + std::string(text) + "'");
}

std::string_view to_string(OmissionReason r) noexcept {
  switch (r) {
    case OmissionReason::zero_erp: return "zero_erp";
    case OmissionReason::na_erp: return "na_erp";
    case OmissionReason::non_spatial: return "non_spatial";
  }
  return "?";
}

Dataset::Dataset(std::vector<RegionRecord> regions, std::vector<VariableMeta> variables)
    : regions_(std::move(regions)),
      variables_(std::move(variables)),
      values_(regions_.size(), variables_.size()),
      missing_(regions_.size() * variables_.size(), 1) {
  std::unordered_set<std::string> seen;
  for (const auto& r : regions_)
    if (!seen.insert(r.region_id).second)
      throw Error(Errc::duplicate_key, "duplicate region_id '" + r.region_id + "'");
  seen.clear();
  for (const auto& v : variables_)
    if (!seen.insert(v.short_form).second)
      throw Error(Errc::duplicate_key, "duplicate variable '" + v.short_form + "'");
}

void Dataset::set(std::size_t i, std::size_t j, double v) {
  if (!std::isfinite(v))
    throw Error(Errc::malformed_input, "non-finite value for region '" + regions_[i].region_id +
                                           "', variable '" + variables_[j].short_form + "'");
  values_(i, j) = v;
  missing_[i * n_variables() + j] = 0;
}

void Dataset::set_missing(std::size_t i, std::size_t j) noexcept {
  values_(i, j) = 0.0;
  missing_[i * n_variables() + j] = 1;
}

std::size_t Dataset::missing_count() const noexcept {
  return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1));
}

std::optional<std::size_t> Dataset::variable_index(std::string_view short_form) const {
  for (std::size_t j = 0; j < variables_.size(); ++j)
    if (variables_[j].short_form == short_form) return j;
  return std::nullopt;
}

std::optional<std::size_t> Dataset::region_index(std::string_view region_id) const {
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (regions_[i].region_id == region_id) return i;
  return std::nullopt;
}

std::vector<double> Dataset::observed_column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(n_regions());
  for (std::size_t i = 0; i < n_regions(); ++i)
    if (!missing(i, j)) out.push_back(values_(i, j));
  return out;
}

const Matrix& Dataset::complete_values() const {
  if (missing_count() != 0)
    throw Error(Errc::precondition,
                "dataset has " + std::to_string(missing_count()) + " missing cells");
  return values_;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<RegionRecord> regions;
  regions.reserve(rows.size());
  for (auto i : rows) regions.push_back(regions_.at(i));
  Dataset out(std::move(regions), variables_);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < n_variables(); ++j)
      if (!missing(rows[r], j)) out.set(r, j, values_(rows[r], j));
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  std::vector<VariableMeta> vars;
  vars.reserve(cols.size());
  for (auto j : cols) vars.push_back(variables_.at(j));
  Dataset out(regions_, std::move(vars));
  for (std::size_t i = 0; i < n_regions(); ++i)
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (!missing(i, cols[c])) out.set(i, c, values_(i, cols[c]));
  return out;
}

namespace {

std::size_t require_column(const csv::Table& t, std::string_view name, const std::string& src) {
  auto idx = t.find(name);
  if (!idx) throw Error(Errc::malformed_input, src + ": missing column '" + std::string(name) + "'");
  return *idx;
}

bool parse_bool(std::string_view s, const std::string& ctx) {
  if (s == "true" || s == "TRUE" || s == "True" || s == "1") return true;
  if (s == "false" || s == "FALSE" || s == "False" || s == "0") return false;
  throw Error(Errc::malformed_input, ctx + ": expected boolean, got '" + std::string(s) + "'");
}

RegionRecord parse_region(const std::vector<std::string>& row, const csv::Table& t,
                          const std::string& src) {
  RegionRecord r;
  r.region_id = row[require_column(t, "region_id", src)];
  const std::string ctx = src + " region '" + r.region_id + "'";
  r.name = row[require_column(t, "name", src)];
  r.state = row[require_column(t, "state", src)];
  if (!r.state.empty() &&
      std::find(kStateCodes.begin(), kStateCodes.end(), r.state) == kStateCodes.end())
    throw Error(Errc::malformed_input, ctx + ": unknown state code '" + r.state + "'");
  const std::string& rem = row[require_column(t, "remoteness", src)];
  if (!csv::is_missing_token(rem)) {
    auto v = csv::parse_cell(rem, ctx);
    if (!v || *v != std::floor(*v) || *v < 1 || *v > 5)
      throw Error(Errc::malformed_input, ctx + ": remoteness must be an integer in 1..5");
    r.remoteness = static_cast<int>(*v);
  }
  r.is_spatial = parse_bool(row[require_column(t, "is_spatial", src)], ctx);
  return r;
}

}  // namespace

Dataset load_dataset(const DatasetPaths& paths) {
  const csv::Table values = csv::read(paths.values);
  const csv::Table regions = csv::read(paths.regions);
  const csv::Table variables = csv::read(paths.variables);
  const std::string vsrc = paths.values.string();

  if (values.header.empty() || values.header[0] != "region_id")
    throw Error(Errc::malformed_input, vsrc + ": first column must be 'region_id'");

  // Variable metadata keyed by short_form.
  std::unordered_map<std::string, VariableMeta> meta;
  {
    const std::string src = paths.variables.string();
    const auto sf = require_column(variables, "short_form", src);
    const auto ln = require_column(variables, "long_name", src);
    const auto tr = variables.find("transform");
    for (const auto& row : variables.rows) {
      VariableMeta m{row[sf], row[ln], tr ? parse_transform(row[*tr]) : Transform::none};
      if (!meta.emplace(m.short_form, m).second)
        throw Error(Errc::duplicate_key, src + ": duplicate short_form '" + m.short_form + "'");
    }
  }
  std::vector<VariableMeta> vars;
  for (std::size_t c = 1; c < values.header.size(); ++c) {
    auto it = meta.find(values.header[c]);
    if (it == meta.end())
      throw Error(Errc::unknown_key, paths.variables.string() + ": no metadata for variable '" +
                                         values.header[c] + "'");
    vars.push_back(it->second);
  }
  if (meta.size() != vars.size()) {
    // Either a duplicated column in values.csv or metadata for an absent variable.
    std::unordered_set<std::string> seen;
    for (const auto& v : vars)
      if (!seen.insert(v.short_form).second)
        throw Error(Errc::duplicate_key, vsrc + ": duplicate column '" + v.short_form + "'");
    throw Error(Errc::unknown_key, paths.variables.string() +
                                       ": metadata lists variables absent from " + vsrc);
  }

  std::unordered_map<std::string, RegionRecord> region_meta;
  {
    const std::string src = paths.regions.string();
    for (const auto& row : regions.rows) {
      RegionRecord r = parse_region(row, regions, src);
      if (!region_meta.emplace(r.region_id, r).second)
        throw Error(Errc::duplicate_key, src + ": duplicate region_id '" + r.region_id + "'");
    }
  }

  std::vector<RegionRecord> recs;
  recs.reserve(values.rows.size());
  for (const auto& row : values.rows) {
    auto it = region_meta.find(row[0]);
    if (it == region_meta.end())
      throw Error(Errc::unknown_key,
                  paths.regions.string() + ": no metadata for region '" + row[0] + "'");
    recs.push_back(it->second);
  }
  if (region_meta.size() != recs.size()) {
    std::unordered_set<std::string> seen;
    for (const auto& r : recs)
      if (!seen.insert(r.region_id).second)
        throw Error(Errc::duplicate_key, vsrc + ": duplicate region_id '" + r.region_id + "'");
    throw Error(Errc::unknown_key, paths.regions.string() + ": lists regions absent from " + vsrc);
  }

  Dataset d(std::move(recs), std::move(vars));
  for (std::size_t i = 0; i < values.rows.size(); ++i) {
    const auto& row = values.rows[i];
    for (std::size_t j = 0; j < d.n_variables(); ++j) {
      auto v = csv::parse_cell(row[j + 1], vsrc + " region '" + row[0] + "', variable '" +
                                                d.variables()[j].short_form + "'");
      if (v) d.set(i, j, *v);
    }
  }
  return d;
}

void write_dataset(const Dataset& d, const DatasetPaths& paths) {
  csv::Table values;
  values.header.push_back("region_id");
  for (const auto& v : d.variables()) values.header.push_back(v.short_form);
  for (std::size_t i = 0; i < d.n_regions(); ++i) {
    std::vector<std::string> row{d.regions()[i].region_id};
    for (std::size_t j = 0; j < d.n_variables(); ++j)
      row.push_back(d.missing(i, j) ? std::string() : csv::format_double(d.value(i, j)));
    values.rows.push_back(std::move(row));
  }
  csv::write(paths.values, values);

  csv::Table regions;
  regions.header = {"region_id", "name", "state", "remoteness", "is_spatial"};
  for (const auto& r : d.regions())
    regions.rows.push_back({r.region_id, r.name, r.state,
                            r.remoteness ? std::to_string(*r.remoteness) : std::string(),
                            r.is_spatial ? "true" : "false"});
  csv::write(paths.regions, regions);

  csv::Table variables;
  variables.header = {"short_form", "long_name", "transform"};
  for (const auto& v : d.variables())
    variables.rows.push_back({v.short_form, v.long_name, std::string(to_string(v.transform_applied))});
  csv::write(paths.variables, variables);
}

OmissionResult omit_unpopulated_regions(const Dataset& d, std::string_view erp_variable) {
  const auto erp = d.variable_index(erp_variable);
  if (!erp)
    throw Error(Errc::unknown_key, "ERP variable '" + std::string(erp_variable) + "' not found");

  OmissionResult result;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.n_regions(); ++i) {
    const auto& region = d.regions()[i];
    std::optional<OmissionReason> reason;
    if (!region.is_spatial)
      reason = OmissionReason::non_spatial;
    else if (d.missing(i, *erp))
      reason = OmissionReason::na_erp;
    else if (d.value(i, *erp) == 0.0)
      reason = OmissionReason::zero_erp;

    if (reason)
      result.log.removed.push_back({region.region_id, *reason});
    else
      keep.push_back(i);
  }
  result.dataset = d.select_rows(keep);
  return result;
}

std::vector<std::string> ValidationReport::flagged() const {
  std::vector<std::string> out;
  for (const auto& v : variables)
    if (v.flagged) out.push_back(v.short_form);
  return out;
}

ValidationReport validate_dataset(const Dataset& d, double screening_fraction) {
  ValidationReport report;
  report.screening_fraction = screening_fraction;
  report.n_regions = d.n_regions();
  for (std::size_t j = 0; j < d.n_variables(); ++j) {
    VariableValidation v;
    v.short_form = d.variables()[j].short_form;
    for (std::size_t i = 0; i < d.n_regions(); ++i) {
      if (d.missing(i, j))
        ++v.missing;
      else if (d.value(i, j) == 0.0)
        ++v.zeros;
    }
    v.missing_zero_fraction =
        d.n_regions() ? static_cast<double>(v.missing + v.zeros) / static_cast<double>(d.n_regions())
                      : 0.0;
    v.flagged = v.missing_zero_fraction > screening_fraction;
    report.variables.push_back(std::move(v));
  }
  return report;
}

}  // namespace vulnidx
