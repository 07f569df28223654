#include "vulnidx/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vulnidx/error.hpp"
#include "vulnidx/kernels.hpp"

namespace vulnidx {

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::kept: return "kept";
    case Decision::kept_logged: return "kept_logged";
    case Decision::removed_skew: return "removed_skew";
    case Decision::removed_corr: return "removed_corr";
    case Decision::removed_manual: return "removed_manual";
  }
  return "?";
}

const VariableDecision* SelectionReport::find(std::string_view short_form) const {
  for (const auto& v : variables)
    if (v.short_form == short_form) return &v;
  return nullptr;
}

double compute_skewness(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw Error(Errc::precondition, "skewness needs at least 3 values");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }))
    throw Error(Errc::degenerate, "skewness undefined for a constant vector");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  if (m2 == 0.0) throw Error(Errc::degenerate, "skewness undefined for zero variance");
  return m3 / std::pow(m2, 1.5);
}

std::vector<double> log_transform(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0) throw Error(Errc::precondition, "log1p transform requires non-negative values");
    out[i] = std::log1p(x[i]);
  }
  return out;
}

SkewScreenResult screen_skewness(const Dataset& d, double threshold) {
  if (!(threshold > 0)) throw Error(Errc::precondition, "skew threshold must be positive");
  d.complete_values();  // no missing cells

  SkewScreenResult result;
  std::vector<std::size_t> keep;
  std::vector<std::optional<std::vector<double>>> replaced(d.n_variables());
  for (std::size_t j = 0; j < d.n_variables(); ++j) {
    const auto& meta = d.variables()[j];
    const std::vector<double> col = d.observed_column(j);
    VariableDecision dec;
    dec.short_form = meta.short_form;
    try {
      dec.raw_skewness = compute_skewness(col);
    } catch (const Error& e) {
      throw Error(e.code(), "variable '" + meta.short_form + "': " + e.what());
    }
    if (std::abs(*dec.raw_skewness) < threshold) {
      dec.decision = Decision::kept;
      keep.push_back(j);
    } else if (std::any_of(col.begin(), col.end(), [](double v) { return v < 0; })) {
      dec.decision = Decision::removed_skew;
      dec.note = "negative values; log1p not applicable";
    } else {
      auto logged = log_transform(col);
      dec.transformed_skewness = compute_skewness(logged);
      if (std::abs(*dec.transformed_skewness) < threshold) {
        dec.decision = Decision::kept_logged;
        replaced[j] = std::move(logged);
        keep.push_back(j);
      } else {
        dec.decision = Decision::removed_skew;
      }
    }
    result.decisions.push_back(std::move(dec));
  }

  result.dataset = d.select_columns(keep);
  for (std::size_t c = 0; c < keep.size(); ++c) {
    if (!replaced[keep[c]]) continue;
    const auto& logged = *replaced[keep[c]];
    for (std::size_t i = 0; i < logged.size(); ++i) result.dataset.set(i, c, logged[i]);
    result.dataset.variables()[c].transform_applied = Transform::log1p;
  }
  return result;
}

Matrix pearson_correlation_matrix(const Matrix& values) {
  const std::size_t n = values.rows(), p = values.cols();
  if (n < 2) throw Error(Errc::degenerate, "correlation needs at least 2 rows");
  Matrix centered = values;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += values(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, j) -= mean;
  }
  Matrix r = kernels::cross_product(centered);
  std::vector<double> scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (!(r(j, j) > 0))
      throw Error(Errc::degenerate, "zero-variance column " + std::to_string(j));
    scale[j] = std::sqrt(r(j, j));
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      r(i, j) = i == j ? 1.0 : std::clamp(r(i, j) / (scale[i] * scale[j]), -1.0, 1.0);
  return r;
}

Matrix pearson_correlation_matrix(const Dataset& d) {
  try {
    return pearson_correlation_matrix(d.complete_values());
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate) throw;
    // Name the offending variable.
    for (std::size_t j = 0; j < d.n_variables(); ++j) {
      const auto col = d.observed_column(j);
      if (std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; }))
        throw Error(Errc::degenerate, "zero-variance variable '" + d.variables()[j].short_form + "'");
    }
    throw;
  }
}

PruneResult prune_correlated(const Dataset& d, double threshold) {
  if (!(threshold > 0)) throw Error(Errc::precondition, "correlation threshold must be positive");
  const Matrix r = pearson_correlation_matrix(d);
  const auto& vars = d.variables();
  std::vector<std::size_t> alive(d.n_variables());
  std::iota(alive.begin(), alive.end(), std::size_t{0});

  PruneResult result;
  // Correlations between surviving variables do not change when others are
  // dropped, so the sub-matrix of `r` is the recomputed matrix.
  for (;;) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    double best_abs = 0.0;
    auto ordered = [&](std::size_t a, std::size_t b) {
      return vars[a].short_form < vars[b].short_form ? std::pair{a, b} : std::pair{b, a};
    };
    for (std::size_t x = 0; x < alive.size(); ++x)
      for (std::size_t y = x + 1; y < alive.size(); ++y) {
        const double v = std::abs(r(alive[x], alive[y]));
        if (v < threshold) continue;
        const auto pair = ordered(alive[x], alive[y]);
        if (!best || v > best_abs ||
            (v == best_abs &&
             std::tie(vars[pair.first].short_form, vars[pair.second].short_form) <
                 std::tie(vars[best->first].short_form, vars[best->second].short_form))) {
          best = pair;
          best_abs = v;
        }
      }
    if (!best) break;

    auto mean_abs = [&](std::size_t v) {
      double s = 0.0;
      for (auto u : alive)
        if (u != v) s += std::abs(r(v, u));
      return s / static_cast<double>(alive.size() - 1);
    };
    const auto [a, b] = *best;  // a has the smaller short_form
    const double ma = mean_abs(a), mb = mean_abs(b);
    const std::size_t drop = ma > mb ? a : b;
    const std::size_t partner = drop == a ? b : a;
    result.removals.push_back({vars[drop].short_form, vars[partner].short_form, r(a, b),
                               drop == a ? ma : mb});
    alive.erase(std::find(alive.begin(), alive.end(), drop));
  }
  result.dataset = d.select_columns(alive);
  return result;
}

SelectionOutcome run_selection(const Dataset& d, const AdjacencyGraph& g, const SelectionConfig& config) {
  SelectionOutcome out;
  out.report.skew_threshold = config.skew_threshold;
  out.report.corr_threshold = config.corr_threshold;

  auto omitted = omit_unpopulated_regions(d, config.erp_variable);
  out.omissions = std::move(omitted.log);
  out.steps.push_back("omit");
  out.validation = validate_dataset(omitted.dataset, config.screening_fraction);
  out.steps.push_back("validate");

  std::vector<std::size_t> keep;
  std::vector<VariableDecision> manual;
  for (const auto& name : config.manual_removals)
    if (!omitted.dataset.variable_index(name))
      throw Error(Errc::unknown_key, "manual removal names unknown variable '" + name + "'");
  for (std::size_t j = 0; j < omitted.dataset.n_variables(); ++j) {
    const auto& name = omitted.dataset.variables()[j].short_form;
    if (std::find(config.manual_removals.begin(), config.manual_removals.end(), name) !=
        config.manual_removals.end()) {
      VariableDecision dec;
      dec.short_form = name;
      dec.decision = Decision::removed_manual;
      manual.push_back(std::move(dec));
    } else {
      keep.push_back(j);
    }
  }
  Dataset working = omitted.dataset.select_columns(keep);
  out.steps.push_back("manual_removal");

  auto imputed = impute_neighbor_mean(working, g);
  out.imputations = std::move(imputed.log);
  out.steps.push_back("impute");

  auto screened = screen_skewness(imputed.dataset, config.skew_threshold);
  out.steps.push_back("screen_skewness");

  const Matrix r = pearson_correlation_matrix(screened.dataset);
  const auto& svars = screened.dataset.variables();
  for (std::size_t a = 0; a < svars.size(); ++a)
    for (std::size_t b = a + 1; b < svars.size(); ++b)
      if (std::abs(r(a, b)) >= config.corr_threshold)
        out.report.correlation_pairs.push_back({svars[a].short_form, svars[b].short_form, r(a, b)});

  auto pruned = prune_correlated(screened.dataset, config.corr_threshold);
  out.report.removals = pruned.removals;
  out.steps.push_back("prune_correlated");

  for (auto& dec : screened.decisions)
    for (const auto& rem : pruned.removals)
      if (rem.removed == dec.short_form) dec.decision = Decision::removed_corr;

  // One decision per input variable, in input order.
  for (const auto& meta : omitted.dataset.variables()) {
    auto pick = [&](std::vector<VariableDecision>& from) -> VariableDecision* {
      for (auto& v : from)
        if (v.short_form == meta.short_form) return &v;
      return nullptr;
    };
    VariableDecision* dec = pick(manual);
    if (!dec) dec = pick(screened.decisions);
    out.report.variables.push_back(*dec);
  }
  for (const auto& v : pruned.dataset.variables()) out.report.final_variables.push_back(v.short_form);
  out.dataset = std::move(pruned.dataset);
  return out;
}

}  // namespace vulnidx
