// vulnidx: command-line front end for the vulnerability-index pipeline.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vulnidx/kernels.hpp"
#include "vulnidx/pipeline.hpp"

namespace {

using vulnidx::RunConfig;

struct Flags {
  std::string config_file;
  std::string values, regions, variables, boundaries, adjacency, output_dir;
  double snap_tolerance = 0;
  std::string erp_variable;
  double screening_fraction = 0, skew_threshold = 0, corr_threshold = 0, retention_parameter = 0,
         loading_threshold = 0, tol = 0;
  std::vector<std::string> manual_removals;
  std::string retention, init;
  int k = 0, k_max = 0, restarts = 0, max_iter = 0, threads = 0;
  std::vector<std::uint64_t> seeds;
  bool timestamps = false;

  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

  template <class T>
  void add(CLI::App* app, const std::string& name, T& target, const std::string& help,
           std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_option(name, target, help), std::move(apply));
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
    add(app, "--values", values, "values.csv (region_id,<variables...>)", [this](RunConfig& c) { c.values = values; });
    add(app, "--regions", regions, "regions.csv (region_id,name,state,remoteness,is_spatial)",
        [this](RunConfig& c) { c.regions = regions; });
    add(app, "--variables", variables, "variables.csv (short_form,long_name)",
        [this](RunConfig& c) { c.variables = variables; });
    add(app, "--boundaries", boundaries, "GeoJSON boundaries (contiguity and atlas output)",
        [this](RunConfig& c) { c.boundaries = boundaries; });
    add(app, "--adjacency", adjacency, "adjacency list CSV (region_id,neighbor_id)",
        [this](RunConfig& c) { c.adjacency = adjacency; });
    add(app, "--snap-tolerance", snap_tolerance, "boundary contact tolerance (default 0, exact)",
        [this](RunConfig& c) { c.snap_tolerance = snap_tolerance; });
    add(app, "--erp-variable", erp_variable, "population variable used for region omission (default ERP)",
        [this](RunConfig& c) { c.erp_variable = erp_variable; });
    add(app, "--screening-fraction", screening_fraction, "missing+zero fraction that flags a variable (default 0.10)",
        [this](RunConfig& c) { c.screening_fraction = screening_fraction; });
    add(app, "--remove", manual_removals, "variables to remove explicitly",
        [this](RunConfig& c) { c.manual_removals = manual_removals; });
    add(app, "--skew-threshold", skew_threshold, "|skewness| cutoff (default 2)",
        [this](RunConfig& c) { c.skew_threshold = skew_threshold; });
    add(app, "--corr-threshold", corr_threshold, "|r| pruning cutoff (default 0.90)",
        [this](RunConfig& c) { c.corr_threshold = corr_threshold; });
    add(app, "--retention", retention, "kaiser | first | cumulative (default kaiser)",
        [this](RunConfig& c) { c.retention.strategy = vulnidx::parse_retention(retention); });
    add(app, "--retention-param", retention_parameter, "eigenvalue cutoff or variance fraction (default 1.0)",
        [this](RunConfig& c) { c.retention.parameter = retention_parameter; });
    add(app, "--loading-threshold", loading_threshold, "|weight| for substantive variables (default 0.20)",
        [this](RunConfig& c) { c.loading_threshold = loading_threshold; });
    add(app, "--k", k, "number of clusters (elbow suggestion when omitted)", [this](RunConfig& c) { c.k = k; });
    add(app, "--k-max", k_max, "largest k in the elbow scan (default 10)", [this](RunConfig& c) { c.k_max = k_max; });
    add(app, "--seeds", seeds, "k-means seeds; the first drives clustering (default 123 1767 7462 944 3401)",
        [this](RunConfig& c) { c.seeds = seeds; });
    add(app, "--init", init, "forgy | kmeanspp (default forgy)",
        [this](RunConfig& c) { c.init = vulnidx::parse_init(init); });
    add(app, "--restarts", restarts, "k-means restarts per fit (default 25)",
        [this](RunConfig& c) { c.restarts = restarts; });
    add(app, "--max-iter", max_iter, "Lloyd iteration cap (default 200)", [this](RunConfig& c) { c.max_iter = max_iter; });
    add(app, "--tol", tol, "centroid movement tolerance (default 1e-9)", [this](RunConfig& c) { c.tol = tol; });
    add(app, "--output-dir,-o", output_dir, "output directory (required)",
        [this](RunConfig& c) { c.output_dir = output_dir; });
    setters.emplace_back(app->add_flag("--timestamps", timestamps, "record wall-clock times in the manifest"),
                         [this](RunConfig& c) { c.record_timestamps = timestamps; });
    app->add_option("--threads", threads, "OpenMP thread count (outputs do not depend on it)");
  }

  RunConfig build() const {
    RunConfig c;
    if (!config_file.empty()) c = vulnidx::config_from_json(vulnidx::io::read_json(config_file), c);
    for (const auto& [opt, apply] : setters)
      if (opt->count() > 0) apply(c);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vulnerability index construction: variable selection, PCA, k-means and stability analysis"};
  app.require_subcommand(1);
  Flags flags;

  struct Command {
    std::string name;
    std::string help;
    std::optional<vulnidx::Step> step;  // nullopt: full run
  };
  const std::vector<Command> commands = {
      {"run", "run every stage end to end", std::nullopt},
      {"ingest", "load inputs, omit unpopulated regions, validate", vulnidx::Step::ingest},
      {"select", "impute, screen skewness, prune correlated variables", vulnidx::Step::select},
      {"pca", "fit correlation PCA, retain components, score regions", vulnidx::Step::pca},
      {"elbow", "WCSS scan over k = 1..k_max", vulnidx::Step::elbow},
      {"cluster", "k-means on the index scores", vulnidx::Step::cluster},
      {"stability", "pairwise ARI across seeds", vulnidx::Step::stability},
      {"profile", "centroid table, cross-tabs, characterization, atlas", vulnidx::Step::profile},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    subs.emplace_back(sub, &cmd);
  }
  // Every subcommand shares one set of flags; only one subcommand is parsed.
  std::vector<Flags> per_command(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) per_command[i].attach(subs[i].first);

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].first->parsed()) continue;
    const Flags& f = per_command[i];
    const Command& cmd = *subs[i].second;
    try {
      if (f.threads > 0) vulnidx::kernels::set_threads(f.threads);
      RunConfig config = f.build();
      if (config.output_dir.empty()) {
        std::cerr << "error: --output-dir is required\n";
        return 2;
      }
      if (!cmd.step) {
        const auto records = vulnidx::run_pipeline(config);
        std::cout << "run complete: " << records.size() << " steps, outputs in " << config.output_dir.string() << '\n';
      } else {
        const auto record = vulnidx::run_step(*cmd.step, config);
        vulnidx::update_manifest(config, {record}, false);
        std::cout << cmd.name << " complete: " << record.outputs.size() << " files written";
        if (record.suggested_k) std::cout << ", suggested k = " << *record.suggested_k;
        std::cout << '\n';
      }
      return 0;
    } catch (const vulnidx::Error& e) {
      std::cerr << "error (" << vulnidx::to_string(e.code()) << "): " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}
