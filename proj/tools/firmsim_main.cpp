#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "firm/registry.hpp"
#include "firm/scenario.hpp"
#include "firm/sim.hpp"
#include "firm/topology.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw firm::ValidationError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw firm::ValidationError("cannot write '" + path.string() + "'");
  out << content;
}

struct CommonOptions {
  std::string registry_path;
  std::string scenario_path;
  std::string mode;
  int k = 0;
  long long requests = -1;
  long long seed = -1;
  double frequency = 0.0;
  double threshold = -1.0;
  std::string out_dir;
  std::string format = "summary";
};

void add_run_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--registry", opts.registry_path, "registry file")->required();
  cmd->add_option("--scenario", opts.scenario_path, "scenario file")->required();
  cmd->add_option("--mode", opts.mode, "override: base, affinity, or firm");
  cmd->add_option("--k", opts.k, "override: fat-tree arity");
  cmd->add_option("--requests", opts.requests, "override: request count");
  cmd->add_option("--seed", opts.seed, "override: random seed");
  cmd->add_option("--frequency", opts.frequency, "override: promoter period");
  cmd->add_option("--threshold", opts.threshold, "override: health threshold");
  cmd->add_option("--out", opts.out_dir, "directory for result files");
  cmd->add_option("--format", opts.format, "stdout format: csv or summary")
      ->check(CLI::IsMember({"csv", "summary"}));
}

firm::Scenario load_scenario(const CommonOptions& opts) {
  firm::Scenario scenario = firm::parse_scenario(read_file(opts.scenario_path));
  if (!opts.mode.empty()) scenario.mode = firm::parse_mode(opts.mode);
  if (opts.k > 0) scenario.k = opts.k;
  if (opts.requests >= 0) scenario.requests = opts.requests;
  if (opts.seed >= 0) scenario.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.frequency > 0) scenario.frequency = opts.frequency;
  if (opts.threshold >= 0) scenario.threshold = opts.threshold;
  scenario.validate();
  return scenario;
}

int run_command(const CommonOptions& opts) {
  const firm::Registry registry = firm::parse_registry(read_file(opts.registry_path));
  const firm::Scenario scenario = load_scenario(opts);
  const firm::RunResult result = firm::run(scenario, registry);
  if (opts.format == "csv") {
    std::cout << firm::metrics_csv(result.metrics);
  } else {
    std::cout << firm::summary_text(scenario, result);
  }
  if (!opts.out_dir.empty()) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "events.csv", result.log.to_csv());
    write_file(dir / "metrics.csv", firm::metrics_csv(result.metrics));
    write_file(dir / "trace.csv", firm::trace_csv(result.metrics));
    write_file(dir / "summary.txt", firm::summary_text(scenario, result));
    write_file(dir / "topology.csv", firm::Topology::fat_tree(scenario.k).export_csv());
  }
  return 0;
}

int compare_command(const CommonOptions& opts, std::vector<long long>& counts) {
  const firm::Registry registry = firm::parse_registry(read_file(opts.registry_path));
  firm::Scenario scenario = load_scenario(opts);
  if (counts.empty()) counts = {50, 200, 800};
  const std::vector<firm::CompareRow> rows = firm::compare_modes(scenario, registry, counts);
  if (opts.format == "csv") {
    std::cout << firm::compare_csv(rows);
  } else {
    std::printf("%10s %10s %18s %14s %16s %10s %9s\n", "requests", "mode", "mean_completion",
                "deviation_pct", "inter_rack_hops", "completed", "failures");
    for (const auto& row : rows)
      std::printf("%10lld %10s %18.6f %14.6f %16lld %10lld %9lld\n", row.requests,
                  firm::to_string(row.mode), row.mean_completion, row.deviation_pct,
                  row.inter_rack_hops, row.completed, row.failures);
  }
  if (!opts.out_dir.empty()) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "compare.csv", firm::compare_csv(rows));
  }
  return 0;
}

int validate_registry_command(const std::string& registry_path, const std::string& out_dir) {
  const firm::Registry registry = firm::parse_registry(read_file(registry_path));
  registry.validate();
  int deployments = 0;
  for (const auto& entry : registry.services()) deployments += entry.total_deployments();
  std::cout << "registry OK: " << registry.top_level_count() << " entries, "
            << registry.services().size() << " services, " << registry.compositions().size()
            << " compositions, " << deployments << " deployments\n";
  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "canonical.conf", registry.serialize());
    write_file(dir / "catalog.csv", registry.catalog_csv());
  }
  return 0;
}

int bound_command(const std::string& registry_path, const std::string& composition) {
  const firm::Registry registry = firm::parse_registry(read_file(registry_path));
  registry.validate();
  std::cout << firm::alternative_path_bound(registry, composition) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service composition simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario");
  add_run_options(run_cmd, run_opts);

  CommonOptions compare_opts;
  std::vector<long long> compare_counts;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "sweep request counts across all modes");
  add_run_options(compare_cmd, compare_opts);
  compare_cmd->add_option("--counts", compare_counts, "request counts to sweep");

  std::string vr_registry, vr_out;
  CLI::App* vr_cmd = app.add_subcommand("validate-registry", "parse and check a registry");
  vr_cmd->add_option("--registry", vr_registry, "registry file")->required();
  vr_cmd->add_option("--out", vr_out, "directory for canonical form and catalog");

  std::string bound_registry, bound_composition;
  CLI::App* bound_cmd =
      app.add_subcommand("bound", "alternative-path bound of a composition");
  bound_cmd->add_option("--registry", bound_registry, "registry file")->required();
  bound_cmd->add_option("composition", bound_composition, "composition name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run_cmd->parsed()) return run_command(run_opts);
    if (compare_cmd->parsed()) return compare_command(compare_opts, compare_counts);
    if (vr_cmd->parsed()) return validate_registry_command(vr_registry, vr_out);
    if (bound_cmd->parsed()) return bound_command(bound_registry, bound_composition);
  } catch (const firm::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const firm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
