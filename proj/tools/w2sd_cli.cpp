// Command-line front end: run, list-presets, validate.
#include "w2sd/experiment_config.hpp"
#include "w2sd/experiment_runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void print_diagnostics(const w2sd::ConfigError& e) {
  std::cerr << "config error:\n";
  for (const auto& d : e.diagnostics()) {
    std::cerr << "  " << (d.path.empty() ? "<root>" : d.path) << ": " << d.message << "\n";
  }
}

void print_summary(const w2sd::ExperimentResult& result) {
  std::cout << "config_hash " << result.config_hash << "\n";
  std::cout << std::left << std::setw(32) << "arm" << std::setw(28) << "mode_fractions" << std::setw(14) << "distance"
            << "evals/chain\n";
  for (const auto& run : result.arms) {
    const auto& r = run.report;
    std::string fractions;
    for (std::size_t i = 0; i < r.mode_fractions.size() && i < 4; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%s%.4f", i ? " " : "", r.mode_fractions[i]);
      fractions += buf;
    }
    std::cout << std::left << std::setw(32) << r.arm << std::setw(28) << fractions << std::setw(14)
              << std::setprecision(5) << r.distance << r.evaluations_per_chain << "\n";
  }
  if (result.sweep) {
    std::cout << "sweep " << result.sweep->axis << " (noise band " << result.sweep->noise_band << ")\n";
    for (const auto& p : result.sweep->points) std::cout << "  value " << p.value << "  gain " << p.gain << "\n";
  }
  if (result.profile) {
    std::cout << "cosine profile: min mean cosine " << result.profile->min_defined() << ", all positive "
              << (result.profile->all_defined_positive() ? "yes" : "no") << "\n";
  }
  std::cout << "wall clock " << std::setprecision(3) << result.wall_clock_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-to-strong reflection sampling on analytic mixtures"};
  app.require_subcommand(1);
  std::string preset_dir = w2sd::default_preset_dir().string();
  app.add_option("--presets", preset_dir, "Directory holding preset JSON files");

  std::string config_arg;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chains;
  int threads = 1;

  auto* run = app.add_subcommand("run", "Run an experiment from a config file or preset name");
  run->add_option("--config,-c", config_arg, "Config file path or preset name")->required();
  run->add_option("--out,-o", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Base seed; replaces the config seeds by seed, seed+1, ...");
  run->add_option("--chains", chains, "Chains per seed")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  auto* list = app.add_subcommand("list-presets", "List shipped presets");

  auto* validate = app.add_subcommand("validate", "Check a config and print its resolved form");
  validate->add_option("--config,-c", config_arg, "Config file path or preset name")->required();
  validate->add_option("--seed", seed, "Base seed override");
  validate->add_option("--chains", chains, "Chains per seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (list->parsed()) {
    for (const auto& p : w2sd::list_presets(preset_dir)) {
      std::cout << std::left << std::setw(30) << p.name << std::setw(20) << p.kind << p.description << "\n";
    }
    return 0;
  }

  w2sd::ExperimentConfig config;
  try {
    const auto raw = w2sd::apply_overrides(w2sd::load_config_document(config_arg, preset_dir), seed, chains);
    config = w2sd::validate_config(raw);
  } catch (const w2sd::ConfigError& e) {
    print_diagnostics(e);
    return kConfigError;
  }

  if (validate->parsed()) {
    std::cout << config.to_json().dump(2) << "\nconfig_hash " << config.hash << "\n";
    return 0;
  }

  try {
    w2sd::RunOptions options;
    options.out_dir = out_dir;
    options.threads = threads;
    const auto result = w2sd::run_experiment(config, options);
    print_summary(result);
    std::cout << "artifacts written to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
