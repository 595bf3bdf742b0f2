#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rieszmix/config.hpp"
#include "rieszmix/errors.hpp"
#include "rieszmix/runner.hpp"

int main(int argc, char** argv) {
  using namespace rieszmix;
  CLI::App app{"Finite Riesz-space mixingale and weak-law verification harness"};
  std::string config_path;
  std::string backend;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool dry_run = false;
  bool quiet = false;
  std::vector<std::string> suites;
  app.add_option("config", config_path, "YAML experiment config")->required();
  auto* backend_opt = app.add_option("--backend", backend, "auto | exhaustive | monte-carlo");
  auto* seed_opt = app.add_option("--seed", seed, "base seed (trial t uses seed + t)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory for trace.csv and summary.txt");
  app.add_flag("--dry-run", dry_run, "print the resolved config and exit");
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  app.add_option("--suite", suites,
                 "suite to run (repeatable): lattice-axioms, filtration, independence, mixingale, "
                 "martingale-bound, wlln");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  ExperimentConfig config;
  RunOverrides overrides;
  try {
    config = load_config(config_path);
    if (*backend_opt) {
      const auto b = parse_backend(backend);
      if (!b) throw ConfigError("expected auto, exhaustive or monte-carlo", "--backend");
      overrides.backend = *b;
    }
    if (*seed_opt) overrides.seed = seed;
    if (*out_opt) overrides.output = out_dir;
    for (const auto& name : suites) {
      const auto s = parse_suite(name);
      if (!s) {
        std::vector<std::string> known;
        for (Suite k : kAllSuites) known.emplace_back(to_string(k));
        std::string message = "unknown suite '" + name + "'";
        if (auto hint = suggest(name, known)) message += "; did you mean '" + *hint + "'?";
        throw ConfigError(message, "--suite");
      }
      overrides.suites.push_back(*s);
    }
    config = apply_overrides(config, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (dry_run) {
    std::cout << echo_config(config);
    return kExitOk;
  }

  std::ostringstream discard;
  std::ostream& log = quiet ? discard : std::cerr;
  RunResult result;
  try {
    result = run(config, log);
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    write_artifacts(result, config.output);
  } catch (const std::runtime_error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!quiet) std::cout << result.summary;
  return result.exit_code;
}
