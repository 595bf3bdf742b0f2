#pragma once

// Experiment configuration: a YAML document, validated with defaults filled.
//
//   id: coins                      # optional, default "experiment"
//   process:
//     kind: independent-innovations  # independent-innovations | moving-average | martingale-difference | custom
//     horizon: 16
//     theta: [1, 0.5]              # moving-average coefficients; martingale-difference uses theta[0]
//     innovations: {values: [1, -1], probs: [0.5, 0.5]}
//     memory: 1                    # custom only
//     bound: 1                     # custom only
//     centered: true               # custom only
//     seed: 7                      # custom tables; defaults to the top-level seed
//   certificate:
//     mode: minimal                # minimal | given | t-abs
//     c: 1                         # c_i = c e for minimal and given
//     phi: [0.5, 0]                # given only
//     phi_tail_zero: true          # given only
//     epsilon: 1e-8
//   schedule: {n_grid: [4, 16], M_grid: [1, 2, 4, 8], B_grid: [0.5, 1, 2, 4]}
//   backend: auto                  # auto | exhaustive | monte-carlo
//   paths: 4000                    # monte-carlo sample size; 0 enumerates
//   trials: 1
//   seed: 1
//   output: rieszmix-out
//   checks: [lattice-axioms, filtration, independence, mixingale, martingale-bound, wlln]
//   decay_threshold: 0.05          # optional

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rieszmix/wlln.hpp"

namespace rieszmix {

/// Parse or validation failure. line/column are 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0, int column = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string field_;
  int line_;
  int column_;
};

enum class Suite { lattice_axioms, filtration, independence, mixingale, martingale_bound, wlln };

/// Suites in dependency order.
inline constexpr Suite kAllSuites[] = {Suite::lattice_axioms, Suite::filtration,       Suite::independence,
                                       Suite::mixingale,      Suite::martingale_bound, Suite::wlln};

std::string_view to_string(Suite suite);
std::optional<Suite> parse_suite(std::string_view name);

enum class BackendChoice { automatic, exhaustive, monte_carlo };
std::string_view to_string(BackendChoice choice);
std::optional<BackendChoice> parse_backend(std::string_view name);

struct ExperimentConfig {
  std::string id = "experiment";
  ProcessSpec process;
  bool process_seed_given = false;
  CertificateDirective certificate;
  Schedule schedule;
  BackendChoice backend = BackendChoice::automatic;
  std::size_t paths = 4000;
  int trials = 1;
  std::uint64_t seed = 1;
  std::string output = "rieszmix-out";
  std::vector<Suite> checks{std::begin(kAllSuites), std::end(kAllSuites)};
  std::optional<double> decay_threshold;
};

/// Throws ConfigError on malformed YAML, unknown keys (with a suggestion),
/// wrong types, or invalid values.
ExperimentConfig parse_config(std::string_view text);
/// Reads and parses a file; I/O failures are reported as ConfigError with the path.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Normalised YAML rendering with every default spelled out.
std::string echo_config(const ExperimentConfig& config);

/// Closest candidate by edit distance, if any is within distance 2.
std::optional<std::string> suggest(std::string_view key, const std::vector<std::string>& candidates);

}  // namespace rieszmix
