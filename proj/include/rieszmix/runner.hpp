#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rieszmix/config.hpp"
#include "rieszmix/report.hpp"
#include "rieszmix/wlln.hpp"

namespace rieszmix {

enum ExitCode : int { kExitOk = 0, kExitVerification = 1, kExitConfig = 2, kExitResourceCap = 3 };

inline constexpr const char* kTraceSchema = "# rieszmix trace schema v1";

/// Structural suites (lattice axioms, filtration, independence) run on the
/// product space of the longest horizon prefix with at most this many atoms.
inline constexpr std::size_t kStructuralAtomLimit = 4096;

struct RunOverrides {
  std::optional<BackendChoice> backend;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::vector<Suite> suites;  // replaces config.checks when nonempty
};

/// Returns the config with the command-line overrides folded in.
ExperimentConfig apply_overrides(ExperimentConfig config, const RunOverrides& overrides);

/// Exhaustive when chosen or when `auto` and the product space fits the cap.
Backend resolve_backend(const ExperimentConfig& config, std::size_t atom_cap = default_atom_cap());

struct SuiteOutcome {
  Suite suite = Suite::lattice_axioms;
  int trial = 0;
  std::vector<CheckReport> claims;
  std::vector<std::string> notes;

  bool passed() const;
};

struct RunResult {
  int exit_code = kExitOk;
  Backend backend = Backend::exhaustive;
  std::vector<SuiteOutcome> suites;
  std::vector<WllnReport> experiments;  // one per trial when the wlln suite runs
  std::string error;                    // resource-cap message, if any
  std::string csv;
  std::string summary;
};

/// Runs the configured suites in dependency order for every trial
/// (trial t uses seed + t). Verification failures are recorded, not thrown.
RunResult run(const ExperimentConfig& config, std::ostream& log, std::size_t atom_cap = default_atom_cap());

/// Writes trace.csv and summary.txt into config.output. Throws
/// std::runtime_error naming the path on I/O failure.
void write_artifacts(const RunResult& result, const std::string& directory);

std::string trace_csv(const std::vector<WllnReport>& experiments);
std::string render_summary(const ExperimentConfig& config, const RunResult& result);

}  // namespace rieszmix
