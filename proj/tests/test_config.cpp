#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rieszmix/config.hpp"
#include "rieszmix/runner.hpp"

using namespace rieszmix;

namespace {

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError for:\n" << text;
  return ConfigError("none");
}

const char* kCoins = R"(
id: coins
process:
  kind: independent-innovations
  horizon: 6
schedule:
  n_grid: [2, 6]
  M_grid: [1, 2]
  B_grid: [0.5, 1]
seed: 3
)";

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto cfg = parse_config("process: {kind: independent-innovations, horizon: 20}\n");
  EXPECT_EQ(cfg.id, "experiment");
  EXPECT_EQ(cfg.process.horizon, 20);
  EXPECT_EQ(cfg.schedule.n_grid, (std::vector<int>{4, 16}));
  EXPECT_EQ(cfg.schedule.lag_grid, (std::vector<int>{1, 2, 4, 8}));
  EXPECT_EQ(cfg.schedule.bound_grid, (std::vector<double>{0.5, 1, 2, 4}));
  EXPECT_EQ(cfg.backend, BackendChoice::automatic);
  EXPECT_EQ(cfg.certificate.mode, CertificateMode::minimal);
  EXPECT_EQ(cfg.checks.size(), std::size(kAllSuites));
  EXPECT_EQ(cfg.trials, 1);

  const auto tiny = parse_config("process: {kind: independent-innovations, horizon: 2}\n");
  EXPECT_EQ(tiny.schedule.n_grid, (std::vector<int>{2}));
}

TEST(Config, DecreasingGridRejected) {
  const auto e = config_error("process: {kind: independent-innovations, horizon: 8}\nschedule:\n  n_grid: [4, 2]\n");
  EXPECT_EQ(e.field(), "schedule.n_grid");
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("strictly increasing"), std::string::npos);
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: 8}\nschedule: {M_grid: []}\n").field(),
            "schedule.M_grid");
}

TEST(Config, UnknownKeySuggests) {
  const auto e = config_error(
      "process: {kind: moving-average, horizon: 4, theta: [1]}\ncertificate:\n  mode: given\n  phii: [0.5]\n");
  EXPECT_EQ(e.field(), "certificate.phii");
  EXPECT_EQ(e.line(), 4);
  EXPECT_EQ(e.column(), 3);
  EXPECT_NE(std::string(e.what()).find("did you mean 'phi'"), std::string::npos) << e.what();
  const auto top = config_error("proces: {kind: independent-innovations, horizon: 4}\n");
  EXPECT_NE(std::string(top.what()).find("did you mean 'process'"), std::string::npos) << top.what();
}

TEST(Config, ParseErrorHasPosition) {
  const auto e = config_error("process:\n  kind: [unclosed\n");
  EXPECT_GT(e.line(), 0);
  EXPECT_GT(e.column(), 0);
}

TEST(Config, FieldValidation) {
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: 0}\n").field(), "process.horizon");
  EXPECT_EQ(config_error("process: {kind: coins, horizon: 3}\n").field(), "process.kind");
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: x}\n").field(), "process.horizon");
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: 3}\nbackend: gpu\n").field(), "backend");
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: 3}\nchecks: [spectral]\n").field(), "checks");
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: 3}\nschedule: {n_grid: [2, 8]}\n").field(),
            "schedule.n_grid");
  EXPECT_EQ(config_error("process: {kind: independent-innovations, horizon: 3}\n"
                         "certificate: {mode: given, phi: [0.5]}\n")
                .field(),
            "certificate.phi");
  EXPECT_EQ(config_error("schedule: {n_grid: [1]}\n").field(), "process");
}

TEST(Config, FullDocument) {
  const auto cfg = parse_config(R"(
id: full
process:
  kind: moving-average
  horizon: 12
  theta: [1, 0.5]
  innovations: {values: [1, 0, -1], probs: [0.25, 0.5, 0.25]}
certificate: {mode: given, c: 2, phi: [0.5], phi_tail_zero: true}
backend: monte-carlo
paths: 100
trials: 2
seed: 9
output: somewhere
checks: [wlln, mixingale]
decay_threshold: 0.5
)");
  EXPECT_EQ(cfg.process.innovations.size(), 3u);
  EXPECT_EQ(cfg.certificate.mode, CertificateMode::given);
  EXPECT_EQ(cfg.certificate.c_scale, 2.0);
  EXPECT_TRUE(cfg.certificate.phi_tail_zero);
  EXPECT_EQ(cfg.backend, BackendChoice::monte_carlo);
  EXPECT_EQ(cfg.paths, 100u);
  EXPECT_EQ(cfg.trials, 2);
  EXPECT_EQ(cfg.process.seed, 9u);
  EXPECT_EQ(cfg.checks, (std::vector<Suite>{Suite::wlln, Suite::mixingale}));
  EXPECT_EQ(*cfg.decay_threshold, 0.5);
  EXPECT_EQ(cfg.schedule.n_grid, (std::vector<int>{4}));

  const auto again = parse_config(echo_config(cfg));
  EXPECT_EQ(echo_config(again), echo_config(cfg));
}

TEST(Config, SuggestDistance) {
  EXPECT_EQ(suggest("phii", {"phi", "c", "mode"}), "phi");
  EXPECT_FALSE(suggest("zzzzzz", {"phi", "c"}).has_value());
}

TEST(Runner, CoinsPassAndCsvDeterministic) {
  const auto cfg = parse_config(kCoins);
  std::ostringstream log;
  const auto a = run(cfg, log);
  const auto b = run(cfg, log);
  EXPECT_EQ(a.exit_code, kExitOk) << a.summary;
  EXPECT_EQ(a.backend, Backend::exhaustive);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.csv.rfind(kTraceSchema, 0), 0u);
  EXPECT_NE(a.summary.find("result: PASS"), std::string::npos);
  for (Suite s : kAllSuites) EXPECT_NE(a.summary.find("== " + std::string(to_string(s))), std::string::npos);
  // header + 2 n x 2 M x 2 B rows
  EXPECT_EQ(std::count(a.csv.begin(), a.csv.end(), '\n'), 2 + 8);
}

TEST(Runner, PhiBelowMinimalFailsMixingaleSuite) {
  const auto cfg = parse_config(R"(
process: {kind: moving-average, horizon: 6, theta: [1, 0.5]}
certificate: {mode: given, phi: [0.25], phi_tail_zero: true}
schedule: {n_grid: [6]}
checks: [mixingale, wlln]
)");
  std::ostringstream log;
  const auto r = run(cfg, log);
  EXPECT_EQ(r.exit_code, kExitVerification);
  ASSERT_EQ(r.suites.size(), 2u);
  const auto& mix = r.suites[0];
  EXPECT_FALSE(mix.passed());
  bool named = false;
  for (const auto& c : mix.claims)
    if (!c.passed && c.where.find("m=1 side=(i)") != std::string::npos) named = true;
  EXPECT_TRUE(named) << r.summary;
  EXPECT_FALSE(r.suites[1].passed());
}

TEST(Runner, ResourceCapExitCode) {
  auto cfg = parse_config("process: {kind: independent-innovations, horizon: 10}\nbackend: exhaustive\n");
  std::ostringstream log;
  const auto r = run(cfg, log, 256);
  EXPECT_EQ(r.exit_code, kExitResourceCap);
  EXPECT_NE(r.error.find("monte-carlo"), std::string::npos);
  cfg.backend = BackendChoice::automatic;
  EXPECT_EQ(resolve_backend(cfg, 256), Backend::monte_carlo);
  EXPECT_EQ(resolve_backend(cfg, 1024), Backend::exhaustive);
}

TEST(Runner, OverridesAndTrials) {
  auto cfg = parse_config(kCoins);
  RunOverrides o;
  o.seed = 17;
  o.suites = {Suite::wlln, Suite::lattice_axioms};
  o.backend = BackendChoice::monte_carlo;
  cfg = apply_overrides(cfg, o);
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.checks, (std::vector<Suite>{Suite::lattice_axioms, Suite::wlln}));
  cfg.trials = 2;
  cfg.paths = 500;
  std::ostringstream log;
  const auto r = run(cfg, log);
  EXPECT_EQ(r.exit_code, kExitOk) << r.summary;
  ASSERT_EQ(r.experiments.size(), 2u);
  EXPECT_EQ(r.experiments[0].seed, 17u);
  EXPECT_EQ(r.experiments[1].seed, 18u);
}

TEST(Runner, WritesArtifacts) {
  const auto cfg = parse_config(kCoins);
  std::ostringstream log;
  const auto r = run(cfg, log);
  const auto dir = std::filesystem::temp_directory_path() / "rieszmix-test-artifacts";
  write_artifacts(r, dir.string());
  std::ifstream csv(dir / "trace.csv");
  std::stringstream text;
  text << csv.rdbuf();
  EXPECT_EQ(text.str(), r.csv);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.txt"));
  EXPECT_THROW(write_artifacts(r, "/proc/definitely/not/writable"), std::runtime_error);
}
