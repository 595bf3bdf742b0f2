#include "rieszmix/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "rieszmix/errors.hpp"
#include "rieszmix/mixingale.hpp"
#include "rieszmix/processes.hpp"

namespace rieszmix {

bool SuiteOutcome::passed() const {
  return std::all_of(claims.begin(), claims.end(), [](const CheckReport& r) { return r.passed; });
}

ExperimentConfig apply_overrides(ExperimentConfig config, const RunOverrides& overrides) {
  if (overrides.backend) config.backend = *overrides.backend;
  if (overrides.seed) {
    config.seed = *overrides.seed;
    if (!config.process_seed_given) config.process.seed = config.seed;
  }
  if (overrides.output) config.output = *overrides.output;
  if (!overrides.suites.empty()) {
    config.checks.clear();
    for (Suite s : kAllSuites)
      if (std::find(overrides.suites.begin(), overrides.suites.end(), s) != overrides.suites.end())
        config.checks.push_back(s);
  }
  return config;
}

Backend resolve_backend(const ExperimentConfig& config, std::size_t atom_cap) {
  switch (config.backend) {
    case BackendChoice::exhaustive: return Backend::exhaustive;
    case BackendChoice::monte_carlo: return Backend::monte_carlo;
    case BackendChoice::automatic: break;
  }
  const auto atoms = product_atom_count(config.process.innovations.size(), config.process.horizon);
  return atoms <= atom_cap ? Backend::exhaustive : Backend::monte_carlo;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ProcessSpec trial_process(const ExperimentConfig& cfg, int trial) {
  ProcessSpec p = cfg.process;
  p.seed += static_cast<std::uint64_t>(trial);
  return p;
}

// Longest horizon prefix whose product space fits the structural limit.
ProcessSpec prefix_process(const ProcessSpec& spec, std::size_t atom_cap) {
  ProcessSpec p = spec;
  const std::size_t limit = std::min(kStructuralAtomLimit, atom_cap);
  while (p.horizon > 1 && product_atom_count(p.innovations.size(), p.horizon) > limit) --p.horizon;
  return p;
}

std::vector<Element> random_elements(const SpacePtr& space, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Element> out;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> v(space->size());
    for (double& x : v) x = u(rng);
    out.emplace_back(space, std::move(v));
  }
  return out;
}

BandProjection random_band(const SpacePtr& space, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<bool> mask(space->size());
  for (std::size_t a = 0; a < mask.size(); ++a) mask[a] = coin(rng);
  return BandProjection(space, std::move(mask));
}

SuiteOutcome lattice_suite(const ProductSpace& ps, std::uint64_t seed) {
  SuiteOutcome out;
  std::mt19937_64 rng(seed);
  const SpacePtr& space = ps.space;
  const Filtration& F = *ps.filtration;
  const Element e = Element::unit(space);
  constexpr std::size_t kCases = 16;
  const auto f = random_elements(space, kCases, rng);
  const auto g = random_elements(space, kCases, rng);

  CheckReport lattice("lattice identities: f v g + f ^ g = f + g, f = f+ - f-, |f| = f+ + f-");
  CheckReport bands("band projections: P^2 = P, P(I - P) = 0, (Pe)(Qe) = PQe, 0 <= Pu <= u");
  CheckReport unit("conditional expectation fixes e: T_i e = e");
  CheckReport positivity("conditional expectation positive and idempotent");
  CheckReport modulus("T|f| >= |T f|");
  CheckReport averaging("averaging property T(f g) = f T g for f in R(T)");
  for (std::size_t k = 0; k < kCases; ++k) {
    const std::string at = "case " + std::to_string(k);
    lattice.observe(max_abs_diff(sup(f[k], g[k]) + inf(f[k], g[k]), f[k] + g[k]), kIdentityTolerance, at);
    lattice.observe(max_abs_diff(pos(f[k]) - neg(f[k]), f[k]), kIdentityTolerance, at);
    lattice.observe(max_abs_diff(pos(f[k]) + neg(f[k]), abs(f[k])), kIdentityTolerance, at);

    const BandProjection p = random_band(space, rng);
    const BandProjection q = random_band(space, rng);
    const Element u = abs(f[k]);
    bands.observe(max_abs_diff(p(p(f[k])), p(f[k])), kIdentityTolerance, at);
    bands.observe(p(p.complement()(f[k])).sup_norm(), kIdentityTolerance, at);
    bands.observe(max_abs_diff(p.unit_image() * q.unit_image(), p.compose(q).unit_image()), kIdentityTolerance, at);
    bands.observe(std::max(-p(u).min(), max_excess(p(u), u)), kIdentityTolerance, at);

    for (int i = F.low(); i <= F.high(); ++i) {
      const CondExpectation& t = F.at(i);
      const std::string ati = at + " i=" + std::to_string(i);
      unit.observe(max_abs_diff(t(e), e), kIdentityTolerance, ati);
      positivity.observe(-t(u).min(), kIdentityTolerance, ati);
      positivity.observe(max_abs_diff(t(t(f[k])), t(f[k])), kIdentityTolerance, ati);
      modulus.observe(max_excess(abs(t(f[k])), t(abs(f[k]))), kIdentityTolerance, ati);
      averaging.merge(averaging_check(t, t(f[k]), g[k]));
    }
  }
  out.claims = {lattice, bands, unit, positivity, modulus, averaging};
  return out;
}

SuiteOutcome filtration_suite(const ProductSpace& ps, std::uint64_t seed) {
  SuiteOutcome out;
  const FiltrationReport r = verify_filtration(*ps.filtration, 256, 8, seed);
  CheckReport refine("filtration partitions refine each other");
  const Filtration& F = *ps.filtration;
  for (int i = F.low() + 1; i <= F.high(); ++i)
    if (!F.at(i).partition().refines(F.at(i - 1).partition())) {
      refine.passed = false;
      refine.worst = 1.0;
      refine.where = "i=" + std::to_string(i);
    }
  out.claims = {r.tower, r.compatibility, refine};
  return out;
}

SuiteOutcome independence_suite(const ProductSpace& ps) {
  SuiteOutcome out;
  CheckReport check("coordinate band projections T-conditionally independent: TPTQe = TPQe = TQTPe");
  const int last = std::min(ps.horizon, 4);
  std::size_t pairs = 0;
  for (int k = 1; k <= last; ++k)
    for (int l = k + 1; l <= last; ++l) {
      const auto r = subspace_independence_check(coordinate_partition(ps, k), coordinate_partition(ps, l),
                                                 ps.filtration->global());
      pairs += r.pairs_checked;
      CheckReport tagged = r.check;
      tagged.where = "coordinates " + std::to_string(k) + "," + std::to_string(l) + " " + tagged.where;
      check.merge(tagged);
    }
  if (last < 2) check.notes.push_back("horizon below 2: no coordinate pairs");
  out.notes.push_back(std::to_string(pairs) + " band projection pairs checked");
  out.claims = {check};
  return out;
}

void mixingale_exhaustive(SuiteOutcome& out, const AdaptedSequence& seq, const ExperimentConfig& cfg,
                          double process_bound) {
  const int max_lag = cfg.schedule.lag_grid.back();
  const Filtration& F = seq.filtration();
  const auto terms = seq.terms();
  const MixingaleCertificate cert = build_certificate(terms, F, cfg.certificate, max_lag);
  out.claims.push_back(validate_certificate(cert, cfg.certificate.epsilon));
  const MixingaleReport mix = check_mixingale(terms, F, cert, max_lag);
  out.claims.push_back(mix.check);
  out.claims.push_back(t_mean_zero_check(terms, F));

  std::vector<double> levels(cfg.schedule.bound_grid.begin(), cfg.schedule.bound_grid.end());
  levels.push_back(process_bound);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const UniformityProfile profile = uniformity_profile(terms, F.global(), levels);
  out.claims.push_back(profile.monotone);
  out.claims.push_back(uniform_bound_check(profile, terms, F.global(), cfg.certificate.epsilon).check);

  std::ostringstream phi;
  phi << "Phi =";
  for (double p : cert.phi) phi << " " << format_double(p);
  if (cert.phi_tail_zero) phi << " (zero tail)";
  out.notes.push_back(phi.str());
}

void mixingale_tables(SuiteOutcome& out, const ProcessModel& model, const ExperimentConfig& cfg) {
  const int max_lag = cfg.schedule.lag_grid.back();
  ProcessModel window = model;
  const int n = cfg.schedule.n_grid.back();
  window.terms.erase(window.terms.begin() + n, window.terms.end());
  window.horizon = n;
  const ScalarCertificate sc = scalar_certificate(window, cfg.certificate, max_lag);
  out.claims.push_back(validate_certificate(sc.certificate, cfg.certificate.epsilon));
  out.claims.push_back(check_mixingale(n, sc.lhs, sc.certificate, max_lag).check);
  CheckReport mean_zero("T-mean zero: T f_i = 0");
  for (int i = 1; i <= n; ++i)
    mean_zero.observe(std::abs(window.term(i).expectation(window.law)), kInequalitySlack, "i=" + std::to_string(i));
  out.claims.push_back(mean_zero);
  out.notes.push_back("certificate computed exactly from the term tables for i <= " + std::to_string(n));
}

void martingale_suite(SuiteOutcome& out, const AdaptedSequence& seq, const ExperimentConfig& cfg,
                      double bound, bool with_traces) {
  const MartingaleBoundReport mb = martingale_cesaro_bound(seq, bound);
  for (const CheckReport* c : mb.claims()) out.claims.push_back(*c);

  const AdaptedSequence g = martingale_difference_from(seq);
  const std::vector<Element> s = partial_sums(g);
  CheckReport signum("signum inequality e/sqrt(n) + s^2/n^{3/2} >= 2|s|/n");
  for (int n = 1; n <= g.length(); ++n) {
    CheckReport r = signum_inequality_check(s[static_cast<std::size_t>(n)], n, seq.filtration().global());
    r.where = "n=" + std::to_string(n) + " " + r.where;
    signum.merge(r);
  }
  out.claims.push_back(signum);

  if (!with_traces) return;
  CheckReport differences("y_{m,i} martingale differences for (T_{i+m})");
  CheckReport cesaro("T|ybar_{m,n}| under the Cesaro bound");
  std::vector<int> grid;
  for (int n = 1; n <= seq.length(); ++n) grid.push_back(n);
  const int max_lag = cfg.schedule.lag_grid.back();
  for (int m = -max_lag + 1; m <= max_lag; ++m) {
    YTraceReport r = ymn_trace(seq.terms(), seq.filtration(), m, grid);
    r.differences.where = "m=" + std::to_string(m) + " " + r.differences.where;
    r.cesaro.where = "m=" + std::to_string(m) + " " + r.cesaro.where;
    differences.merge(r.differences);
    cesaro.merge(r.cesaro);
  }
  out.claims.push_back(differences);
  out.claims.push_back(cesaro);
}

ExperimentSpec experiment_spec(const ExperimentConfig& cfg, int trial, Backend backend, std::size_t atom_cap) {
  ExperimentSpec spec;
  spec.id = cfg.id;
  spec.process = trial_process(cfg, trial);
  spec.certificate = cfg.certificate;
  spec.schedule = cfg.schedule;
  spec.backend = backend;
  spec.paths = cfg.paths;
  spec.seed = cfg.seed + static_cast<std::uint64_t>(trial);
  spec.decay_threshold = cfg.decay_threshold;
  spec.atom_cap = atom_cap;
  return spec;
}

bool wants(const ExperimentConfig& cfg, Suite s) {
  return std::find(cfg.checks.begin(), cfg.checks.end(), s) != cfg.checks.end();
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, std::ostream& log, std::size_t atom_cap) {
  RunResult result;
  result.backend = resolve_backend(cfg, atom_cap);
  const bool exhaustive = result.backend == Backend::exhaustive;
  log << "backend: " << to_string(result.backend) << "\n";

  try {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(trial);
      const ProcessSpec process = trial_process(cfg, trial);
      const ProcessModel model = make_process(process);

      const ProcessSpec prefix = prefix_process(process, atom_cap);
      const ProductSpace structural = build_product_space(prefix, atom_cap);
      const std::string prefix_note = "on the " + std::to_string(structural.space->size()) +
                                      "-atom product space of horizon " + std::to_string(prefix.horizon);

      std::optional<ProductSpace> full;
      std::optional<AdaptedSequence> seq;
      if (exhaustive &&
          (wants(cfg, Suite::mixingale) || wants(cfg, Suite::martingale_bound))) {
        full = build_product_space(model.law, model.horizon, atom_cap);
        seq = materialize(*full, model);
      }

      for (Suite suite : kAllSuites) {
        if (!wants(cfg, suite)) continue;
        log << "trial " << trial << ": " << to_string(suite) << "\n";
        SuiteOutcome out;
        switch (suite) {
          case Suite::lattice_axioms:
            out = lattice_suite(structural, seed);
            out.notes.push_back("checked " + prefix_note);
            break;
          case Suite::filtration:
            out = filtration_suite(structural, seed);
            out.notes.push_back("checked " + prefix_note);
            break;
          case Suite::independence:
            out = independence_suite(structural);
            out.notes.push_back("checked " + prefix_note);
            break;
          case Suite::mixingale:
            if (exhaustive)
              mixingale_exhaustive(out, *seq, cfg, model.bound());
            else
              mixingale_tables(out, model, cfg);
            break;
          case Suite::martingale_bound: {
            const ProcessModel prefix_model = make_process(prefix);
            const AdaptedSequence prefix_seq = materialize(structural, prefix_model);
            if (exhaustive) {
              martingale_suite(out, *seq, cfg, model.bound(), false);
              SuiteOutcome traces;
              martingale_suite(traces, prefix_seq, cfg, prefix_model.bound(), true);
              out.claims.push_back(traces.claims[traces.claims.size() - 2]);
              out.claims.push_back(traces.claims.back());
              out.notes.push_back("y_{m,n} traces checked " + prefix_note);
            } else {
              martingale_suite(out, prefix_seq, cfg, prefix_model.bound(), true);
              out.notes.push_back("checked " + prefix_note + "; the wlln suite covers the full horizon statistically");
            }
            break;
          }
          case Suite::wlln: {
            try {
              WllnReport report = wlln_experiment(experiment_spec(cfg, trial, result.backend, atom_cap));
              out.claims = report.claims;
              if (report.paths > 0)
                out.notes.push_back(std::to_string(report.paths) + " paths, seed " + std::to_string(report.seed));
              result.experiments.push_back(std::move(report));
            } catch (const CertificateError& e) {
              CheckReport failed("mixingale certificate");
              failed.passed = false;
              failed.where = e.what();
              out.claims.push_back(failed);
              out.notes.push_back("experiment aborted");
            }
            break;
          }
        }
        out.suite = suite;
        out.trial = trial;
        for (const auto& c : out.claims)
          if (!c.passed) log << "  FAIL " << c.claim << " worst=" << format_double(c.worst) << " at " << c.where << "\n";
        result.suites.push_back(std::move(out));
      }
    }
  } catch (const AtomCapError& e) {
    result.exit_code = kExitResourceCap;
    result.error = e.what();
    log << "resource cap: " << e.what() << "\n";
  }

  if (result.exit_code == kExitOk)
    for (const auto& s : result.suites)
      if (!s.passed()) result.exit_code = kExitVerification;
  result.csv = trace_csv(result.experiments);
  result.summary = render_summary(cfg, result);
  return result;
}

std::string trace_csv(const std::vector<WllnReport>& experiments) {
  std::ostringstream out;
  out << kTraceSchema << "\n";
  out << "experiment,backend,seed,paths,n,M,B,tfbar_max,tfbar_se,chain_bound,chain_pass,telescope_error,"
         "excess_lhs,excess_bound,excess_pass,bounded_lhs,bounded_bound,bounded_pass,gbar_max,gbar_bound,"
         "gbar_pass\n";
  const auto flag = [](bool b) { return b ? "pass" : "fail"; };
  for (const auto& r : experiments)
    for (const auto& row : r.rows) {
      out << r.id << ',' << to_string(r.backend) << ',' << r.seed << ',' << r.paths << ',' << row.n << ','
          << row.lag << ',' << format_double(row.level) << ',' << format_double(row.tfbar) << ','
          << format_double(row.tfbar_se) << ',' << format_double(row.chain_bound) << ',' << flag(row.chain_pass)
          << ',' << format_double(row.telescope_error) << ',' << format_double(row.excess_lhs) << ','
          << format_double(row.excess_bound) << ',' << flag(row.excess_pass) << ','
          << format_double(row.bounded_lhs) << ',' << format_double(row.bounded_bound) << ','
          << flag(row.bounded_pass) << ',' << format_double(row.gbar) << ',' << format_double(row.gbar_bound)
          << ',' << flag(row.gbar_pass) << '\n';
    }
  return out.str();
}

std::string render_summary(const ExperimentConfig& cfg, const RunResult& result) {
  std::ostringstream out;
  out << "rieszmix summary\n";
  out << "experiment: " << cfg.id << "\n";
  out << "process: " << to_string(cfg.process.kind) << ", horizon " << cfg.process.horizon << "\n";
  out << "backend: " << to_string(result.backend) << "\n";
  out << "seed: " << cfg.seed << ", trials: " << cfg.trials << "\n\n";
  std::size_t total = 0, failed = 0;
  for (const auto& s : result.suites) {
    out << "== " << to_string(s.suite) << " (trial " << s.trial << ")\n";
    for (const auto& c : s.claims) {
      ++total;
      if (!c.passed) ++failed;
      out << (c.passed ? "  [PASS] " : "  [FAIL] ") << c.claim << "  worst="
          << (std::isinf(c.worst) && c.worst < 0 ? std::string("n/a") : format_double(c.worst));
      if (!c.where.empty()) out << "  at " << c.where;
      out << "\n";
      for (const auto& n : c.notes) out << "         note: " << n << "\n";
    }
    for (const auto& n : s.notes) out << "  note: " << n << "\n";
  }
  for (const auto& r : result.experiments) {
    out << "\nT|fbar_n| (" << to_string(r.backend) << ", seed " << r.seed << "):";
    for (std::size_t k = 0; k < r.fbar.n_grid.size(); ++k)
      out << " n=" << r.fbar.n_grid[k] << ":" << format_double(r.fbar.max_component(k));
    out << "\n";
  }
  if (!result.error.empty()) out << "\nresource cap: " << result.error << "\n";
  out << "\nresult: " << (result.exit_code == kExitOk ? "PASS" : "FAIL") << " (" << total << " claims, " << failed
      << " failed, exit " << result.exit_code << ")\n";
  return out.str();
}

void write_artifacts(const RunResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + directory + ": " + ec.message());
  const auto write = [&](const std::string& name, const std::string& text) {
    const fs::path path = fs::path(directory) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
  };
  write("trace.csv", result.csv);
  write("summary.txt", result.summary);
}

}  // namespace rieszmix
