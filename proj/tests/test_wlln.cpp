#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rieszmix/errors.hpp"
#include "rieszmix/processes.hpp"
#include "rieszmix/wlln.hpp"

using namespace rieszmix;

namespace {

// T|fbar_64| for MA(1) theta = (1, 0.5), 20000 paths, seed 2024.
constexpr double kMovingAverageFixture = 0.14774453125001852;

ProcessSpec coins(int horizon) {
  ProcessSpec s;
  s.horizon = horizon;
  return s;
}

ProcessSpec ma(std::vector<double> theta, int horizon) {
  ProcessSpec s;
  s.kind = ProcessKind::moving_average;
  s.theta = std::move(theta);
  s.horizon = horizon;
  return s;
}

ProcessSpec custom(int horizon, int memory, std::uint64_t seed, bool centered = true) {
  ProcessSpec s;
  s.kind = ProcessKind::custom;
  s.horizon = horizon;
  s.memory = memory;
  s.seed = seed;
  s.centered = centered;
  return s;
}

AdaptedSequence sequence(const ProcessSpec& spec, const ProductSpace& ps) { return materialize(ps, make_process(spec)); }

const CheckReport* find_claim(const WllnReport& r, const std::string& prefix) {
  for (const auto& c : r.claims)
    if (c.claim.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

}  // namespace

TEST(CesaroBound, Values) {
  EXPECT_DOUBLE_EQ(cesaro_bound(1.0, 4), 1.25);
  EXPECT_DOUBLE_EQ(cesaro_bound(0.5, 1), 1.0);
}

TEST(MartingaleBound, FairCoins) {
  const auto ps = build_product_space(InnovationLaw::fair_coin(), 4);
  const auto f = sequence(coins(4), ps);
  const auto r = martingale_cesaro_bound(f, 1.0);
  EXPECT_TRUE(r.passed());
  const auto& t = f.filtration().global();
  const auto s = partial_sums(martingale_difference_from(f));
  EXPECT_LE(max_abs_diff(t(s[3] * s[3]), Element::constant(ps.space, 3.0)), 1e-12);
  ASSERT_EQ(r.trace.values.size(), 4u);
  EXPECT_NEAR(r.trace.values[3].max(), 0.375, 1e-15);
  EXPECT_NEAR(r.trace.values[3].min(), 0.375, 1e-15);
  EXPECT_NEAR(oracle::coin_mean_abs_average(4), 0.375, 1e-15);
  EXPECT_DOUBLE_EQ(r.trace.bound[3], 1.25);
}

TEST(MartingaleBound, PreconditionNamesTermAndAtom) {
  const auto ps = build_product_space(InnovationLaw::fair_coin(), 3);
  const auto f = sequence(ma({1.0, 0.5}, 3), ps);
  try {
    martingale_cesaro_bound(f, 1.0);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("f_2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("atom 0"), std::string::npos) << msg;
  }
  EXPECT_THROW(martingale_cesaro_bound(f, 0.0), ArgumentError);
}

TEST(MartingaleBound, PredictableSequenceGivesZeroTrace) {
  const auto ps = build_product_space(InnovationLaw::fair_coin(), 3);
  const auto eps = coordinate_elements(ps);
  const AdaptedSequence f(ps.filtration, {Element::zero(ps.space), eps[0], eps[0] * eps[1]});
  const auto r = martingale_cesaro_bound(f, 1.0);
  EXPECT_TRUE(r.passed());
  for (const auto& v : r.trace.values) EXPECT_EQ(v.sup_norm(), 0.0);
}

TEST(MartingaleBound, RandomAdaptedSequences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto spec = custom(8, 3, seed, seed % 2 == 0);
    const auto ps = build_product_space(spec);
    const auto model = make_process(spec);
    const auto r = martingale_cesaro_bound(materialize(ps, model), model.bound());
    EXPECT_TRUE(r.passed()) << "seed " << seed;
    EXPECT_LE(r.square_identity.worst, 1e-10);
    EXPECT_LE(r.orthogonality.worst, 1e-10);
  }
}

TEST(Signum, Examples) {
  const auto s2 = SampleSpace::uniform(2);
  const CondExpectation t(Partition::trivial(s2));
  EXPECT_TRUE(signum_inequality_check(Element::zero(s2), 3, t).passed);
  const auto eq = signum_inequality_check(Element(s2, {2, -2}), 4, t);
  EXPECT_TRUE(eq.passed);
  EXPECT_NEAR(eq.worst, 0.0, 1e-15);  // equality where |s| = sqrt(n)
  EXPECT_THROW(signum_inequality_check(Element::zero(s2), 0, t), ArgumentError);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10, 10);
  const auto s5 = SampleSpace::uniform(5);
  const CondExpectation t5(Partition::trivial(s5));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(5);
    for (auto& x : v) x = u(rng);
    const int n = 1 + trial % 20;
    EXPECT_TRUE(signum_inequality_check(Element(s5, v), n, t5).passed);
    for (double x : v)  // strict off the equality locus |s| = sqrt(n)
      EXPECT_GT(1.0 / std::sqrt(n) + x * x / std::pow(n, 1.5) - 2.0 * std::abs(x) / n, 0.0);
  }
}

TEST(Telescope, ReconstructionAndParts) {
  const auto spec = custom(8, 2, 3);
  const auto ps = build_product_space(spec);
  const auto f = sequence(spec, ps);
  for (int lag : {1, 2, 4, 8})
    for (int n = 1; n <= 8; ++n) {
      const auto parts = telescope(f.terms(), f.filtration(), lag, n);
      EXPECT_LE(parts.reconstruction_error(), 1e-12);
      EXPECT_LE(parts.tail.sup_norm(), 1e-15);  // adapted
    }
  EXPECT_THROW(telescope(f.terms(), f.filtration(), 0, 4), ArgumentError);
  EXPECT_THROW(telescope(f.terms(), f.filtration(), 1, 9), ArgumentError);
}

TEST(Telescope, HeadVanishesForIndependentWithLargeLag) {
  const auto ps = build_product_space(InnovationLaw::fair_coin(), 6);
  const auto f = sequence(coins(6), ps);
  const auto parts = telescope(f.terms(), f.filtration(), 8, 6);
  EXPECT_EQ(parts.head.sup_norm(), 0.0);
}

TEST(YTrace, Examples) {
  const auto ps = build_product_space(InnovationLaw::fair_coin(), 6);
  const auto f = sequence(coins(6), ps);
  const std::vector<int> grid{1, 2, 4, 6};
  for (int m : {1, 3}) {
    const auto r = ymn_trace(f.terms(), f.filtration(), m, grid);
    for (const auto& v : r.trace.values) EXPECT_EQ(v.sup_norm(), 0.0);
  }
  const auto r0 = ymn_trace(f.terms(), f.filtration(), 0, grid);
  EXPECT_TRUE(r0.differences.passed);
  EXPECT_TRUE(r0.cesaro.passed);
  EXPECT_NEAR(r0.trace.values[2].max(), oracle::coin_mean_abs_average(4), 1e-15);
  EXPECT_NEAR(r0.trace.values[3].max(), oracle::coin_mean_abs_average(6), 1e-15);
  const auto far = ymn_trace(f.terms(), f.filtration(), -20, grid);
  for (const auto& v : far.trace.values) EXPECT_EQ(v.sup_norm(), 0.0);
}

TEST(YTrace, MovingAverageDifferences) {
  const auto spec = ma({1.0, 0.5, -0.25}, 7);
  const auto ps = build_product_space(spec);
  const auto f = sequence(spec, ps);
  const std::vector<int> grid{1, 3, 7};
  for (int m = -2; m <= 1; ++m) {
    const auto r = ymn_trace(f.terms(), f.filtration(), m, grid);
    EXPECT_TRUE(r.differences.passed) << "m=" << m;
    EXPECT_TRUE(r.cesaro.passed) << "m=" << m;
  }
}

TEST(TruncationSplit, Examples) {
  const auto s = SampleSpace::uniform(3);
  const Element f(s, {2, -1, 0.5});
  const auto sp = truncation_split(f, 1.0);
  EXPECT_EQ(std::vector<double>(sp.bounded.values().begin(), sp.bounded.values().end()),
            (std::vector<double>{0, -1, 0.5}));
  EXPECT_EQ(std::vector<double>(sp.excess.values().begin(), sp.excess.values().end()), (std::vector<double>{2, 0, 0}));
  const auto all = truncation_split(f, 2.0);
  EXPECT_EQ(all.excess.sup_norm(), 0.0);
  EXPECT_EQ(max_abs_diff(all.bounded, f), 0.0);
  EXPECT_THROW(truncation_split(f, 0.0), ArgumentError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(3);
    for (auto& x : v) x = u(rng);
    const Element g(s, v);
    const auto p = truncation_split(g, 1.5);
    EXPECT_EQ(max_abs_diff(p.bounded + p.excess, g), 0.0);
    EXPECT_LE(p.bounded.sup_norm(), 1.5);
  }
}

TEST(Experiment, CoinsExhaustiveMatchesBinomial) {
  ExperimentSpec spec;
  spec.process = coins(16);
  spec.schedule.n_grid = {4, 16};
  spec.schedule.lag_grid = {1, 2};
  spec.schedule.bound_grid = {0.5, 1.0};
  const auto r = wlln_experiment(spec);
  EXPECT_TRUE(r.passed());
  ASSERT_EQ(r.fbar.n_grid.back(), 16);
  const double want = oracle::binomial_mad_over_n(16);
  EXPECT_NEAR(want, 0.196380615234375, 1e-15);
  EXPECT_NEAR(oracle::coin_mean_abs_average(16), want, 1e-15);
  EXPECT_NEAR(r.fbar.max_component(1), want, 1e-12);
  EXPECT_EQ(r.rows.size(), 2u * 2u * 2u);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.chain_pass && row.excess_pass && row.bounded_pass && row.gbar_pass);
    EXPECT_LE(row.telescope_error, 1e-12);
  }
}

TEST(Experiment, PathEngineEnumerationMatchesExhaustive) {
  ExperimentSpec spec;
  spec.process = ma({1.0, 0.5}, 8);
  spec.schedule.n_grid = {2, 5, 8};
  spec.schedule.lag_grid = {1, 2};
  spec.schedule.bound_grid = {0.5, 1.0, 2.0};
  const auto exact = wlln_experiment(spec);
  spec.backend = Backend::monte_carlo;
  spec.paths = 0;
  const auto paths = wlln_experiment(spec);
  EXPECT_TRUE(exact.passed());
  EXPECT_TRUE(paths.passed());
  ASSERT_EQ(exact.rows.size(), paths.rows.size());
  for (std::size_t k = 0; k < exact.rows.size(); ++k) {
    const auto& a = exact.rows[k];
    const auto& b = paths.rows[k];
    EXPECT_NEAR(a.tfbar, b.tfbar, 1e-12);
    EXPECT_NEAR(a.chain_bound, b.chain_bound, 1e-12);
    EXPECT_NEAR(a.excess_lhs, b.excess_lhs, 1e-12);
    EXPECT_NEAR(a.excess_bound, b.excess_bound, 1e-12);
    EXPECT_NEAR(a.bounded_lhs, b.bounded_lhs, 1e-12);
    EXPECT_NEAR(a.gbar, b.gbar, 1e-12);
    EXPECT_EQ(b.tfbar_se, 0.0);
  }
  ASSERT_EQ(exact.phi.size(), paths.phi.size());
  for (std::size_t m = 0; m < exact.phi.size(); ++m) EXPECT_NEAR(exact.phi[m], paths.phi[m], 1e-12);
}

TEST(Experiment, MonteCarloWithinThreeStandardErrors) {
  ExperimentSpec spec;
  spec.process = ma({1.0, 0.5}, 12);
  spec.schedule.n_grid = {4, 12};
  spec.schedule.lag_grid = {1, 2};
  spec.schedule.bound_grid = {1.0};
  const auto exact = wlln_experiment(spec);
  spec.backend = Backend::monte_carlo;
  spec.paths = 20000;
  spec.seed = 99;
  const auto mc = wlln_experiment(spec);
  EXPECT_TRUE(mc.passed());
  for (std::size_t k = 0; k < exact.rows.size(); ++k) {
    const auto& a = exact.rows[k];
    const auto& b = mc.rows[k];
    EXPECT_GT(b.tfbar_se, 0.0);
    EXPECT_LE(std::abs(a.tfbar - b.tfbar), 3.0 * b.tfbar_se) << "n=" << a.n;
  }
}

TEST(Experiment, MovingAverageMonteCarloFixture) {
  ExperimentSpec spec;
  spec.process = ma({1.0, 0.5}, 64);
  spec.schedule.n_grid = {16, 64};
  spec.backend = Backend::monte_carlo;
  spec.paths = 20000;
  spec.seed = 2024;
  const auto a = wlln_experiment(spec);
  const auto b = wlln_experiment(spec);
  EXPECT_TRUE(a.passed());
  const double at64 = a.fbar.max_component(1);
  EXPECT_LT(at64, 0.2);
  EXPECT_EQ(at64, b.fbar.max_component(1));
  EXPECT_NEAR(at64, kMovingAverageFixture, 1e-12);
}

TEST(Experiment, CertificateFailureAborts) {
  ExperimentSpec spec;
  spec.process = ma({1.0, 0.5}, 6);
  spec.schedule.n_grid = {6};
  spec.certificate.mode = CertificateMode::given;
  spec.certificate.phi = {0.4};
  spec.certificate.phi_tail_zero = true;
  try {
    wlln_experiment(spec);
    FAIL() << "expected CertificateError";
  } catch (const CertificateError& e) {
    EXPECT_NE(std::string(e.what()).find("m=1 side=(i)"), std::string::npos) << e.what();
  }
  spec.backend = Backend::monte_carlo;
  spec.paths = 100;
  EXPECT_THROW(wlln_experiment(spec), CertificateError);
}

TEST(Experiment, PartBUsesTAbsCertificate) {
  ExperimentSpec spec;
  spec.process = custom(10, 2, 5);
  spec.schedule.n_grid = {5, 10};
  spec.certificate.mode = CertificateMode::t_abs;
  const auto r = wlln_experiment(spec);
  EXPECT_TRUE(r.passed());
  const auto* uniform = find_claim(r, "uniform family bound");
  ASSERT_NE(uniform, nullptr);
  EXPECT_TRUE(uniform->passed);
}

TEST(Experiment, ScheduleValidation) {
  ExperimentSpec spec;
  spec.process = coins(4);
  spec.schedule.n_grid = {2, 8};
  EXPECT_THROW(wlln_experiment(spec), ArgumentError);
  spec.schedule.n_grid = {3, 2};
  EXPECT_THROW(wlln_experiment(spec), ArgumentError);
  spec.schedule.n_grid = {4};
  spec.certificate.mode = CertificateMode::given;
  spec.certificate.phi = {0.0};
  EXPECT_THROW(wlln_experiment(spec), ArgumentError);
}

TEST(Experiment, DecayThreshold) {
  ExperimentSpec spec;
  spec.process = coins(8);
  spec.schedule.n_grid = {8};
  spec.schedule.lag_grid = {1};
  spec.decay_threshold = 0.1;
  const auto r = wlln_experiment(spec);
  const auto* decay = find_claim(r, "Cesaro mean decay");
  ASSERT_NE(decay, nullptr);
  EXPECT_FALSE(decay->passed);
  EXPECT_FALSE(r.passed());
}
