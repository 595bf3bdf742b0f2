#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rieszmix/conditional.hpp"
#include "rieszmix/errors.hpp"

using namespace rieszmix;

namespace {

Element el(const SpacePtr& s, std::vector<double> v) { return Element(s, std::move(v)); }

CondExpectation blocks(const SpacePtr& s, const std::vector<std::vector<std::size_t>>& b) {
  return CondExpectation(Partition::from_blocks(s, b));
}

}  // namespace

TEST(Partition, Validation) {
  const auto s = SampleSpace::uniform(3);
  EXPECT_THROW(Partition::from_blocks(s, {{0, 1}, {1, 2}}), ArgumentError);
  EXPECT_THROW(Partition::from_blocks(s, {{0, 1}}), ArgumentError);
  EXPECT_THROW(Partition::from_blocks(s, {{0, 1, 2}, {}}), ArgumentError);
  EXPECT_THROW(Partition::from_labels(s, {0, 2, 2}), ArgumentError);
  const auto p = Partition::from_labels(s, {0, 0, 1});
  EXPECT_EQ(p.block_count(), 2u);
  EXPECT_TRUE(Partition::discrete(s).refines(p));
  EXPECT_TRUE(p.refines(Partition::trivial(s)));
  EXPECT_FALSE(p.refines(Partition::from_blocks(s, {{0}, {1, 2}})));
}

TEST(CondExpectation, ApplyExamples) {
  const auto u4 = SampleSpace::uniform(4);
  const auto t = blocks(u4, {{0, 1}, {2, 3}});
  const Element r = t(el(u4, {1, 3, 2, 6}));
  EXPECT_EQ(std::vector<double>(r.values().begin(), r.values().end()), (std::vector<double>{2, 2, 4, 4}));

  const auto w = SampleSpace::create({0.1, 0.2, 0.3, 0.4});
  const auto tw = blocks(w, {{0, 1}, {2, 3}});
  const Element rw = tw(el(w, {10, 1, 0, 5}));
  EXPECT_NEAR(rw[0], 4.0, 1e-12);
  EXPECT_NEAR(rw[1], 4.0, 1e-12);
  EXPECT_NEAR(rw[2], 20.0 / 7.0, 1e-12);
  EXPECT_NEAR(rw[3], 20.0 / 7.0, 1e-12);

  const Element bc = el(w, {1, 1, -3, -3});
  EXPECT_LE(max_abs_diff(tw(bc), bc), 1e-15);
  EXPECT_THROW(tw(Element::unit(u4)), DimensionError);
}

TEST(CondExpectation, AxiomsRandomized) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_int_distribution<std::uint32_t> lab(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = SampleSpace::create({0.05, 0.15, 0.2, 0.1, 0.3, 0.2});
    std::vector<std::uint32_t> labels{0, 1, 2, 0, 1, 2};
    for (std::size_t a = 3; a < 6; ++a) labels[a] = lab(rng);
    const CondExpectation t(Partition::from_labels(s, labels));
    std::vector<double> fv(6), gv(6);
    for (auto& x : fv) x = u(rng);
    for (auto& x : gv) x = u(rng);
    const Element f = el(s, fv), g = el(s, gv), e = Element::unit(s);
    EXPECT_LE(max_abs_diff(t(e), e), 1e-12);
    EXPECT_LE(max_abs_diff(t(t(f)), t(f)), 1e-12);
    EXPECT_TRUE(is_positive(t(abs(f)), 1e-15));
    EXPECT_LE(max_excess(abs(t(f)), t(abs(f))), 1e-12);
    EXPECT_TRUE(averaging_check(t, t(f), g).passed);
  }
}

TEST(CondExpectation, MatchesPrefixOracle) {
  const int h = 4;
  const auto s = SampleSpace::uniform(16);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> fv(16);
  for (auto& x : fv) x = u(rng);
  for (int level = 0; level <= h; ++level) {
    std::vector<std::uint32_t> labels(16);
    for (std::size_t a = 0; a < 16; ++a) labels[a] = static_cast<std::uint32_t>(a >> (h - level));
    const CondExpectation t(Partition::from_labels(s, labels));
    const Element got = t(el(s, fv));
    const auto want = oracle::prefix_average(fv, h, level);
    for (std::size_t a = 0; a < 16; ++a) EXPECT_NEAR(got[a], want[a], 1e-12);
  }
}

TEST(Filtration, Clamping) {
  const auto s = SampleSpace::uniform(4);
  const CondExpectation global(Partition::trivial(s));
  std::vector<CondExpectation> ops{blocks(s, {{0, 1}, {2, 3}}), CondExpectation(Partition::discrete(s))};
  const Filtration f(2, ops, global);
  EXPECT_EQ(f.low(), 2);
  EXPECT_EQ(f.high(), 3);
  EXPECT_TRUE(f.at(-5).partition().same_blocks(Partition::trivial(s)));
  EXPECT_TRUE(f.at(2).partition().same_blocks(ops[0].partition()));
  EXPECT_TRUE(f.at(99).partition().same_blocks(Partition::discrete(s)));
  EXPECT_TRUE(filtration_at(f, 1).partition().same_blocks(Partition::trivial(s)));
}

TEST(Filtration, VerifyRefiningAndBroken) {
  const auto s = SampleSpace::uniform(4);
  const CondExpectation global(Partition::trivial(s));
  const Filtration good(0, {global, blocks(s, {{0, 1}, {2, 3}}), CondExpectation(Partition::discrete(s))}, global);
  const auto r = verify_filtration(good);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.tower.worst, 1e-15);

  const auto s3 = SampleSpace::uniform(3);
  const CondExpectation g3(Partition::trivial(s3));
  const Filtration bad(0, {blocks(s3, {{0, 1}, {2}}), blocks(s3, {{0}, {1, 2}})}, g3);
  const auto rb = verify_filtration(bad);
  EXPECT_FALSE(rb.tower.passed);
  EXPECT_GT(rb.tower.worst, 0.1);

  const Filtration single(0, {global}, global);
  EXPECT_TRUE(verify_filtration(single).passed());
}

TEST(Filtration, RandomProbesOnLargeSpace) {
  const auto s = SampleSpace::uniform(512);
  std::vector<std::uint32_t> coarse(512), fine(512);
  for (std::size_t a = 0; a < 512; ++a) {
    coarse[a] = static_cast<std::uint32_t>(a / 128);
    fine[a] = static_cast<std::uint32_t>(a / 16);
  }
  const CondExpectation global(Partition::trivial(s));
  const Filtration f(0, {CondExpectation(Partition::from_labels(s, coarse)), CondExpectation(Partition::from_labels(s, fine))},
                     global);
  EXPECT_TRUE(verify_filtration(f).passed());
}

TEST(Averaging, Examples) {
  const auto s = SampleSpace::uniform(4);
  const auto t = blocks(s, {{0, 1}, {2, 3}});
  const Element g = el(s, {1, 2, 3, 5});
  EXPECT_TRUE(averaging_check(t, Element::unit(s), g).passed);
  EXPECT_TRUE(averaging_check(t, el(s, {1, 1, 0, 0}), g).passed);
  EXPECT_THROW(averaging_check(t, el(s, {1, 0, 0, 0}), g), PreconditionError);
}

TEST(Independence, ProductOfCoins) {
  const auto s = SampleSpace::uniform(4);  // HH HT TH TT
  const CondExpectation t(Partition::trivial(s));
  const BandProjection p(s, {true, true, false, false});
  const BandProjection q(s, {true, false, true, false});
  const auto r = independence_check(p, q, t);
  EXPECT_TRUE(r.independent);
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_NEAR(r.tpq[a], 0.25, 1e-15);
    EXPECT_NEAR(r.tptq[a], 0.25, 1e-15);
    EXPECT_NEAR(r.tqtp[a], 0.25, 1e-15);
  }
  EXPECT_TRUE(independence_check(p, BandProjection::identity(s), t).independent);
}

TEST(Independence, DependentTwoPointCounterexample) {
  const auto s = SampleSpace::uniform(2);
  const CondExpectation t(Partition::trivial(s));
  const BandProjection p(s, {true, false});
  const auto r = independence_check(p, p, t);
  EXPECT_FALSE(r.independent);
  EXPECT_NEAR(r.tpq[0], 0.5, 1e-15);
  EXPECT_NEAR(r.tptq[0], 0.25, 1e-15);
  EXPECT_NEAR(r.gap, 0.25, 1e-15);
}

TEST(Independence, Subspaces) {
  const auto s = SampleSpace::uniform(4);
  const CondExpectation t(Partition::trivial(s));
  const auto first = Partition::from_labels(s, {0, 0, 1, 1});
  const auto second = Partition::from_labels(s, {0, 1, 0, 1});
  const auto r = subspace_independence_check(first, second, t);
  EXPECT_TRUE(r.independent());
  EXPECT_TRUE(r.exhaustive);
  EXPECT_FALSE(subspace_independence_check(first, first, t).independent());
  EXPECT_TRUE(subspace_independence_check(Partition::trivial(s), first, t).independent());
}
