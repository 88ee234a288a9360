#include <gtest/gtest.h>

#include <set>

#include "rcl/attacker.hpp"
#include "rcl/config.hpp"
#include "rcl/error.hpp"
#include "rcl/experiment.hpp"
#include "small_search.hpp"

using namespace rcl;

TEST(Thresholds, SeparateEveryModelLatency) {
  const auto t = LatencyThresholds::from(LatencyConfig{});
  EXPECT_EQ(t.l1_max, 4u);
  EXPECT_EQ(t.llc_max, 25u);
  for (std::uint32_t l1 : {2u, 3u, 4u}) EXPECT_EQ(t.classify(l1), LatencyClass::L1);
  for (std::uint32_t llc : {22u, 23u, 24u, 25u}) EXPECT_EQ(t.classify(llc), LatencyClass::Llc);
  for (std::uint32_t mem : {122u, 123u, 124u, 125u}) EXPECT_EQ(t.classify(mem), LatencyClass::Memory);
  const auto j = LatencyThresholds::from(LatencyConfig{}, 1);
  EXPECT_EQ(j.l1_max, 5u);
  EXPECT_EQ(j.llc_max, 26u);
}

TEST(Oracle, ObservedClassesMatchHierarchyInEveryMode) {
  for (Mode m : kAllModes) {
    HierarchyConfig cfg;
    apply_mode(cfg, m);
    CacheHierarchy h(cfg);
    h.memory().allocate(0x10000, 16, AllocPolicy::RandomPermutation);
    CacheOracle o(h, 0);
    EXPECT_EQ(o.classify(o.load(0x10000)), LatencyClass::Memory);
    EXPECT_EQ(o.classify(o.load(0x10000)), LatencyClass::L1);
    for (Addr p = 1; p <= 8; ++p) o.load(0x10000 + p * kPageBytes);  // 9 lines, same baseline L1 set
    if (m == Mode::Baseline || m == Mode::RclLlc) EXPECT_EQ(o.classify(o.load(0x10000)), LatencyClass::Llc);
    EXPECT_EQ(o.loads(), m == Mode::Baseline || m == Mode::RclLlc ? 11u : 10u);
  }
}

TEST(Oracle, JitterIsBoundedAndSeeded) {
  auto run = [](std::uint64_t seed) {
    HierarchyConfig cfg;
    CacheHierarchy h(cfg);
    h.memory().allocate(0x10000, 1, AllocPolicy::Identity);
    CacheOracle o(h, 0, 1, seed);
    o.load(0x10000);
    std::vector<std::uint32_t> v;
    for (int i = 0; i < 50; ++i) {
      const auto c = o.load(0x10000);
      EXPECT_GE(c, 1u);
      EXPECT_LE(c, 3u);
      EXPECT_EQ(o.classify(c), LatencyClass::L1);
      v.push_back(c);
    }
    return v;
  };
  EXPECT_EQ(run(4), run(4));
  EXPECT_NE(run(4), run(5));
}

TEST(CongruentSet, StrideLayout) {
  PageMap m;
  m.allocate(0x0, 8, AllocPolicy::Identity);
  const auto es = build_congruent_set(m, 0x0, 4, 12);
  EXPECT_EQ(es.lines, (std::vector<Addr>{0x1000, 0x2000, 0x3000, 0x4000}));
  EXPECT_EQ(es.target_probe, 0x0u);
  for (Addr a : es.lines) EXPECT_EQ(index_baseline(a, 6), 0u);
  EXPECT_THROW(build_congruent_set(m, 0x0, 8, 12), AllocationError);
}

namespace {

HierarchyConfig four_way_l1(Mode mode, std::uint64_t seed) {
  HierarchyConfig cfg;
  cfg.l1d = {Level::L1D, 4, 6, 6};
  cfg.master_seed = seed;
  cfg.check_each_access = true;
  apply_mode(cfg, mode);
  return cfg;
}

}  // namespace

TEST(CongruentSet, EvictsProbeFromBaselineL1) {
  CacheHierarchy h(four_way_l1(Mode::Baseline, 1));
  h.memory().allocate(0x40000000, 8, AllocPolicy::RandomPermutation);
  CacheOracle o(h, 0);
  const auto es = build_congruent_set(h.memory(), 0x40000000, 4, 12);
  EXPECT_TRUE(evicts_from_l1(o, es.lines, 0x40000000));
}

TEST(CongruentSet, RarelyEvictsFromRclL1WithScatteredPages) {
  int evicted = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    CacheHierarchy h(four_way_l1(Mode::RclN, seed));
    h.memory().allocate(0x40000000, 8, AllocPolicy::RandomPermutation);
    CacheOracle o(h, 0);
    const auto es = build_congruent_set(h.memory(), 0x40000000, 4, 12);
    evicted += evicts_from_l1(o, es.lines, 0x40000000);
  }
  EXPECT_LE(evicted, 20);  // probe survives in at least 90% of seeds
}

TEST(Search, SmallBaselineCacheMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (auto v : {SearchVariant::Reference, SearchVariant::GroupTesting}) {
      const auto c = fixtures::run_small_search(seed, v);
      ASSERT_TRUE(c.result.found()) << "seed " << seed;
      const std::set<Addr> got(c.result.set.lines.begin(), c.result.set.lines.end());
      EXPECT_EQ(got, c.congruent) << "seed " << seed;
      EXPECT_EQ(c.result.set.lines.size(), 2u);
    }
  }
}

TEST(Search, MoreCongruentLinesThanWaysGivesAWaysSizedSubset) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = fixtures::run_small_search(seed, SearchVariant::Reference, 5, 24);
    ASSERT_TRUE(c.result.found());
    ASSERT_EQ(c.result.set.lines.size(), 2u);
    for (Addr a : c.result.set.lines) EXPECT_TRUE(c.congruent.count(a));
  }
}

TEST(Search, PoolWithoutEnoughCongruentLinesFails) {
  const auto c = fixtures::run_small_search(3, SearchVariant::Reference, 1);
  EXPECT_EQ(c.result.status, SearchStatus::PoolInsufficient);
  EXPECT_FALSE(c.result.found());
  EXPECT_TRUE(c.result.set.lines.empty());
}

TEST(Search, TrimmingIsMonotone) {
  HierarchyConfig cfg = fixtures::small_search_hierarchy(4);
  CacheHierarchy h(cfg);
  h.memory().allocate(0x100000, 4, AllocPolicy::Identity);
  h.memory().allocate(0x200000, 1, AllocPolicy::Identity);
  std::vector<Addr> pool;
  for (Addr i = 1; i < 48; ++i) pool.push_back(0x100000 + i * kLineBytes);
  std::vector<std::size_t> sizes;
  SearchOptions o;
  o.assoc = 2;
  o.l1_flush = {0x200000, 0x200040};
  o.on_step = [&](std::size_t n) { sizes.push_back(n); };
  CacheOracle oracle(h, 0);
  const auto r = auto_search_evset(oracle, pool, 0x100000, o);
  ASSERT_TRUE(r.found());
  ASSERT_FALSE(sizes.empty());
  for (std::size_t i = 1; i < sizes.size(); ++i) EXPECT_LT(sizes[i], sizes[i - 1]);
  EXPECT_EQ(sizes.back(), 2u);
}

TEST(Search, BaselineLlcFindsCongruentLinesFromPageOffsetPool) {
  HierarchyConfig cfg;
  cfg.master_seed = 17;
  CacheHierarchy h(cfg);
  h.memory().allocate(0x50000000, 4096, AllocPolicy::RandomPermutation);
  h.memory().allocate(0x60000000, 8, AllocPolicy::RandomPermutation);
  h.memory().allocate(0x70000000, 1, AllocPolicy::RandomPermutation);
  const Addr probe = 0x70000000 + 0x5C0;
  // attacker controls the page offset, so every candidate shares it with the probe
  std::vector<Addr> pool;
  for (Addr p = 0; p < 4096; ++p) pool.push_back(0x50000000 + p * kPageBytes + 0x5C0);
  SearchOptions o;
  o.variant = SearchVariant::GroupTesting;
  for (Addr i = 0; i < 8 * kLinesPerPage; ++i) o.l1_flush.push_back(0x60000000 + i * kLineBytes);
  CacheOracle oracle(h, 0);
  const auto r = auto_search_evset(oracle, pool, probe, o);
  ASSERT_TRUE(r.found());
  ASSERT_EQ(r.set.lines.size(), 16u);
  for (Addr a : r.set.lines) EXPECT_EQ(h.llc_set_of(a), h.llc_set_of(probe));
  const auto m = scatter_metric(r.set, h);
  EXPECT_EQ(m.llc_sets, 1u);
  EXPECT_EQ(m.attacker_l1_sets, 1u);
  EXPECT_TRUE(h.check_inclusion().empty());
}

TEST(Search, RclLlcSearchStillEvictsProbe) {
  ExperimentConfig cfg;
  cfg.mode = Mode::RclLlc;
  cfg.attack.scenario = AttackScenario::AutoSearch;
  for (unsigned t = 0; t < 2; ++t) {
    const TrialRow row = run_trial(cfg, t);
    EXPECT_TRUE(row.success) << row.status;
    EXPECT_EQ(row.set_size, 16u);
    EXPECT_EQ(row.llc_sets, 1u);
  }
}

TEST(Scatter, SimpleShapes) {
  HierarchyConfig cfg;
  CacheHierarchy h(cfg);
  h.memory().allocate(0x40000000, 512, AllocPolicy::LargePage);
  EvictionSet empty;
  const auto e = scatter_metric(empty, h);
  EXPECT_EQ(e.llc_sets, 0u);
  EXPECT_EQ(e.attacker_l1_sets, 0u);
  EvictionSet one{{0x40000040}, 0x40000000};
  const auto o = scatter_metric(one, h);
  EXPECT_EQ(o.llc_sets, 1u);
  EXPECT_EQ(o.attacker_l1_sets, 1u);
  const auto es = build_congruent_set(h.memory(), 0x40000000, 16, 16);
  const auto c = scatter_metric(es, h);
  EXPECT_EQ(c.llc_sets, 1u);
  EXPECT_EQ(c.attacker_l1_sets, 1u);
}

TEST(Victim, Validation) {
  HierarchyConfig cfg;
  cfg.cores = 2;
  CacheHierarchy h(cfg);
  EXPECT_THROW(VictimModel(h, 1, 0x80000000, 64), ContractViolation);
  EXPECT_THROW(VictimModel(h, 1, 0x80000040, 1), ContractViolation);
  VictimModel v(h, 1, 0x80000000, 5);
  EXPECT_EQ(v.line(), 0x80000140u);
}

TEST(PrimeProbe, BaselineRecoversSecret) {
  ExperimentConfig cfg;
  cfg.attack.scenario = AttackScenario::PrimeProbe;
  cfg.victim.secret = 5;
  const TrialRow row = run_trial(cfg, 0);
  ASSERT_TRUE(row.inferred.has_value());
  EXPECT_EQ(*row.inferred, 5u);
  EXPECT_TRUE(row.success);
}

TEST(PrimeProbe, NoVictimCallMeansNoInference) {
  HierarchyConfig cfg;
  CacheHierarchy h(cfg);
  h.memory().allocate(0x40000000, 512, AllocPolicy::LargePage);
  std::vector<EvictionSet> sets;
  for (Addr j = 0; j < 1024; ++j) sets.push_back(build_congruent_set(h.memory(), 0x40000000 + j * 64, 16, 16));
  CacheOracle o(h, 0);
  const auto rep = prime_probe(o, sets, nullptr, 6);
  EXPECT_FALSE(rep.inferred.has_value());
  EXPECT_TRUE(rep.missed.empty());
}
