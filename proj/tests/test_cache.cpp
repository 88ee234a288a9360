#include <gtest/gtest.h>

#include <set>

#include "rcl/cache.hpp"
#include "rcl/error.hpp"

using namespace rcl;

namespace {
CacheConfig tiny(unsigned ways, unsigned sets_bits = 2) { return {Level::L1D, ways, sets_bits, 2}; }
}  // namespace

TEST(CacheConfig, DefaultsMatchPlatformSizes) {
  EXPECT_EQ(CacheConfig::l1d().capacity_bytes(), 32u * 1024);
  EXPECT_EQ(CacheConfig::l1i().capacity_bytes(), 32u * 1024);
  EXPECT_EQ(CacheConfig::llc().capacity_bytes(), 1024u * 1024);
  EXPECT_EQ(CacheConfig::llc().num_sets(), 1024u);
}

TEST(CacheConfig, Validation) {
  EXPECT_THROW(Cache(tiny(0)), ContractViolation);
  EXPECT_THROW(Cache(CacheConfig{Level::L1D, 4, 0, 0}), ContractViolation);
  EXPECT_THROW(Cache(CacheConfig{Level::L1D, 4, 17, 0}), ContractViolation);
  EXPECT_THROW(Cache(CacheConfig{Level::L1D, 4, 6, 17}), ContractViolation);
  EXPECT_NO_THROW(Cache(CacheConfig{Level::L1D, 4, 6, 0}));
}

TEST(Cache, LruEvictsOldestOfWPlusOne) {
  Cache c(tiny(4));
  for (Addr a = 1; a <= 4; ++a) EXPECT_FALSE(c.fill(0, {a * 64, a * 64, false}).has_value());
  const auto victim = c.fill(0, {5 * 64, 5 * 64, false});
  ASSERT_TRUE(victim);
  EXPECT_EQ(victim->pline, 64u);
  EXPECT_FALSE(c.contains(0, 64));
}

TEST(Cache, TouchProtectsFromNextEviction) {
  Cache c(tiny(4));
  for (Addr a = 1; a <= 4; ++a) c.fill(0, {a * 64, a * 64, false});
  EXPECT_TRUE(c.touch(0, 64, false));
  const auto victim = c.fill(0, {5 * 64, 5 * 64, false});
  ASSERT_TRUE(victim);
  EXPECT_EQ(victim->pline, 128u);
  EXPECT_TRUE(c.contains(0, 64));
}

TEST(Cache, SetsAreMruFirst) {
  Cache c(tiny(3));
  c.fill(1, {64, 64, false});
  c.fill(1, {128, 128, false});
  c.fill(1, {192, 192, false});
  c.touch(1, 64, true);
  const auto l = c.lines(1);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0].pline, 64u);
  EXPECT_TRUE(l[0].dirty);
  EXPECT_EQ(l[1].pline, 192u);
  EXPECT_EQ(l[2].pline, 128u);
}

TEST(Cache, InvalidateAndOccupancy) {
  Cache c(tiny(2));
  c.fill(0, {64, 64, true});
  c.fill(2, {128, 128, false});
  EXPECT_EQ(c.occupancy(), 2u);
  const auto gone = c.invalidate(0, 64);
  ASSERT_TRUE(gone);
  EXPECT_TRUE(gone->dirty);
  EXPECT_FALSE(c.invalidate(0, 64));
  EXPECT_EQ(c.invalidate_set(2).size(), 1u);
  EXPECT_TRUE(c.invalidate_set(3).empty());
  EXPECT_EQ(c.occupancy(), 0u);
}

TEST(Cache, RandomReplacementIsSeededAndKeepsSetsDuplicateFree) {
  auto run = [](std::uint64_t seed) {
    CacheConfig cfg = tiny(4);
    cfg.replacement = Replacement::Random;
    Cache c(cfg, seed);
    std::vector<Addr> victims;
    for (Addr a = 1; a <= 64; ++a)
      if (auto v = c.fill(0, {a * 64, a * 64, false})) victims.push_back(v->pline);
    std::set<Addr> tags;
    for (const auto& l : c.lines(0)) tags.insert(l.pline);
    EXPECT_EQ(tags.size(), c.lines(0).size());
    return victims;
  };
  EXPECT_EQ(run(1), run(1));
  EXPECT_NE(run(1), run(2));
}
