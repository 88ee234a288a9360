#include <gtest/gtest.h>

#include <set>

#include "rcl/error.hpp"
#include "rcl/mem_model.hpp"

using namespace rcl;

TEST(Address, FieldsAndHelpers) {
  EXPECT_EQ(line_offset(0x1234), 0x34u);
  EXPECT_EQ(line_address(0x1234), 0x1200u);
  EXPECT_EQ(page_offset(0x1234), 0x234u);
  EXPECT_EQ(page_number(0x2040), 2u);
  EXPECT_EQ(bit_field(0x0FC0, 11, 6), 63u);
}

TEST(PageMap, IdentityMapsPageToItself) {
  PageMap m;
  m.allocate(0x0, 1, AllocPolicy::Identity);
  EXPECT_EQ(m.lookup(0), std::optional<std::uint64_t>(0));
  EXPECT_EQ(m.translate(0x234), 0x234u);
}

TEST(PageMap, IdentityTranslateKeepsAddress) {
  PageMap m;
  m.allocate(0x1000, 1, AllocPolicy::Identity);
  Tlb tlb;
  EXPECT_EQ(translate(m, tlb, 0x1234).pa, 0x1234u);
}

TEST(PageMap, LargePageIsContiguousAndAligned) {
  PageMap m({}, 5);
  m.allocate(0x200000, 512, AllocPolicy::LargePage);
  ASSERT_TRUE(m.is_physically_contiguous(0x200000, 512));
  const Addr base = m.translate(0x200000);
  EXPECT_EQ(base % kLargePageBytes, 0u);
  for (Addr off = 0; off < kLargePageBytes; off += 0x1040)
    EXPECT_EQ(m.translate(0x200000 + off) - base, off);
  ASSERT_EQ(m.large_pages().size(), 1u);
  EXPECT_EQ(m.large_pages()[0].vbase, 0x200000u);
}

TEST(PageMap, RandomPermutationDistinctAndReproducible) {
  auto ppns = [](std::uint64_t seed) {
    PageMap m({}, seed);
    m.allocate(0x10000, 4, AllocPolicy::RandomPermutation);
    std::vector<std::uint64_t> v;
    for (std::uint64_t p = 0; p < 4; ++p) v.push_back(*m.lookup(page_number(0x10000) + p));
    return v;
  };
  const auto a = ppns(1);
  EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()).size(), 4u);
  EXPECT_EQ(a, ppns(1));
  EXPECT_NE(a, ppns(2));
}

TEST(PageMap, RandomPermutationIsInjectiveOverWholePool) {
  PageMap m(PhysPool{0, 64 * kPageBytes}, 9);
  m.allocate(0x100000, 64, AllocPolicy::RandomPermutation);
  std::set<std::uint64_t> seen;
  for (std::uint64_t p = 0; p < 64; ++p) {
    const auto ppn = *m.lookup(page_number(0x100000) + p);
    EXPECT_LT(ppn, 64u);
    seen.insert(ppn);
  }
  EXPECT_EQ(seen.size(), 64u);
  EXPECT_THROW(m.allocate(0x900000, 1, AllocPolicy::RandomPermutation), AllocationError);
}

TEST(PageMap, SequentialIsContiguous) {
  PageMap m;
  m.allocate(0x5000, 8, AllocPolicy::Sequential);
  EXPECT_TRUE(m.is_physically_contiguous(0x5000, 8));
}

TEST(PageMap, PoliciesShareThePoolWithoutCollisions) {
  PageMap m(PhysPool{0, 1024 * kPageBytes}, 3);
  m.allocate(0x0, 512, AllocPolicy::LargePage);
  m.allocate(0x400000, 256, AllocPolicy::RandomPermutation);
  m.allocate(0x800000, 256, AllocPolicy::Sequential);
  std::set<std::uint64_t> seen;
  for (Addr v : {Addr{0x0}, Addr{0x400000}, Addr{0x800000}}) {
    const std::uint64_t n = v == 0 ? 512 : 256;
    for (std::uint64_t p = 0; p < n; ++p) seen.insert(*m.lookup(page_number(v) + p));
  }
  EXPECT_EQ(seen.size(), 1024u);
}

TEST(PageMap, Errors) {
  PageMap m;
  m.allocate(0x10000, 4, AllocPolicy::Sequential);
  EXPECT_THROW(m.allocate(0x12000, 4, AllocPolicy::Sequential), AllocationError);  // overlap
  EXPECT_THROW(m.allocate(0x201000, 512, AllocPolicy::LargePage), AllocationError);  // misaligned
  EXPECT_THROW(m.allocate(0x400000, 100, AllocPolicy::LargePage), AllocationError);  // not 512 pages
  EXPECT_THROW(m.translate(0x90000000), TranslationFault);
  PageMap small(PhysPool{0, 4 * kPageBytes}, 1);
  EXPECT_THROW(small.allocate(0x0, 5, AllocPolicy::Sequential), AllocationError);
  // failed requests leave the map untouched
  EXPECT_EQ(small.mapped_pages(), 0u);
}

TEST(Translate, PageBaseSubstitution) {
  PageMap m(PhysPool{0, 16 * kPageBytes}, 0);
  // sequential from an empty pool: put vpn 2 on ppn 7 by filling ppns 0..6 first
  m.allocate(0x100000, 7, AllocPolicy::Sequential);
  m.allocate(0x2000, 1, AllocPolicy::Sequential);
  ASSERT_EQ(*m.lookup(2), 7u);
  Tlb tlb;
  const Translation t = translate(m, tlb, 0x2040);
  EXPECT_EQ(t.pa, 0x7040u);
  EXPECT_FALSE(t.tlb_hit);
  EXPECT_TRUE(translate(m, tlb, 0x2FFF).tlb_hit);
}

TEST(Tlb, NinePageCycleAlwaysMissesWithEightEntries) {
  PageMap m;
  m.allocate(0x0, 9, AllocPolicy::Identity);
  Tlb tlb(8);
  for (int round = 0; round < 5; ++round)
    for (Addr p = 0; p < 9; ++p) EXPECT_FALSE(translate(m, tlb, p * kPageBytes).tlb_hit);
  EXPECT_EQ(tlb.counters().accesses, 45u);
  EXPECT_EQ(tlb.counters().misses, 45u);
  EXPECT_LE(tlb.size(), tlb.capacity());
}

TEST(Tlb, EightPageCycleHitsAfterWarmup) {
  PageMap m;
  m.allocate(0x0, 8, AllocPolicy::Identity);
  Tlb tlb(8);
  for (Addr p = 0; p < 8; ++p) translate(m, tlb, p * kPageBytes);
  for (Addr p = 0; p < 8; ++p) EXPECT_TRUE(translate(m, tlb, p * kPageBytes).tlb_hit);
}

TEST(Translate, PreservesPageOffsetProperty) {
  PageMap m({}, 11);
  m.allocate(0x40000000, 64, AllocPolicy::RandomPermutation);
  Tlb tlb;
  for (Addr va = 0x40000000; va < 0x40000000 + 64 * kPageBytes; va += 0x3C8) {
    const Addr pa = translate(m, tlb, va).pa;
    EXPECT_EQ(page_offset(pa), page_offset(va));
    EXPECT_EQ(pa, m.translate(va));  // TLB state never changes the result
  }
}
