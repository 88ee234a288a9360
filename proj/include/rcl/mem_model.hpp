#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rcl/address.hpp"
#include "rcl/lru_table.hpp"
#include "rcl/random.hpp"

namespace rcl {

enum class AllocPolicy { Identity, Sequential, RandomPermutation, LargePage };

std::string_view to_string(AllocPolicy p);
std::optional<AllocPolicy> parse_alloc_policy(std::string_view s);

/// Physical memory the allocator may hand out. Default: 256 MiB at 0.
struct PhysPool {
  Addr base = 0;
  std::uint64_t bytes = std::uint64_t{256} << 20;
};

struct LargePageRegion {
  Addr vbase;
  Addr pbase;
};

// Page-granular VA->PA map over one shared physical pool. Attacker and victim
// live in disjoint virtual ranges of the same map, so injectivity guarantees
// they never share a physical line.
class PageMap {
 public:
  explicit PageMap(PhysPool pool = {}, std::uint64_t seed = 0);

  /// Maps [vbase, vbase + npages * 4 KiB). Throws AllocationError on overlap,
  /// pool exhaustion or a misaligned large-page request.
  void allocate(Addr vbase, std::uint64_t npages, AllocPolicy policy);

  std::optional<std::uint64_t> lookup(std::uint64_t vpn) const;
  bool is_mapped(Addr va) const { return lookup(page_number(va)).has_value(); }

  /// Throws TranslationFault when the page is unmapped.
  Addr translate(Addr va) const;

  /// True when every page in the span is mapped and PA advances with VA.
  bool is_physically_contiguous(Addr vbase, std::uint64_t npages) const;

  const std::vector<LargePageRegion>& large_pages() const { return large_pages_; }
  std::size_t mapped_pages() const { return entries_.size(); }
  const PhysPool& pool() const { return pool_; }

 private:
  std::uint64_t pool_first_ppn() const { return page_number(pool_.base); }
  std::uint64_t pool_pages() const { return pool_.bytes / kPageBytes; }
  bool ppn_free(std::uint64_t ppn) const;
  void claim(std::uint64_t vpn, std::uint64_t ppn);
  std::optional<std::uint64_t> next_permuted_ppn();

  PhysPool pool_;
  std::unordered_map<std::uint64_t, std::uint64_t> entries_;
  std::vector<bool> used_;
  std::vector<LargePageRegion> large_pages_;
  std::uint64_t sequential_cursor_ = 0;

  // Lazy Fisher-Yates over pool page indices; only swapped slots are stored.
  SplitMix64 perm_rng_;
  std::unordered_map<std::uint64_t, std::uint64_t> perm_swaps_;
  std::uint64_t perm_drawn_ = 0;
  SplitMix64 frame_rng_;
};

struct Translation {
  Addr pa;
  bool tlb_hit;
};

struct TlbCounters {
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
};

/// LRU translation cache. Affects counters only, never cycle cost.
class Tlb {
 public:
  explicit Tlb(std::size_t capacity = 8) : entries_(capacity) {}

  std::size_t capacity() const { return entries_.capacity(); }
  std::size_t size() const { return entries_.size(); }
  const TlbCounters& counters() const { return counters_; }
  void flush() { entries_.clear(); }

 private:
  friend Translation translate(const PageMap&, Tlb&, Addr);
  LruTable<std::uint64_t, std::uint64_t> entries_;
  TlbCounters counters_;
};

Translation translate(const PageMap& map, Tlb& tlb, Addr va);

}  // namespace rcl
