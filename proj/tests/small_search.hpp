#pragma once

// Small-cache eviction-set search scenario shared by the unit tests and the
// acceptance binary: a 2-way, 4-set baseline LLC behind 1-way, 2-set L1s,
// with a brute-force congruence oracle computed from physical address bits.

#include <algorithm>
#include <set>
#include <vector>

#include "rcl/attacker.hpp"
#include "rcl/hierarchy.hpp"
#include "rcl/random.hpp"

namespace rcl::fixtures {

struct SmallSearchCase {
  Addr probe = 0;
  std::vector<Addr> pool;
  std::set<Addr> congruent;  // brute force: pool lines whose PA[7:6] equals the probe's
  SearchResult result;
};

inline HierarchyConfig small_search_hierarchy(std::uint64_t seed) {
  HierarchyConfig cfg;
  cfg.l1i = {Level::L1I, 1, 1, 1};
  cfg.l1d = {Level::L1D, 1, 1, 1};
  cfg.llc = {Level::LLC, 2, 2, 2};
  cfg.master_seed = seed;
  cfg.check_each_access = true;  // inclusion verified after every access
  apply_mode(cfg, Mode::Baseline);
  return cfg;
}

inline SmallSearchCase run_small_search(std::uint64_t seed, SearchVariant variant,
                                        std::size_t congruent_in_pool = 2,
                                        std::size_t pool_size = 16) {
  constexpr Addr kRegion = 0x100000, kFlush = 0x200000;
  CacheHierarchy h(small_search_hierarchy(seed));
  h.memory().allocate(kRegion, 64, AllocPolicy::RandomPermutation);
  h.memory().allocate(kFlush, 1, AllocPolicy::RandomPermutation);

  SplitMix64 rng(derive_seed(seed, "small-search"));
  auto set_bits = [&](Addr va) { return (h.memory().translate(va) >> 6) & 3; };

  SmallSearchCase c;
  c.probe = kRegion + rng.below(64 * kLinesPerPage) * kLineBytes;
  std::vector<Addr> same, other;
  for (Addr i = 0; i < 64 * kLinesPerPage; ++i) {
    const Addr va = kRegion + i * kLineBytes;
    if (va == c.probe) continue;
    (set_bits(va) == set_bits(c.probe) ? same : other).push_back(va);
  }
  auto pick = [&](std::vector<Addr>& from, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(from[i], from[i + rng.below(from.size() - i)]);
      c.pool.push_back(from[i]);
    }
  };
  pick(same, congruent_in_pool);
  pick(other, pool_size - congruent_in_pool);
  for (std::size_t i = c.pool.size(); i > 1; --i) std::swap(c.pool[i - 1], c.pool[rng.below(i)]);
  for (Addr a : c.pool)
    if (set_bits(a) == set_bits(c.probe)) c.congruent.insert(a);

  CacheOracle oracle(h, 0);
  SearchOptions opts;
  opts.assoc = 2;
  opts.variant = variant;
  opts.l1_flush = {kFlush, kFlush + kLineBytes};  // one line per L1 set
  c.result = auto_search_evset(oracle, c.pool, c.probe, opts);
  return c;
}

}  // namespace rcl::fixtures
