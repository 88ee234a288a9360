#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rcl/address.hpp"
#include "rcl/random.hpp"

namespace rcl {

enum class Level { L1I, L1D, LLC };
enum class Indexing { Baseline, Rcl };
enum class Speculation { None, Predictive };
enum class Replacement { Lru, Random };

std::string_view to_string(Level l);
std::string_view to_string(Replacement r);
std::optional<Replacement> parse_replacement(std::string_view s);

struct CacheConfig {
  Level level = Level::L1D;
  unsigned ways = 8;
  unsigned set_bits = 6;
  unsigned rand_bits = 6;
  Indexing indexing = Indexing::Baseline;
  Speculation speculation = Speculation::None;
  Replacement replacement = Replacement::Lru;

  std::uint32_t num_sets() const { return std::uint32_t{1} << set_bits; }
  std::uint64_t capacity_bytes() const { return std::uint64_t{ways} * num_sets() * kLineBytes; }
  bool rcl() const { return indexing == Indexing::Rcl; }

  /// Throws ContractViolation unless w >= 1, 1 <= s <= 16, 0 <= k <= 16.
  void validate() const;

  static CacheConfig l1i() { return {Level::L1I, 8, 6, 6}; }
  static CacheConfig l1d() { return {Level::L1D, 8, 6, 6}; }
  static CacheConfig llc() { return {Level::LLC, 16, 10, 10}; }
};

struct CacheLine {
  Addr pline = 0;  // physical line address (the tag)
  Addr vline = 0;  // virtual line address that filled it
  bool dirty = false;
};

struct CacheCounters {
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;

  friend bool operator==(const CacheCounters&, const CacheCounters&) = default;
};

// One set-associative array. Placement (the set index) is decided by the
// caller; this class only manages ways, recency and dirtiness. Each set is
// stored MRU-first, so the position of a line is its LRU rank.
class Cache {
 public:
  explicit Cache(const CacheConfig& cfg, std::uint64_t replacement_seed = 0);

  const CacheConfig& config() const { return cfg_; }
  std::uint32_t num_sets() const { return cfg_.num_sets(); }

  /// On hit promotes the line to MRU (and marks it dirty if asked).
  bool touch(std::uint32_t set, Addr pline, bool make_dirty);
  bool contains(std::uint32_t set, Addr pline) const;
  void mark_dirty(std::uint32_t set, Addr pline);

  /// Installs `line` as MRU; returns the victim when the set was full.
  std::optional<CacheLine> fill(std::uint32_t set, const CacheLine& line);

  std::optional<CacheLine> invalidate(std::uint32_t set, Addr pline);
  std::vector<CacheLine> invalidate_set(std::uint32_t set);
  std::vector<CacheLine> invalidate_all();

  /// Lines of one set, MRU first.
  std::span<const CacheLine> lines(std::uint32_t set) const;
  std::size_t occupancy() const;

  CacheCounters& counters() { return counters_; }
  const CacheCounters& counters() const { return counters_; }

 private:
  std::size_t base(std::uint32_t set) const { return std::size_t{set} * cfg_.ways; }
  int find(std::uint32_t set, Addr pline) const;
  void remove_at(std::uint32_t set, unsigned pos);

  CacheConfig cfg_;
  std::vector<CacheLine> lines_;
  std::vector<std::uint8_t> fill_;
  CacheCounters counters_;
  SplitMix64 rng_;
};

}  // namespace rcl
