#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcl/address.hpp"

namespace rcl {

// Table of 2^k random s-bit hash keys. Immutable once built; reinitializing
// produces a new table with the generation bumped.
class RandomTable {
 public:
  RandomTable() = default;

  /// Entries from the seeded counter-mode generator.
  static RandomTable generate(unsigned set_bits, unsigned rand_bits, std::uint64_t seed);
  /// All-zero table: RCL indexing degenerates to the baseline index.
  static RandomTable zero(unsigned set_bits, unsigned rand_bits);
  /// Explicit entries, each must be < 2^set_bits; size must be 2^rand_bits.
  static RandomTable from_entries(unsigned set_bits, unsigned rand_bits,
                                  std::vector<std::uint32_t> entries, std::uint64_t seed = 0);

  unsigned set_bits() const { return set_bits_; }
  unsigned rand_bits() const { return rand_bits_; }
  std::uint64_t seed() const { return seed_; }
  std::uint32_t generation() const { return generation_; }
  std::size_t size() const { return entries_.size(); }
  std::uint32_t operator[](std::size_t slot) const { return entries_[slot]; }
  const std::vector<std::uint32_t>& entries() const { return entries_; }

  friend bool operator==(const RandomTable& a, const RandomTable& b) {
    return a.set_bits_ == b.set_bits_ && a.rand_bits_ == b.rand_bits_ && a.entries_ == b.entries_;
  }

 private:
  friend RandomTable reinit_random_table(const RandomTable& rt, std::uint64_t seed);

  unsigned set_bits_ = 0;
  unsigned rand_bits_ = 0;
  std::uint64_t seed_ = 0;
  std::uint32_t generation_ = 0;
  std::vector<std::uint32_t> entries_;
};

RandomTable init_random_table(unsigned set_bits, unsigned rand_bits, std::uint64_t seed);

/// Regenerates from `seed` with generation + 1. Caches indexed by the old
/// table must be flushed by the caller.
RandomTable reinit_random_table(const RandomTable& rt, std::uint64_t seed);

struct IndexResult {
  std::uint32_t index;
  std::uint32_t hkey;
  std::uint32_t rt_slot;
};

/// Conventional set index: addr[s+5:6].
constexpr std::uint32_t index_baseline(Addr addr, unsigned set_bits) {
  return static_cast<std::uint32_t>((addr >> kLineBits) & low_mask(set_bits));
}

/// Random-table slot: pa[k+s+5 : s+6], the lowest k PA bits above the set index.
constexpr std::uint32_t rt_slot(Addr pa, unsigned set_bits, unsigned rand_bits) {
  return static_cast<std::uint32_t>((pa >> (set_bits + kLineBits)) & low_mask(rand_bits));
}

/// L1 index: RT[pa slot] XOR va[s+5:6]. Throws ContractViolation if VA and PA
/// disagree on the page offset.
IndexResult index_rcl_l1(Addr va, Addr pa, const RandomTable& rt);

/// LLC index: RT[pa slot] XOR pa[s+5:6].
IndexResult index_rcl_llc(Addr pa, const RandomTable& rt);

// Text form: "rt s=<s> k=<k> seed=<hex>" then one hex entry per line.
void dump_random_table(std::ostream& os, const RandomTable& rt);
std::string dump_random_table(const RandomTable& rt);
RandomTable load_random_table(std::istream& is);

}  // namespace rcl
