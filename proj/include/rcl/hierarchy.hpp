#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcl/cache.hpp"
#include "rcl/indexing.hpp"
#include "rcl/mem_model.hpp"
#include "rcl/speculation.hpp"

namespace rcl {

/// Evaluated platforms: no RCL, RCL everywhere (serial TLB), RCL with
/// speculative L1s, RCL only in the LLC.
enum class Mode { Baseline, RclN, RclS, RclLlc };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);
inline constexpr Mode kAllModes[] = {Mode::Baseline, Mode::RclN, Mode::RclS, Mode::RclLlc};

struct LatencyConfig {
  std::uint32_t l1_hit = 2;      // pipelined L1 read
  std::uint32_t rcl_serial = 1;  // TLB serialized before the array (non-speculative RCL)
  std::uint32_t replay = 2;      // hash-key misprediction
  std::uint32_t llc_hit = 20;
  std::uint32_t llc_rt = 1;  // SRAM random-table lookup in an RCL LLC
  std::uint32_t memory = 100;
};

struct HierarchyConfig {
  CacheConfig l1i = CacheConfig::l1i();
  CacheConfig l1d = CacheConfig::l1d();
  CacheConfig llc = CacheConfig::llc();
  unsigned cores = 1;
  unsigned tlb_entries = 8;
  unsigned pt_entries = 8;
  LatencyConfig latency;
  std::uint64_t master_seed = 1;
  bool zero_tables = false;
  /// Full inclusion scan after every access; throws InvariantViolation.
  bool check_each_access = false;
  PhysPool pool;
};

/// Sets indexing/speculation flags of all three cache configs for `mode`.
void apply_mode(HierarchyConfig& cfg, Mode mode);

enum class AccessKind { FetchPredicted, FetchRequested, Read, Write };

constexpr bool is_fetch(AccessKind k) {
  return k == AccessKind::FetchPredicted || k == AccessKind::FetchRequested;
}

struct CacheId {
  unsigned core = 0;
  Level level = Level::LLC;

  friend bool operator==(const CacheId&, const CacheId&) = default;
  std::string name() const;
};

struct EvictedLine {
  CacheId cache;
  Addr pline;

  friend bool operator==(const EvictedLine&, const EvictedLine&) = default;
};

struct AccessOutcome {
  Addr pa = 0;
  bool l1_hit = false;
  bool llc_hit = false;
  bool tlb_hit = false;
  std::uint32_t cycles = 0;
  bool replayed = false;
  std::vector<EvictedLine> evicted;
};

struct InclusionViolation {
  enum class Kind { MissingFromLlc, StaleIndex, DuplicateTag };
  Kind kind;
  CacheId cache;
  Addr pline;
  std::uint32_t set;

  std::string describe() const;
};

// Per-core L1-I/L1-D, a shared inclusive LLC, per-core TLB and prediction
// tables, and one independently seeded random table per cache.
//
// L1s are virtually indexed and physically tagged: the tag is the physical
// line address. Replacement is strict LRU unless a cache is configured with
// random replacement. Write-back, write-allocate.
class CacheHierarchy {
 public:
  explicit CacheHierarchy(HierarchyConfig cfg);

  const HierarchyConfig& config() const { return cfg_; }
  unsigned cores() const { return cfg_.cores; }

  PageMap& memory() { return memory_; }
  const PageMap& memory() const { return memory_; }

  /// Throws TranslationFault for unmapped `va`.
  AccessOutcome access(unsigned core, AccessKind kind, Addr va);

  /// Invalidates one LLC set and back-invalidates its lines from every L1.
  /// Returns the purged L1 lines.
  std::vector<EvictedLine> evict_llc_set(std::uint32_t set);

  /// Writes back and invalidates every cache; clears PTs and the fetch hkey.
  void flush();
  void flush_prediction_tables(unsigned core);

  /// Regenerates every random table from `master_seed`. Does not flush.
  void reinit_tables(std::uint64_t master_seed);
  void set_table(CacheId id, RandomTable rt);
  const RandomTable& table(CacheId id) const;

  /// Full scan: inclusion, stale placement, duplicate tags.
  std::vector<InclusionViolation> check_inclusion() const;

  // White-box placement helpers (attacker analysis, tests).
  std::uint32_t l1_set_of(unsigned core, Level level, Addr va) const;
  std::uint32_t llc_set_of_pa(Addr pa) const;
  std::uint32_t llc_set_of(Addr va) const { return llc_set_of_pa(memory_.translate(va)); }
  bool l1_contains(unsigned core, Level level, Addr va) const;
  bool llc_contains(Addr va) const;

  const Cache& cache(CacheId id) const;
  const Tlb& tlb(unsigned core) const { return cores_.at(core).tlb; }
  const PredictionTable& prediction_table(unsigned core, Level level) const;
  std::uint64_t predicted_fetches(unsigned core) const { return cores_.at(core).predicted_fetches; }
  std::uint64_t fetch_replays(unsigned core) const { return cores_.at(core).fetch_replays; }
  std::uint64_t total_cycles() const { return total_cycles_; }

 private:
  struct Core {
    Core(const HierarchyConfig& cfg, unsigned id);
    Cache l1i;
    Cache l1d;
    Tlb tlb;
    PredictionTable pt_i;
    PredictionTable pt_d;
    RandomTable rt_i;
    RandomTable rt_d;
    std::optional<std::uint32_t> prev_fetch_hkey;
    std::uint64_t predicted_fetches = 0;
    std::uint64_t fetch_replays = 0;
  };

  std::uint32_t l1_set(const Cache& c, const RandomTable& rt, Addr vline, Addr pline) const;
  void back_invalidate(Addr pline, Addr vline, bool& dirty, std::vector<EvictedLine>& out);
  void verify_or_throw() const;

  HierarchyConfig cfg_;
  PageMap memory_;
  std::vector<Core> cores_;
  Cache llc_;
  RandomTable rt_llc_;
  std::uint64_t total_cycles_ = 0;
};

}  // namespace rcl
