#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rcl/hierarchy.hpp"
#include "rcl/random.hpp"

namespace rcl {

struct EvictionSet {
  std::vector<Addr> lines;  // attacker virtual line addresses
  Addr target_probe = 0;
};

enum class LatencyClass { L1, Llc, Memory };

struct LatencyThresholds {
  std::uint32_t l1_max;
  std::uint32_t llc_max;

  /// Widest L1 and LLC latencies the model can produce (any mode), plus
  /// `jitter` on each side.
  static LatencyThresholds from(const LatencyConfig& lat, std::uint32_t jitter = 0);
  LatencyClass classify(std::uint32_t cycles) const;
};

// The attacker's black-box view of the hierarchy: a timed load on one core.
class CacheOracle {
 public:
  CacheOracle(CacheHierarchy& h, unsigned core, std::uint32_t jitter = 0,
              std::uint64_t jitter_seed = 0);

  /// Loads `va` and returns the observed latency in cycles.
  std::uint32_t load(Addr va);
  LatencyClass classify(std::uint32_t cycles) const { return thresholds_.classify(cycles); }
  const LatencyThresholds& thresholds() const { return thresholds_; }
  std::uint64_t loads() const { return loads_; }
  unsigned core() const { return core_; }

 private:
  CacheHierarchy& h_;
  unsigned core_;
  std::uint32_t jitter_;
  SplitMix64 rng_;
  LatencyThresholds thresholds_;
  std::uint64_t loads_ = 0;
};

/// Victim on its own core: each invocation reads one line of a dedicated
/// page whose baseline L1 index is `secret`.
class VictimModel {
 public:
  VictimModel(CacheHierarchy& h, unsigned core, Addr page, std::uint32_t secret);

  void invoke();
  std::uint32_t secret() const { return secret_; }
  Addr line() const { return page_ + Addr{secret_} * kLineBytes; }
  unsigned core() const { return core_; }

 private:
  CacheHierarchy& h_;
  unsigned core_;
  Addr page_;
  std::uint32_t secret_;
};

/// Lines probe + i * 2^stride_bits, i = 1..count. Throws AllocationError when
/// any of them is outside the attacker's mapping.
EvictionSet build_congruent_set(const PageMap& map, Addr probe, std::size_t count,
                                unsigned stride_bits);

/// Loads probe, then `lines`, then probe again; true when the final probe
/// load misses in the L1 (latency above the L1 threshold).
bool evicts_from_l1(CacheOracle& oracle, std::span<const Addr> lines, Addr probe);

// Eviction test for the LLC search. Before each test an L1-sized flush
// buffer is walked so every attacker L1 set holds only buffer lines; this
// makes every set line reach the LLC and keeps the LLC LRU order exact.
class EvictionTester {
 public:
  EvictionTester(CacheOracle& oracle, Addr probe, std::vector<Addr> l1_flush = {},
                 std::function<void()> after_test = {})
      : oracle_(oracle), probe_(probe), flush_(std::move(l1_flush)), after_(std::move(after_test)) {}

  /// True when loading `lines` after the probe pushes the probe out of the LLC.
  bool evicts(std::span<const Addr> lines);
  std::uint64_t tests() const { return tests_; }
  Addr probe() const { return probe_; }
  CacheOracle& oracle() { return oracle_; }

 private:
  CacheOracle& oracle_;
  Addr probe_;
  std::vector<Addr> flush_;
  std::function<void()> after_;
  std::uint64_t tests_ = 0;
};

enum class SearchVariant { Reference, GroupTesting };
enum class SearchStatus { Found, PoolInsufficient, Unstable };

struct SearchResult {
  SearchStatus status = SearchStatus::PoolInsufficient;
  EvictionSet set;
  std::uint64_t tests = 0;
  std::uint64_t loads = 0;

  bool found() const { return status == SearchStatus::Found; }
};

struct SearchOptions {
  std::size_t assoc = 16;
  SearchVariant variant = SearchVariant::Reference;
  std::vector<Addr> l1_flush;
  /// Called with the working-set size after every trimming step.
  std::function<void(std::size_t)> on_step;
  /// Called after every eviction test.
  std::function<void()> after_test;
};

/// Trims `pool` to a (near) minimal subset that still evicts `probe`.
///
/// Reference variant: remove one line at a time; a line whose removal keeps
/// the probe evicted is discarded for good, otherwise it is reinstated.
/// Stops at |set| == assoc or when no line can be removed.
///
/// Group-testing variant: split into assoc+1 groups and drop any group whose
/// removal keeps the eviction; falls back to the reference trim when no group
/// can be dropped.
///
/// Fails with PoolInsufficient when the full pool does not evict the probe,
/// and with Unstable when the final set no longer evicts it on re-check.
SearchResult auto_search_evset(CacheOracle& oracle, std::span<const Addr> pool, Addr probe,
                               const SearchOptions& opts);

struct ProbeReport {
  std::optional<std::uint32_t> inferred;
  std::vector<Addr> missed;               // probe lines that went to memory
  std::vector<std::uint32_t> miss_cycles;  // their latencies
};

/// Prime with every line of every set, run the victim once (if given), then
/// reload everything. The inference is the baseline L1 index (VA[s+5:6]) of
/// the first line that missed, or nothing when no line missed.
/// `on_phase` runs after the prime, victim and probe phases.
ProbeReport prime_probe(CacheOracle& oracle, std::span<const EvictionSet> evsets,
                        VictimModel* victim, unsigned l1_set_bits,
                        const std::function<void()>& on_phase = {});

struct ScatterMetric {
  std::size_t llc_sets = 0;
  std::size_t attacker_l1_sets = 0;
};

/// White-box count of distinct LLC sets and distinct L1-D sets of `core`
/// covered by the eviction set lines.
ScatterMetric scatter_metric(const EvictionSet& evset, const CacheHierarchy& h, unsigned core = 0);

}  // namespace rcl
