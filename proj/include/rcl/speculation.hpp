#pragma once

#include <cstdint>
#include <optional>

#include "rcl/address.hpp"
#include "rcl/lru_table.hpp"

namespace rcl {

enum class FetchKind { Predicted, Requested };

struct PredictionCounters {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t mispredictions = 0;
  std::uint64_t updates = 0;
};

// Virtual page number -> last seen hash key, LRU replaced. A stored key is
// refreshed whenever it is found to be wrong, so after update() it always
// matches the current translation.
class PredictionTable {
 public:
  explicit PredictionTable(std::size_t entries = 8) : table_(entries) {}

  std::optional<std::uint32_t> lookup(std::uint64_t vpn);
  void update(std::uint64_t vpn, std::uint32_t hkey);
  void flush() { table_.clear(); }

  std::size_t capacity() const { return table_.capacity(); }
  std::size_t size() const { return table_.size(); }
  const PredictionCounters& counters() const { return counters_; }
  PredictionCounters& counters() { return counters_; }

 private:
  LruTable<std::uint64_t, std::uint32_t> table_;
  PredictionCounters counters_;
};

struct SpecOutcome {
  std::uint32_t extra_cycles = 0;
  bool correct = true;
  bool replay_queued = false;
};

inline constexpr std::uint32_t kReplayPenalty = 2;

/// L1-D: speculate the hash key from the PT; a miss or stale key costs a
/// replay and refreshes the PT.
SpecOutcome speculate_l1d(PredictionTable& pt, Addr va, std::uint32_t true_hkey,
                          std::uint32_t replay_penalty = kReplayPenalty);

/// L1-I: predicted fetches reuse the previous fetch's hash key; a mismatch
/// (page crossing with a different key) queues a replay on the requested path,
/// which is guaranteed correct because the mismatch updates the PT.
/// Requested fetches behave like speculate_l1d.
SpecOutcome speculate_l1i(PredictionTable& pt, std::optional<std::uint32_t> prev_hkey,
                          FetchKind kind, Addr va, std::uint32_t true_hkey,
                          std::uint32_t replay_penalty = kReplayPenalty);

}  // namespace rcl
