#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcl/analysis.hpp"
#include "rcl/config.hpp"
#include "rcl/hierarchy.hpp"
#include "rcl/trace.hpp"

namespace rcl {

/// Fixed virtual layout used by the attack scenarios.
namespace layout {
inline constexpr Addr kLargeRegion = 0x40000000;
inline constexpr Addr kPool = 0x50000000;
inline constexpr Addr kFlushBuffer = 0x60000000;
inline constexpr Addr kProbePage = 0x70000000;
}  // namespace layout

/// Builds a hierarchy for `cfg` (mode applied) and maps its alloc directives.
CacheHierarchy build_hierarchy(const ExperimentConfig& cfg);

struct RunOptions {
  std::optional<Mode> mode;
  std::optional<unsigned> pt_entries;
  bool zero_rt = false;         // in addition to cfg.zero_rt
  bool check_inclusion = false;  // full scan after every event
};

struct EventRecord {
  std::size_t index = 0;
  TraceOp op = TraceOp::Read;
  unsigned core = 0;
  Addr va = 0;
  Addr pa = 0;
  bool accessed = false;  // false for FLUSH-PT
  bool l1_hit = false;
  bool llc_hit = false;
  bool tlb_hit = false;
  std::uint32_t cycles = 0;
  bool replayed = false;
};

struct RunResult {
  std::vector<EventRecord> events;
  CounterReport counters;
  std::uint64_t total_cycles = 0;
  std::uint64_t instructions = 0;
  std::uint64_t mispredictions = 0;  // L1-I and L1-D prediction tables, all cores
};

/// Replays `trace`. Unmapped addresses and broken invariants raise
/// SimulationFault with the event index.
RunResult run_trace(const ExperimentConfig& cfg, std::span<const TraceEvent> trace,
                    const RunOptions& opts = {});

/// Fetch events, or data events for traces without fetches.
std::uint64_t instruction_count(std::span<const TraceEvent> trace);

std::string events_csv(std::span<const EventRecord> events);

/// Runs the trace under every mode; percentages are relative to baseline.
std::vector<OverheadRow> overhead_report(const ExperimentConfig& cfg,
                                         std::span<const TraceEvent> trace);

/// Writes counters.csv, overhead.csv, events.csv and config.txt into `out`.
void run_simulate(const ExperimentConfig& cfg, std::span<const TraceEvent> trace,
                  const std::filesystem::path& out);

struct TrialRow {
  unsigned trial = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Baseline;
  AttackScenario scenario = AttackScenario::PrimeProbe;
  std::optional<std::uint32_t> secret;
  std::optional<std::uint32_t> inferred;
  std::optional<bool> correct;
  bool success = false;
  std::string status;  // search status or empty
  std::size_t set_size = 0;
  std::size_t llc_sets = 0;
  std::size_t attacker_l1_sets = 0;
  std::uint64_t tests = 0;
  std::size_t max_purged = 0;  // noise scenario
  std::vector<std::uint32_t> probe_latencies;
};

std::uint64_t trial_seed(std::uint64_t master, unsigned trial);

/// One attack trial on a fresh hierarchy seeded by trial_seed(). Inclusion is
/// verified after every access for the light scenarios and after every
/// attack phase for prime-probe and auto-search; violations throw.
TrialRow run_trial(const ExperimentConfig& cfg, unsigned trial);

/// cfg.attack.trials trials, optionally on several threads; rows are in
/// trial order.
std::vector<TrialRow> run_attack_trials(const ExperimentConfig& cfg);

std::string attack_csv(std::span<const TrialRow> rows);

/// Writes attack.csv and config.txt into `out`.
std::vector<TrialRow> run_attack(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct BitmapRun {
  SetBitmap bitmap;
  std::size_t period = 0;
  unsigned regenerations = 0;  // degenerate tables replaced before plotting
  RandomTable table;
};

/// Requires a large-page alloc directive covering the bitmap region.
BitmapRun run_bitmap(const ExperimentConfig& cfg);
std::string bitmap_pbm(const ExperimentConfig& cfg, const BitmapRun& run);

/// Writes bitmap.pbm and config.txt into `out`.
BitmapRun write_bitmap(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace rcl
