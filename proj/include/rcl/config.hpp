#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcl/attacker.hpp"
#include "rcl/hierarchy.hpp"
#include "rcl/mem_model.hpp"

namespace rcl {

struct AllocDirective {
  Addr vbase = 0;
  std::uint64_t npages = 0;
  AllocPolicy policy = AllocPolicy::RandomPermutation;

  friend bool operator==(const AllocDirective&, const AllocDirective&) = default;
};

enum class AttackScenario { Congruent, AutoSearch, PrimeProbe, Noise };

std::string_view to_string(AttackScenario s);
std::optional<AttackScenario> parse_attack_scenario(std::string_view s);
std::string_view to_string(SearchVariant v);
std::optional<SearchVariant> parse_search_variant(std::string_view s);

struct AttackParams {
  AttackScenario scenario = AttackScenario::PrimeProbe;
  unsigned trials = 64;
  unsigned pool_pages = 512;                         // auto-search candidate pages
  SearchVariant search = SearchVariant::GroupTesting;
  std::uint32_t jitter = 0;
  AllocPolicy congruent_alloc = AllocPolicy::LargePage;  // backing of the congruent region
  unsigned stride_bits = 0;                          // 0: L1-D set_bits + rand_bits + 6
  unsigned victim_lines = 8;                         // noise scenario
  unsigned threads = 1;

  friend bool operator==(const AttackParams&, const AttackParams&) = default;
};

struct BitmapParams {
  Level level = Level::L1D;
  std::uint32_t target_set = 0;
  Addr vbase = 0x40000000;
  std::uint64_t npages = kPagesPerLargePage;

  friend bool operator==(const BitmapParams&, const BitmapParams&) = default;
};

struct VictimParams {
  Addr page = 0x80000000;
  std::uint32_t secret = 0;
  unsigned core = 1;

  friend bool operator==(const VictimParams&, const VictimParams&) = default;
};

struct ExperimentConfig {
  Mode mode = Mode::Baseline;
  HierarchyConfig hierarchy;  // mode flags are applied when a hierarchy is built
  std::vector<AllocDirective> allocs;
  std::string trace;
  bool zero_rt = false;
  AttackParams attack;
  BitmapParams bitmap;
  VictimParams victim;

  std::uint64_t seed() const { return hierarchy.master_seed; }
  /// Hierarchy settings with the mode (and zero_rt) applied.
  HierarchyConfig effective_hierarchy() const;
  /// Semantic checks across keys; throws ConfigError(0, ...).
  void validate() const;
};

/// Flat `key = value` lines; `[section]` headers for l1i, l1d, llc, latency,
/// tlb, pt, memory, attack, bitmap, victim. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form with every key; parses back to an equal config.
std::string to_text(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace rcl
