#include "rcl/attacker.hpp"

#include <algorithm>
#include <set>

#include "rcl/error.hpp"

namespace rcl {

LatencyThresholds LatencyThresholds::from(const LatencyConfig& lat, std::uint32_t jitter) {
  const std::uint32_t l1 = lat.l1_hit + std::max(lat.rcl_serial, lat.replay);
  return {l1 + jitter, l1 + lat.llc_hit + lat.llc_rt + jitter};
}

LatencyClass LatencyThresholds::classify(std::uint32_t cycles) const {
  if (cycles <= l1_max) return LatencyClass::L1;
  if (cycles <= llc_max) return LatencyClass::Llc;
  return LatencyClass::Memory;
}

CacheOracle::CacheOracle(CacheHierarchy& h, unsigned core, std::uint32_t jitter,
                         std::uint64_t jitter_seed)
    : h_(h),
      core_(core),
      jitter_(jitter),
      rng_(jitter_seed),
      thresholds_(LatencyThresholds::from(h.config().latency, jitter)) {}

std::uint32_t CacheOracle::load(Addr va) {
  ++loads_;
  std::uint32_t cycles = h_.access(core_, AccessKind::Read, va).cycles;
  if (jitter_ > 0) {
    const auto delta = static_cast<std::int64_t>(rng_.below(2 * std::uint64_t{jitter_} + 1)) -
                       static_cast<std::int64_t>(jitter_);
    cycles = static_cast<std::uint32_t>(std::max<std::int64_t>(0, cycles + delta));
  }
  return cycles;
}

VictimModel::VictimModel(CacheHierarchy& h, unsigned core, Addr page, std::uint32_t secret)
    : h_(h), core_(core), page_(page), secret_(secret) {
  if (page % kPageBytes != 0) throw ContractViolation("victim page must be page aligned");
  if (secret >= kLinesPerPage) throw ContractViolation("victim secret must be a line within one page");
}

void VictimModel::invoke() { h_.access(core_, AccessKind::Read, line()); }

EvictionSet build_congruent_set(const PageMap& map, Addr probe, std::size_t count,
                                unsigned stride_bits) {
  EvictionSet es;
  es.target_probe = line_address(probe);
  es.lines.reserve(count);
  const Addr stride = Addr{1} << stride_bits;
  for (std::size_t i = 1; i <= count; ++i) {
    const Addr line = es.target_probe + i * stride;
    if (!map.is_mapped(line))
      throw AllocationError("attacker region too small for the requested congruent set");
    es.lines.push_back(line);
  }
  return es;
}

bool evicts_from_l1(CacheOracle& oracle, std::span<const Addr> lines, Addr probe) {
  oracle.load(probe);
  for (Addr a : lines) oracle.load(a);
  return oracle.classify(oracle.load(probe)) != LatencyClass::L1;
}

bool EvictionTester::evicts(std::span<const Addr> lines) {
  ++tests_;
  for (Addr a : flush_) oracle_.load(a);
  oracle_.load(probe_);
  for (Addr a : lines) oracle_.load(a);
  const bool gone = oracle_.classify(oracle_.load(probe_)) == LatencyClass::Memory;
  if (after_) after_();
  return gone;
}

namespace {

void trim_one_by_one(EvictionTester& tester, std::vector<Addr>& set, const SearchOptions& opts) {
  std::size_t i = 0;
  while (set.size() > opts.assoc && i < set.size()) {
    const Addr candidate = set[i];
    set.erase(set.begin() + static_cast<std::ptrdiff_t>(i));
    if (tester.evicts(set)) {
      if (opts.on_step) opts.on_step(set.size());
    } else {
      set.insert(set.begin() + static_cast<std::ptrdiff_t>(i), candidate);
      ++i;
    }
  }
}

void trim_by_groups(EvictionTester& tester, std::vector<Addr>& set, const SearchOptions& opts) {
  std::vector<Addr> rest;
  while (set.size() > opts.assoc) {
    const std::size_t groups = opts.assoc + 1;
    const std::size_t n = set.size();
    bool dropped = false;
    for (std::size_t g = 0; g < groups && !dropped; ++g) {
      const std::size_t lo = n * g / groups;
      const std::size_t hi = n * (g + 1) / groups;
      if (lo == hi) continue;
      rest.assign(set.begin(), set.begin() + static_cast<std::ptrdiff_t>(lo));
      rest.insert(rest.end(), set.begin() + static_cast<std::ptrdiff_t>(hi), set.end());
      if (tester.evicts(rest)) {
        set.swap(rest);
        dropped = true;
        if (opts.on_step) opts.on_step(set.size());
      }
    }
    if (!dropped) break;
  }
  trim_one_by_one(tester, set, opts);
}

}  // namespace

SearchResult auto_search_evset(CacheOracle& oracle, std::span<const Addr> pool, Addr probe,
                               const SearchOptions& opts) {
  const std::uint64_t loads_before = oracle.loads();
  EvictionTester tester(oracle, line_address(probe), opts.l1_flush, opts.after_test);
  SearchResult result;
  result.set.target_probe = line_address(probe);

  std::vector<Addr> set;
  set.reserve(pool.size());
  for (Addr a : pool)
    if (line_address(a) != result.set.target_probe) set.push_back(line_address(a));

  if (!tester.evicts(set)) {
    result.status = SearchStatus::PoolInsufficient;
  } else {
    if (opts.variant == SearchVariant::GroupTesting)
      trim_by_groups(tester, set, opts);
    else
      trim_one_by_one(tester, set, opts);
    result.status = tester.evicts(set) ? SearchStatus::Found : SearchStatus::Unstable;
    result.set.lines = std::move(set);
  }
  result.tests = tester.tests();
  result.loads = oracle.loads() - loads_before;
  return result;
}

ProbeReport prime_probe(CacheOracle& oracle, std::span<const EvictionSet> evsets,
                        VictimModel* victim, unsigned l1_set_bits,
                        const std::function<void()>& on_phase) {
  for (const EvictionSet& es : evsets)
    for (Addr a : es.lines) oracle.load(a);
  if (on_phase) on_phase();

  if (victim) {
    victim->invoke();
    if (on_phase) on_phase();
  }

  ProbeReport report;
  for (const EvictionSet& es : evsets) {
    for (Addr a : es.lines) {
      const std::uint32_t t = oracle.load(a);
      if (oracle.classify(t) != LatencyClass::Memory) continue;
      if (!report.inferred) report.inferred = index_baseline(a, l1_set_bits);
      report.missed.push_back(a);
      report.miss_cycles.push_back(t);
    }
  }
  if (on_phase) on_phase();
  return report;
}

ScatterMetric scatter_metric(const EvictionSet& evset, const CacheHierarchy& h, unsigned core) {
  std::set<std::uint32_t> llc, l1;
  for (Addr a : evset.lines) {
    llc.insert(h.llc_set_of(a));
    l1.insert(h.l1_set_of(core, Level::L1D, a));
  }
  return {llc.size(), l1.size()};
}

}  // namespace rcl
