#include "rcl/speculation.hpp"

namespace rcl {

std::optional<std::uint32_t> PredictionTable::lookup(std::uint64_t vpn) {
  ++counters_.lookups;
  const std::uint32_t* hkey = table_.find(vpn);
  if (!hkey) return std::nullopt;
  ++counters_.hits;
  return *hkey;
}

void PredictionTable::update(std::uint64_t vpn, std::uint32_t hkey) {
  ++counters_.updates;
  table_.put(vpn, hkey);
}

SpecOutcome speculate_l1d(PredictionTable& pt, Addr va, std::uint32_t true_hkey,
                          std::uint32_t replay_penalty) {
  const std::uint64_t vpn = page_number(va);
  const auto guess = pt.lookup(vpn);
  if (guess && *guess == true_hkey) return {};
  ++pt.counters().mispredictions;
  pt.update(vpn, true_hkey);
  return {replay_penalty, false, false};
}

SpecOutcome speculate_l1i(PredictionTable& pt, std::optional<std::uint32_t> prev_hkey,
                          FetchKind kind, Addr va, std::uint32_t true_hkey,
                          std::uint32_t replay_penalty) {
  if (kind == FetchKind::Requested) return speculate_l1d(pt, va, true_hkey, replay_penalty);
  if (prev_hkey && *prev_hkey == true_hkey) return {};
  // The failed check feeds the correct key into the PT; the replay then
  // looks it up and hits.
  pt.update(page_number(va), true_hkey);
  pt.lookup(page_number(va));
  return {replay_penalty, false, true};
}

}  // namespace rcl
