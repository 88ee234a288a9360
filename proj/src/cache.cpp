#include "rcl/cache.hpp"

#include <algorithm>

#include "rcl/error.hpp"

namespace rcl {

std::string_view to_string(Level l) {
  switch (l) {
    case Level::L1I: return "l1i";
    case Level::L1D: return "l1d";
    case Level::LLC: return "llc";
  }
  return "?";
}

std::string_view to_string(Replacement r) { return r == Replacement::Lru ? "lru" : "random"; }

std::optional<Replacement> parse_replacement(std::string_view s) {
  if (s == "lru") return Replacement::Lru;
  if (s == "random") return Replacement::Random;
  return std::nullopt;
}

void CacheConfig::validate() const {
  if (ways < 1 || ways > 255) throw ContractViolation("cache ways must be in [1, 255]");
  if (set_bits < 1 || set_bits > 16) throw ContractViolation("cache set_bits must be in [1, 16]");
  if (rand_bits > 16) throw ContractViolation("cache rand_bits must be in [0, 16]");
}

Cache::Cache(const CacheConfig& cfg, std::uint64_t replacement_seed)
    : cfg_(cfg), rng_(replacement_seed) {
  cfg_.validate();
  lines_.resize(std::size_t{cfg_.num_sets()} * cfg_.ways);
  fill_.assign(cfg_.num_sets(), 0);
}

int Cache::find(std::uint32_t set, Addr pline) const {
  const std::size_t b = base(set);
  for (unsigned i = 0; i < fill_[set]; ++i)
    if (lines_[b + i].pline == pline) return static_cast<int>(i);
  return -1;
}

bool Cache::touch(std::uint32_t set, Addr pline, bool make_dirty) {
  const int pos = find(set, pline);
  if (pos < 0) return false;
  auto first = lines_.begin() + static_cast<std::ptrdiff_t>(base(set));
  std::rotate(first, first + pos, first + pos + 1);
  if (make_dirty) first->dirty = true;
  return true;
}

bool Cache::contains(std::uint32_t set, Addr pline) const { return find(set, pline) >= 0; }

void Cache::mark_dirty(std::uint32_t set, Addr pline) {
  const int pos = find(set, pline);
  if (pos >= 0) lines_[base(set) + static_cast<std::size_t>(pos)].dirty = true;
}

void Cache::remove_at(std::uint32_t set, unsigned pos) {
  auto first = lines_.begin() + static_cast<std::ptrdiff_t>(base(set));
  std::move(first + pos + 1, first + fill_[set], first + pos);
  --fill_[set];
}

std::optional<CacheLine> Cache::fill(std::uint32_t set, const CacheLine& line) {
  std::optional<CacheLine> victim;
  if (fill_[set] == cfg_.ways) {
    const unsigned pos = cfg_.replacement == Replacement::Lru
                             ? cfg_.ways - 1
                             : static_cast<unsigned>(rng_.below(cfg_.ways));
    victim = lines_[base(set) + pos];
    remove_at(set, pos);
  }
  auto first = lines_.begin() + static_cast<std::ptrdiff_t>(base(set));
  std::move_backward(first, first + fill_[set], first + fill_[set] + 1);
  *first = line;
  ++fill_[set];
  return victim;
}

std::optional<CacheLine> Cache::invalidate(std::uint32_t set, Addr pline) {
  const int pos = find(set, pline);
  if (pos < 0) return std::nullopt;
  CacheLine gone = lines_[base(set) + static_cast<std::size_t>(pos)];
  remove_at(set, static_cast<unsigned>(pos));
  return gone;
}

std::vector<CacheLine> Cache::invalidate_set(std::uint32_t set) {
  auto l = lines(set);
  std::vector<CacheLine> gone(l.begin(), l.end());
  fill_[set] = 0;
  return gone;
}

std::vector<CacheLine> Cache::invalidate_all() {
  std::vector<CacheLine> gone;
  for (std::uint32_t s = 0; s < num_sets(); ++s) {
    auto l = lines(s);
    gone.insert(gone.end(), l.begin(), l.end());
    fill_[s] = 0;
  }
  return gone;
}

std::span<const CacheLine> Cache::lines(std::uint32_t set) const {
  return {lines_.data() + base(set), fill_[set]};
}

std::size_t Cache::occupancy() const {
  std::size_t n = 0;
  for (auto f : fill_) n += f;
  return n;
}

}  // namespace rcl
