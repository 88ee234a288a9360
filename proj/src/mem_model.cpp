#include "rcl/mem_model.hpp"

#include <sstream>

#include "rcl/error.hpp"

namespace rcl {

std::string_view to_string(AllocPolicy p) {
  switch (p) {
    case AllocPolicy::Identity: return "identity";
    case AllocPolicy::Sequential: return "sequential";
    case AllocPolicy::RandomPermutation: return "random-permutation";
    case AllocPolicy::LargePage: return "large-page";
  }
  return "?";
}

std::optional<AllocPolicy> parse_alloc_policy(std::string_view s) {
  if (s == "identity") return AllocPolicy::Identity;
  if (s == "sequential") return AllocPolicy::Sequential;
  if (s == "random-permutation") return AllocPolicy::RandomPermutation;
  if (s == "large-page") return AllocPolicy::LargePage;
  return std::nullopt;
}

PageMap::PageMap(PhysPool pool, std::uint64_t seed)
    : pool_(pool),
      used_(pool.bytes / kPageBytes, false),
      perm_rng_(derive_seed(seed, "alloc.permutation")),
      frame_rng_(derive_seed(seed, "alloc.large-page")) {
  if (pool_.base % kPageBytes != 0 || pool_.bytes % kPageBytes != 0 || pool_.bytes == 0)
    throw AllocationError("physical pool must be a non-empty page-aligned range");
}

bool PageMap::ppn_free(std::uint64_t ppn) const {
  const std::uint64_t first = pool_first_ppn();
  if (ppn < first || ppn >= first + pool_pages()) return false;
  return !used_[ppn - first];
}

void PageMap::claim(std::uint64_t vpn, std::uint64_t ppn) {
  used_[ppn - pool_first_ppn()] = true;
  entries_.emplace(vpn, ppn);
}

std::optional<std::uint64_t> PageMap::next_permuted_ppn() {
  const std::uint64_t n = pool_pages();
  auto slot = [&](std::uint64_t i) {
    auto it = perm_swaps_.find(i);
    return it == perm_swaps_.end() ? i : it->second;
  };
  while (perm_drawn_ < n) {
    const std::uint64_t i = perm_drawn_++;
    const std::uint64_t j = i + perm_rng_.below(n - i);
    const std::uint64_t vi = slot(i);
    const std::uint64_t vj = slot(j);
    perm_swaps_[j] = vi;
    perm_swaps_.erase(i);
    const std::uint64_t ppn = pool_first_ppn() + vj;
    if (ppn_free(ppn)) return ppn;
  }
  return std::nullopt;
}

void PageMap::allocate(Addr vbase, std::uint64_t npages, AllocPolicy policy) {
  if (vbase % kPageBytes != 0) throw AllocationError("allocation base must be page aligned");
  const std::uint64_t vpn0 = page_number(vbase);
  for (std::uint64_t i = 0; i < npages; ++i) {
    if (entries_.count(vpn0 + i)) {
      std::ostringstream os;
      os << "virtual page 0x" << std::hex << page_base(vpn0 + i) << " already mapped";
      throw AllocationError(os.str());
    }
  }

  std::vector<std::uint64_t> ppns;
  ppns.reserve(npages);
  switch (policy) {
    case AllocPolicy::Identity:
      for (std::uint64_t i = 0; i < npages; ++i) {
        if (!ppn_free(vpn0 + i))
          throw AllocationError("identity mapping needs a free in-pool physical page");
        ppns.push_back(vpn0 + i);
      }
      break;
    case AllocPolicy::Sequential: {
      std::uint64_t ppn = pool_first_ppn() + sequential_cursor_;
      const std::uint64_t end = pool_first_ppn() + pool_pages();
      while (ppns.size() < npages && ppn < end) {
        if (ppn_free(ppn)) ppns.push_back(ppn);
        ++ppn;
      }
      if (ppns.size() < npages) throw AllocationError("physical pool exhausted");
      sequential_cursor_ = ppn - pool_first_ppn();
      break;
    }
    case AllocPolicy::RandomPermutation:
      while (ppns.size() < npages) {
        auto ppn = next_permuted_ppn();
        if (!ppn) throw AllocationError("physical pool exhausted");
        ppns.push_back(*ppn);
      }
      break;
    case AllocPolicy::LargePage: {
      if (vbase % kLargePageBytes != 0 || npages % kPagesPerLargePage != 0)
        throw AllocationError("large-page allocation needs a 2 MiB aligned base and a multiple of 512 pages");
      const Addr first_frame = (pool_.base + kLargePageBytes - 1) & ~(kLargePageBytes - 1);
      std::vector<std::uint64_t> frames;
      for (Addr f = first_frame; f + kLargePageBytes <= pool_.base + pool_.bytes; f += kLargePageBytes) {
        bool free = true;
        for (std::uint64_t p = 0; p < kPagesPerLargePage && free; ++p)
          free = ppn_free(page_number(f) + p);
        if (free) frames.push_back(page_number(f));
      }
      const std::uint64_t needed = npages / kPagesPerLargePage;
      if (frames.size() < needed) throw AllocationError("no free 2 MiB physical frame in pool");
      for (std::uint64_t r = 0; r < needed; ++r) {
        const std::uint64_t pick = frame_rng_.below(frames.size());
        const std::uint64_t frame = frames[pick];
        frames.erase(frames.begin() + static_cast<std::ptrdiff_t>(pick));
        large_pages_.push_back({vbase + r * kLargePageBytes, page_base(frame)});
        for (std::uint64_t p = 0; p < kPagesPerLargePage; ++p) ppns.push_back(frame + p);
      }
      break;
    }
  }

  for (std::uint64_t i = 0; i < npages; ++i) claim(vpn0 + i, ppns[i]);
}

std::optional<std::uint64_t> PageMap::lookup(std::uint64_t vpn) const {
  auto it = entries_.find(vpn);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Addr PageMap::translate(Addr va) const {
  auto ppn = lookup(page_number(va));
  if (!ppn) throw TranslationFault(va);
  return page_base(*ppn) | page_offset(va);
}

bool PageMap::is_physically_contiguous(Addr vbase, std::uint64_t npages) const {
  auto first = lookup(page_number(vbase));
  if (!first) return false;
  for (std::uint64_t i = 1; i < npages; ++i) {
    auto ppn = lookup(page_number(vbase) + i);
    if (!ppn || *ppn != *first + i) return false;
  }
  return true;
}

Translation translate(const PageMap& map, Tlb& tlb, Addr va) {
  const std::uint64_t vpn = page_number(va);
  ++tlb.counters_.accesses;
  if (const std::uint64_t* ppn = tlb.entries_.find(vpn))
    return {page_base(*ppn) | page_offset(va), true};
  ++tlb.counters_.misses;
  const Addr pa = map.translate(va);
  tlb.entries_.put(vpn, page_number(pa));
  return {pa, false};
}

}  // namespace rcl
