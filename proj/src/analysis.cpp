#include "rcl/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rcl/error.hpp"

namespace rcl {

std::size_t SetBitmap::column_weight(std::size_t page) const {
  std::size_t w = 0;
  for (std::size_t l = 0; l < lines_; ++l) w += at(page, l);
  return w;
}

bool SetBitmap::columns_equal(std::size_t a, std::size_t b) const {
  for (std::size_t l = 0; l < lines_; ++l)
    if (at(a, l) != at(b, l)) return false;
  return true;
}

std::size_t SetBitmap::period() const {
  for (std::size_t p = 1; p < pages_; ++p) {
    bool ok = true;
    for (std::size_t c = 0; c + p < pages_ && ok; ++c) ok = columns_equal(c, c + p);
    if (ok) return p;
  }
  return pages_;
}

std::string SetBitmap::to_pbm(const std::vector<std::string>& comments) const {
  std::ostringstream os;
  os << "P1\n";
  for (const auto& c : comments) os << "# " << c << '\n';
  os << pages_ << ' ' << lines_ << '\n';
  for (std::size_t l = 0; l < lines_; ++l) {
    for (std::size_t p = 0; p < pages_; ++p) os << (at(p, l) ? '1' : '0');
    os << '\n';
  }
  return os.str();
}

SetBitmap bitmap_same_set(const CacheConfig& cfg, const RandomTable& rt, const PageMap& map,
                          Addr vbase, std::size_t npages, std::uint32_t target_set) {
  if (!map.is_physically_contiguous(vbase, npages))
    throw ContractViolation("bitmap region is not physically contiguous; map it with large-page");
  if (cfg.rcl() && (rt.set_bits() != cfg.set_bits || rt.rand_bits() != cfg.rand_bits))
    throw ContractViolation("random table geometry does not match the cache");

  SetBitmap bm(npages);
  for (std::size_t p = 0; p < npages; ++p) {
    for (std::size_t l = 0; l < kLinesPerPage; ++l) {
      const Addr va = vbase + p * kPageBytes + l * kLineBytes;
      const Addr pa = map.translate(va);
      std::uint32_t index;
      if (cfg.level == Level::LLC)
        index = cfg.rcl() ? index_rcl_llc(pa, rt).index : index_baseline(pa, cfg.set_bits);
      else
        index = cfg.rcl() ? index_rcl_l1(va, pa, rt).index : index_baseline(va, cfg.set_bits);
      bm.set(p, l, index == target_set);
    }
  }
  return bm;
}

bool table_is_degenerate(const RandomTable& rt) {
  const std::size_t n = rt.size();
  for (std::size_t p = 1; p < n; ++p) {
    bool periodic = true;
    for (std::size_t i = 0; i + p < n && periodic; ++i) periodic = rt[i] == rt[i + p];
    if (periodic) return true;
  }
  return false;
}

const CounterRow* CounterReport::find(std::string_view id) const {
  for (const auto& r : rows)
    if (r.id == id) return &r;
  return nullptr;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // snprintf honours LC_NUMERIC; force a dot.
  for (char& c : buf)
    if (c == ',') c = '.';
  return buf;
}

std::string CounterReport::to_csv() const {
  std::ostringstream os;
  os << "cache_id,accesses,misses,writebacks,mpki\n";
  for (const auto& r : rows)
    os << r.id << ',' << r.accesses << ',' << r.misses << ',' << r.writebacks << ','
       << format_fixed(r.mpki, 4) << '\n';
  return os.str();
}

CounterReport mpki_report(const CacheHierarchy& h, std::uint64_t instructions) {
  if (instructions == 0) throw ContractViolation("MPKI needs a positive instruction count");
  CounterReport rep;
  rep.instructions = instructions;
  auto add = [&](std::string id, std::uint64_t acc, std::uint64_t miss, std::uint64_t wb) {
    const double mpki = static_cast<double>(miss) * 1000.0 / static_cast<double>(instructions);
    rep.rows.push_back({std::move(id), acc, miss, wb, mpki});
  };
  auto add_cache = [&](CacheId id) {
    const auto& c = h.cache(id).counters();
    add(id.name(), c.accesses, c.misses, c.writebacks);
  };

  for (unsigned core = 0; core < h.cores(); ++core) {
    add_cache({core, Level::L1I});
    add_cache({core, Level::L1D});
  }
  add_cache({0, Level::LLC});
  for (unsigned core = 0; core < h.cores(); ++core) {
    const std::string prefix = "core" + std::to_string(core);
    const auto& t = h.tlb(core).counters();
    add(prefix + ".tlb", t.accesses, t.misses, 0);
    const auto& pi = h.prediction_table(core, Level::L1I).counters();
    add(prefix + ".l1i.pt", pi.lookups, pi.mispredictions, 0);
    const auto& pd = h.prediction_table(core, Level::L1D).counters();
    add(prefix + ".l1d.pt", pd.lookups, pd.mispredictions, 0);
    add(prefix + ".l1i.replayq", h.predicted_fetches(core), h.fetch_replays(core), 0);
  }
  return rep;
}

std::string overhead_csv(std::span<const OverheadRow> rows) {
  std::ostringstream os;
  os << "mode,total_cycles,overhead_pct\n";
  for (const auto& r : rows)
    os << to_string(r.mode) << ',' << r.cycles << ',' << format_fixed(r.overhead_pct, 4) << '\n';
  return os.str();
}

}  // namespace rcl
