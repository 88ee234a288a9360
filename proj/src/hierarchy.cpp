#include "rcl/hierarchy.hpp"

#include <sstream>

#include "rcl/error.hpp"
#include "rcl/random.hpp"

namespace rcl {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::RclN: return "rcl-n";
    case Mode::RclS: return "rcl-s";
    case Mode::RclLlc: return "rcl-llc";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : kAllModes)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

void apply_mode(HierarchyConfig& cfg, Mode mode) {
  const bool l1_rcl = mode == Mode::RclN || mode == Mode::RclS;
  const bool llc_rcl = mode != Mode::Baseline;
  const Speculation l1_speculation = mode == Mode::RclS ? Speculation::Predictive : Speculation::None;
  for (CacheConfig* c : {&cfg.l1i, &cfg.l1d}) {
    c->indexing = l1_rcl ? Indexing::Rcl : Indexing::Baseline;
    c->speculation = l1_rcl ? l1_speculation : Speculation::None;
  }
  cfg.l1i.level = Level::L1I;
  cfg.l1d.level = Level::L1D;
  cfg.llc.level = Level::LLC;
  cfg.llc.indexing = llc_rcl ? Indexing::Rcl : Indexing::Baseline;
  cfg.llc.speculation = Speculation::None;
}

std::string CacheId::name() const {
  if (level == Level::LLC) return "llc";
  std::ostringstream os;
  os << "core" << core << '.' << to_string(level);
  return os.str();
}

std::string InclusionViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::MissingFromLlc: os << "inclusion broken: "; break;
    case Kind::StaleIndex: os << "stale index: "; break;
    case Kind::DuplicateTag: os << "duplicate tag: "; break;
  }
  os << cache.name() << " set " << set << " line 0x" << std::hex << pline;
  return os.str();
}

namespace {

std::string table_label(unsigned core, Level level) {
  return CacheId{core, level}.name();
}

RandomTable make_table(const HierarchyConfig& cfg, const CacheConfig& c, const std::string& label) {
  if (cfg.zero_tables) return RandomTable::zero(c.set_bits, c.rand_bits);
  return init_random_table(c.set_bits, c.rand_bits, derive_seed(cfg.master_seed, label));
}

}  // namespace

CacheHierarchy::Core::Core(const HierarchyConfig& cfg, unsigned id)
    : l1i(cfg.l1i, derive_seed(cfg.master_seed, table_label(id, Level::L1I) + ".repl")),
      l1d(cfg.l1d, derive_seed(cfg.master_seed, table_label(id, Level::L1D) + ".repl")),
      tlb(cfg.tlb_entries),
      pt_i(cfg.pt_entries),
      pt_d(cfg.pt_entries),
      rt_i(make_table(cfg, cfg.l1i, table_label(id, Level::L1I))),
      rt_d(make_table(cfg, cfg.l1d, table_label(id, Level::L1D))) {}

CacheHierarchy::CacheHierarchy(HierarchyConfig cfg)
    : cfg_(std::move(cfg)),
      memory_(cfg_.pool, derive_seed(cfg_.master_seed, "memory")),
      llc_(cfg_.llc, derive_seed(cfg_.master_seed, "llc.repl")),
      rt_llc_(make_table(cfg_, cfg_.llc, "llc")) {
  if (cfg_.cores == 0) throw ContractViolation("hierarchy needs at least one core");
  cores_.reserve(cfg_.cores);
  for (unsigned c = 0; c < cfg_.cores; ++c) cores_.emplace_back(cfg_, c);
}

std::uint32_t CacheHierarchy::l1_set(const Cache& c, const RandomTable& rt, Addr vline,
                                     Addr pline) const {
  if (c.config().rcl()) return index_rcl_l1(vline, pline, rt).index;
  return index_baseline(vline, c.config().set_bits);
}

std::uint32_t CacheHierarchy::llc_set_of_pa(Addr pa) const {
  if (llc_.config().rcl()) return index_rcl_llc(pa, rt_llc_).index;
  return index_baseline(pa, llc_.config().set_bits);
}

std::uint32_t CacheHierarchy::l1_set_of(unsigned core, Level level, Addr va) const {
  const Core& c = cores_.at(core);
  const Addr pa = memory_.translate(va);
  if (level == Level::L1I) return l1_set(c.l1i, c.rt_i, line_address(va), line_address(pa));
  return l1_set(c.l1d, c.rt_d, line_address(va), line_address(pa));
}

bool CacheHierarchy::l1_contains(unsigned core, Level level, Addr va) const {
  const Addr pa = memory_.translate(va);
  const Cache& c = cache({core, level});
  return c.contains(l1_set_of(core, level, va), line_address(pa));
}

bool CacheHierarchy::llc_contains(Addr va) const {
  const Addr pa = memory_.translate(va);
  return llc_.contains(llc_set_of_pa(pa), line_address(pa));
}

const Cache& CacheHierarchy::cache(CacheId id) const {
  if (id.level == Level::LLC) return llc_;
  const Core& c = cores_.at(id.core);
  return id.level == Level::L1I ? c.l1i : c.l1d;
}

const PredictionTable& CacheHierarchy::prediction_table(unsigned core, Level level) const {
  const Core& c = cores_.at(core);
  return level == Level::L1I ? c.pt_i : c.pt_d;
}

const RandomTable& CacheHierarchy::table(CacheId id) const {
  if (id.level == Level::LLC) return rt_llc_;
  const Core& c = cores_.at(id.core);
  return id.level == Level::L1I ? c.rt_i : c.rt_d;
}

void CacheHierarchy::set_table(CacheId id, RandomTable rt) {
  const CacheConfig& cc = cache(id).config();
  if (rt.set_bits() != cc.set_bits || rt.rand_bits() != cc.rand_bits)
    throw ContractViolation("random table geometry does not match the cache");
  if (id.level == Level::LLC) {
    rt_llc_ = std::move(rt);
  } else {
    Core& c = cores_.at(id.core);
    (id.level == Level::L1I ? c.rt_i : c.rt_d) = std::move(rt);
  }
}

void CacheHierarchy::back_invalidate(Addr pline, Addr vline, bool& dirty,
                                     std::vector<EvictedLine>& out) {
  for (unsigned i = 0; i < cores_.size(); ++i) {
    Core& c = cores_[i];
    for (auto [cache, rt, level] : {std::tuple{&c.l1i, &c.rt_i, Level::L1I},
                                    std::tuple{&c.l1d, &c.rt_d, Level::L1D}}) {
      if (auto gone = cache->invalidate(l1_set(*cache, *rt, vline, pline), pline)) {
        out.push_back({{i, level}, pline});
        if (gone->dirty) {
          ++cache->counters().writebacks;
          dirty = true;
        }
      }
    }
  }
}

AccessOutcome CacheHierarchy::access(unsigned core, AccessKind kind, Addr va) {
  Core& c = cores_.at(core);
  const bool fetch = is_fetch(kind);
  const bool write = kind == AccessKind::Write;
  const LatencyConfig& lat = cfg_.latency;

  const Translation tr = translate(memory_, c.tlb, va);
  AccessOutcome out;
  out.pa = tr.pa;
  out.tlb_hit = tr.tlb_hit;
  out.cycles = lat.l1_hit;

  Cache& l1 = fetch ? c.l1i : c.l1d;
  const RandomTable& rt = fetch ? c.rt_i : c.rt_d;
  const Level level = fetch ? Level::L1I : Level::L1D;
  const Addr vline = line_address(va);
  const Addr pline = line_address(tr.pa);
  if (kind == AccessKind::FetchPredicted) ++c.predicted_fetches;

  std::uint32_t set;
  if (l1.config().rcl()) {
    const IndexResult ir = index_rcl_l1(va, tr.pa, rt);
    set = ir.index;
    if (l1.config().speculation == Speculation::None) {
      out.cycles += lat.rcl_serial;
    } else {
      SpecOutcome so;
      if (fetch) {
        const FetchKind fk =
            kind == AccessKind::FetchPredicted ? FetchKind::Predicted : FetchKind::Requested;
        so = speculate_l1i(c.pt_i, c.prev_fetch_hkey, fk, va, ir.hkey, lat.replay);
        if (so.replay_queued) ++c.fetch_replays;
        c.prev_fetch_hkey = ir.hkey;
      } else {
        so = speculate_l1d(c.pt_d, va, ir.hkey, lat.replay);
      }
      out.cycles += so.extra_cycles;
      out.replayed = !so.correct;
    }
  } else {
    set = index_baseline(va, l1.config().set_bits);
  }

  ++l1.counters().accesses;
  if (l1.touch(set, pline, write)) {
    out.l1_hit = true;
  } else {
    ++l1.counters().misses;
    const std::uint32_t llc_set = llc_set_of_pa(tr.pa);
    out.cycles += lat.llc_hit + (llc_.config().rcl() ? lat.llc_rt : 0);
    ++llc_.counters().accesses;
    if (llc_.touch(llc_set, pline, false)) {
      out.llc_hit = true;
    } else {
      ++llc_.counters().misses;
      out.cycles += lat.memory;
      if (auto victim = llc_.fill(llc_set, {pline, vline, false})) {
        bool dirty = victim->dirty;
        out.evicted.push_back({{0, Level::LLC}, victim->pline});
        back_invalidate(victim->pline, victim->vline, dirty, out.evicted);
        if (dirty) ++llc_.counters().writebacks;
      }
    }
    if (auto victim = l1.fill(set, {pline, vline, write})) {
      out.evicted.push_back({{core, level}, victim->pline});
      if (victim->dirty) {
        ++l1.counters().writebacks;
        llc_.mark_dirty(llc_set_of_pa(victim->pline), victim->pline);
      }
    }
  }

  total_cycles_ += out.cycles;
  if (cfg_.check_each_access) verify_or_throw();
  return out;
}

std::vector<EvictedLine> CacheHierarchy::evict_llc_set(std::uint32_t set) {
  if (set >= llc_.num_sets()) throw ContractViolation("LLC set index out of range");
  std::vector<EvictedLine> purged;
  for (const CacheLine& line : llc_.invalidate_set(set)) {
    bool dirty = line.dirty;
    back_invalidate(line.pline, line.vline, dirty, purged);
    if (dirty) ++llc_.counters().writebacks;
  }
  return purged;
}

void CacheHierarchy::flush() {
  for (Core& c : cores_) {
    for (Cache* l1 : {&c.l1i, &c.l1d}) {
      for (const CacheLine& line : l1->invalidate_all()) {
        if (!line.dirty) continue;
        ++l1->counters().writebacks;
        llc_.mark_dirty(llc_set_of_pa(line.pline), line.pline);
      }
    }
    c.pt_i.flush();
    c.pt_d.flush();
    c.prev_fetch_hkey.reset();
  }
  for (const CacheLine& line : llc_.invalidate_all())
    if (line.dirty) ++llc_.counters().writebacks;
}

void CacheHierarchy::flush_prediction_tables(unsigned core) {
  Core& c = cores_.at(core);
  c.pt_i.flush();
  c.pt_d.flush();
  c.prev_fetch_hkey.reset();
}

void CacheHierarchy::reinit_tables(std::uint64_t master_seed) {
  cfg_.master_seed = master_seed;
  for (unsigned i = 0; i < cores_.size(); ++i) {
    Core& c = cores_[i];
    c.rt_i = reinit_random_table(c.rt_i, derive_seed(master_seed, table_label(i, Level::L1I)));
    c.rt_d = reinit_random_table(c.rt_d, derive_seed(master_seed, table_label(i, Level::L1D)));
  }
  rt_llc_ = reinit_random_table(rt_llc_, derive_seed(master_seed, "llc"));
}

std::vector<InclusionViolation> CacheHierarchy::check_inclusion() const {
  using Kind = InclusionViolation::Kind;
  std::vector<InclusionViolation> found;

  auto scan_duplicates = [&](const Cache& cache, CacheId id, std::uint32_t set) {
    auto lines = cache.lines(set);
    for (std::size_t i = 0; i < lines.size(); ++i)
      for (std::size_t j = i + 1; j < lines.size(); ++j)
        if (lines[i].pline == lines[j].pline)
          found.push_back({Kind::DuplicateTag, id, lines[i].pline, set});
  };

  const CacheId llc_id{0, Level::LLC};
  for (std::uint32_t s = 0; s < llc_.num_sets(); ++s) {
    auto lines = llc_.lines(s);
    if (lines.empty()) continue;
    for (const CacheLine& line : lines)
      if (llc_set_of_pa(line.pline) != s) found.push_back({Kind::StaleIndex, llc_id, line.pline, s});
    scan_duplicates(llc_, llc_id, s);
  }

  auto llc_holds_anywhere = [&](Addr pline) {
    for (std::uint32_t s = 0; s < llc_.num_sets(); ++s)
      if (llc_.contains(s, pline)) return true;
    return false;
  };

  for (unsigned i = 0; i < cores_.size(); ++i) {
    const Core& c = cores_[i];
    for (auto [cache, rt, level] : {std::tuple{&c.l1i, &c.rt_i, Level::L1I},
                                    std::tuple{&c.l1d, &c.rt_d, Level::L1D}}) {
      const CacheId id{i, level};
      for (std::uint32_t s = 0; s < cache->num_sets(); ++s) {
        auto lines = cache->lines(s);
        if (lines.empty()) continue;
        for (const CacheLine& line : lines) {
          if (l1_set(*cache, *rt, line.vline, line.pline) != s)
            found.push_back({Kind::StaleIndex, id, line.pline, s});
          if (!llc_.contains(llc_set_of_pa(line.pline), line.pline) &&
              !llc_holds_anywhere(line.pline))
            found.push_back({Kind::MissingFromLlc, id, line.pline, s});
        }
        scan_duplicates(*cache, id, s);
      }
    }
  }
  return found;
}

void CacheHierarchy::verify_or_throw() const {
  auto v = check_inclusion();
  if (!v.empty()) throw InvariantViolation(v.front().describe());
}

}  // namespace rcl
