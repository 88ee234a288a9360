#include "rcl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rcl/attacker.hpp"
#include "rcl/error.hpp"
#include "rcl/random.hpp"
#include "rcl/text.hpp"

namespace rcl {

namespace {

CacheHierarchy build(const ExperimentConfig& cfg, const HierarchyConfig& hc) {
  CacheHierarchy h(hc);
  for (const auto& a : cfg.allocs) h.memory().allocate(a.vbase, a.npages, a.policy);
  return h;
}

void verify(const CacheHierarchy& h, std::string_view phase) {
  const auto v = h.check_inclusion();
  if (!v.empty()) throw InvariantViolation(std::string(phase) + ": " + v.front().describe());
}

AccessKind access_kind(TraceOp op) {
  switch (op) {
    case TraceOp::FetchPredicted: return AccessKind::FetchPredicted;
    case TraceOp::FetchRequested: return AccessKind::FetchRequested;
    case TraceOp::Write: return AccessKind::Write;
    default: return AccessKind::Read;
  }
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

std::uint64_t round_up_large(std::uint64_t bytes) {
  return (bytes + kLargePageBytes - 1) / kLargePageBytes * kPagesPerLargePage;
}

}  // namespace

CacheHierarchy build_hierarchy(const ExperimentConfig& cfg) {
  return build(cfg, cfg.effective_hierarchy());
}

std::uint64_t instruction_count(std::span<const TraceEvent> trace) {
  std::uint64_t fetches = 0, data = 0;
  for (const auto& ev : trace) {
    if (ev.op == TraceOp::FetchPredicted || ev.op == TraceOp::FetchRequested)
      ++fetches;
    else if (ev.op == TraceOp::Read || ev.op == TraceOp::Write)
      ++data;
  }
  return fetches ? fetches : data;
}

RunResult run_trace(const ExperimentConfig& cfg, std::span<const TraceEvent> trace,
                    const RunOptions& opts) {
  HierarchyConfig hc = cfg.hierarchy;
  apply_mode(hc, opts.mode.value_or(cfg.mode));
  hc.zero_tables = cfg.zero_rt || opts.zero_rt;
  if (opts.pt_entries) hc.pt_entries = *opts.pt_entries;
  const bool check = opts.check_inclusion || hc.check_each_access;
  hc.check_each_access = false;
  CacheHierarchy h = build(cfg, hc);

  RunResult res;
  res.events.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& ev = trace[i];
    EventRecord rec;
    rec.index = i;
    rec.op = ev.op;
    rec.core = ev.core;
    rec.va = ev.va;
    try {
      if (ev.core >= h.cores()) throw ContractViolation("core " + std::to_string(ev.core) + " not configured");
      if (ev.op == TraceOp::FlushPt) {
        h.flush_prediction_tables(ev.core);
      } else {
        if (ev.op == TraceOp::VictimCall) {
          if (cfg.victim.core >= h.cores()) throw ContractViolation("victim core not configured");
          rec.core = cfg.victim.core;
          rec.va = cfg.victim.page + Addr{cfg.victim.secret} * kLineBytes;
        }
        const AccessOutcome o = h.access(rec.core, access_kind(ev.op), rec.va);
        rec.accessed = true;
        rec.pa = o.pa;
        rec.l1_hit = o.l1_hit;
        rec.llc_hit = o.llc_hit;
        rec.tlb_hit = o.tlb_hit;
        rec.cycles = o.cycles;
        rec.replayed = o.replayed;
        res.mispredictions += o.replayed;
      }
      if (check) verify(h, "after event");
    } catch (const TranslationFault& e) {
      throw SimulationFault(i, e.what());
    } catch (const InvariantViolation& e) {
      throw SimulationFault(i, e.what());
    } catch (const ContractViolation& e) {
      throw SimulationFault(i, e.what());
    }
    res.events.push_back(rec);
  }
  res.total_cycles = h.total_cycles();
  res.instructions = instruction_count(trace);
  // an empty trace still gets a (zero) report
  res.counters = mpki_report(h, std::max<std::uint64_t>(res.instructions, 1));
  res.counters.instructions = res.instructions;
  return res;
}

std::string events_csv(std::span<const EventRecord> events) {
  std::ostringstream os;
  os << "index,op,core,va,pa,l1_hit,llc_hit,tlb_hit,cycles,replayed\n";
  for (const auto& e : events) {
    os << e.index << ',' << to_string(e.op) << ',' << e.core << ',';
    if (e.accessed)
      os << text::hex(e.va) << ',' << text::hex(e.pa) << ',' << e.l1_hit << ',' << e.llc_hit << ','
         << e.tlb_hit << ',' << e.cycles << ',' << e.replayed << '\n';
    else
      os << ",,,,,0,0\n";
  }
  return os.str();
}

std::vector<OverheadRow> overhead_report(const ExperimentConfig& cfg,
                                         std::span<const TraceEvent> trace) {
  std::vector<OverheadRow> rows;
  for (Mode m : kAllModes) {
    RunOptions o;
    o.mode = m;
    rows.push_back({m, run_trace(cfg, trace, o).total_cycles, 0.0});
  }
  const double base = static_cast<double>(rows.front().cycles);
  for (auto& r : rows)
    r.overhead_pct = base > 0 ? (static_cast<double>(r.cycles) - base) * 100.0 / base : 0.0;
  return rows;
}

void run_simulate(const ExperimentConfig& cfg, std::span<const TraceEvent> trace,
                  const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const RunResult r = run_trace(cfg, trace);
  const auto overhead = overhead_report(cfg, trace);
  write_file(out / "counters.csv", r.counters.to_csv());
  write_file(out / "overhead.csv", overhead_csv(overhead));
  write_file(out / "events.csv", events_csv(r.events));
  write_file(out / "config.txt", to_text(cfg));
}

std::uint64_t trial_seed(std::uint64_t master, unsigned trial) {
  return derive_seed(master, "trial", trial);
}

namespace {

void run_congruent(const ExperimentConfig& cfg, HierarchyConfig hc, TrialRow& row) {
  hc.check_each_access = true;
  CacheHierarchy h = build(cfg, hc);
  const CacheConfig& l1 = hc.l1d;
  const unsigned stride = cfg.attack.stride_bits ? cfg.attack.stride_bits : l1.set_bits + l1.rand_bits + 6;
  const std::uint64_t bytes = std::uint64_t{l1.ways} * (std::uint64_t{1} << stride) + kLineBytes;
  h.memory().allocate(layout::kLargeRegion, round_up_large(bytes), cfg.attack.congruent_alloc);

  CacheOracle oracle(h, 0, cfg.attack.jitter, derive_seed(row.seed, "jitter"));
  const Addr probe = layout::kLargeRegion;
  const EvictionSet es = build_congruent_set(h.memory(), probe, l1.ways, stride);
  row.success = evicts_from_l1(oracle, es.lines, probe);
  row.set_size = es.lines.size();
  const ScatterMetric m = scatter_metric(es, h, 0);
  row.llc_sets = m.llc_sets;
  row.attacker_l1_sets = m.attacker_l1_sets;
}

void run_auto_search(const ExperimentConfig& cfg, HierarchyConfig hc, TrialRow& row) {
  hc.check_each_access = false;
  CacheHierarchy h = build(cfg, hc);
  const CacheConfig& l1 = hc.l1d;
  // every L1 set receives one line per page, so `ways` pages fill each set
  const std::uint64_t flush_pages = std::uint64_t{l1.ways} * std::max<std::uint64_t>(1, l1.num_sets() / kLinesPerPage);
  h.memory().allocate(layout::kPool, cfg.attack.pool_pages, AllocPolicy::RandomPermutation);
  h.memory().allocate(layout::kFlushBuffer, flush_pages, AllocPolicy::RandomPermutation);
  h.memory().allocate(layout::kProbePage, 1, AllocPolicy::RandomPermutation);

  std::vector<Addr> pool;
  pool.reserve(std::size_t{cfg.attack.pool_pages} * kLinesPerPage);
  for (std::uint64_t i = 0; i < std::uint64_t{cfg.attack.pool_pages} * kLinesPerPage; ++i)
    pool.push_back(layout::kPool + i * kLineBytes);

  SearchOptions so;
  so.assoc = hc.llc.ways;
  so.variant = cfg.attack.search;
  for (std::uint64_t i = 0; i < flush_pages * kLinesPerPage; ++i)
    so.l1_flush.push_back(layout::kFlushBuffer + i * kLineBytes);
  so.after_test = [&h] { verify(h, "after eviction test"); };

  CacheOracle oracle(h, 0, cfg.attack.jitter, derive_seed(row.seed, "jitter"));
  const Addr probe = layout::kProbePage + (row.seed % kLinesPerPage) * kLineBytes;
  const SearchResult r = auto_search_evset(oracle, pool, probe, so);
  row.success = r.found();
  row.status = r.found() ? "found" : r.status == SearchStatus::PoolInsufficient ? "pool-insufficient" : "unstable";
  row.set_size = r.set.lines.size();
  row.tests = r.tests;
  if (r.found()) {
    const ScatterMetric m = scatter_metric(r.set, h, 0);
    row.llc_sets = m.llc_sets;
    row.attacker_l1_sets = m.attacker_l1_sets;
  }
}

void run_prime_probe(const ExperimentConfig& cfg, HierarchyConfig hc, TrialRow& row) {
  hc.check_each_access = false;
  hc.cores = std::max(hc.cores, cfg.victim.core + 1);
  CacheHierarchy h = build(cfg, hc);
  const CacheConfig& llc = hc.llc;
  const unsigned stride = llc.set_bits + kLineBits;
  const std::uint64_t bytes = (std::uint64_t{llc.ways} + 1) << stride;
  h.memory().allocate(layout::kLargeRegion, round_up_large(bytes), AllocPolicy::LargePage);
  h.memory().allocate(cfg.victim.page, 1, AllocPolicy::RandomPermutation);

  std::vector<EvictionSet> evsets;
  evsets.reserve(llc.num_sets());
  for (std::uint32_t j = 0; j < llc.num_sets(); ++j)
    evsets.push_back(build_congruent_set(h.memory(), layout::kLargeRegion + Addr{j} * kLineBytes, llc.ways, stride));

  const std::uint32_t secret = static_cast<std::uint32_t>((cfg.victim.secret + row.trial) % kLinesPerPage);
  VictimModel victim(h, cfg.victim.core, cfg.victim.page, secret);
  CacheOracle oracle(h, 0, cfg.attack.jitter, derive_seed(row.seed, "jitter"));
  const ProbeReport rep = prime_probe(oracle, evsets, &victim, hc.l1d.set_bits,
                                      [&h] { verify(h, "after attack phase"); });
  row.secret = secret;
  row.inferred = rep.inferred;
  row.correct = rep.inferred && *rep.inferred == secret;
  row.success = *row.correct;
  row.set_size = llc.ways;
  row.probe_latencies = rep.miss_cycles;
  const ScatterMetric m = scatter_metric(evsets[secret], h, 0);
  row.llc_sets = m.llc_sets;
  row.attacker_l1_sets = m.attacker_l1_sets;
}

void run_noise(const ExperimentConfig& cfg, HierarchyConfig hc, TrialRow& row) {
  hc.check_each_access = true;
  hc.cores = std::max(hc.cores, cfg.victim.core + 1);
  CacheHierarchy h = build(cfg, hc);
  const unsigned n = cfg.attack.victim_lines;
  h.memory().allocate(cfg.victim.page, n, AllocPolicy::RandomPermutation);

  const unsigned core = cfg.victim.core;
  std::vector<Addr> lines;
  for (unsigned p = 0; p < n; ++p)
    lines.push_back(cfg.victim.page + Addr{p} * kPageBytes + Addr{cfg.victim.secret} * kLineBytes);
  for (Addr a : lines) h.access(core, AccessKind::Read, a);

  std::vector<std::uint32_t> sets;
  std::set<std::uint32_t> l1_sets;
  for (Addr a : lines) {
    const std::uint32_t s = h.llc_set_of(a);
    if (std::find(sets.begin(), sets.end(), s) == sets.end()) sets.push_back(s);
    l1_sets.insert(h.l1_set_of(core, Level::L1D, a));
  }
  for (std::uint32_t s : sets) {
    std::size_t purged = 0;
    for (const auto& e : h.evict_llc_set(s))
      purged += e.cache == CacheId{core, Level::L1D};
    row.max_purged = std::max(row.max_purged, purged);
    verify(h, "after set eviction");
  }
  row.success = row.max_purged <= 1;
  row.set_size = n;
  row.llc_sets = sets.size();
  row.attacker_l1_sets = l1_sets.size();
}

}  // namespace

TrialRow run_trial(const ExperimentConfig& cfg, unsigned trial) {
  TrialRow row;
  row.trial = trial;
  row.seed = trial_seed(cfg.seed(), trial);
  row.mode = cfg.mode;
  row.scenario = cfg.attack.scenario;
  HierarchyConfig hc = cfg.effective_hierarchy();
  hc.master_seed = row.seed;
  switch (cfg.attack.scenario) {
    case AttackScenario::Congruent: run_congruent(cfg, hc, row); break;
    case AttackScenario::AutoSearch: run_auto_search(cfg, hc, row); break;
    case AttackScenario::PrimeProbe: run_prime_probe(cfg, hc, row); break;
    case AttackScenario::Noise: run_noise(cfg, hc, row); break;
  }
  return row;
}

std::vector<TrialRow> run_attack_trials(const ExperimentConfig& cfg) {
  const unsigned n = cfg.attack.trials;
  std::vector<TrialRow> rows(n);
  const unsigned workers = std::max(1u, std::min(cfg.attack.threads, n));
  if (workers == 1) {
    for (unsigned i = 0; i < n; ++i) rows[i] = run_trial(cfg, i);
    return rows;
  }
  std::atomic<unsigned> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (unsigned i = next++; i < n; i = next++) {
        try {
          rows[i] = run_trial(cfg, i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::string attack_csv(std::span<const TrialRow> rows) {
  std::ostringstream os;
  os << "trial,seed,mode,scenario,secret,inferred,correct,success,status,set_size,llc_sets,"
        "attacker_l1_sets,tests,max_purged,probe_latencies\n";
  for (const auto& r : rows) {
    os << r.trial << ',' << text::hex(r.seed) << ',' << to_string(r.mode) << ',' << to_string(r.scenario) << ',';
    if (r.secret) os << *r.secret;
    os << ',';
    if (r.inferred) os << *r.inferred;
    os << ',';
    if (r.correct) os << *r.correct;
    os << ',' << r.success << ',' << r.status << ',' << r.set_size << ',' << r.llc_sets << ','
       << r.attacker_l1_sets << ',' << r.tests << ',' << r.max_purged << ',';
    for (std::size_t i = 0; i < r.probe_latencies.size(); ++i)
      os << (i ? ";" : "") << r.probe_latencies[i];
    os << '\n';
  }
  return os.str();
}

std::vector<TrialRow> run_attack(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  auto rows = run_attack_trials(cfg);
  write_file(out / "attack.csv", attack_csv(rows));
  write_file(out / "config.txt", to_text(cfg));
  return rows;
}

BitmapRun run_bitmap(const ExperimentConfig& cfg) {
  const BitmapParams& bp = cfg.bitmap;
  bool covered = false;
  for (const auto& a : cfg.allocs)
    covered |= a.policy == AllocPolicy::LargePage && a.vbase <= bp.vbase &&
               bp.vbase + bp.npages * kPageBytes <= a.vbase + a.npages * kPageBytes;
  if (!covered) throw ConfigError(0, "bitmap region needs a covering large-page alloc directive");

  CacheHierarchy h = build_hierarchy(cfg);
  const CacheConfig& cc = h.cache({0, bp.level}).config();
  if (bp.target_set >= cc.num_sets()) throw ConfigError(0, "bitmap target_set outside the cache");

  RandomTable rt = h.table({0, bp.level});
  unsigned regen = 0;
  if (cc.rcl() && !cfg.zero_rt) {
    while (table_is_degenerate(rt)) {
      if (++regen > 64) throw ContractViolation("could not draw a non-degenerate table");
      rt = reinit_random_table(rt, derive_seed(rt.seed(), "regenerate", regen));
    }
  }
  SetBitmap bm = bitmap_same_set(cc, rt, h.memory(), bp.vbase, bp.npages, bp.target_set);
  const std::size_t period = bm.period();
  return {std::move(bm), period, regen, std::move(rt)};
}

std::string bitmap_pbm(const ExperimentConfig& cfg, const BitmapRun& run) {
  std::vector<std::string> comments = {
      "columns: page index from vbase " + text::hex(cfg.bitmap.vbase) + "; rows: line index within the page (top = line 0)",
      "level=" + std::string(to_string(cfg.bitmap.level)) + " mode=" + std::string(to_string(cfg.mode)) +
          " target_set=" + std::to_string(cfg.bitmap.target_set),
      "period=" + std::to_string(run.period) + " pages",
      "table_seed=" + text::hex(run.table.seed()) + " regenerations=" + std::to_string(run.regenerations),
  };
  return run.bitmap.to_pbm(comments);
}

BitmapRun write_bitmap(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  BitmapRun run = run_bitmap(cfg);
  write_file(out / "bitmap.pbm", bitmap_pbm(cfg, run));
  write_file(out / "config.txt", to_text(cfg));
  return run;
}

}  // namespace rcl
