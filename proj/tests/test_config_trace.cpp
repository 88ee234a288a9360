#include <gtest/gtest.h>

#include <set>

#include "rcl/config.hpp"
#include "rcl/error.hpp"
#include "rcl/trace.hpp"

using namespace rcl;

TEST(Config, DefaultsWithoutAnyKeys) {
  const auto cfg = parse_config(std::string_view("# nothing\n"));
  EXPECT_EQ(cfg.mode, Mode::Baseline);
  EXPECT_EQ(cfg.hierarchy.l1d.ways, 8u);
  EXPECT_EQ(cfg.hierarchy.llc.set_bits, 10u);
  EXPECT_EQ(cfg.hierarchy.llc.rand_bits, 10u);
  EXPECT_EQ(cfg.hierarchy.pt_entries, 8u);
  EXPECT_EQ(cfg.hierarchy.tlb_entries, 8u);
  EXPECT_EQ(cfg.hierarchy.pool.bytes, 256u << 20);
}

TEST(Config, ParsesSectionsAndAllocs) {
  const auto cfg = parse_config(std::string_view(R"(
mode = rcl-s   # speculative
seed = 0xabc
alloc = 0x400000 4 random-permutation
alloc = 0x40000000 512 large-page

[l1d]
ways = 4
rand_bits = 9

[pt]
entries = 6

[attack]
scenario = auto-search
search = reference
)"));
  EXPECT_EQ(cfg.mode, Mode::RclS);
  EXPECT_EQ(cfg.seed(), 0xabcu);
  ASSERT_EQ(cfg.allocs.size(), 2u);
  EXPECT_EQ(cfg.allocs[1], (AllocDirective{0x40000000, 512, AllocPolicy::LargePage}));
  EXPECT_EQ(cfg.hierarchy.l1d.ways, 4u);
  EXPECT_EQ(cfg.hierarchy.l1d.rand_bits, 9u);
  EXPECT_EQ(cfg.hierarchy.pt_entries, 6u);
  EXPECT_EQ(cfg.attack.scenario, AttackScenario::AutoSearch);
  EXPECT_EQ(cfg.attack.search, SearchVariant::Reference);
  const auto h = cfg.effective_hierarchy();
  EXPECT_TRUE(h.l1d.rcl());
  EXPECT_EQ(h.l1d.speculation, Speculation::Predictive);
}

TEST(Config, RejectsUnknownKeysWithLineNumbers) {
  try {
    parse_config(std::string_view("mode = baseline\n\n[l1d]\nassoc = 4\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("l1d.assoc"), std::string::npos);
  }
  EXPECT_THROW(parse_config(std::string_view("[l3]\n")), ConfigError);
  EXPECT_THROW(parse_config(std::string_view("ways = 4\n")), ConfigError);  // not in the root section
}

TEST(Config, RejectsBadValues) {
  for (std::string_view bad : {"mode = fast\n", "[l1d]\nways = 0\n", "[l1d]\nset_bits = 17\n",
                               "seed = xyz\n", "alloc = 0x1000 4\n", "alloc = 0x1000 4 magic\n",
                               "zero_rt = maybe\n", "[victim]\nsecret = 64\n", "mode baseline\n",
                               "[pt\n", "mode = rcl-n\nmode = rcl-s\n"})
    EXPECT_THROW(parse_config(bad), ConfigError) << bad;
}

TEST(Config, CanonicalTextRoundTrips) {
  ExperimentConfig cfg;
  cfg.mode = Mode::RclLlc;
  cfg.hierarchy.master_seed = 0x1234;
  cfg.hierarchy.l1i.replacement = Replacement::Random;
  cfg.hierarchy.latency.memory = 200;
  cfg.allocs = {{0x400000, 4, AllocPolicy::Sequential}, {0x10000000, 8, AllocPolicy::RandomPermutation}};
  cfg.trace = "traces/a.txt";
  cfg.attack.threads = 3;
  cfg.bitmap.level = Level::LLC;
  cfg.victim.secret = 9;
  const std::string text = to_text(cfg);
  const auto back = parse_config(text);
  EXPECT_EQ(to_text(back), text);
  EXPECT_TRUE(back == cfg);
  EXPECT_EQ(back.allocs, cfg.allocs);
  EXPECT_EQ(back.trace, cfg.trace);
}

TEST(Trace, ParsesEveryKind) {
  const auto ev = parse_trace(std::string_view(R"(# header
I-predicted 0x400000
I-requested 400040   # without prefix
R 0x10000008
W 0x10000010 @1
FLUSH-PT
VICTIM-CALL @1

)"));
  ASSERT_EQ(ev.size(), 6u);
  EXPECT_EQ(ev[0], (TraceEvent{TraceOp::FetchPredicted, 0x400000, 0}));
  EXPECT_EQ(ev[1], (TraceEvent{TraceOp::FetchRequested, 0x400040, 0}));
  EXPECT_EQ(ev[3], (TraceEvent{TraceOp::Write, 0x10000010, 1}));
  EXPECT_EQ(ev[4].op, TraceOp::FlushPt);
  EXPECT_EQ(ev[5], (TraceEvent{TraceOp::VictimCall, 0, 1}));
}

TEST(Trace, ErrorsCarryLineNumbers) {
  struct Case {
    std::string_view text;
    std::size_t line;
  };
  for (auto c : {Case{"R 0x10\nX 0x20\n", 2}, Case{"R\n", 1}, Case{"\n\nW zz\n", 3},
                 Case{"FLUSH-PT 0x10\n", 1}, Case{"R 0x10 @x\n", 1}}) {
    try {
      parse_trace(c.text);
      ADD_FAILURE() << c.text;
    } catch (const TraceError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
    }
  }
}

TEST(Trace, FormatRoundTrips) {
  const std::vector<TraceEvent> ev = {{TraceOp::FetchPredicted, 0x400000, 0},
                                      {TraceOp::Read, 0x10000abc, 0},
                                      {TraceOp::FlushPt, 0, 0},
                                      {TraceOp::VictimCall, 0, 1},
                                      {TraceOp::Write, 0x20, 1}};
  const std::string text = format_trace(ev);
  EXPECT_EQ(parse_trace(text), ev);
  EXPECT_EQ(text.substr(0, text.find('\n')), "I-predicted 0x400000");
}

TEST(TraceGen, DeterministicAndWithinFootprint) {
  for (auto kind : {TraceKind::Streaming, TraceKind::PointerChase, TraceKind::MultiPage}) {
    TraceGenOptions o;
    o.kind = kind;
    o.seed = 7;
    o.code_pages = 3;
    o.data_pages = 5;
    o.length = 3000;
    const auto a = generate_trace(o);
    EXPECT_EQ(a, generate_trace(o));
    std::set<std::uint64_t> code, data;
    std::size_t fetches = 0;
    for (const auto& e : a) {
      if (e.op == TraceOp::FetchPredicted || e.op == TraceOp::FetchRequested) {
        ++fetches;
        ASSERT_GE(e.va, kTraceCodeBase);
        code.insert(page_number(e.va - kTraceCodeBase));
      } else {
        ASSERT_GE(e.va, kTraceDataBase);
        data.insert(page_number(e.va - kTraceDataBase));
      }
    }
    EXPECT_EQ(fetches, 3000u);
    EXPECT_LE(*code.rbegin(), 2u);
    EXPECT_LE(*data.rbegin(), 4u);
    o.seed = 8;
    EXPECT_NE(a, generate_trace(o));
  }
}

TEST(TraceGen, PointerChaseVisitsEveryLine) {
  TraceGenOptions o;
  o.kind = TraceKind::PointerChase;
  o.data_pages = 2;
  o.data_ratio = 1.0;
  o.length = 128;
  std::set<Addr> lines;
  for (const auto& e : generate_trace(o))
    if (e.op == TraceOp::Read || e.op == TraceOp::Write) lines.insert(line_address(e.va));
  EXPECT_EQ(lines.size(), 128u);
}

TEST(TraceGen, RejectsOversizedFootprints) {
  TraceGenOptions o;
  o.code_pages = 5;
  EXPECT_THROW(generate_trace(o), ContractViolation);
  o.code_pages = 1;
  o.data_pages = 9;
  EXPECT_THROW(generate_trace(o), ContractViolation);
}
