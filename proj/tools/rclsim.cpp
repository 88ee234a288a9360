// rclsim: command-line driver for the cache simulator and attack harness.
//
// Exit status: 0 ok, 1 config/trace error, 2 simulation fault,
// 3 a requested check (--expect-*, --min-success, --max-success) failed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rcl/config.hpp"
#include "rcl/error.hpp"
#include "rcl/experiment.hpp"
#include "rcl/indexing.hpp"
#include "rcl/text.hpp"
#include "rcl/trace.hpp"

namespace fs = std::filesystem;
using namespace rcl;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSimFault = 2;
constexpr int kCheckFailed = 3;

struct Common {
  std::string config;
  std::string seed;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "experiment config file");
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "master seed (hex), overrides the config");
  sub->add_option("--out", c.out, "output directory");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (!c.seed.empty()) {
    const auto s = text::parse_hex(c.seed);
    if (!s) throw ConfigError(0, "--seed expects a hex value, got '" + c.seed + "'");
    cfg.hierarchy.master_seed = *s;
  }
  return cfg;
}

void write_or_print(const std::string& out, const std::string& name, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(out);
  std::ofstream f(fs::path(out) / name, std::ios::binary);
  if (!f) throw Error("cannot write " + (fs::path(out) / name).string());
  f << content;
}

int cmd_simulate(const Common& c, const std::string& trace_path) {
  ExperimentConfig cfg = load(c);
  if (!trace_path.empty()) cfg.trace = trace_path;
  if (cfg.trace.empty()) throw ConfigError(0, "no trace given (config key 'trace' or --trace)");
  fs::path tp = cfg.trace;
  if (trace_path.empty() && tp.is_relative() && !c.config.empty())
    tp = fs::path(c.config).parent_path() / tp;
  cfg.trace = tp.lexically_normal().string();
  const auto events = load_trace(cfg.trace);
  run_simulate(cfg, events, c.out.empty() ? "out" : c.out);
  return kOk;
}

int cmd_attack(const Common& c, const std::string& scenario, std::optional<unsigned> trials,
               std::optional<unsigned> threads, std::optional<double> min_success,
               std::optional<double> max_success) {
  ExperimentConfig cfg = load(c);
  if (!scenario.empty()) {
    const auto s = parse_attack_scenario(scenario);
    if (!s) throw ConfigError(0, "unknown scenario '" + scenario + "'");
    cfg.attack.scenario = *s;
  }
  if (trials) cfg.attack.trials = *trials;
  if (threads) cfg.attack.threads = std::max(1u, *threads);
  const auto rows = run_attack(cfg, c.out.empty() ? "out" : c.out);

  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.success;
  const double rate = rows.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(rows.size());
  std::cout << to_string(cfg.attack.scenario) << ' ' << to_string(cfg.mode) << ": " << ok << '/'
            << rows.size() << " successful (" << format_fixed(rate, 6) << ")\n";
  if (min_success && rate < *min_success) return kCheckFailed;
  if (max_success && rate > *max_success) return kCheckFailed;
  return kOk;
}

int cmd_bitmap(const Common& c, std::optional<std::uint32_t> target, std::optional<std::size_t> expect) {
  ExperimentConfig cfg = load(c);
  if (target) cfg.bitmap.target_set = *target;
  const BitmapRun run = c.out.empty() ? run_bitmap(cfg) : write_bitmap(cfg, c.out);
  if (c.out.empty()) std::cout << bitmap_pbm(cfg, run);
  else std::cout << "period=" << run.period << " pages\n";
  if (expect && run.period != *expect) return kCheckFailed;
  return kOk;
}

int cmd_gen_trace(const Common& c, const std::string& kind, TraceGenOptions opts) {
  const auto k = parse_trace_kind(kind);
  if (!k) throw ConfigError(0, "unknown trace kind '" + kind + "'");
  opts.kind = *k;
  if (!c.seed.empty()) {
    const auto s = text::parse_hex(c.seed);
    if (!s) throw ConfigError(0, "--seed expects a hex value");
    opts.seed = *s;
  }
  if (opts.code_pages == 0 || opts.code_pages > kTraceMaxCodePages || opts.data_pages == 0 ||
      opts.data_pages > kTraceMaxDataPages)
    throw ConfigError(0, "code pages must be 1..4 and data pages 1..8");
  const auto events = generate_trace(opts);
  std::string content = "# " + std::string(to_string(opts.kind)) + " seed=" + text::hex(opts.seed) + "\n";
  content += "# alloc = " + text::hex(kTraceCodeBase) + " " + std::to_string(opts.code_pages) + " random-permutation\n";
  content += "# alloc = " + text::hex(kTraceDataBase) + " " + std::to_string(opts.data_pages) + " random-permutation\n";
  content += format_trace(events);
  write_or_print(c.out, "trace.txt", content);
  return kOk;
}

int cmd_dump_rt(const Common& c) {
  const ExperimentConfig cfg = load(c);
  CacheHierarchy h = build_hierarchy(cfg);
  std::vector<CacheId> ids;
  for (unsigned core = 0; core < h.cores(); ++core) {
    ids.push_back({core, Level::L1I});
    ids.push_back({core, Level::L1D});
  }
  ids.push_back({0, Level::LLC});
  for (const auto& id : ids) {
    if (c.out.empty()) std::cout << "# " << id.name() << '\n';
    write_or_print(c.out, id.name() + ".rt", dump_random_table(h.table(id)));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remapped cache layout simulator"};
  app.require_subcommand(1);

  Common sim_c, atk_c, bmp_c, gen_c, rt_c;
  std::string trace_path;
  auto* sim = app.add_subcommand("simulate", "replay a trace; write counters, overhead and event log");
  add_common(sim, sim_c, true);
  sim->add_option("--trace", trace_path, "trace file (overrides the config)");

  std::string scenario;
  std::optional<unsigned> trials, threads;
  std::optional<double> min_success, max_success;
  auto* atk = app.add_subcommand("attack", "run seeded attack trials");
  add_common(atk, atk_c, false);
  atk->add_option("--scenario", scenario, "congruent | auto-search | prime-probe | noise");
  atk->add_option("--trials", trials, "number of trials");
  atk->add_option("--threads", threads, "worker threads");
  atk->add_option("--min-success", min_success, "exit 3 when the success rate is lower");
  atk->add_option("--max-success", max_success, "exit 3 when the success rate is higher");

  std::optional<std::uint32_t> target;
  std::optional<std::size_t> expect_period;
  auto* bmp = app.add_subcommand("bitmap", "same-set bitmap of a large page (PBM)");
  add_common(bmp, bmp_c, false);
  bmp->add_option("--target-set", target, "set index to plot");
  bmp->add_option("--expect-period", expect_period, "exit 3 unless the period matches");

  std::string kind = "streaming";
  TraceGenOptions gen_opts;
  auto* gen = app.add_subcommand("gen-trace", "write a synthetic trace");
  add_common(gen, gen_c, false);
  gen->add_option("--kind", kind, "streaming | pointer-chase | multi-page");
  gen->add_option("--length", gen_opts.length, "instruction fetches");
  gen->add_option("--code-pages", gen_opts.code_pages, "code footprint in pages (1-4)");
  gen->add_option("--data-pages", gen_opts.data_pages, "data footprint in pages (1-8)");

  auto* rt = app.add_subcommand("dump-rt", "print every random table");
  add_common(rt, rt_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(sim_c, trace_path);
    if (*atk) return cmd_attack(atk_c, scenario, trials, threads, min_success, max_success);
    if (*bmp) return cmd_bitmap(bmp_c, target, expect_period);
    if (*gen) return cmd_gen_trace(gen_c, kind, gen_opts);
    if (*rt) return cmd_dump_rt(rt_c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const TraceError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kConfigError;
  } catch (const AllocationError& e) {
    std::cerr << "allocation error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return kSimFault;
  }
  return kOk;
}
