#include "rcl/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rcl/error.hpp"
#include "rcl/text.hpp"

namespace rcl {

std::string_view to_string(AttackScenario s) {
  switch (s) {
    case AttackScenario::Congruent: return "congruent";
    case AttackScenario::AutoSearch: return "auto-search";
    case AttackScenario::PrimeProbe: return "prime-probe";
    case AttackScenario::Noise: return "noise";
  }
  return "?";
}

std::optional<AttackScenario> parse_attack_scenario(std::string_view s) {
  for (auto v : {AttackScenario::Congruent, AttackScenario::AutoSearch, AttackScenario::PrimeProbe,
                 AttackScenario::Noise})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::string_view to_string(SearchVariant v) {
  return v == SearchVariant::Reference ? "reference" : "group-testing";
}

std::optional<SearchVariant> parse_search_variant(std::string_view s) {
  if (s == "reference") return SearchVariant::Reference;
  if (s == "group-testing") return SearchVariant::GroupTesting;
  return std::nullopt;
}

HierarchyConfig ExperimentConfig::effective_hierarchy() const {
  HierarchyConfig h = hierarchy;
  apply_mode(h, mode);
  h.zero_tables = zero_rt;
  return h;
}

void ExperimentConfig::validate() const {
  try {
    hierarchy.l1i.validate();
    hierarchy.l1d.validate();
    hierarchy.llc.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(0, e.what());
  }
  if (hierarchy.cores == 0 || hierarchy.cores > 8) throw ConfigError(0, "cores must be 1..8");
  if (hierarchy.pt_entries == 0) throw ConfigError(0, "pt entries must be positive");
  if (hierarchy.tlb_entries == 0) throw ConfigError(0, "tlb entries must be positive");
  if (hierarchy.pool.bytes == 0 || hierarchy.pool.bytes % kPageBytes || hierarchy.pool.base % kPageBytes)
    throw ConfigError(0, "memory pool must be page aligned and non-empty");
  if (victim.secret >= kLinesPerPage) throw ConfigError(0, "victim secret must be below 64");
  if (victim.page % kPageBytes) throw ConfigError(0, "victim page must be page aligned");
  if (attack.threads == 0) throw ConfigError(0, "attack threads must be positive");
  for (const auto& a : allocs)
    if (a.vbase % kPageBytes || a.npages == 0)
      throw ConfigError(0, "alloc needs a page-aligned base and a positive page count");
}

namespace {

struct Field {
  std::string_view section;
  std::string_view key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

[[noreturn]] void bad(std::string_view what) { throw std::invalid_argument(std::string(what)); }

std::uint64_t to_uint(std::string_view v, std::uint64_t lo, std::uint64_t hi) {
  const auto x = text::parse_uint(v);
  if (!x) bad("expected an unsigned integer, got '" + std::string(v) + "'");
  if (*x < lo || *x > hi)
    bad("value " + std::to_string(*x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return *x;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad("expected true or false, got '" + std::string(v) + "'");
}

template <class T, class Ref>
Field uint_field(std::string_view sec, std::string_view key, Ref ref, std::uint64_t lo,
                 std::uint64_t hi, bool hex = false) {
  return {sec, key,
          [=](ExperimentConfig& c, std::string_view v) { ref(c) = static_cast<T>(to_uint(v, lo, hi)); },
          [=](const ExperimentConfig& c) {
            const auto x = static_cast<std::uint64_t>(ref(const_cast<ExperimentConfig&>(c)));
            return hex ? text::hex(x) : std::to_string(x);
          }};
}

template <class Ref>
Field bool_field(std::string_view sec, std::string_view key, Ref ref) {
  return {sec, key, [=](ExperimentConfig& c, std::string_view v) { ref(c) = to_bool(v); },
          [=](const ExperimentConfig& c) {
            return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          }};
}

template <class T, class Ref, class Parse>
Field enum_field(std::string_view sec, std::string_view key, Ref ref, Parse parse) {
  return {sec, key,
          [=](ExperimentConfig& c, std::string_view v) {
            const std::optional<T> x = parse(v);
            if (!x) bad("unknown value '" + std::string(v) + "'");
            ref(c) = *x;
          },
          [=](const ExperimentConfig& c) { return std::string(to_string(ref(const_cast<ExperimentConfig&>(c)))); }};
}

std::optional<Level> parse_level(std::string_view s) {
  for (auto l : {Level::L1I, Level::L1D, Level::LLC})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

void add_cache_fields(std::vector<Field>& f, std::string_view sec, CacheConfig HierarchyConfig::*member) {
  auto cache = [member](ExperimentConfig& c) -> CacheConfig& { return c.hierarchy.*member; };
  f.push_back(uint_field<unsigned>(sec, "ways", [=](ExperimentConfig& c) -> unsigned& { return cache(c).ways; }, 1, 255));
  f.push_back(uint_field<unsigned>(sec, "set_bits", [=](ExperimentConfig& c) -> unsigned& { return cache(c).set_bits; }, 1, 16));
  f.push_back(uint_field<unsigned>(sec, "rand_bits", [=](ExperimentConfig& c) -> unsigned& { return cache(c).rand_bits; }, 0, 16));
  f.push_back(enum_field<Replacement>(sec, "replacement",
                                      [=](ExperimentConfig& c) -> Replacement& { return cache(c).replacement; },
                                      parse_replacement));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    using C = ExperimentConfig;
    std::vector<Field> v;
    v.push_back(enum_field<Mode>("", "mode", [](C& c) -> Mode& { return c.mode; }, parse_mode));
    v.push_back(uint_field<std::uint64_t>("", "seed", [](C& c) -> std::uint64_t& { return c.hierarchy.master_seed; },
                                          0, UINT64_MAX, true));
    v.push_back(uint_field<unsigned>("", "cores", [](C& c) -> unsigned& { return c.hierarchy.cores; }, 1, 8));
    v.push_back(bool_field("", "zero_rt", [](C& c) -> bool& { return c.zero_rt; }));
    v.push_back(bool_field("", "check_inclusion", [](C& c) -> bool& { return c.hierarchy.check_each_access; }));
    v.push_back({"", "trace", [](C& c, std::string_view x) { c.trace = std::string(x); },
                 [](const C& c) { return c.trace; }});

    add_cache_fields(v, "l1i", &HierarchyConfig::l1i);
    add_cache_fields(v, "l1d", &HierarchyConfig::l1d);
    add_cache_fields(v, "llc", &HierarchyConfig::llc);

    auto lat = [](std::string_view key, std::uint32_t LatencyConfig::*m) {
      return uint_field<std::uint32_t>("latency", key,
                                       [m](C& c) -> std::uint32_t& { return c.hierarchy.latency.*m; }, 0, 100000);
    };
    v.push_back(lat("l1_hit", &LatencyConfig::l1_hit));
    v.push_back(lat("rcl_serial", &LatencyConfig::rcl_serial));
    v.push_back(lat("replay", &LatencyConfig::replay));
    v.push_back(lat("llc_hit", &LatencyConfig::llc_hit));
    v.push_back(lat("llc_rt", &LatencyConfig::llc_rt));
    v.push_back(lat("memory", &LatencyConfig::memory));

    v.push_back(uint_field<unsigned>("tlb", "entries", [](C& c) -> unsigned& { return c.hierarchy.tlb_entries; }, 1, 4096));
    v.push_back(uint_field<unsigned>("pt", "entries", [](C& c) -> unsigned& { return c.hierarchy.pt_entries; }, 1, 4096));

    v.push_back(uint_field<Addr>("memory", "pool_base", [](C& c) -> Addr& { return c.hierarchy.pool.base; }, 0,
                                 UINT64_MAX, true));
    v.push_back(uint_field<std::uint64_t>("memory", "pool_bytes", [](C& c) -> std::uint64_t& { return c.hierarchy.pool.bytes; },
                                          kPageBytes, std::uint64_t{1} << 40, true));

    v.push_back(enum_field<AttackScenario>("attack", "scenario", [](C& c) -> AttackScenario& { return c.attack.scenario; },
                                           parse_attack_scenario));
    v.push_back(uint_field<unsigned>("attack", "trials", [](C& c) -> unsigned& { return c.attack.trials; }, 0, 10000000));
    v.push_back(uint_field<unsigned>("attack", "pool_pages", [](C& c) -> unsigned& { return c.attack.pool_pages; }, 1, 65536));
    v.push_back(enum_field<SearchVariant>("attack", "search", [](C& c) -> SearchVariant& { return c.attack.search; },
                                          parse_search_variant));
    v.push_back(uint_field<std::uint32_t>("attack", "jitter", [](C& c) -> std::uint32_t& { return c.attack.jitter; }, 0, 1000));
    v.push_back(enum_field<AllocPolicy>("attack", "congruent_alloc",
                                        [](C& c) -> AllocPolicy& { return c.attack.congruent_alloc; }, parse_alloc_policy));
    v.push_back(uint_field<unsigned>("attack", "stride_bits", [](C& c) -> unsigned& { return c.attack.stride_bits; }, 0, 40));
    v.push_back(uint_field<unsigned>("attack", "victim_lines", [](C& c) -> unsigned& { return c.attack.victim_lines; }, 1, 64));
    v.push_back(uint_field<unsigned>("attack", "threads", [](C& c) -> unsigned& { return c.attack.threads; }, 1, 256));

    v.push_back(enum_field<Level>("bitmap", "level", [](C& c) -> Level& { return c.bitmap.level; }, parse_level));
    v.push_back(uint_field<std::uint32_t>("bitmap", "target_set", [](C& c) -> std::uint32_t& { return c.bitmap.target_set; },
                                          0, 65535));
    v.push_back(uint_field<Addr>("bitmap", "vbase", [](C& c) -> Addr& { return c.bitmap.vbase; }, 0, UINT64_MAX, true));
    v.push_back(uint_field<std::uint64_t>("bitmap", "npages", [](C& c) -> std::uint64_t& { return c.bitmap.npages; }, 1,
                                          1 << 20));

    v.push_back(uint_field<Addr>("victim", "page", [](C& c) -> Addr& { return c.victim.page; }, 0, UINT64_MAX, true));
    v.push_back(uint_field<std::uint32_t>("victim", "secret", [](C& c) -> std::uint32_t& { return c.victim.secret; }, 0, 63));
    v.push_back(uint_field<unsigned>("victim", "core", [](C& c) -> unsigned& { return c.victim.core; }, 0, 7));
    return v;
  }();
  return f;
}

constexpr std::string_view kSections[] = {"",       "l1i", "l1d",    "llc",    "latency", "tlb",
                                          "pt",     "memory", "attack", "bitmap", "victim"};

AllocDirective parse_alloc(std::string_view v) {
  const auto t = text::split_ws(v);
  if (t.size() != 3) bad("alloc expects '<vbase> <npages> <policy>'");
  AllocDirective a;
  const auto base = text::parse_uint(t[0]);
  if (!base) bad("bad alloc base '" + std::string(t[0]) + "'");
  a.vbase = *base;
  a.npages = to_uint(t[1], 1, std::uint64_t{1} << 30);
  const auto pol = parse_alloc_policy(t[2]);
  if (!pol) bad("unknown allocation policy '" + std::string(t[2]) + "'");
  a.policy = *pol;
  return a;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::trim(text::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "malformed section header");
      const auto name = text::trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (auto s : kSections) known |= (!s.empty() && s == name);
      if (!known) throw ConfigError(lineno, "unknown section [" + std::string(name) + "]");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(lineno, "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    const std::string qualified = section.empty() ? std::string(key) : section + "." + std::string(key);

    try {
      if (section.empty() && key == "alloc") {
        cfg.allocs.push_back(parse_alloc(value));
        continue;
      }
      const Field* field = nullptr;
      for (const auto& f : fields())
        if (f.section == section && f.key == key) field = &f;
      if (!field) throw ConfigError(lineno, "unknown key '" + qualified + "'");
      for (const auto& s : seen)
        if (s == qualified) throw ConfigError(lineno, "duplicate key '" + qualified + "'");
      seen.push_back(qualified);
      field->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(lineno, qualified + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config " + path);
  return parse_config(in);
}

std::string to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  std::string_view section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      section = f.section;
      os << "\n[" << section << "]\n";
    }
    if (!(f.key == "trace" && cfg.trace.empty())) os << f.key << " = " << f.get(cfg) << '\n';
    if (section.empty() && f.key == "trace") {
      for (const auto& a : cfg.allocs)
        os << "alloc = " << text::hex(a.vbase) << ' ' << a.npages << ' ' << to_string(a.policy) << '\n';
    }
  }
  return os.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_text(a) == to_text(b); }

}  // namespace rcl
