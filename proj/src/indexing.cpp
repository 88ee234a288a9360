#include "rcl/indexing.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "rcl/error.hpp"
#include "rcl/random.hpp"

namespace rcl {

namespace {

void check_geometry(unsigned set_bits, unsigned rand_bits) {
  if (set_bits < 1 || set_bits > 16 || rand_bits > 16)
    throw ContractViolation("random table geometry out of range (1 <= s <= 16, 0 <= k <= 16)");
}

}  // namespace

RandomTable RandomTable::generate(unsigned set_bits, unsigned rand_bits, std::uint64_t seed) {
  check_geometry(set_bits, rand_bits);
  RandomTable rt;
  rt.set_bits_ = set_bits;
  rt.rand_bits_ = rand_bits;
  rt.seed_ = seed;
  const std::size_t n = std::size_t{1} << rand_bits;
  rt.entries_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    rt.entries_[i] = static_cast<std::uint32_t>(counter_word(seed, i) & low_mask(set_bits));
  return rt;
}

RandomTable RandomTable::zero(unsigned set_bits, unsigned rand_bits) {
  check_geometry(set_bits, rand_bits);
  RandomTable rt;
  rt.set_bits_ = set_bits;
  rt.rand_bits_ = rand_bits;
  rt.entries_.assign(std::size_t{1} << rand_bits, 0);
  return rt;
}

RandomTable RandomTable::from_entries(unsigned set_bits, unsigned rand_bits,
                                      std::vector<std::uint32_t> entries, std::uint64_t seed) {
  check_geometry(set_bits, rand_bits);
  if (entries.size() != (std::size_t{1} << rand_bits))
    throw ContractViolation("random table needs exactly 2^k entries");
  for (auto e : entries)
    if (e > low_mask(set_bits)) throw ContractViolation("random table entry wider than s bits");
  RandomTable rt;
  rt.set_bits_ = set_bits;
  rt.rand_bits_ = rand_bits;
  rt.seed_ = seed;
  rt.entries_ = std::move(entries);
  return rt;
}

RandomTable init_random_table(unsigned set_bits, unsigned rand_bits, std::uint64_t seed) {
  return RandomTable::generate(set_bits, rand_bits, seed);
}

RandomTable reinit_random_table(const RandomTable& rt, std::uint64_t seed) {
  RandomTable next = RandomTable::generate(rt.set_bits_, rt.rand_bits_, seed);
  next.generation_ = rt.generation_ + 1;
  return next;
}

IndexResult index_rcl_l1(Addr va, Addr pa, const RandomTable& rt) {
  if (page_offset(va) != page_offset(pa)) {
    std::ostringstream os;
    os << std::hex << "VA 0x" << va << " and PA 0x" << pa << " disagree on the page offset";
    throw ContractViolation(os.str());
  }
  const std::uint32_t slot = rt_slot(pa, rt.set_bits(), rt.rand_bits());
  const std::uint32_t hkey = rt[slot];
  return {hkey ^ index_baseline(va, rt.set_bits()), hkey, slot};
}

IndexResult index_rcl_llc(Addr pa, const RandomTable& rt) {
  const std::uint32_t slot = rt_slot(pa, rt.set_bits(), rt.rand_bits());
  const std::uint32_t hkey = rt[slot];
  return {hkey ^ index_baseline(pa, rt.set_bits()), hkey, slot};
}

void dump_random_table(std::ostream& os, const RandomTable& rt) {
  os << "rt s=" << std::dec << rt.set_bits() << " k=" << rt.rand_bits() << " seed=" << std::hex
     << rt.seed() << '\n';
  for (auto e : rt.entries()) os << e << '\n';
  os << std::dec;
}

std::string dump_random_table(const RandomTable& rt) {
  std::ostringstream os;
  dump_random_table(os, rt);
  return os.str();
}

namespace {

std::uint64_t parse_hex(const std::string& tok, std::size_t line) {
  std::string t = tok;
  if (t.rfind("0x", 0) == 0 || t.rfind("0X", 0) == 0) t = t.substr(2);
  if (t.empty()) throw ConfigError(line, "empty hex value");
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(t, &used, 16);
  } catch (const std::exception&) {
    throw ConfigError(line, "bad hex value '" + tok + "'");
  }
  if (used != t.size()) throw ConfigError(line, "bad hex value '" + tok + "'");
  return v;
}

}  // namespace

RandomTable load_random_table(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ConfigError(1, "missing random table header");
  std::istringstream hs(header);
  std::string tag, s_tok, k_tok, seed_tok;
  hs >> tag >> s_tok >> k_tok >> seed_tok;
  if (tag != "rt" || s_tok.rfind("s=", 0) != 0 || k_tok.rfind("k=", 0) != 0 ||
      seed_tok.rfind("seed=", 0) != 0)
    throw ConfigError(1, "expected header 'rt s=<s> k=<k> seed=<hex>'");
  unsigned s = 0, k = 0;
  try {
    s = static_cast<unsigned>(std::stoul(s_tok.substr(2)));
    k = static_cast<unsigned>(std::stoul(k_tok.substr(2)));
  } catch (const std::exception&) {
    throw ConfigError(1, "bad s/k in random table header");
  }
  const std::uint64_t seed = parse_hex(seed_tok.substr(5), 1);

  std::vector<std::uint32_t> entries;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    entries.push_back(static_cast<std::uint32_t>(parse_hex(line, lineno)));
  }
  try {
    return RandomTable::from_entries(s, k, std::move(entries), seed);
  } catch (const ContractViolation& e) {
    throw ConfigError(lineno, e.what());
  }
}

}  // namespace rcl
