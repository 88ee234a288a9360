#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcl/cache.hpp"
#include "rcl/hierarchy.hpp"
#include "rcl/indexing.hpp"
#include "rcl/mem_model.hpp"

namespace rcl {

// Membership matrix: column = page, row = line within the page; a bit is set
// when that line indexes to the target set.
class SetBitmap {
 public:
  SetBitmap(std::size_t pages, std::size_t lines_per_page = kLinesPerPage)
      : pages_(pages), lines_(lines_per_page), bits_(pages * lines_per_page, 0) {}

  std::size_t pages() const { return pages_; }
  std::size_t lines_per_page() const { return lines_; }
  bool at(std::size_t page, std::size_t line) const { return bits_[page * lines_ + line] != 0; }
  void set(std::size_t page, std::size_t line, bool v) { bits_[page * lines_ + line] = v ? 1 : 0; }
  std::size_t column_weight(std::size_t page) const;
  bool columns_equal(std::size_t a, std::size_t b) const;

  /// Smallest shift P such that column p equals column p + P everywhere.
  std::size_t period() const;

  /// Plain P1 PBM, one column per page, one row per line.
  std::string to_pbm(const std::vector<std::string>& comments = {}) const;

 private:
  std::size_t pages_;
  std::size_t lines_;
  std::vector<std::uint8_t> bits_;
};

/// Requires the region to be physically contiguous (large-page mapping);
/// throws ContractViolation otherwise.
SetBitmap bitmap_same_set(const CacheConfig& cfg, const RandomTable& rt, const PageMap& map,
                          Addr vbase, std::size_t npages, std::uint32_t target_set);

/// True when some shift P < 2^k maps the entry sequence onto itself
/// (entry i == entry i+P wherever both exist), which would make a bitmap
/// repeat before 2^k pages.
bool table_is_degenerate(const RandomTable& rt);

struct CounterRow {
  std::string id;
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;
  double mpki = 0.0;
};

struct CounterReport {
  std::uint64_t instructions = 0;
  std::vector<CounterRow> rows;

  const CounterRow* find(std::string_view id) const;
  std::string to_csv() const;
};

/// One row per cache, then TLB, prediction-table and fetch-replay rows.
/// PT rows: accesses = lookups, misses = mispredictions.
CounterReport mpki_report(const CacheHierarchy& h, std::uint64_t instructions);

struct OverheadRow {
  Mode mode;
  std::uint64_t cycles = 0;
  double overhead_pct = 0.0;
};

std::string overhead_csv(std::span<const OverheadRow> rows);

/// Fixed-point decimal with a dot separator regardless of locale.
std::string format_fixed(double v, int decimals);

}  // namespace rcl
