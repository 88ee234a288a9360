#pragma once

#include <cstdint>

namespace rcl {

/// Byte address, virtual or physical depending on context.
using Addr = std::uint64_t;

inline constexpr unsigned kLineBits = 6;
inline constexpr unsigned kPageBits = 12;
inline constexpr unsigned kLargePageBits = 21;

inline constexpr Addr kLineBytes = Addr{1} << kLineBits;
inline constexpr Addr kPageBytes = Addr{1} << kPageBits;
inline constexpr Addr kLargePageBytes = Addr{1} << kLargePageBits;
inline constexpr std::uint64_t kLinesPerPage = kPageBytes / kLineBytes;
inline constexpr std::uint64_t kPagesPerLargePage = kLargePageBytes / kPageBytes;

constexpr std::uint64_t low_mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

/// Bits [hi:lo] of `value`, inclusive, shifted down to bit 0.
constexpr std::uint64_t bit_field(std::uint64_t value, unsigned hi, unsigned lo) {
  return (value >> lo) & low_mask(hi - lo + 1);
}

constexpr Addr line_address(Addr a) { return a & ~(kLineBytes - 1); }
constexpr Addr line_offset(Addr a) { return a & (kLineBytes - 1); }
constexpr Addr page_offset(Addr a) { return a & (kPageBytes - 1); }
constexpr std::uint64_t page_number(Addr a) { return a >> kPageBits; }
constexpr Addr page_base(std::uint64_t pn) { return pn << kPageBits; }

}  // namespace rcl
