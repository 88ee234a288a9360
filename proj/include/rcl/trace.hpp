#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rcl/address.hpp"

namespace rcl {

enum class TraceOp { FetchPredicted, FetchRequested, Read, Write, FlushPt, VictimCall };

std::string_view to_string(TraceOp op);
std::optional<TraceOp> parse_trace_op(std::string_view s);
constexpr bool has_address(TraceOp op) {
  return op != TraceOp::FlushPt && op != TraceOp::VictimCall;
}

struct TraceEvent {
  TraceOp op = TraceOp::Read;
  Addr va = 0;
  unsigned core = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// One event per line:
//   <kind> [<hex va>] [@<core>]
// kinds: I-predicted I-requested R W FLUSH-PT VICTIM-CALL. '#' starts a comment.
std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> parse_trace(std::string_view text);
std::vector<TraceEvent> load_trace(const std::string& path);
std::string format_trace(std::span<const TraceEvent> events);

enum class TraceKind { Streaming, PointerChase, MultiPage };

std::string_view to_string(TraceKind k);
std::optional<TraceKind> parse_trace_kind(std::string_view s);

inline constexpr Addr kTraceCodeBase = 0x400000;
inline constexpr Addr kTraceDataBase = 0x10000000;
inline constexpr unsigned kTraceMaxCodePages = 4;
inline constexpr unsigned kTraceMaxDataPages = 8;

struct TraceGenOptions {
  TraceKind kind = TraceKind::Streaming;
  std::size_t length = 4096;  // fetch events; each may be followed by a data access
  std::uint64_t seed = 1;
  unsigned code_pages = 2;
  unsigned data_pages = 4;
  double data_ratio = 0.5;     // data accesses per fetch
  double write_ratio = 0.25;   // of data accesses
  double redirect_ratio = 0.02;  // fetches marked requested
};

/// Loop over a code region of `code_pages` pages while touching a data
/// region of `data_pages` pages. Footprints are capped so both fit in a
/// default L1 under conventional indexing.
std::vector<TraceEvent> generate_trace(const TraceGenOptions& opts);

}  // namespace rcl
