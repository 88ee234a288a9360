#include "rcl/trace.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "rcl/error.hpp"
#include "rcl/random.hpp"
#include "rcl/text.hpp"

namespace rcl {

namespace {

struct OpName {
  TraceOp op;
  std::string_view name;
};

constexpr OpName kOpNames[] = {
    {TraceOp::FetchPredicted, "I-predicted"}, {TraceOp::FetchRequested, "I-requested"},
    {TraceOp::Read, "R"},                     {TraceOp::Write, "W"},
    {TraceOp::FlushPt, "FLUSH-PT"},           {TraceOp::VictimCall, "VICTIM-CALL"},
};

}  // namespace

std::string_view to_string(TraceOp op) {
  for (const auto& n : kOpNames)
    if (n.op == op) return n.name;
  return "?";
}

std::optional<TraceOp> parse_trace_op(std::string_view s) {
  for (const auto& n : kOpNames)
    if (n.name == s) return n.op;
  return std::nullopt;
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto tokens = text::split_ws(text::trim(text::strip_comment(raw)));
    if (tokens.empty()) continue;

    TraceEvent ev;
    const auto op = parse_trace_op(tokens[0]);
    if (!op) throw TraceError(lineno, "unknown event kind '" + std::string(tokens[0]) + "'");
    ev.op = *op;

    std::size_t i = 1;
    if (has_address(ev.op)) {
      if (i >= tokens.size()) throw TraceError(lineno, "missing address");
      const auto va = text::parse_hex(tokens[i]);
      if (!va) throw TraceError(lineno, "bad address '" + std::string(tokens[i]) + "'");
      ev.va = *va;
      ++i;
    }
    if (i < tokens.size() && tokens[i].starts_with('@')) {
      const auto core = text::parse_uint(tokens[i].substr(1));
      if (!core || *core > 255) throw TraceError(lineno, "bad core '" + std::string(tokens[i]) + "'");
      ev.core = static_cast<unsigned>(*core);
      ++i;
    }
    if (i != tokens.size())
      throw TraceError(lineno, "unexpected token '" + std::string(tokens[i]) + "'");
    events.push_back(ev);
  }
  return events;
}

std::vector<TraceEvent> parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError(0, "cannot open trace " + path);
  return parse_trace(in);
}

std::string format_trace(std::span<const TraceEvent> events) {
  std::string out;
  for (const auto& ev : events) {
    out += to_string(ev.op);
    if (has_address(ev.op)) {
      out += ' ';
      out += text::hex(ev.va);
    }
    if (ev.core != 0) {
      out += " @";
      out += std::to_string(ev.core);
    }
    out += '\n';
  }
  return out;
}

std::string_view to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Streaming: return "streaming";
    case TraceKind::PointerChase: return "pointer-chase";
    case TraceKind::MultiPage: return "multi-page";
  }
  return "?";
}

std::optional<TraceKind> parse_trace_kind(std::string_view s) {
  for (auto k : {TraceKind::Streaming, TraceKind::PointerChase, TraceKind::MultiPage})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::vector<TraceEvent> generate_trace(const TraceGenOptions& o) {
  if (o.code_pages == 0 || o.code_pages > kTraceMaxCodePages)
    throw ContractViolation("code_pages must be 1.." + std::to_string(kTraceMaxCodePages));
  if (o.data_pages == 0 || o.data_pages > kTraceMaxDataPages)
    throw ContractViolation("data_pages must be 1.." + std::to_string(kTraceMaxDataPages));

  SplitMix64 rng(derive_seed(o.seed, "trace", static_cast<std::uint64_t>(o.kind)));
  const std::uint64_t code_lines = std::uint64_t{o.code_pages} * kLinesPerPage;
  const std::uint64_t data_lines = std::uint64_t{o.data_pages} * kLinesPerPage;

  // pointer-chase: a single cycle through every data line (Sattolo)
  std::vector<std::uint64_t> next;
  if (o.kind == TraceKind::PointerChase) {
    std::vector<std::uint64_t> order(data_lines);
    std::iota(order.begin(), order.end(), 0);
    for (std::uint64_t i = data_lines - 1; i > 0; --i) std::swap(order[i], order[rng.below(i)]);
    next.resize(data_lines);
    for (std::uint64_t i = 0; i < data_lines; ++i) next[order[i]] = order[(i + 1) % data_lines];
  }

  std::vector<TraceEvent> events;
  events.reserve(o.length * 2);
  std::uint64_t pc = 0;
  std::uint64_t cursor = 0;
  std::uint64_t page = 0;
  for (std::size_t n = 0; n < o.length; ++n) {
    TraceEvent fetch{TraceOp::FetchPredicted, kTraceCodeBase + pc * kLineBytes, 0};
    if (n > 0 && rng.unit() < o.redirect_ratio) {
      pc = rng.below(code_lines);
      fetch = {TraceOp::FetchRequested, kTraceCodeBase + pc * kLineBytes, 0};
    }
    events.push_back(fetch);
    pc = (pc + 1) % code_lines;

    if (rng.unit() >= o.data_ratio) continue;
    std::uint64_t line = 0;
    switch (o.kind) {
      case TraceKind::Streaming:
        line = cursor;
        cursor = (cursor + 1) % data_lines;
        break;
      case TraceKind::PointerChase:
        line = cursor;
        cursor = next[cursor];
        break;
      case TraceKind::MultiPage:
        if (rng.unit() < 0.3) page = rng.below(o.data_pages);
        line = page * kLinesPerPage + rng.below(kLinesPerPage);
        break;
    }
    const Addr va = kTraceDataBase + line * kLineBytes + 8 * rng.below(kLineBytes / 8);
    const TraceOp op = rng.unit() < o.write_ratio ? TraceOp::Write : TraceOp::Read;
    events.push_back({op, va, 0});
  }
  return events;
}

}  // namespace rcl
