#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wearcache {

using Address = std::uint64_t;
using BlockId = std::uint64_t;

enum class AccessKind : std::uint8_t { Read = 0, Write = 1 };

struct TraceAccess {
  AccessKind kind{AccessKind::Read};
  Address address{0};

  friend bool operator==(const TraceAccess&, const TraceAccess&) = default;
};

enum class TraceFormat { Text, Binary };

// Raised for malformed trace input. line() is 1-based for text traces and the
// record index (1-based) for binary traces.
class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, std::string text, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what +
                           " ('" + text + "')"),
        line_(line),
        text_(std::move(text)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t line_;
  std::string text_;
};

/// Cache shape: number of sets, bytes per line and the as-built associativity.
/// Both set_count and line_size must be powers of two.
struct CacheGeometry {
  std::uint32_t set_count{1};
  std::uint32_t line_size{1};
  std::uint32_t max_assoc{1};

  friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;

  bool valid() const noexcept {
    return set_count >= 1 && std::has_single_bit(set_count) && line_size >= 1 &&
           std::has_single_bit(line_size) && max_assoc >= 1;
  }

  void check() const {
    if (set_count == 0 || !std::has_single_bit(set_count))
      throw std::invalid_argument("set count must be a power of two >= 1");
    if (line_size == 0 || !std::has_single_bit(line_size))
      throw std::invalid_argument("line size must be a power of two >= 1");
    if (max_assoc == 0)
      throw std::invalid_argument("associativity must be >= 1");
  }
};

struct SetAccess {
  std::uint32_t set_index{0};
  BlockId block_id{0};
  AccessKind kind{AccessKind::Read};

  friend bool operator==(const SetAccess&, const SetAccess&) = default;
};

using SubTrace = std::vector<SetAccess>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline TraceAccess parse_text_line(std::string_view line, std::size_t lineno) {
  auto fail = [&](const char* why) {
    return TraceError(lineno, std::string(line), why);
  };

  TraceAccess acc;
  std::string_view addr = line;
  auto sp = line.find_first_of(" \t");
  if (sp != std::string_view::npos) {
    std::string_view kind = line.substr(0, sp);
    addr = trim(line.substr(sp));
    if (addr.find_first_of(" \t") != std::string_view::npos)
      throw fail("too many fields");
    if (kind == "R" || kind == "r")
      acc.kind = AccessKind::Read;
    else if (kind == "W" || kind == "w")
      acc.kind = AccessKind::Write;
    else
      throw fail("unknown access kind");
  }

  int base = 10;
  if (addr.size() >= 2 && addr[0] == '0' && (addr[1] == 'x' || addr[1] == 'X')) {
    base = 16;
    addr.remove_prefix(2);
  }
  if (addr.empty()) throw fail("missing address");
  const char* last = addr.data() + addr.size();
  auto [ptr, ec] = std::from_chars(addr.data(), last, acc.address, base);
  if (ec == std::errc::result_out_of_range) throw fail("address overflows 64 bits");
  if (ec != std::errc{} || ptr != last) throw fail("malformed address");
  return acc;
}

}  // namespace detail

/// Parses a text trace: one access per line, an optional R/W kind letter, then
/// a 0x-prefixed hex or decimal address. '#' lines and blank lines are skipped.
inline std::vector<TraceAccess> parse_text_trace(std::istream& in) {
  std::vector<TraceAccess> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    out.push_back(detail::parse_text_line(body, lineno));
  }
  return out;
}

inline constexpr std::size_t kBinaryRecordSize = 9;

/// Binary records: 1 kind byte (0 read, 1 write) + 8-byte little-endian address.
inline std::vector<TraceAccess> parse_binary_trace(std::istream& in) {
  std::vector<TraceAccess> out;
  std::array<unsigned char, kBinaryRecordSize> rec{};
  std::size_t index = 0;
  for (;;) {
    in.read(reinterpret_cast<char*>(rec.data()), rec.size());
    auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    ++index;
    if (got != rec.size())
      throw TraceError(index, std::to_string(got) + " bytes",
                       "truncated binary record");
    if (rec[0] > 1)
      throw TraceError(index, std::to_string(rec[0]), "unknown access kind");
    Address a = 0;
    for (int i = 8; i >= 1; --i) a = (a << 8) | rec[static_cast<std::size_t>(i)];
    out.push_back({rec[0] == 1 ? AccessKind::Write : AccessKind::Read, a});
  }
  return out;
}

inline std::vector<TraceAccess> parse_trace(std::istream& in, TraceFormat format) {
  return format == TraceFormat::Text ? parse_text_trace(in) : parse_binary_trace(in);
}

inline void write_binary_trace(std::ostream& out, std::span<const TraceAccess> trace) {
  std::array<unsigned char, kBinaryRecordSize> rec{};
  for (const auto& a : trace) {
    rec[0] = static_cast<unsigned char>(a.kind);
    for (std::size_t i = 0; i < 8; ++i)
      rec[i + 1] = static_cast<unsigned char>((a.address >> (8 * i)) & 0xffU);
    out.write(reinterpret_cast<const char*>(rec.data()), rec.size());
  }
}

inline SetAccess map_access(const TraceAccess& a, const CacheGeometry& g) {
  g.check();
  BlockId block = a.address / g.line_size;
  return {static_cast<std::uint32_t>(block & (g.set_count - 1)), block, a.kind};
}

/// Distributes a trace over its sets. Each subtrace keeps trace order.
inline std::vector<SubTrace> split_by_set(std::span<const TraceAccess> trace,
                                          const CacheGeometry& g) {
  g.check();
  std::vector<SubTrace> sets(g.set_count);
  for (const auto& a : trace) {
    SetAccess sa = map_access(a, g);
    sets[sa.set_index].push_back(sa);
  }
  return sets;
}

}  // namespace wearcache
