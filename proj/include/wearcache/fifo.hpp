#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "wearcache/trace.hpp"

namespace wearcache {

using Assoc = std::uint32_t;
using MissCount = std::uint64_t;

/// Exact miss counts of one set for several associativities, plus per-way
/// fill and write-hit counts at the largest simulated associativity.
struct SetMissResult {
  std::map<Assoc, MissCount> misses_by_assoc;
  std::map<Assoc, MissCount> write_hits_by_assoc;
  Assoc designated_assoc{0};
  std::vector<MissCount> way_fills;
  std::vector<MissCount> write_hits_by_way;

  MissCount misses(Assoc m) const {
    auto it = misses_by_assoc.find(m);
    if (it == misses_by_assoc.end())
      throw std::out_of_range("associativity " + std::to_string(m) + " not simulated");
    return it->second;
  }
};

struct ColdStats {
  MissCount n_star{0};
  Assoc m_star{1};
};

namespace detail {

// Renumbers the blocks of a subtrace as 0, 1, 2, ... in order of first use.
inline std::vector<std::uint32_t> dense_ids(std::span<const SetAccess> blocks,
                                            std::size_t& distinct) {
  std::unordered_map<BlockId, std::uint32_t> ids;
  ids.reserve(blocks.size() / 4 + 16);
  std::vector<std::uint32_t> out;
  out.reserve(blocks.size());
  for (const auto& a : blocks) {
    auto [it, fresh] = ids.try_emplace(a.block_id, static_cast<std::uint32_t>(ids.size()));
    out.push_back(it->second);
  }
  distinct = ids.size();
  return out;
}

}  // namespace detail

/// Replays a subtrace once through a FIFO cache for every requested
/// associativity.
///
/// Each cache keeps, per block, the index of its most recent insertion. With
/// FIFO, a block inserted as the k-th fill is evicted by fill k + M, so it is
/// resident while fewer than M fills have happened since; the k-th fill also
/// lands in way k mod M (empty ways are taken in order, then the oldest way is
/// reused). Hits leave the insertion order alone.
inline SetMissResult simulate_set(std::span<const SetAccess> blocks,
                                  std::span<const Assoc> assocs) {
  if (assocs.empty()) throw std::invalid_argument("no associativity requested");
  std::vector<Assoc> ms(assocs.begin(), assocs.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  if (ms.front() == 0) throw std::invalid_argument("associativity 0 is not a cache");

  const std::size_t k = ms.size();
  const Assoc top = ms.back();

  std::size_t distinct = 0;
  auto ids = detail::dense_ids(blocks, distinct);

  constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
  // stamps[id * k + j]: fill index of block id in cache j
  std::vector<std::uint64_t> stamps(distinct * k, kNever);
  std::vector<std::uint64_t> fills(k, 0);
  std::vector<MissCount> write_hits(k, 0);

  SetMissResult r;
  r.designated_assoc = top;
  r.way_fills.assign(top, 0);
  r.write_hits_by_way.assign(top, 0);

  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::uint64_t* row = stamps.data() + static_cast<std::size_t>(ids[i]) * k;
    const bool is_write = blocks[i].kind == AccessKind::Write;
    for (std::size_t j = 0; j < k; ++j) {
      const std::uint64_t s = row[j];
      if (s != kNever && fills[j] - s <= ms[j]) {
        if (is_write) {
          ++write_hits[j];
          if (j + 1 == k) ++r.write_hits_by_way[s % top];
        }
        continue;
      }
      if (j + 1 == k) ++r.way_fills[fills[j] % top];
      row[j] = fills[j]++;
    }
  }

  for (std::size_t j = 0; j < k; ++j) {
    r.misses_by_assoc[ms[j]] = fills[j];
    r.write_hits_by_assoc[ms[j]] = write_hits[j];
  }
  return r;
}

inline SetMissResult simulate_set(std::span<const SetAccess> blocks, Assoc m) {
  return simulate_set(blocks, std::span<const Assoc>(&m, 1));
}

inline MissCount cold_misses(std::span<const SetAccess> blocks) {
  std::size_t distinct = 0;
  detail::dense_ids(blocks, distinct);
  return distinct;
}

/// Smallest FIFO associativity at which no block is ever reloaded.
///
/// A block that was the f-th distinct block to arrive survives until its
/// next use iff fewer than M further distinct blocks arrived in between, so
/// the answer is one more than the largest such gap.
inline Assoc optimal_assoc(std::span<const SetAccess> blocks) {
  std::unordered_map<BlockId, std::uint64_t> first_seen;
  std::uint64_t inserted = 0;
  std::uint64_t max_gap = 0;
  for (const auto& a : blocks) {
    auto [it, fresh] = first_seen.try_emplace(a.block_id, inserted + 1);
    if (fresh) {
      ++inserted;
    } else {
      max_gap = std::max(max_gap, inserted - it->second);
    }
  }
  return static_cast<Assoc>(max_gap + 1);
}

inline ColdStats cold_stats(std::span<const SetAccess> blocks) {
  return {cold_misses(blocks), optimal_assoc(blocks)};
}

/// Line writes for one set at associativity m: one per fill plus one per
/// store that hit.
inline MissCount write_totals(const SetMissResult& r, Assoc m) {
  MissCount misses = r.misses(m);
  auto it = r.write_hits_by_assoc.find(m);
  return misses + (it == r.write_hits_by_assoc.end() ? 0 : it->second);
}

}  // namespace wearcache
