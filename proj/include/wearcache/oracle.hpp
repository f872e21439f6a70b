#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wearcache/explorer.hpp"
#include "wearcache/trace.hpp"

// Brute-force reference simulator. It shares no code with the fifo core: each
// set is a literal queue of resident blocks, one cache per run.
namespace wearcache::oracle {

class FifoSet {
 public:
  explicit FifoSet(std::uint32_t capacity) : capacity_(capacity), fills_(capacity, 0) {
    if (capacity == 0) throw std::invalid_argument("capacity must be >= 1");
  }

  // Returns true on a hit.
  bool access(BlockId block) {
    if (resident_.count(block) != 0) return true;
    ++misses_;
    std::uint32_t way;
    if (queue_.size() < capacity_) {
      way = static_cast<std::uint32_t>(queue_.size());
    } else {
      auto [victim, victim_way] = queue_.front();
      queue_.pop_front();
      resident_.erase(victim);
      way = victim_way;
    }
    queue_.emplace_back(block, way);
    resident_.insert(block);
    ++fills_[way];
    return false;
  }

  std::uint64_t misses() const { return misses_; }
  const std::vector<std::uint64_t>& way_fills() const { return fills_; }

 private:
  std::uint32_t capacity_;
  std::deque<std::pair<BlockId, std::uint32_t>> queue_;
  std::unordered_set<BlockId> resident_;
  std::uint64_t misses_{0};
  std::vector<std::uint64_t> fills_;
};

struct OracleResult {
  std::uint64_t total_misses{0};
  std::vector<std::uint64_t> per_set_misses;
  std::vector<std::vector<std::uint64_t>> per_set_way_fills;
};

inline OracleResult simulate_cache(std::span<const TraceAccess> trace, const CacheGeometry& g,
                                   const ConfigVector& config) {
  g.check();
  if (config.assoc_per_set.size() != g.set_count)
    throw std::invalid_argument("config length does not match set count");
  std::vector<FifoSet> sets;
  sets.reserve(g.set_count);
  for (Assoc m : config.assoc_per_set) sets.emplace_back(m);

  for (const auto& a : trace) {
    const BlockId block = a.address / g.line_size;
    sets[block % g.set_count].access(block);
  }

  OracleResult r;
  for (const auto& s : sets) {
    r.per_set_misses.push_back(s.misses());
    r.per_set_way_fills.push_back(s.way_fills());
    r.total_misses += s.misses();
  }
  return r;
}

/// Misses of one isolated FIFO set replaying the given blocks.
inline std::uint64_t replay_set(std::span<const SetAccess> blocks, std::uint32_t capacity) {
  FifoSet set(capacity);
  for (const auto& a : blocks) set.access(a.block_id);
  return set.misses();
}

struct PointError {
  std::uint32_t set{0};
  Assoc assoc{1};
  MissCount predicted{0};
  MissCount actual{0};
  CurveSource source{CurveSource::Interpolated};
  double rel_error{0.0};
};

struct AccuracyReport {
  std::vector<PointError> errors;        // predicted points only
  std::vector<PointError> hard_failures;  // exact points that disagree
  double max_overestimate{0.0};
  double max_underestimate{0.0};
  std::size_t points_compared{0};
  std::size_t exact_points_checked{0};

  bool ok() const { return hard_failures.empty(); }
  double max_abs_error() const { return std::max(max_overestimate, -max_underestimate); }
};

/// Default sample: every associativity up to 64, otherwise 64 evenly spread
/// associativities including 1 and max_assoc.
inline std::vector<Assoc> default_sample(Assoc max_assoc) {
  std::vector<Assoc> out;
  if (max_assoc <= 64) {
    for (Assoc m = 1; m <= max_assoc; ++m) out.push_back(m);
    return out;
  }
  for (std::uint64_t i = 0; i < 64; ++i)
    out.push_back(static_cast<Assoc>(1 + i * (max_assoc - 1) / 63));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Checks a profile against fresh brute-force runs at each sampled
/// associativity. Exact points must match; predicted points get a signed
/// relative error (predicted - actual) / actual.
inline AccuracyReport validate(const CacheProfile& prof, std::span<const TraceAccess> trace,
                               std::vector<Assoc> sample = {}) {
  const auto& g = prof.geometry;
  if (sample.empty()) sample = default_sample(g.max_assoc);
  AccuracyReport rep;
  for (Assoc m : sample) {
    if (m < 1 || m > g.max_assoc) throw std::out_of_range("sample associativity out of range");
    const OracleResult truth = simulate_cache(trace, g, ConfigVector::uniform(g.set_count, m));
    for (std::uint32_t s = 0; s < g.set_count; ++s) {
      const CurvePoint& pt = prof.sets.at(s).at(m);
      PointError e{s, m, pt.misses, truth.per_set_misses[s], pt.source, 0.0};
      const double diff = static_cast<double>(e.predicted) - static_cast<double>(e.actual);
      e.rel_error = diff / static_cast<double>(std::max<MissCount>(e.actual, 1));
      if (is_exact(pt.source)) {
        ++rep.exact_points_checked;
        if (e.predicted != e.actual) rep.hard_failures.push_back(e);
        continue;
      }
      ++rep.points_compared;
      rep.max_overestimate = std::max(rep.max_overestimate, e.rel_error);
      rep.max_underestimate = std::min(rep.max_underestimate, e.rel_error);
      rep.errors.push_back(e);
    }
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const AccuracyReport& rep) {
  auto points = [](const std::vector<PointError>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& e : v)
      a.push_back({{"set", e.set},
                   {"assoc", e.assoc},
                   {"predicted", e.predicted},
                   {"actual", e.actual},
                   {"source", to_string(e.source)},
                   {"rel_error", e.rel_error}});
    return a;
  };
  nlohmann::ordered_json j;
  j["points_compared"] = rep.points_compared;
  j["exact_points_checked"] = rep.exact_points_checked;
  j["max_overestimate"] = rep.max_overestimate;
  j["max_underestimate"] = rep.max_underestimate;
  j["errors"] = points(rep.errors);
  j["hard_failures"] = points(rep.hard_failures);
  return j;
}

}  // namespace wearcache::oracle
