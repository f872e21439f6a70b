#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "wearcache/fifo.hpp"
#include "wearcache/predictor.hpp"
#include "wearcache/trace.hpp"

namespace wearcache {

/// Everything known about one set: cold statistics, the full miss curve over
/// [1, max_assoc], and write counts at the as-built associativity.
struct SetProfile {
  std::uint32_t set_index{0};
  MissCount n_star{0};
  Assoc m_star{1};
  std::vector<CurvePoint> curve;  // curve[m - 1] is associativity m
  std::vector<MissCount> way_fills;
  MissCount writes{0};
  bool low_confidence{false};
  std::uint32_t simulated_count{0};  // associativities actually replayed

  const CurvePoint& at(Assoc m) const {
    if (m < 1 || m > curve.size())
      throw std::out_of_range("associativity " + std::to_string(m) + " outside [1, " +
                              std::to_string(curve.size()) + "]");
    return curve[m - 1];
  }

  friend bool operator==(const SetProfile&, const SetProfile&) = default;
};

struct TraceStats {
  std::uint64_t accesses{0};
  std::uint64_t unique_blocks{0};

  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

struct CacheProfile {
  CacheGeometry geometry;
  TraceStats trace_stats;
  std::vector<SetProfile> sets;

  friend bool operator==(const CacheProfile&, const CacheProfile&) = default;
};

/// Surviving associativity of each set in one worn-out cache state.
struct ConfigVector {
  std::vector<Assoc> assoc_per_set;

  static ConfigVector uniform(std::uint32_t sets, Assoc m) {
    return {std::vector<Assoc>(sets, m)};
  }

  /// Parses "a,b,c". Entries must be positive integers.
  static ConfigVector parse(std::string_view text) {
    ConfigVector cv;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto comma = text.find(',', pos);
      if (comma == std::string_view::npos) comma = text.size();
      std::string_view tok = detail::trim(text.substr(pos, comma - pos));
      Assoc v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0)
        throw std::invalid_argument("bad config entry '" + std::string(tok) + "'");
      cv.assoc_per_set.push_back(v);
      pos = comma + 1;
    }
    return cv;
  }
};

struct QueryResult {
  MissCount total{0};
  std::vector<MissCount> per_set;
  CurveSource worst{CurveSource::Simulated};
  std::size_t lookups{0};  // curve entries read
};

namespace detail {

// Flags sets where the model is known to be weak: the curve barely rises
// above n_star even at associativity 1, or the largest simulated cache still
// misses on 80% or more of the accesses.
inline bool low_confidence(const SimulatedPoints& points, MissCount n_star,
                           std::size_t accesses) {
  if (points.empty() || accesses == 0) return false;
  const double at_one = static_cast<double>(points.begin()->second);
  const double at_top = static_cast<double>(points.rbegin()->second);
  return at_one < 1.2 * static_cast<double>(n_star) ||
         at_top >= 0.8 * static_cast<double>(accesses);
}

}  // namespace detail

inline SetProfile profile_set(std::span<const SetAccess> blocks, Assoc m_max,
                              const PredictorConfig& cfg, std::uint32_t set_index = 0) {
  cfg.check();
  if (m_max < 1) throw std::invalid_argument("max associativity must be >= 1");

  SetProfile p;
  p.set_index = set_index;
  const ColdStats cold = cold_stats(blocks);
  p.n_star = cold.n_star;
  p.m_star = cold.m_star;

  // Anchors and the as-built associativity share one replay.
  std::vector<Assoc> anchors = select_anchors(m_max, cold.m_star, cfg);
  std::vector<Assoc> first_pass = anchors;
  first_pass.push_back(m_max);
  const SetMissResult base = simulate_set(blocks, first_pass);

  SimulatedPoints points;
  for (Assoc m : anchors) points.emplace(m, base.misses(m));
  if (!points.empty()) {
    points = refine(
        std::move(points),
        [&](Assoc m) { return simulate_set(blocks, m).misses(m); }, cfg);
  }

  p.curve = cfg.mode == CurveMode::Bme ? bme_curve(points, m_max, p.n_star, p.m_star)
                                       : interpolate_curve(points, m_max, p.n_star, p.m_star);
  p.way_fills = base.way_fills;
  p.writes = write_totals(base, m_max);
  p.low_confidence = detail::low_confidence(points, p.n_star, blocks.size());
  p.simulated_count = static_cast<std::uint32_t>(points.size() + (points.contains(m_max) ? 0 : 1));
  return p;
}

inline CacheProfile profile_cache(std::span<const TraceAccess> trace, const CacheGeometry& g,
                                  const PredictorConfig& cfg) {
  g.check();
  cfg.check();
  CacheProfile prof;
  prof.geometry = g;
  prof.trace_stats.accesses = trace.size();

  std::vector<SubTrace> subs(g.set_count);
  std::unordered_set<BlockId> seen;
  for (const auto& a : trace) {
    SetAccess sa = map_access(a, g);
    seen.insert(sa.block_id);
    subs[sa.set_index].push_back(sa);
  }
  prof.trace_stats.unique_blocks = seen.size();

  prof.sets.reserve(g.set_count);
  for (std::uint32_t s = 0; s < g.set_count; ++s)
    prof.sets.push_back(profile_set(subs[s], g.max_assoc, cfg, s));
  return prof;
}

/// Total misses of one configuration, read straight from the per-set curves.
inline QueryResult query_config(const CacheProfile& prof, const ConfigVector& cfg) {
  const auto& per = cfg.assoc_per_set;
  if (per.size() != prof.sets.size())
    throw std::invalid_argument("config has " + std::to_string(per.size()) +
                                " entries, cache has " + std::to_string(prof.sets.size()) +
                                " sets");
  QueryResult q;
  q.per_set.reserve(per.size());
  for (std::size_t s = 0; s < per.size(); ++s) {
    if (per[s] < 1 || per[s] > prof.geometry.max_assoc)
      throw std::out_of_range("set " + std::to_string(s) + ": associativity " +
                              std::to_string(per[s]) + " outside [1, " +
                              std::to_string(prof.geometry.max_assoc) + "]");
    const CurvePoint& pt = prof.sets[s].at(per[s]);
    ++q.lookups;
    q.per_set.push_back(pt.misses);
    q.total += pt.misses;
    q.worst = std::max(q.worst, pt.source);
  }
  return q;
}

/// Number of wear-out reachable configurations, max_assoc ^ set_count.
inline boost::multiprecision::cpp_int config_space_size(const CacheGeometry& g) {
  g.check();
  return boost::multiprecision::pow(boost::multiprecision::cpp_int(g.max_assoc),
                                    static_cast<unsigned>(g.set_count));
}

/// Smallest associativity per set whose misses fit the set's budget;
/// std::nullopt when even max_assoc is over budget.
inline std::vector<std::optional<Assoc>> frontier(const CacheProfile& prof,
                                                  std::span<const MissCount> budgets) {
  if (budgets.size() != prof.sets.size())
    throw std::invalid_argument("need one budget per set");
  std::vector<std::optional<Assoc>> out;
  out.reserve(budgets.size());
  for (std::size_t s = 0; s < budgets.size(); ++s) {
    std::optional<Assoc> best;
    for (const auto& pt : prof.sets[s].curve) {
      if (pt.misses <= budgets[s]) {
        best = pt.assoc;
        break;
      }
    }
    out.push_back(best);
  }
  return out;
}

// --- serialization ---------------------------------------------------------

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const CacheProfile& prof) {
  ordered_json j;
  j["geometry"] = {{"sets", prof.geometry.set_count},
                   {"line_size", prof.geometry.line_size},
                   {"max_assoc", prof.geometry.max_assoc}};
  j["trace_stats"] = {{"accesses", prof.trace_stats.accesses},
                      {"unique_blocks", prof.trace_stats.unique_blocks}};
  ordered_json sets = ordered_json::array();
  for (const auto& sp : prof.sets) {
    ordered_json curve = ordered_json::array();
    for (const auto& pt : sp.curve)
      curve.push_back({{"assoc", pt.assoc}, {"misses", pt.misses}, {"source", to_string(pt.source)}});
    sets.push_back({{"index", sp.set_index},
                    {"n_star", sp.n_star},
                    {"m_star", sp.m_star},
                    {"low_confidence", sp.low_confidence},
                    {"simulated_count", sp.simulated_count},
                    {"curve", std::move(curve)},
                    {"way_fills", sp.way_fills},
                    {"writes", sp.writes}});
  }
  j["sets"] = std::move(sets);
  return j;
}

inline CacheProfile profile_from_json(const nlohmann::ordered_json& j) {
  CacheProfile prof;
  const auto& g = j.at("geometry");
  prof.geometry = {g.at("sets").get<std::uint32_t>(), g.at("line_size").get<std::uint32_t>(),
                   g.at("max_assoc").get<std::uint32_t>()};
  prof.geometry.check();
  prof.trace_stats = {j.at("trace_stats").at("accesses").get<std::uint64_t>(),
                      j.at("trace_stats").at("unique_blocks").get<std::uint64_t>()};
  for (const auto& js : j.at("sets")) {
    SetProfile sp;
    sp.set_index = js.at("index").get<std::uint32_t>();
    sp.n_star = js.at("n_star").get<MissCount>();
    sp.m_star = js.at("m_star").get<Assoc>();
    sp.low_confidence = js.at("low_confidence").get<bool>();
    sp.simulated_count = js.at("simulated_count").get<std::uint32_t>();
    for (const auto& jp : js.at("curve"))
      sp.curve.push_back({jp.at("assoc").get<Assoc>(), jp.at("misses").get<MissCount>(),
                          curve_source_from_string(jp.at("source").get<std::string>())});
    sp.way_fills = js.at("way_fills").get<std::vector<MissCount>>();
    sp.writes = js.at("writes").get<MissCount>();
    if (sp.curve.size() != prof.geometry.max_assoc)
      throw std::invalid_argument("set " + std::to_string(sp.set_index) +
                                  ": curve does not cover [1, max_assoc]");
    for (std::size_t m = 0; m < sp.curve.size(); ++m)
      if (sp.curve[m].assoc != m + 1)
        throw std::invalid_argument("set " + std::to_string(sp.set_index) +
                                    ": curve out of order");
    prof.sets.push_back(std::move(sp));
  }
  if (prof.sets.size() != prof.geometry.set_count)
    throw std::invalid_argument("profile set count does not match geometry");
  return prof;
}

inline void write_profile_json(std::ostream& out, const CacheProfile& prof) {
  out << to_json(prof).dump(2) << '\n';
}

inline CacheProfile read_profile_json(std::istream& in) {
  return profile_from_json(nlohmann::ordered_json::parse(in));
}

inline void write_curve_csv(std::ostream& out, const CacheProfile& prof) {
  out << "set,assoc,misses,source\n";
  for (const auto& sp : prof.sets)
    for (const auto& pt : sp.curve)
      out << sp.set_index << ',' << pt.assoc << ',' << pt.misses << ',' << to_string(pt.source)
          << '\n';
}

}  // namespace wearcache
