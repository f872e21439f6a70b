#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wearcache/fifo.hpp"
#include "wearcache/model.hpp"

namespace wearcache {

enum class CurveMode { Interp, Bme };

struct PredictorConfig {
  double h_tol{0.20};    // max relative growth of h between anchors
  double n_tol{0.10};    // miss gap that forces a bisection
  Assoc max_skip{10};    // max associativities left unsimulated between anchors
  CurveMode mode{CurveMode::Interp};

  void check() const {
    if (!(h_tol > 0.0 && h_tol < 1.0)) throw std::invalid_argument("h_tol must be in (0, 1)");
    if (!(n_tol > 0.0 && n_tol < 1.0)) throw std::invalid_argument("n_tol must be in (0, 1)");
    if (max_skip < 1) throw std::invalid_argument("max_skip must be >= 1");
  }
};

// Ordered from most to least trustworthy; query results report the maximum.
enum class CurveSource : std::uint8_t { Simulated, Cold, Interpolated, Bme };

inline std::string_view to_string(CurveSource s) {
  switch (s) {
    case CurveSource::Simulated: return "simulated";
    case CurveSource::Cold: return "cold";
    case CurveSource::Interpolated: return "interpolated";
    case CurveSource::Bme: return "bme";
  }
  return "?";
}

inline CurveSource curve_source_from_string(std::string_view s) {
  if (s == "simulated") return CurveSource::Simulated;
  if (s == "cold") return CurveSource::Cold;
  if (s == "interpolated") return CurveSource::Interpolated;
  if (s == "bme") return CurveSource::Bme;
  throw std::invalid_argument("unknown curve source '" + std::string(s) + "'");
}

inline bool is_exact(CurveSource s) {
  return s == CurveSource::Simulated || s == CurveSource::Cold;
}

struct CurvePoint {
  Assoc assoc{1};
  MissCount misses{0};
  CurveSource source{CurveSource::Simulated};

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

using SimulatedPoints = std::map<Assoc, MissCount>;

/// Associativities worth simulating, largest first.
///
/// Covers [1, m_star - 1] (or [1, m_max] when m_star > m_max); everything at
/// or above m_star is known to cost exactly n_star misses. Walking down from
/// the top, each next anchor is the furthest associativity whose h stays
/// within h_tol of the current anchor's h, capped at max_skip skipped values.
inline std::vector<Assoc> select_anchors(Assoc m_max, Assoc m_star,
                                         const PredictorConfig& cfg) {
  cfg.check();
  if (m_max < 1 || m_star < 1) throw std::invalid_argument("associativities must be >= 1");
  const Assoc top = m_star <= m_max ? m_star - 1 : m_max;
  std::vector<Assoc> anchors;
  if (top == 0) return anchors;

  Assoc a = top;
  anchors.push_back(a);
  while (a > 1) {
    const double ha = model::h_value(a, m_star);
    const Assoc floor_m = a > cfg.max_skip + 1 ? a - (cfg.max_skip + 1) : 1;
    Assoc b = a - 1;
    while (b > floor_m && (model::h_value(b - 1, m_star) - ha) / ha < cfg.h_tol) --b;
    anchors.push_back(b);
    a = b;
  }
  return anchors;
}

/// Bisects every adjacent simulated pair whose miss counts differ by n_tol or
/// more (measured against the larger associativity) until each such gap is
/// within tolerance or has width 1. `simulate(m)` must return the exact miss
/// count at m.
template <typename Simulate>
SimulatedPoints refine(SimulatedPoints points, Simulate&& simulate,
                       const PredictorConfig& cfg) {
  cfg.check();
  if (points.empty()) throw std::invalid_argument("refine needs at least one point");

  auto needs_split = [&](Assoc lo, MissCount n_lo, Assoc hi, MissCount n_hi) {
    return hi - lo >= 2 && n_lo > n_hi &&
           static_cast<double>(n_lo) >= (1.0 + cfg.n_tol) * static_cast<double>(n_hi);
  };

  std::vector<std::pair<Assoc, Assoc>> work;
  for (auto it = points.begin(), nx = std::next(it); nx != points.end(); ++it, ++nx)
    work.emplace_back(it->first, nx->first);

  while (!work.empty()) {
    auto [lo, hi] = work.back();
    work.pop_back();
    if (!needs_split(lo, points.at(lo), hi, points.at(hi))) continue;
    const Assoc mid = lo + (hi - lo) / 2;
    points.emplace(mid, static_cast<MissCount>(simulate(mid)));
    work.emplace_back(lo, mid);
    work.emplace_back(mid, hi);
  }
  return points;
}

namespace detail {

inline MissCount round_half_up(double x) {
  return x <= 0.0 ? 0 : static_cast<MissCount>(std::floor(x + 0.5));
}

// Walks [1, m_max], keeping simulated points, tagging m >= m_star as cold and
// calling fill(lo, hi, m) for everything else.
template <typename Fill>
std::vector<CurvePoint> build_curve(const SimulatedPoints& points, Assoc m_max,
                                    MissCount n_star, Assoc m_star, Fill&& fill) {
  std::vector<CurvePoint> curve;
  curve.reserve(m_max);
  for (Assoc m = 1; m <= m_max; ++m) {
    if (auto it = points.find(m); it != points.end()) {
      curve.push_back({m, it->second, CurveSource::Simulated});
      continue;
    }
    if (m >= m_star) {
      curve.push_back({m, n_star, CurveSource::Cold});
      continue;
    }
    auto hi = points.upper_bound(m);
    if (hi == points.end() || hi == points.begin())
      throw std::invalid_argument("associativity " + std::to_string(m) +
                                  " has no simulated point on both sides");
    auto lo = std::prev(hi);
    curve.push_back(fill(*lo, *hi, m));
  }
  return curve;
}

}  // namespace detail

/// Full curve over [1, m_max] with linear interpolation between simulated
/// points and n_star from m_star upward.
inline std::vector<CurvePoint> interpolate_curve(const SimulatedPoints& points, Assoc m_max,
                                                 MissCount n_star, Assoc m_star) {
  return detail::build_curve(
      points, m_max, n_star, m_star,
      [](std::pair<const Assoc, MissCount> lo, std::pair<const Assoc, MissCount> hi,
         Assoc m) {
        const double t = static_cast<double>(m - lo.first) / static_cast<double>(hi.first - lo.first);
        const double n = static_cast<double>(lo.second) +
                         t * (static_cast<double>(hi.second) - static_cast<double>(lo.second));
        return CurvePoint{m, detail::round_half_up(n), CurveSource::Interpolated};
      });
}

/// Model estimate at m inside the gap (lo, hi): r0 is recovered at both
/// endpoints, interpolated linearly to m and fed back into the model.
inline double bme_gap_estimate(Assoc lo, double n_lo, Assoc hi, double n_hi, Assoc m,
                               double m_star, double n_star) {
  if (hi >= m_star) throw std::invalid_argument("gap endpoint at or above m_star has no r0");
  const double r_lo = model::r0_from_miss(lo, m_star, n_star, n_lo);
  const double r_hi = model::r0_from_miss(hi, m_star, n_star, n_hi);
  const double t = static_cast<double>(m - lo) / static_cast<double>(hi - lo);
  return model::bme_predict(m, m_star, n_star, r_lo + t * (r_hi - r_lo));
}

/// Same coverage as interpolate_curve, but gaps are filled from the model
/// with an interpolated r0 correction.
inline std::vector<CurvePoint> bme_curve(const SimulatedPoints& points, Assoc m_max,
                                         MissCount n_star, Assoc m_star) {
  return detail::build_curve(
      points, m_max, n_star, m_star,
      [&](std::pair<const Assoc, MissCount> lo, std::pair<const Assoc, MissCount> hi,
          Assoc m) {
        const double n = bme_gap_estimate(lo.first, static_cast<double>(lo.second), hi.first,
                                          static_cast<double>(hi.second), m, m_star,
                                          static_cast<double>(n_star));
        return CurvePoint{m, detail::round_half_up(n), CurveSource::Bme};
      });
}

}  // namespace wearcache
