#pragma once

#include <cmath>
#include <stdexcept>

namespace wearcache::model {

// Miss-count model of one FIFO set as a function of associativity m, given
// the set's optimal associativity m_star and cold-miss count n_star.
//
//   h  = 1 + m_star / m
//   v1 = (h + sqrt(h^2 - 4)) / 2          root of v^2 - h v + 1 = 0
//   n  = v1 (n_star + r0) - r0            for m < m_star, else n_star
//
// r0 is an associativity-dependent correction. The older page-fault form
// fixes it (as n0) and shifts both capacities by a blocked amount m0.

inline double h_value(double m, double m_star) {
  if (!(m > 0.0) || !(m_star > 0.0))
    throw std::domain_error("associativities must be positive");
  return 1.0 + m_star / m;
}

inline double v1(double h) {
  if (!(h >= 2.0)) throw std::domain_error("v1 needs h >= 2");
  return (h + std::sqrt(h * h - 4.0)) / 2.0;
}

inline double bme_predict(double m, double m_star, double n_star, double r0) {
  if (!(m >= 1.0)) throw std::domain_error("associativity must be >= 1");
  if (m >= m_star) return n_star;
  return v1(h_value(m, m_star)) * (n_star + r0) - r0;
}

/// Correction that makes bme_predict reproduce an observed miss count n.
inline double r0_from_miss(double m, double m_star, double n_star, double n) {
  if (!(m >= 1.0)) throw std::domain_error("associativity must be >= 1");
  if (m >= m_star) throw std::domain_error("r0 is undefined for m >= m_star");
  const double v = v1(h_value(m, m_star));
  return (v * n_star - n) / (1.0 - v);
}

inline double pfe_predict(double m, double m_star, double n_star, double m0, double n0) {
  if (!(m > m0)) throw std::domain_error("page-fault form is singular for m <= m0");
  const double h = 1.0 + (m_star - m0) / (m - m0);
  return v1(h) * (n_star + n0) - n0;
}

}  // namespace wearcache::model
