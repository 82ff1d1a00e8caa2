#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gchain/core.hpp"
#include "gchain/rng.hpp"

namespace testsupport {

/// Brute-force return probability of the house-of-cards chain by path
/// enumeration: all 2^M climb/fall decision sequences, summing the
/// probability of paths sitting at 0 at epoch M.
inline double rho_by_path_enumeration(std::span<const double> a, std::size_t m_target) {
  const auto a_at = [&](std::size_t k) { return k < a.size() ? a[k] : a.back(); };
  double total = 0.0;
  const std::uint64_t paths = std::uint64_t{1} << m_target;
  for (std::uint64_t mask = 0; mask < paths; ++mask) {
    double prob = 1.0;
    std::size_t height = 0;
    for (std::size_t step = 0; step < m_target; ++step) {
      const bool climb = (mask >> step) & 1;
      if (climb) {
        prob *= a_at(height);
        ++height;
      } else {
        prob *= 1.0 - a_at(height);
        height = 0;
      }
      if (prob == 0.0) break;
    }
    if (height == 0) total += prob;
  }
  return total;
}

/// Direct sampler for the order-1 Markov oracle (no envelopes involved).
inline std::vector<gchain::Symbol> markov_direct(double stay_minus, double stay_plus,
                                                 std::size_t n, gchain::UniformStream& rng) {
  std::vector<gchain::Symbol> out;
  out.reserve(n);
  gchain::Symbol prev = rng.next_u01() < 0.5 ? gchain::Symbol::Minus : gchain::Symbol::Plus;
  for (std::size_t t = 0; t < n; ++t) {
    const double stay = prev == gchain::Symbol::Minus ? stay_minus : stay_plus;
    const gchain::Symbol next = rng.next_u01() < stay ? prev : gchain::flip(prev);
    out.push_back(next);
    prev = next;
  }
  return out;
}

/// Standard normal draws via Box-Muller on the library's stream (test use
/// only; keeps test randomness platform-independent).
inline std::vector<double> standard_normals(std::size_t n, gchain::UniformStream& rng) {
  std::vector<double> out;
  out.reserve(n + 1);
  while (out.size() < n) {
    const double u1 = std::max(rng.next_u01(), 1e-300);
    const double u2 = rng.next_u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    out.push_back(r * std::cos(2.0 * std::acos(-1.0) * u2));
    out.push_back(r * std::sin(2.0 * std::acos(-1.0) * u2));
  }
  out.resize(n);
  return out;
}

/// Two-sided bracket of zeta(s) = sum j^{-s} by partial sums and integral
/// tails: P_K + (K+1)^{1-s}/(s-1) <= zeta(s) <= P_K + K^{1-s}/(s-1).
struct Bracket {
  double lo, hi;
};

inline Bracket zeta_bracket(double s, std::size_t terms) {
  double partial = 0.0;
  for (std::size_t j = 1; j <= terms; ++j) partial += std::pow(static_cast<double>(j), -s);
  const double k = static_cast<double>(terms);
  return {partial + std::pow(k + 1.0, 1.0 - s) / (s - 1.0),
          partial + std::pow(k, 1.0 - s) / (s - 1.0)};
}

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace testsupport
