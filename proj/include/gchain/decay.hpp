#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace gchain {

/// Tail-bound shape C (log k)^a / k^b for k >= K, the decay family used to
/// classify minorization sequences: a_k >= 1 - C (log k)^a / k^b.
struct DecayClass {
  double log_exp = 0.0;           // a
  double pow_exp = 1.0;           // b
  double coeff = 1.0;             // C
  std::uint64_t threshold = 2;    // K

  void validate() const {
    if (!(pow_exp >= 1.0)) throw std::invalid_argument("DecayClass: pow_exp must be >= 1");
    if (!(coeff > 0.0)) throw std::invalid_argument("DecayClass: coeff must be > 0");
    if (threshold < 2) throw std::invalid_argument("DecayClass: threshold must be >= 2");
  }
};

/// Whether sum_k (log k)^a / k^b converges.
inline bool log_power_sum_finite(double a, double b) {
  return b > 1.0 || (b == 1.0 && a < -1.0);
}

struct TailSumBound {
  bool finite = false;
  double upper = std::numeric_limits<double>::infinity();
};

/// Certified upper bound on sum_{k >= from} C (log k)^a / k^b (terms with
/// k < 2 are excluded; the series is indexed from 2 at minimum).
///
/// The bound is an explicit partial sum plus an integral-comparison tail:
/// for K with log K >= max(0, 2a/(b-1)), (log x)^a <= (log K)^a (x/K)^{(b-1)/2}
/// on [K, inf), giving  int_K^inf (log x)^a x^{-b} dx <= 2 (log K)^a K^{1-b}/(b-1).
inline TailSumBound log_power_tail_sum(double coeff, double a, double b,
                                       std::uint64_t from) {
  if (coeff == 0.0) return {true, 0.0};
  if (coeff < 0.0) throw std::invalid_argument("log_power_tail_sum: coeff < 0");
  if (!log_power_sum_finite(a, b)) return {false, std::numeric_limits<double>::infinity()};

  const auto term = [&](std::uint64_t k) {
    return std::pow(std::log(static_cast<double>(k)), a) *
           std::pow(static_cast<double>(k), -b);
  };

  std::uint64_t start = from < 2 ? 2 : from;
  // Start the analytic tail where the closed-form integral bound is valid.
  double k_min = 3.0;
  if (b > 1.0 && a > 0.0) k_min = std::max(k_min, std::exp(2.0 * a / (b - 1.0)));
  std::uint64_t cut = start;
  if (static_cast<double>(cut) < k_min) cut = static_cast<std::uint64_t>(k_min) + 1;
  cut += 512;  // explicit terms tighten the bound

  double sum = 0.0;
  for (std::uint64_t k = start; k < cut; ++k) sum += term(k);

  const double log_cut = std::log(static_cast<double>(cut));
  double tail;
  if (b > 1.0) {
    tail = term(cut) +
           2.0 * std::pow(log_cut, a) * std::pow(static_cast<double>(cut), 1.0 - b) / (b - 1.0);
  } else {  // b == 1, a < -1
    tail = term(cut) + std::pow(log_cut, a + 1.0) / (-a - 1.0);
  }
  return {true, coeff * (sum + tail)};
}

/// Certified upper bound on sum_{k >= from} k * C (log k)^a / k^b.
inline TailSumBound log_power_tail_sum_weighted(double coeff, double a, double b,
                                                std::uint64_t from) {
  return log_power_tail_sum(coeff, a, b - 1.0, from);
}

}  // namespace gchain
