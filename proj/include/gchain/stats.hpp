#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace gchain::stats {

/// Standard normal distribution function. std::erfc is correctly rounded to
/// well below the 1e-7 interchange accuracy this library requires, so any
/// implementation meeting that contract may be substituted.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Complementary Kolmogorov distribution Q(lambda) = P(sup|B| > lambda):
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
/// For small lambda the dual theta-series converges faster and is used
/// instead (Marsaglia/Tsang/Wang switch point).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double t = std::exp(-std::acos(-1.0) * std::acos(-1.0) / (8.0 * lambda * lambda));
    const double sum = t + std::pow(t, 9) + std::pow(t, 25) + std::pow(t, 49);
    return 1.0 - std::sqrt(2.0 * std::acos(-1.0)) / lambda * sum;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::max(0.0, 2.0 * sum);
}

struct KsResult {
  double distance = 0.0;
  double pvalue = 1.0;
};

/// One-sample Kolmogorov-Smirnov test of `sample` against the standard
/// normal distribution function. Uses the Stephens small-sample correction
/// for the asymptotic p-value.
inline KsResult ks_test_standard_normal(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::vector<double> z(sample.begin(), sample.end());
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  return {d, kolmogorov_q(lambda)};
}

// --- regularized incomplete gamma, for chi-square tail probabilities ---

namespace detail {

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

/// Upper tail probability of a chi-square with `df` degrees of freedom.
inline double chi_square_sf(double stat, double df) {
  if (df <= 0.0) throw std::invalid_argument("chi_square_sf: df must be positive");
  if (stat <= 0.0) return 1.0;
  return gamma_q(df / 2.0, stat / 2.0);
}

struct ChiSquareResult {
  double stat = 0.0;
  std::size_t df = 0;
  double pvalue = 1.0;
  std::size_t bins_used = 0;
};

/// Goodness-of-fit chi-square of observed counts against expected counts
/// (same length, expected need not be normalized to the observed total: it
/// is rescaled). Trailing bins are pooled until every expected count is at
/// least `min_expected`.
inline ChiSquareResult chi_square_gof(std::span<const double> observed,
                                      std::span<const double> expected,
                                      double min_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  double n_obs = 0.0, n_exp = 0.0;
  for (double o : observed) n_obs += o;
  for (double e : expected) n_exp += e;
  if (n_obs <= 0.0 || n_exp <= 0.0)
    throw std::invalid_argument("chi_square_gof: empty counts");
  const double scale = n_obs / n_exp;

  std::vector<double> o_pool, e_pool;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t b = 0; b < observed.size(); ++b) {
    o_acc += observed[b];
    e_acc += expected[b] * scale;
    if (e_acc >= min_expected) {
      o_pool.push_back(o_acc);
      e_pool.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (!e_pool.empty()) {
      o_pool.back() += o_acc;
      e_pool.back() += e_acc;
    } else {
      o_pool.push_back(o_acc);
      e_pool.push_back(e_acc);
    }
  }
  if (o_pool.size() < 2)
    return {0.0, 0, 1.0, o_pool.size()};

  double stat = 0.0;
  for (std::size_t b = 0; b < o_pool.size(); ++b) {
    const double diff = o_pool[b] - e_pool[b];
    stat += diff * diff / e_pool[b];
  }
  const std::size_t df = o_pool.size() - 1;
  return {stat, df, chi_square_sf(stat, static_cast<double>(df)), o_pool.size()};
}

/// Two-sample homogeneity chi-square for two histograms over the same bins.
inline ChiSquareResult chi_square_two_sample(std::span<const double> counts_a,
                                             std::span<const double> counts_b,
                                             double min_expected = 5.0) {
  if (counts_a.size() != counts_b.size() || counts_a.empty())
    throw std::invalid_argument("chi_square_two_sample: size mismatch");
  double na = 0.0, nb = 0.0;
  for (double c : counts_a) na += c;
  for (double c : counts_b) nb += c;
  if (na <= 0.0 || nb <= 0.0)
    throw std::invalid_argument("chi_square_two_sample: empty sample");

  // Pool bins (jointly) until pooled expected counts are adequate in both rows.
  std::vector<double> a_pool, b_pool;
  double a_acc = 0.0, b_acc = 0.0;
  const double frac_a = na / (na + nb), frac_b = nb / (na + nb);
  for (std::size_t i = 0; i < counts_a.size(); ++i) {
    a_acc += counts_a[i];
    b_acc += counts_b[i];
    const double tot = a_acc + b_acc;
    if (tot * frac_a >= min_expected && tot * frac_b >= min_expected) {
      a_pool.push_back(a_acc);
      b_pool.push_back(b_acc);
      a_acc = b_acc = 0.0;
    }
  }
  if ((a_acc > 0.0 || b_acc > 0.0) && !a_pool.empty()) {
    a_pool.back() += a_acc;
    b_pool.back() += b_acc;
  }
  if (a_pool.size() < 2) return {0.0, 0, 1.0, a_pool.size()};

  double stat = 0.0;
  for (std::size_t i = 0; i < a_pool.size(); ++i) {
    const double tot = a_pool[i] + b_pool[i];
    const double ea = tot * frac_a, eb = tot * frac_b;
    stat += (a_pool[i] - ea) * (a_pool[i] - ea) / ea;
    stat += (b_pool[i] - eb) * (b_pool[i] - eb) / eb;
  }
  const std::size_t df = a_pool.size() - 1;
  return {stat, df, chi_square_sf(stat, static_cast<double>(df)), a_pool.size()};
}

// --- sample moments ---

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double se_mean = 0.0;
  std::size_t n = 0;
};

inline MeanVar mean_var(std::span<const double> xs) {
  MeanVar r;
  r.n = xs.size();
  if (r.n == 0) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.var = ss / static_cast<double>(r.n - 1);
  r.se_mean = std::sqrt(r.var / static_cast<double>(r.n));
  return r;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline Moments standardized_moments(std::span<const double> xs) {
  Moments m;
  const MeanVar mv = mean_var(xs);
  m.mean = mv.mean;
  m.var = mv.var;
  if (xs.size() < 3 || mv.var <= 0.0) return m;
  double m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mv.mean;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  m3 /= n;
  m4 /= n;
  const double s2 = mv.var * (n - 1) / n;  // biased variance for moment ratios
  m.skewness = m3 / std::pow(s2, 1.5);
  m.excess_kurtosis = m4 / (s2 * s2) - 3.0;
  return m;
}

/// Standard error of the mean of a dependent series via non-overlapping
/// batch means.
inline double batch_means_se(std::span<const double> xs, std::size_t num_batches = 32) {
  if (xs.size() < 2 * num_batches) num_batches = std::max<std::size_t>(2, xs.size() / 2);
  if (xs.size() < 4) return std::numeric_limits<double>::infinity();
  const std::size_t len = xs.size() / num_batches;
  std::vector<double> means;
  means.reserve(num_batches);
  for (std::size_t b = 0; b < num_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += xs[i];
    means.push_back(s / static_cast<double>(len));
  }
  const MeanVar mv = mean_var(means);
  return mv.se_mean;
}

inline double lag1_autocorr(std::span<const double> xs) {
  if (xs.size() < 3) return 0.0;
  const MeanVar mv = mean_var(xs);
  if (mv.var <= 0.0) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    cov += (xs[i] - mv.mean) * (xs[i + 1] - mv.mean);
  cov /= static_cast<double>(xs.size() - 1);
  return cov / mv.var;
}

}  // namespace gchain::stats
