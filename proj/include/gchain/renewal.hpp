#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gchain/core.hpp"
#include "gchain/decay.hpp"
#include "gchain/kernel.hpp"

namespace gchain {

/// Return probabilities of the house-of-cards chain (climb with probability
/// a_k from height k, fall to 0 otherwise): rho[m] = P(W_m = 0 | W_0 = 0).
///
/// This is the literal "return at epoch m" reading; for the companion
/// first-passage convention see first_return_law. Inputs are regularized to
/// be non-decreasing (running maximum) before the DP; the regularized copy
/// is retained. States above m are unreachable at epoch m, so the truncation
/// is exact.
struct RhoTable {
  std::vector<double> rho;               // rho[m], m = 0..m_max; rho[0] = 1
  std::vector<double> a_regularized;     // the sequence the DP actually used
  double mean_gap_partial = 0.0;         // sum_{m=1}^{m_max} rho_m  (th0 (iv) reading)
  double weighted_partial = 0.0;         // sum_{m=1}^{m_max} m rho_m
  bool mean_converged = false;           // geometric tail test; never folded into sums
  bool second_moment_converged = false;
  double row_sum_max_error = 0.0;        // DP stochasticity diagnostic
};

inline RhoTable rho_table(std::span<const double> a_seq, std::size_t m_max) {
  std::vector<double> a(a_seq.begin(), a_seq.end());
  double running = 0.0;
  for (double& v : a) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("rho_table: a_k values must lie in [0,1]");
    running = std::max(running, v);
    v = running;
  }
  const auto a_at = [&](std::size_t k) -> double {
    if (a.empty()) return 1.0;
    return k < a.size() ? a[k] : a.back();
  };

  RhoTable out;
  out.a_regularized = a;
  out.rho.assign(m_max + 1, 0.0);
  out.rho[0] = 1.0;

  std::vector<double> dist(m_max + 1, 0.0), next(m_max + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    double at_zero = 0.0;
    std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(m) + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double mass = dist[j];
      if (mass == 0.0) continue;
      const double climb = a_at(j);
      at_zero += mass * (1.0 - climb);
      next[j + 1] = mass * climb;
    }
    next[0] = at_zero;
    std::swap(dist, next);
    double row_sum = 0.0;
    for (std::size_t j = 0; j <= m; ++j) row_sum += dist[j];
    out.row_sum_max_error = std::max(out.row_sum_max_error, std::fabs(row_sum - 1.0));
    out.rho[m] = dist[0];
    out.mean_gap_partial += dist[0];
    out.weighted_partial += static_cast<double>(m) * dist[0];
  }

  // Geometric tail diagnostics. Extrapolations are flags only: partial sums
  // are reported as computed.
  if (m_max >= 2) {
    const double last = out.rho[m_max], prev = out.rho[m_max - 1];
    if (last == 0.0) {
      out.mean_converged = true;
      out.second_moment_converged = true;
    } else if (prev > 0.0 && last < prev) {
      const double r = last / prev;
      const double m = static_cast<double>(m_max);
      const double tail_mean = last * r / (1.0 - r);
      const double tail_weighted = last * (m * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
      out.mean_converged = tail_mean <= 1e-9 * std::max(1.0, out.mean_gap_partial);
      out.second_moment_converged =
          tail_weighted <= 1e-9 * std::max(1.0, out.weighted_partial);
    }
  }
  return out;
}

/// Distribution of a renewal gap on {1..m_max}.
struct GapLaw {
  enum class Source { DpSurvival, DpFirstReturn, Empirical };

  std::vector<double> pmf;  // pmf[m], m = 1..m_max; pmf[0] = 0
  Source source = Source::Empirical;

  double total() const {
    double s = 0.0;
    for (double v : pmf) s += v;
    return s;
  }
  double deficit() const { return 1.0 - total(); }
  double mean() const {
    double s = 0.0;
    for (std::size_t m = 1; m < pmf.size(); ++m) s += static_cast<double>(m) * pmf[m];
    return s;
  }
  double second_moment() const {
    double s = 0.0;
    for (std::size_t m = 1; m < pmf.size(); ++m)
      s += static_cast<double>(m) * static_cast<double>(m) * pmf[m];
    return s;
  }
};

/// Gap law under the survival reading P(gap >= m) = rho_m. Degenerates for
/// constant a (the literal convention; kept deliberately, see the CLI's
/// side-by-side report).
inline GapLaw gap_law_from_survival(const RhoTable& table) {
  GapLaw law;
  law.source = GapLaw::Source::DpSurvival;
  if (table.rho.size() < 2) return law;
  law.pmf.assign(table.rho.size() - 1, 0.0);
  for (std::size_t m = 1; m + 1 < table.rho.size(); ++m)
    law.pmf[m] = std::max(0.0, table.rho[m] - table.rho[m + 1]);
  return law;
}

/// First-passage gap law of the house-of-cards chain:
/// P(gap = m) = a_0 ... a_{m-2} (1 - a_{m-1}).
inline GapLaw first_return_law(std::span<const double> a_seq, std::size_t m_max) {
  std::vector<double> a(a_seq.begin(), a_seq.end());
  double running = 0.0;
  for (double& v : a) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("first_return_law: a_k values must lie in [0,1]");
    running = std::max(running, v);
    v = running;
  }
  const auto a_at = [&](std::size_t k) -> double {
    if (a.empty()) return 1.0;
    return k < a.size() ? a[k] : a.back();
  };
  GapLaw law;
  law.source = GapLaw::Source::DpFirstReturn;
  law.pmf.assign(m_max + 1, 0.0);
  double climb = 1.0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    law.pmf[m] = climb * (1.0 - a_at(m - 1));
    climb *= a_at(m - 1);
  }
  return law;
}

inline GapLaw empirical_gap_law(std::span<const std::uint64_t> gaps) {
  GapLaw law;
  law.source = GapLaw::Source::Empirical;
  if (gaps.empty()) return law;
  const std::uint64_t max_gap = *std::max_element(gaps.begin(), gaps.end());
  law.pmf.assign(max_gap + 1, 0.0);
  for (std::uint64_t g : gaps) law.pmf[g] += 1.0;
  for (double& v : law.pmf) v /= static_cast<double>(gaps.size());
  return law;
}

/// Size-biased (origin-straddling) gap law: P(T_1 - T_0 = k) =
/// k P(T_2 - T_1 = k) / E(T_2 - T_1), normalized over the truncated support
/// with the deficit left visible in total().
inline GapLaw size_biased_gap(const GapLaw& gap) {
  const double mean = gap.mean();
  if (!(mean > 0.0)) throw PreconditionError("size_biased_gap: gap law has zero mean");
  GapLaw out;
  out.source = gap.source;
  out.pmf.assign(gap.pmf.size(), 0.0);
  for (std::size_t m = 1; m < gap.pmf.size(); ++m)
    out.pmf[m] = static_cast<double>(m) * gap.pmf[m] / mean;
  return out;
}

enum class FcltRegime { None, Var1, Var2 };

inline std::string to_string(FcltRegime r) {
  switch (r) {
    case FcltRegime::Var1:
      return "fclt_var1";
    case FcltRegime::Var2:
      return "fclt_var2";
    default:
      return "none";
  }
}

/// Decay-regime classifier for a_k >= 1 - C (log k)^a / k^b:
///   var2 (block and autocovariance variance forms both valid) iff
///        b > 2, or a < -1 and b = 2;
///   var1 (block variance form valid) iff b > 1, or a < -1 and b = 1.
/// The stronger applicable regime is returned.
inline FcltRegime classify_decay(const DecayClass& d) {
  d.validate();
  const double a = d.log_exp, b = d.pow_exp;
  if (b > 2.0 || (a < -1.0 && b == 2.0)) return FcltRegime::Var2;
  if (b > 1.0 || (a < -1.0 && b == 1.0)) return FcltRegime::Var1;
  return FcltRegime::None;
}

/// Regime implied by a model's certified minorization bounds. Finite-order
/// models (zero tail) satisfy the strongest regime; a sub-power tail
/// (pow_exp < 1, e.g. ising with p < 2) certifies nothing.
inline FcltRegime fclt_regime(const ModelSpec& model) {
  const AkCertificate cert = ak_certificate(model);
  if (cert.zero_tail) return FcltRegime::Var2;
  if (cert.tail.pow_exp < 1.0) return FcltRegime::None;
  return classify_decay(cert.tail);
}

struct SummabilityReport {
  TailSumBound sum_one_minus_a;    // sum_k (1 - a_k)
  TailSumBound sum_k_one_minus_a;  // sum_k k (1 - a_k)
  bool product_positive = false;        // prod a_k > 0 certified
  bool second_moment_certified = false; // E((T_2-T_1)^2) < inf certified
};

inline SummabilityReport summability_checks(const AkCertificate& cert) {
  SummabilityReport rep;
  double prefix_sum = 0.0, prefix_weighted = 0.0;
  bool prefix_positive = true;
  for (std::size_t k = 0; k < cert.prefix_one_minus_a.size(); ++k) {
    const double eps = cert.prefix_one_minus_a[k];
    prefix_sum += eps;
    prefix_weighted += static_cast<double>(k) * eps;
    if (eps >= 1.0) prefix_positive = false;
  }
  if (cert.zero_tail) {
    rep.sum_one_minus_a = {true, prefix_sum};
    rep.sum_k_one_minus_a = {true, prefix_weighted};
  } else {
    const std::uint64_t from =
        std::max<std::uint64_t>(cert.prefix_one_minus_a.size(), cert.tail.threshold);
    // Levels between the prefix and the tail threshold are covered by the
    // bound evaluated at the threshold (the shape is non-increasing there).
    double flat = 0.0, flat_weighted = 0.0;
    for (std::uint64_t k = cert.prefix_one_minus_a.size(); k < from; ++k) {
      const double eps = cert.tail.coeff *
                         std::pow(std::log(static_cast<double>(from)), cert.tail.log_exp) *
                         std::pow(static_cast<double>(from), -cert.tail.pow_exp);
      flat += eps;
      flat_weighted += static_cast<double>(k) * eps;
    }
    const TailSumBound tail =
        log_power_tail_sum(cert.tail.coeff, cert.tail.log_exp, cert.tail.pow_exp, from);
    const TailSumBound tail_weighted = log_power_tail_sum_weighted(
        cert.tail.coeff, cert.tail.log_exp, cert.tail.pow_exp, from);
    rep.sum_one_minus_a = {tail.finite, prefix_sum + flat + tail.upper};
    rep.sum_k_one_minus_a = {tail_weighted.finite,
                             prefix_weighted + flat_weighted + tail_weighted.upper};
  }
  rep.product_positive = rep.sum_one_minus_a.finite && prefix_positive;
  rep.second_moment_certified = rep.sum_k_one_minus_a.finite;
  return rep;
}

}  // namespace gchain
