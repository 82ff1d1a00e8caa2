#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gchain/core.hpp"
#include "gchain/regen.hpp"
#include "gchain/renewal.hpp"
#include "gchain/stats.hpp"

namespace gchain {

/// Observable f : E -> R with its centering status. `exactly_centered`
/// asserts E f(X_0) = 0 from model structure (spin-flip symmetry, known
/// stationary law); an empirically centered f instead carries the standard
/// error of its center estimate, which estimators fold into their own SEs.
struct ObservableF {
  double f_minus = -1.0;
  double f_plus = +1.0;
  bool exactly_centered = true;
  double center_se = 0.0;

  double operator()(Symbol s) const { return s == Symbol::Plus ? f_plus : f_minus; }
  double sup_abs() const { return std::max(std::fabs(f_minus), std::fabs(f_plus)); }

  static ObservableF spin() { return {}; }
  static ObservableF zero() { return {0.0, 0.0, true, 0.0}; }
  static ObservableF scaled(const ObservableF& f, double c) {
    return {c * f.f_minus, c * f.f_plus, f.exactly_centered, std::fabs(c) * f.center_se};
  }
  /// f(x) = x - mu_hat with mu_hat estimated from an independent pilot run.
  static ObservableF centered_spin(double mu_hat, double mu_se) {
    return {-1.0 - mu_hat, 1.0 - mu_hat, false, mu_se};
  }
  /// Deliberately shifted spin, for negative controls.
  static ObservableF shifted_spin(double shift) {
    return {-1.0 + shift, 1.0 + shift, true, 0.0};
  }
};

enum class VarianceMethod { Block, Autocov, Replication };

inline std::string to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::Block:
      return "block";
    case VarianceMethod::Autocov:
      return "autocov";
    default:
      return "replication";
  }
}

struct VarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  VarianceMethod method = VarianceMethod::Block;
  std::uint64_t n_effective = 0;
  std::map<std::string, double> details;
};

inline double agreement_z(const VarianceEstimate& a, const VarianceEstimate& b) {
  const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  if (se == 0.0) return a.value == b.value ? 0.0 : std::numeric_limits<double>::infinity();
  return (a.value - b.value) / se;
}

/// Block variance estimator sigma^2 = E(xi^2) / E(gap) over complete blocks.
/// The SE comes from the delta method on the joint (xi^2, gap) sample; the
/// details report mean(xi) with its SE as the zero-mean block check.
inline VarianceEstimate variance_block(std::span<const Block> blocks,
                                       const ObservableF& f = ObservableF::spin(),
                                       std::size_t min_blocks = 30) {
  const std::size_t n = blocks.size();
  if (n < min_blocks)
    throw PreconditionError("variance_block: " + std::to_string(n) + " blocks < required " +
                            std::to_string(min_blocks));
  double sum_a = 0.0, sum_b = 0.0, sum_xi = 0.0, sum_xg = 0.0;
  for (const Block& b : blocks) {
    sum_a += b.xi * b.xi;
    sum_b += static_cast<double>(b.gap());
    sum_xi += b.xi;
    sum_xg += b.xi * static_cast<double>(b.gap());
  }
  const double nn = static_cast<double>(n);
  const double mean_a = sum_a / nn, mean_b = sum_b / nn;
  const double value = mean_a / mean_b;

  double s_aa = 0.0, s_bb = 0.0, s_ab = 0.0, s_xi = 0.0;
  for (const Block& b : blocks) {
    const double da = b.xi * b.xi - mean_a;
    const double db = static_cast<double>(b.gap()) - mean_b;
    s_aa += da * da;
    s_bb += db * db;
    s_ab += da * db;
    s_xi += (b.xi - sum_xi / nn) * (b.xi - sum_xi / nn);
  }
  s_aa /= nn - 1.0;
  s_bb /= nn - 1.0;
  s_ab /= nn - 1.0;
  double var_ratio = (s_aa - 2.0 * value * s_ab + value * value * s_bb) / (nn * mean_b * mean_b);
  var_ratio = std::max(var_ratio, 0.0);
  double se = std::sqrt(var_ratio);
  if (f.center_se > 0.0) {
    // d/d(center) of mean((xi - gap*c)^2)/mean(gap) at c = 0.
    const double dvalue = std::fabs(-2.0 * (sum_xg / nn) / mean_b);
    se = std::sqrt(se * se + dvalue * dvalue * f.center_se * f.center_se);
  }

  VarianceEstimate est;
  est.value = value;
  est.std_error = se;
  est.method = VarianceMethod::Block;
  est.n_effective = n;
  est.details["num_blocks"] = nn;
  est.details["mean_gap"] = mean_b;
  est.details["mean_xi"] = sum_xi / nn;
  est.details["mean_xi_se"] = std::sqrt(std::max(s_xi / (nn - 1.0), 0.0) / nn);
  return est;
}

/// Empirical autocovariances gamma_i = (1/n) sum_t x_t x_{t+i} of the raw
/// observable series (plain plug-in of the stationary form, no taper).
inline std::vector<double> autocov_profile(std::span<const Symbol> symbols,
                                           const ObservableF& f, std::size_t max_lag) {
  const std::size_t n = symbols.size();
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = f(symbols[t]);
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t i = 0; i <= max_lag && i < n; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t + i < n; ++t) s += x[t] * x[t + i];
    gamma[i] = s / static_cast<double>(n);
  }
  return gamma;
}

/// Autocovariance variance estimator sigma^2 = gamma_0 + 2 sum_{i<=L} gamma_i.
///
/// Requires n >= 50 L. The centering check compares the empirical mean of
/// f(X_t) against 3x its dependence-aware SE (plus any declared center SE)
/// and rejects with non_centered_f on failure. The SE of the estimate comes
/// from recomputing it on contiguous segments.
inline VarianceEstimate variance_autocov(std::span<const Symbol> symbols,
                                         const ObservableF& f, std::size_t max_lag,
                                         double rho_tail_bound = -1.0) {
  const std::size_t n = symbols.size();
  if (max_lag < 1 || n < 50 * max_lag)
    throw PreconditionError("variance_autocov: lag_too_large (need n >= 50 * max_lag)");

  std::vector<double> x(n);
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = f(symbols[t]);
    mean += x[t];
  }
  mean /= static_cast<double>(n);
  const double mean_se = stats::batch_means_se(x, 32);
  if (f.sup_abs() > 0.0 && std::fabs(mean) > 3.0 * (mean_se + f.center_se) + 1e-12)
    throw PreconditionError("variance_autocov: non_centered_f (|mean| = " +
                            std::to_string(std::fabs(mean)) + " exceeds 3 SE = " +
                            std::to_string(3.0 * (mean_se + f.center_se)) + ")");

  const auto plug_in = [&](std::size_t begin, std::size_t end) {
    double v = 0.0;
    for (std::size_t i = 0; i <= max_lag; ++i) {
      double s = 0.0;
      for (std::size_t t = begin; t + i < end; ++t) s += x[t] * x[t + i];
      const double gamma = s / static_cast<double>(end - begin);
      v += (i == 0) ? gamma : 2.0 * gamma;
    }
    return v;
  };

  const double value = plug_in(0, n);

  std::size_t segments = 10;
  while (segments > 2 && n / segments < 4 * max_lag) --segments;
  std::vector<double> seg_values;
  const std::size_t seg_len = n / segments;
  for (std::size_t s = 0; s < segments; ++s)
    seg_values.push_back(plug_in(s * seg_len, (s + 1) * seg_len));
  const auto mv = stats::mean_var(seg_values);

  VarianceEstimate est;
  est.value = value;
  est.std_error = mv.se_mean;
  if (f.center_se > 0.0) {
    // Centering error shifts every covariance; first-order effect on the sum.
    const double dvalue = 2.0 * static_cast<double>(max_lag + 1) * std::fabs(mean);
    est.std_error = std::sqrt(est.std_error * est.std_error +
                              dvalue * dvalue * f.center_se * f.center_se);
  }
  est.method = VarianceMethod::Autocov;
  est.n_effective = n;
  est.details["max_lag"] = static_cast<double>(max_lag);
  est.details["segments"] = static_cast<double>(segments);
  est.details["series_mean"] = mean;
  if (rho_tail_bound >= 0.0) est.details["rho_tail_bound"] = rho_tail_bound;
  return est;
}

/// Default lag policy: the smallest L whose certified covariance tail
/// 2 sup(f)^2 sum_{i>L} rho_i falls below 1% of the running variance
/// estimate, capped at n/50. The constant 2 sup(f)^2 instantiates the C of
/// the covariance-tail bound |E f(X_0) f(X_i)| <= C rho_i.
inline std::size_t choose_max_lag(std::span<const Symbol> symbols, const ObservableF& f,
                                  const RhoTable& rho, double* tail_bound_out = nullptr) {
  const std::size_t n = symbols.size();
  const std::size_t cap = std::max<std::size_t>(1, n / 50);
  const double fsup2 = f.sup_abs() * f.sup_abs();

  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = f(symbols[t]);

  double rho_prefix = 0.0;  // sum_{i=1}^{lag} rho_i
  double running = 0.0;     // plug-in sigma^2 through the current lag
  std::size_t chosen = cap;
  double tail_at_chosen = 0.0;
  for (std::size_t lag = 0; lag <= cap; ++lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += x[t] * x[t + lag];
    const double gamma = s / static_cast<double>(n);
    running += (lag == 0) ? gamma : 2.0 * gamma;
    if (lag >= 1 && lag < rho.rho.size()) rho_prefix += rho.rho[lag];
    const double tail = 2.0 * fsup2 * std::max(0.0, rho.mean_gap_partial - rho_prefix);
    if (lag >= 1 && tail <= 0.01 * std::max(running, 1e-12)) {
      chosen = lag;
      tail_at_chosen = tail;
      break;
    }
    tail_at_chosen = tail;
  }
  if (tail_bound_out) *tail_bound_out = tail_at_chosen;
  return std::max<std::size_t>(1, chosen);
}

/// Replication variance estimator: sample variance of S_n/sqrt(n) replicas
/// with the chi-square standard error var * sqrt(2/(R-1)).
inline VarianceEstimate variance_replication(std::span<const double> replica_values,
                                             std::size_t min_replicas = 100) {
  if (replica_values.size() < min_replicas)
    throw PreconditionError("variance_replication: " + std::to_string(replica_values.size()) +
                            " replicas < required " + std::to_string(min_replicas));
  const auto mv = stats::mean_var(replica_values);
  VarianceEstimate est;
  est.value = mv.var;
  est.std_error = mv.var * std::sqrt(2.0 / static_cast<double>(replica_values.size() - 1));
  est.method = VarianceMethod::Replication;
  est.n_effective = replica_values.size();
  est.details["replicas"] = static_cast<double>(replica_values.size());
  est.details["replica_mean"] = mv.mean;
  return est;
}

struct CltTestResult {
  double ks_distance = 0.0;
  double ks_pvalue = 1.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// One-sample normality diagnostics of S_n/sqrt(n) replicas against
/// N(0, sigma^2).
inline CltTestResult clt_test(std::span<const double> replicas, double sigma,
                              std::size_t min_replicas = 100) {
  if (!(sigma > 0.0)) throw PreconditionError("clt_test: sigma_nonpositive");
  if (replicas.size() < min_replicas)
    throw PreconditionError("clt_test: need at least " + std::to_string(min_replicas) +
                            " replicas");
  std::vector<double> z(replicas.begin(), replicas.end());
  for (double& v : z) v /= sigma;
  const auto ks = stats::ks_test_standard_normal(z);
  const auto mom = stats::standardized_moments(z);
  return {ks.distance, ks.pvalue, mom.skewness, mom.excess_kurtosis};
}

struct ConsistencyResult {
  double value = 0.0;
  double std_error = 0.0;
  double envelope_halfwidth = 0.0;  // bias bound of the plug-in conditional
  std::uint64_t samples = 0;
};

/// Empirical check of consistency: E(h(past) g(x|past)) - E(h(past) 1{X_0=x})
/// estimated by time averages, with g evaluated as the envelope midpoint at
/// depth est_depth. h must depend on at most h_depth past symbols.
template <class H>
ConsistencyResult consistency_check(const ModelSpec& model, const Trajectory& traj, H&& h,
                                    std::size_t h_depth, Symbol x,
                                    std::size_t est_depth = 256) {
  const std::size_t n = traj.n();
  const std::size_t warmup = std::max(h_depth, est_depth);
  if (n < warmup + 1000)
    throw PreconditionError("consistency_check: trajectory too short for 10^3 samples");
  std::vector<double> terms;
  terms.reserve(n - warmup);
  for (std::size_t t = warmup; t < n; ++t) {
    const HistoryWindow w_h = HistoryWindow::at_time(traj.symbols.data(), t, h_depth);
    const HistoryWindow w_g = HistoryWindow::at_time(traj.symbols.data(), t, est_depth);
    EnvelopeScan scan(model, w_g);
    while (scan.advance()) {
    }
    const auto m = scan.mass();
    const double lower = (x == Symbol::Plus) ? m.alpha_plus : m.alpha_minus;
    const double upper = 1.0 - ((x == Symbol::Plus) ? m.alpha_minus : m.alpha_plus);
    const double g_mid = 0.5 * (lower + upper);
    const double hv = h(w_h);
    terms.push_back(hv * (g_mid - ((traj.symbols[t] == x) ? 1.0 : 0.0)));
  }
  ConsistencyResult out;
  const auto mv = stats::mean_var(terms);
  out.value = mv.mean;
  out.std_error = stats::batch_means_se(terms, 32);
  out.envelope_halfwidth = 0.5 * var_k(model, est_depth).value;
  out.samples = terms.size();
  return out;
}

struct WaldCheckResult {
  double relative_error = 0.0;
  double std_error = 0.0;
  std::uint64_t replicas_used = 0;
};

/// Wald-identity check across replicas:
/// mean[(sum_{k<=i(n)+1} xi_k)^2] vs mean(xi^2) * mean(i(n)+1), as a relative
/// discrepancy with a jackknife SE.
inline WaldCheckResult wald_check(std::span<const WaldSample> samples,
                                  std::size_t min_replicas = 100) {
  std::vector<const WaldSample*> valid;
  for (const auto& s : samples)
    if (s.valid) valid.push_back(&s);
  const std::size_t r = valid.size();
  if (r < min_replicas)
    throw PreconditionError("wald_check: " + std::to_string(r) + " usable replicas < " +
                            std::to_string(min_replicas));

  double sum_sq = 0.0, sum_xi2 = 0.0, sum_blocks = 0.0;
  for (const auto* s : valid) {
    sum_sq += s->sum_xi * s->sum_xi;
    sum_xi2 += s->sum_xi_sq;
    sum_blocks += static_cast<double>(s->blocks);
  }
  const auto rel = [&](double sq, double xi2, double blocks, double count) {
    const double lhs = sq / count;
    const double rhs = (xi2 / blocks) * (blocks / count);  // = xi2 / count
    if (std::fabs(lhs) < 1e-300 && std::fabs(rhs) < 1e-300) return 0.0;
    return (lhs - rhs) / std::max(std::fabs(rhs), 1e-300);
  };
  const double full = rel(sum_sq, sum_xi2, sum_blocks, static_cast<double>(r));

  // Jackknife over replicas.
  std::vector<double> loo;
  loo.reserve(r);
  for (const auto* s : valid) {
    loo.push_back(rel(sum_sq - s->sum_xi * s->sum_xi, sum_xi2 - s->sum_xi_sq,
                      sum_blocks - static_cast<double>(s->blocks),
                      static_cast<double>(r - 1)));
  }
  double jack_mean = 0.0;
  for (double v : loo) jack_mean += v;
  jack_mean /= static_cast<double>(r);
  double jack_var = 0.0;
  for (double v : loo) jack_var += (v - jack_mean) * (v - jack_mean);
  jack_var *= static_cast<double>(r - 1) / static_cast<double>(r);

  return {full, std::sqrt(jack_var), r};
}

/// S_{floor(n t)} / sqrt(n) for each grid fraction t, from one trajectory.
inline std::vector<double> scaled_partial_sums(const Trajectory& traj, const ObservableF& f,
                                               std::span<const double> grid) {
  const std::size_t n = traj.n();
  std::vector<double> out(grid.size(), 0.0);
  std::vector<std::size_t> cut(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    cut[i] = std::min<std::size_t>(n, static_cast<std::size_t>(grid[i] * static_cast<double>(n)));
  double s = 0.0;
  std::size_t gi = 0;
  for (std::size_t t = 0; t <= n; ++t) {
    while (gi < cut.size() && cut[gi] == t) out[gi++] = s / std::sqrt(static_cast<double>(n));
    if (t < n) s += f(traj.symbols[t]);
  }
  return out;
}

struct PathVariancePoint {
  double t_frac = 0.0;
  double var = 0.0;
  double se = 0.0;
};

/// Replica variances of the scaled partial-sum path at the grid points; under
/// the FCLT these track sigma^2 * t.
inline std::vector<PathVariancePoint> path_variance_profile(
    const std::vector<std::vector<double>>& replica_paths, std::span<const double> grid) {
  std::vector<PathVariancePoint> out;
  if (replica_paths.empty()) return out;
  const std::size_t r = replica_paths.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> vals;
    vals.reserve(r);
    for (const auto& path : replica_paths) vals.push_back(path[i]);
    const auto mv = stats::mean_var(vals);
    PathVariancePoint pt;
    pt.t_frac = grid[i];
    pt.var = mv.var;
    pt.se = mv.var * std::sqrt(2.0 / static_cast<double>(r - 1));
    out.push_back(pt);
  }
  return out;
}

}  // namespace gchain
