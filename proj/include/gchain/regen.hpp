#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gchain/core.hpp"
#include "gchain/kernel.hpp"
#include "gchain/rng.hpp"

namespace gchain {

/// A sampled path with confirmed regeneration times and per-step lookbacks.
struct Trajectory {
  std::vector<Symbol> symbols;
  std::vector<std::uint32_t> lookbacks;          // envelope layer that resolved each step
  std::vector<std::uint64_t> renewal_indices;    // strictly increasing, all < n
  std::uint64_t margin = 0;                      // streak horizon used by detection
  double bias_bound = 0.0;                       // P(a confirmed renewal is false), certified
  std::uint64_t seed = 0;
  std::uint64_t replica_id = 0;

  std::size_t n() const { return symbols.size(); }
};

/// Block between consecutive confirmed renewals, end exclusive.
struct Block {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  double xi = 0.0;  // sum of f over the block
  std::uint64_t gap() const { return end - start; }
};

struct SampleResult {
  Symbol symbol;
  std::size_t lookback;
};

/// Draws one symbol by walking the nested envelope layers: layer k assigns,
/// in fixed order (-1 then +1), an interval of length
/// alpha_k(x) - alpha_{k-1}(x); the symbol whose interval contains u is
/// returned together with the resolving layer. Given the full history the
/// returned symbol is distributed exactly per g(. | history).
inline SampleResult sample_symbol(const ModelSpec& model, HistoryWindow window, double u,
                                  bool ghost_extend = false, Symbol ghost = Symbol::Plus,
                                  std::size_t max_lookback = std::size_t{1} << 22) {
  EnvelopeScan scan(model, window, ghost_extend, ghost);
  double prev_minus = 0.0, prev_plus = 0.0;
  for (;;) {
    const auto m = scan.mass();
    const double cum = prev_minus + prev_plus;
    if (u < cum + (m.alpha_minus - prev_minus))
      return {Symbol::Minus, scan.depth()};
    if (u < m.alpha_minus + m.alpha_plus)
      return {Symbol::Plus, scan.depth()};
    prev_minus = m.alpha_minus;
    prev_plus = m.alpha_plus;
    if (scan.depth() >= max_lookback || !scan.advance())
      throw ThresholdOverflowError(
          "sample_symbol: uniform above total envelope mass at lookback " +
          std::to_string(scan.depth()));
  }
}

/// Raises entries to their running maximum and clamps into [0,1].
inline std::vector<double> regularize_nondecreasing(std::vector<double> a) {
  double running = 0.0;
  for (double& v : a) {
    v = std::clamp(v, 0.0, 1.0);
    running = std::max(running, v);
    v = running;
  }
  return a;
}

struct DetectResult {
  std::vector<std::uint64_t> indices;
  double bias_bound = 0.0;
};

/// Streak detection: index t is a confirmed renewal iff
/// U_{t+j} < a_lower(j) for all j = 0..margin and t + margin <= n-1.
///
/// a_lower must cover levels 0..margin and is regularized to be
/// non-decreasing (running maximum) before use. The returned bias_bound is
/// 1 - prod_{k >= margin} a_lower(k) with the sequence extended past its end
/// by its final value (so any constant a < 1 reports bias 1); simulation
/// replaces this proxy with the model's certified tail bound.
inline DetectResult detect_renewals(std::span<const double> uniforms,
                                    std::vector<double> a_lower, std::uint64_t margin) {
  if (a_lower.size() < margin + 1)
    throw PreconditionError("detect_renewals: a_lower must cover levels 0..margin");
  const std::vector<double> a = regularize_nondecreasing(std::move(a_lower));

  DetectResult out;
  double prod = a.back() < 1.0 ? 0.0 : 1.0;
  for (std::size_t k = margin; k < a.size(); ++k) prod *= a[k];
  out.bias_bound = 1.0 - prod;

  const std::size_t n = uniforms.size();
  if (n < margin + 1) return out;

  // G(s) = s - min{k : a[k] > U_s}; the streak at t spans [t, t+margin]
  // iff min_{s in window} G(s) >= t. Sliding-window minimum in O(n).
  constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();
  std::vector<std::int64_t> g(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto it = std::upper_bound(a.begin(), a.begin() + margin + 1, uniforms[s]);
    if (it == a.begin() + margin + 1) {
      g[s] = kNever;
    } else {
      const auto k_min = static_cast<std::int64_t>(it - a.begin());
      g[s] = static_cast<std::int64_t>(s) - k_min;
    }
  }

  std::deque<std::size_t> window;  // indices with increasing G
  for (std::size_t s = 0; s < n; ++s) {
    while (!window.empty() && g[window.back()] >= g[s]) window.pop_back();
    window.push_back(s);
    if (s < margin) continue;
    const std::size_t t = s - margin;
    while (window.front() < t) window.pop_front();
    if (g[window.front()] >= static_cast<std::int64_t>(t)) out.indices.push_back(t);
  }
  return out;
}

struct SimulateOptions {
  std::uint64_t margin = 0;        // 0 = choose smallest margin meeting bias_tolerance
  double bias_tolerance = 1e-6;
  std::uint32_t detect_scan_cap = 12;  // exact-scan depth for detection bounds
  std::size_t max_lookback = std::size_t{1} << 22;
  bool allow_uncertified = false;
  Symbol ghost = Symbol::Plus;     // pre-start boundary fill
};

/// Exact regenerative sampling driven by one uniform per step.
///
/// The same uniform stream drives both the symbol layers and the renewal
/// streak condition, which is what makes the blocks between confirmed
/// renewals independent. Histories before time 0 are pinned to the ghost
/// symbol; the block before the first confirmed renewal depends on that
/// boundary and is excluded from estimators downstream.
inline Trajectory simulate(const ModelSpec& model, std::size_t n, UniformStream& stream,
                           const SimulateOptions& opt = {}) {
  std::uint64_t margin = opt.margin;
  if (margin == 0) {
    if (opt.allow_uncertified)
      throw PreconditionError("simulate: an explicit margin is required with allow_uncertified");
    margin = auto_margin(model, opt.bias_tolerance);  // throws CertificationError (product_zero)
  }
  const double bias = bias_upper_bound(model, margin);
  if (bias > opt.bias_tolerance && !opt.allow_uncertified)
    throw CertificationError("simulate: certified bias bound " + std::to_string(bias) +
                             " exceeds tolerance " + std::to_string(opt.bias_tolerance) +
                             " at margin " + std::to_string(margin));

  Trajectory traj;
  traj.margin = margin;
  traj.bias_bound = bias;
  traj.seed = stream.seed();
  traj.replica_id = stream.replica_id();
  traj.symbols.reserve(n);
  traj.lookbacks.reserve(n);

  std::vector<double> uniforms(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double u = stream.next_u01();
    uniforms[t] = u;
    const HistoryWindow window = HistoryWindow::at_time(traj.symbols.data(), t);
    const SampleResult s =
        sample_symbol(model, window, u, /*ghost_extend=*/true, opt.ghost, opt.max_lookback);
    traj.symbols.push_back(s.symbol);
    traj.lookbacks.push_back(static_cast<std::uint32_t>(s.lookback));
  }

  DetectResult det =
      detect_renewals(uniforms, detection_bounds(model, margin + 1, opt.detect_scan_cap), margin);
  traj.renewal_indices = std::move(det.indices);
  return traj;
}

/// Number of confirmed renewals strictly before `cutoff` (the paper's i(n);
/// 0 when there is none).
inline std::uint64_t renewal_count_before(const Trajectory& traj, std::uint64_t cutoff) {
  const auto& r = traj.renewal_indices;
  return static_cast<std::uint64_t>(std::lower_bound(r.begin(), r.end(), cutoff) - r.begin());
}

/// Complete blocks plus the two boundary partial sums. The telescoping
/// identity head + sum(xi) + tail = sum_t f(X_t) holds exactly.
struct BlockDecomposition {
  std::vector<Block> blocks;
  double head_sum = 0.0;   // sum of f before the first confirmed renewal
  double tail_sum = 0.0;   // sum of f from the last confirmed renewal on
  std::uint64_t i_n = 0;   // confirmed renewal count
  std::uint64_t first_renewal = 0;
  std::uint64_t last_renewal = 0;
};

template <class F>
BlockDecomposition extract_blocks(const Trajectory& traj, F&& f) {
  const auto& renewals = traj.renewal_indices;
  if (renewals.size() < 2)
    throw PreconditionError("extract_blocks: fewer than 2 confirmed renewals");
  BlockDecomposition out;
  out.i_n = renewals.size();
  out.first_renewal = renewals.front();
  out.last_renewal = renewals.back();
  out.blocks.reserve(renewals.size() - 1);
  for (std::uint64_t t = 0; t < out.first_renewal; ++t) out.head_sum += f(traj.symbols[t]);
  for (std::size_t k = 0; k + 1 < renewals.size(); ++k) {
    Block b;
    b.start = renewals[k];
    b.end = renewals[k + 1];
    for (std::uint64_t t = b.start; t < b.end; ++t) b.xi += f(traj.symbols[t]);
    out.blocks.push_back(b);
  }
  for (std::uint64_t t = out.last_renewal; t < traj.n(); ++t) out.tail_sum += f(traj.symbols[t]);
  return out;
}

inline std::vector<std::uint64_t> interior_gaps(const Trajectory& traj) {
  std::vector<std::uint64_t> gaps;
  const auto& r = traj.renewal_indices;
  if (r.size() < 2) return gaps;
  gaps.reserve(r.size() - 1);
  for (std::size_t k = 0; k + 1 < r.size(); ++k) gaps.push_back(r[k + 1] - r[k]);
  return gaps;
}

/// Lengths of the gaps straddling the reference times first_ref,
/// first_ref + stride, ... — the empirical analogue of the stationary
/// (T_1 - T_0) law. References outside [first renewal, last renewal) are
/// skipped.
inline std::vector<std::uint64_t> straddling_gaps(const Trajectory& traj,
                                                  std::uint64_t first_ref,
                                                  std::uint64_t stride) {
  std::vector<std::uint64_t> out;
  const auto& r = traj.renewal_indices;
  if (r.size() < 2 || stride == 0) return out;
  for (std::uint64_t ref = first_ref; ref < r.back(); ref += stride) {
    if (ref < r.front()) continue;
    const auto it = std::upper_bound(r.begin(), r.end(), ref);
    out.push_back(*it - *(it - 1));
  }
  return out;
}

/// Per-replica Wald statistics over blocks 1..i(cutoff)+1: the block sums'
/// square and sum of squares, for checking E[(sum xi)^2] = E(xi^2) E(i+1).
struct WaldSample {
  double sum_xi = 0.0;
  double sum_xi_sq = 0.0;
  std::uint64_t blocks = 0;  // i(cutoff) + 1
  bool valid = false;
};

template <class F>
WaldSample wald_sample(const Trajectory& traj, F&& f, std::uint64_t cutoff) {
  WaldSample w;
  const auto& r = traj.renewal_indices;
  const std::uint64_t i_n = renewal_count_before(traj, cutoff);
  // Blocks 1..i(n)+1 need renewals T_1..T_{i(n)+2}.
  if (i_n < 1 || r.size() < i_n + 2) return w;
  for (std::uint64_t k = 0; k < i_n + 1; ++k) {
    double xi = 0.0;
    for (std::uint64_t t = r[k]; t < r[k + 1]; ++t) xi += f(traj.symbols[t]);
    w.sum_xi += xi;
    w.sum_xi_sq += xi * xi;
  }
  w.blocks = i_n + 1;
  w.valid = true;
  return w;
}

/// Approximate sampler used as an independent cross-validation oracle: each
/// step draws from the midpoint of the envelope at depth
/// min(available history, window_cap). Exact for memoryless and order-1
/// models once window_cap >= 1.
struct TruncatedRun {
  Trajectory trajectory;          // no renewal marks
  double step_error_bound = 0.0;  // envelope width at window_cap
};

inline TruncatedRun truncated_sampler(const ModelSpec& model, std::size_t n,
                                      std::size_t burn_in, std::size_t window_cap,
                                      UniformStream& stream) {
  if (window_cap < 1) throw std::invalid_argument("truncated_sampler: window_cap must be >= 1");
  const std::size_t total = n + burn_in;
  std::vector<Symbol> buf;
  buf.reserve(total);
  std::vector<std::uint32_t> depths;
  depths.reserve(total);
  for (std::size_t t = 0; t < total; ++t) {
    const double u = stream.next_u01();
    const HistoryWindow w = HistoryWindow::at_time(buf.data(), t, window_cap);
    EnvelopeScan scan(model, w);
    while (scan.advance()) {
    }
    const auto m = scan.mass();
    const double mid_minus = 0.5 * (m.alpha_minus + 1.0 - m.alpha_plus);
    buf.push_back(u < mid_minus ? Symbol::Minus : Symbol::Plus);
    depths.push_back(static_cast<std::uint32_t>(w.depth()));
  }
  TruncatedRun run;
  run.trajectory.symbols.assign(buf.begin() + static_cast<std::ptrdiff_t>(burn_in), buf.end());
  run.trajectory.lookbacks.assign(depths.begin() + static_cast<std::ptrdiff_t>(burn_in),
                                  depths.end());
  run.trajectory.seed = stream.seed();
  run.trajectory.replica_id = stream.replica_id();
  run.step_error_bound = var_k(model, window_cap).value;
  return run;
}

}  // namespace gchain
