#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gchain/core.hpp"
#include "gchain/decay.hpp"

namespace gchain {

inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Link function for the autoregressive family: strictly increasing,
/// continuously differentiable, mapping into (0,1). `qprime_sup` must bound
/// |q'| over the reachable argument range; it feeds every certified
/// variation bound, so an invalid value silently invalidates certificates.
struct Link {
  std::function<double(double)> q;
  double qprime_sup = 0.25;
  std::string name = "logistic";
};

inline Link logistic_link() {
  return Link{[](double t) { return logistic(t); }, 0.25, "logistic"};
}

/// Parametric bound on the coefficient remainder r_k = sum_{m>k} |theta_m|:
/// r_k <= coeff (log k)^log_exp / k^pow_exp for k >= threshold. A zero coeff
/// means the explicit prefix is the whole sequence.
struct ThetaTail {
  double coeff = 0.0;
  double log_exp = 0.0;
  double pow_exp = 2.0;
  std::uint64_t threshold = 2;
};

/// Binary autoregressive chain: g(+1 | past) = q(theta0 + sum_k theta_k s_{-k}).
///
/// The simulated chain uses the explicit coefficients (theta_j = 0 beyond the
/// prefix); a nonzero ThetaTail only widens envelopes and feeds the decay
/// classification, so the sampler remains exact for the concrete chain.
class AutoregressiveModel {
 public:
  AutoregressiveModel(double theta0, std::vector<double> theta, ThetaTail tail = {},
                      Link link = logistic_link())
      : theta0_(theta0), theta_(std::move(theta)), tail_(tail), link_(std::move(link)) {
    if (!std::isfinite(theta0_)) throw std::invalid_argument("autoregressive: theta0 not finite");
    for (double t : theta_)
      if (!std::isfinite(t)) throw std::invalid_argument("autoregressive: theta not finite");
    if (!(link_.qprime_sup > 0.0))
      throw std::invalid_argument("autoregressive: qprime_sup must be positive");
    if (tail_.coeff < 0.0) throw std::invalid_argument("autoregressive: tail coeff < 0");
    if (tail_.coeff > 0.0) {
      if (!(tail_.pow_exp >= 1.0))
        throw std::invalid_argument("autoregressive: tail pow_exp must be >= 1");
      if (tail_.threshold < 2) tail_.threshold = 2;
      // The bound must be non-increasing from the threshold on.
      if (tail_.log_exp > 0.0) {
        const double need = std::exp(tail_.log_exp / tail_.pow_exp);
        while (static_cast<double>(tail_.threshold) < need) ++tail_.threshold;
      }
    }
    suffix_abs_.assign(theta_.size() + 1, 0.0);
    for (std::size_t j = theta_.size(); j-- > 0;)
      suffix_abs_[j] = suffix_abs_[j + 1] + std::fabs(theta_[j]);
  }

  double theta0() const { return theta0_; }
  const std::vector<double>& theta() const { return theta_; }
  std::size_t order() const { return theta_.size(); }
  const ThetaTail& tail() const { return tail_; }
  const Link& link() const { return link_; }
  double qprime_sup() const { return link_.qprime_sup; }

  /// theta_j for j >= 1 (0 beyond the explicit prefix).
  double coefficient(std::size_t j) const {
    return (j >= 1 && j <= theta_.size()) ? theta_[j - 1] : 0.0;
  }

  /// Explicit-prefix part of r_k (parametric tail excluded).
  double suffix_only(std::uint64_t k) const {
    return suffix_abs_[std::min<std::uint64_t>(k, theta_.size())];
  }

  /// Certified bound on r_k = sum_{m>k} |theta_m|; exact when the tail is zero.
  double r(std::uint64_t k) const {
    const std::size_t kk = std::min<std::uint64_t>(k, theta_.size());
    double out = suffix_abs_[kk];
    if (tail_.coeff > 0.0) {
      const std::uint64_t at = std::max(k, tail_.threshold);
      out += tail_.coeff * std::pow(std::log(static_cast<double>(at)), tail_.log_exp) *
             std::pow(static_cast<double>(at), -tail_.pow_exp);
    }
    return out;
  }

 private:
  double theta0_;
  std::vector<double> theta_;
  std::vector<double> suffix_abs_;  // suffix_abs_[k] = sum_{j>k, j<=L} |theta_j|
  ThetaTail tail_;
  Link link_;
};

/// Power-law Ising chain: g(+1 | past) = logistic(2 beta S),
/// S = sum_{j>=1} j^{-p} s_{-j}, beta > 0, p > 1.
///
/// Lag weights and their cumulative sums are tabulated to `table_depth`;
/// beyond that, tail bounds fall back to the pure integral comparison, which
/// stays certified (only slightly wider).
class IsingModel {
 public:
  IsingModel(double beta, double p, std::size_t table_depth = 4096)
      : beta_(beta), p_(p), depth_(std::max<std::size_t>(table_depth, 16)) {
    if (!(beta_ > 0.0) || !std::isfinite(beta_))
      throw std::invalid_argument("ising: beta must be > 0");
    if (!(p_ > 1.0) || !std::isfinite(p_)) throw std::invalid_argument("ising: p must be > 1");
    weight_.assign(depth_ + 1, 0.0);
    cum_.assign(depth_ + 1, 0.0);
    for (std::size_t j = 1; j <= depth_; ++j) {
      weight_[j] = std::pow(static_cast<double>(j), -p_);
      cum_[j] = cum_[j - 1] + weight_[j];
    }
  }

  double beta() const { return beta_; }
  double p() const { return p_; }

  double lag_weight(std::uint64_t j) const {
    return j <= depth_ ? weight_[j] : std::pow(static_cast<double>(j), -p_);
  }

  /// Certified upper bound on sum_{j>k} j^{-p}. Satisfies
  /// tail_upper(k-1) - tail_upper(k) >= k^{-p}, which keeps envelopes nested.
  double tail_upper(std::uint64_t k) const {
    const double integral_from = [&](double x) {
      return std::pow(x, 1.0 - p_) / (p_ - 1.0);
    }(static_cast<double>(std::max<std::uint64_t>(k, depth_)));
    if (k >= depth_) return integral_from;
    return cum_[depth_] - cum_[k] + integral_from;
  }

  /// Conditional probability of +1 when the interaction is truncated at the
  /// window depth (tail spins treated as absent).
  double g_plus_truncated(HistoryWindow w) const {
    double s = 0.0;
    for (std::size_t j = 1; j <= w.depth(); ++j) s += lag_weight(j) * value(w.at_lag(j));
    return logistic(2.0 * beta_ * s);
  }

 private:
  double beta_, p_;
  std::size_t depth_;
  std::vector<double> weight_;
  std::vector<double> cum_;
};

/// Order-1 Markov chain on {-1,+1}; the brute-force oracle model. Degenerate
/// {0,1} rows are allowed for the deterministic edge cases.
class MarkovOrder1Model {
 public:
  MarkovOrder1Model(double stay_minus, double stay_plus) {
    if (!(stay_minus >= 0.0 && stay_minus <= 1.0 && stay_plus >= 0.0 && stay_plus <= 1.0))
      throw std::invalid_argument("markov1: stay probabilities must lie in [0,1]");
    p_[0][0] = stay_minus;
    p_[0][1] = 1.0 - stay_minus;
    p_[1][1] = stay_plus;
    p_[1][0] = 1.0 - stay_plus;
  }

  static MarkovOrder1Model memoryless(double p_plus) {
    return MarkovOrder1Model(1.0 - p_plus, p_plus);
  }

  double prob(Symbol next, Symbol prev) const { return p_[idx(prev)][idx(next)]; }

  bool is_memoryless() const { return var0() == 0.0; }

  bool is_regular() const {
    return p_[0][0] > 0.0 && p_[0][0] < 1.0 && p_[1][1] > 0.0 && p_[1][1] < 1.0;
  }

  /// var_0 = |P(+1|+1) - P(+1|-1)|; var_k = 0 for k >= 1.
  double var0() const { return std::fabs(p_[1][1] - p_[0][1]); }

  /// Exact stationary mean E(X_0); requires an irreducible chain.
  double stationary_mean() const {
    const double up = p_[0][1], down = p_[1][0];
    if (up + down == 0.0)
      throw PreconditionError("markov1: no unique stationary law (identity matrix)");
    return (up - down) / (up + down);
  }

 private:
  static int idx(Symbol s) { return s == Symbol::Plus ? 1 : 0; }
  double p_[2][2];  // [prev][next]
};

using ModelSpec = std::variant<MarkovOrder1Model, AutoregressiveModel, IsingModel>;

inline std::string model_name(const ModelSpec& m) {
  struct V {
    std::string operator()(const MarkovOrder1Model&) const { return "markov1"; }
    std::string operator()(const AutoregressiveModel&) const { return "autoregressive"; }
    std::string operator()(const IsingModel&) const { return "ising"; }
  };
  return std::visit(V{}, m);
}

/// Certified interval for a conditional probability: [inf, sup] of
/// g(x | window . tail) over all infinite tail extensions.
struct ProbEnvelope {
  double lower = 0.0;
  double upper = 1.0;
  double width() const { return upper - lower; }
};

/// Incremental lower envelopes alpha_k(x | window) for k = 0, 1, 2, ...
///
/// alpha_k(x) is a certified lower bound on g(x | any extension of the first
/// k window symbols), non-decreasing in k and converging to g(x | window)
/// as k grows. With `ghost_extend` the window is continued past its depth by
/// a fixed ghost symbol, so the scan can resolve arbitrarily deep; this pins
/// the pre-start boundary condition of a simulation run.
class EnvelopeScan {
 public:
  struct Mass {
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    double total() const { return alpha_minus + alpha_plus; }
  };

  EnvelopeScan(const ModelSpec& model, HistoryWindow window, bool ghost_extend = false,
               Symbol ghost = Symbol::Plus)
      : model_(&model), window_(window), ghost_extend_(ghost_extend), ghost_(ghost) {
    if (const auto* ar = std::get_if<AutoregressiveModel>(model_)) sum_ = ar->theta0();
    recompute();
  }

  std::size_t depth() const { return depth_; }
  Mass mass() const { return mass_; }

  bool can_advance() const { return ghost_extend_ || depth_ < window_.depth(); }

  bool advance() {
    if (!can_advance()) return false;
    ++depth_;
    const Symbol s = symbol_at(depth_);
    if (const auto* ar = std::get_if<AutoregressiveModel>(model_)) {
      if (depth_ <= ar->order()) sum_ += ar->coefficient(depth_) * value(s);
    } else if (const auto* is = std::get_if<IsingModel>(model_)) {
      sum_ += is->lag_weight(depth_) * value(s);
    } else {
      if (depth_ == 1) first_ = s;
    }
    recompute();
    return true;
  }

 private:
  Symbol symbol_at(std::size_t lag) const {
    return lag <= window_.depth() ? window_.at_lag(lag) : ghost_;
  }

  void recompute() {
    double am, ap;
    if (const auto* ar = std::get_if<AutoregressiveModel>(model_)) {
      const double r = ar->r(depth_);
      ap = ar->link().q(sum_ - r);
      am = 1.0 - ar->link().q(sum_ + r);
    } else if (const auto* is = std::get_if<IsingModel>(model_)) {
      const double t = is->tail_upper(depth_);
      ap = logistic(2.0 * is->beta() * (sum_ - t));
      am = logistic(-2.0 * is->beta() * (sum_ + t));
    } else {
      const auto& mk = std::get<MarkovOrder1Model>(*model_);
      if (depth_ == 0) {
        ap = std::min(mk.prob(Symbol::Plus, Symbol::Minus), mk.prob(Symbol::Plus, Symbol::Plus));
        am = std::min(mk.prob(Symbol::Minus, Symbol::Minus), mk.prob(Symbol::Minus, Symbol::Plus));
      } else {
        ap = mk.prob(Symbol::Plus, first_);
        am = mk.prob(Symbol::Minus, first_);
      }
    }
    if (!std::isfinite(am) || !std::isfinite(ap))
      throw Error("envelope: non-finite value (mis-specified model parameters)");
    // Guard rounding: keep layers nested and the total mass inside [0,1].
    am = std::clamp(am, mass_.alpha_minus, 1.0);
    ap = std::clamp(ap, mass_.alpha_plus, 1.0 - am);
    mass_ = {am, ap};
  }

  const ModelSpec* model_;
  HistoryWindow window_;
  bool ghost_extend_;
  Symbol ghost_;
  std::size_t depth_ = 0;
  double sum_ = 0.0;       // running s_k (autoregressive) or S_k (ising)
  Symbol first_ = Symbol::Plus;
  Mass mass_{};
};

/// [inf, sup] of g(x | window . tail) over all tail extensions of `window`.
inline ProbEnvelope conditional_prob_envelope(const ModelSpec& model, Symbol x,
                                              HistoryWindow window) {
  EnvelopeScan scan(model, window);
  while (scan.advance()) {
  }
  const auto m = scan.mass();
  const double lower = (x == Symbol::Plus) ? m.alpha_plus : m.alpha_minus;
  const double upper = 1.0 - ((x == Symbol::Plus) ? m.alpha_minus : m.alpha_plus);
  return {lower, std::max(lower, upper)};
}

namespace detail {

/// Minimum over all 2^k depth-k windows of the envelope mass
/// sum_x alpha_k(x | w); equals 1 - var_k on the binary alphabet.
inline double min_mass_exact_scan(const ModelSpec& model, std::uint64_t k) {
  if (const auto* mk = std::get_if<MarkovOrder1Model>(&model)) {
    if (k >= 1) return 1.0;
    return std::min(mk->prob(Symbol::Plus, Symbol::Minus), mk->prob(Symbol::Plus, Symbol::Plus)) +
           std::min(mk->prob(Symbol::Minus, Symbol::Minus), mk->prob(Symbol::Minus, Symbol::Plus));
  }
  if (const auto* ar = std::get_if<AutoregressiveModel>(&model)) {
    const double r = ar->r(k);
    const std::uint64_t ke = std::min<std::uint64_t>(k, ar->order());
    double best = std::numeric_limits<double>::infinity();
    // DFS over sign assignments of the first ke lags with a running sum.
    const std::function<void(std::uint64_t, double)> rec = [&](std::uint64_t lag, double s) {
      if (lag > ke) {
        const double mass = ar->link().q(s - r) + 1.0 - ar->link().q(s + r);
        best = std::min(best, mass);
        return;
      }
      const double t = ar->coefficient(lag);
      rec(lag + 1, s - t);
      rec(lag + 1, s + t);
    };
    rec(1, ar->theta0());
    return std::clamp(best, 0.0, 1.0);
  }
  const auto& is = std::get<IsingModel>(model);
  const double t = is.tail_upper(k);
  const double c = 2.0 * is.beta();
  double best = std::numeric_limits<double>::infinity();
  const std::function<void(std::uint64_t, double)> rec = [&](std::uint64_t lag, double s) {
    if (lag > k) {
      const double mass = logistic(c * (s - t)) + logistic(-c * (s + t));
      best = std::min(best, mass);
      return;
    }
    const double w = is.lag_weight(lag);
    rec(lag + 1, s - w);
    rec(lag + 1, s + w);
  };
  rec(1, 0.0);
  return std::clamp(best, 0.0, 1.0);
}

}  // namespace detail

enum class AkMode { ExactScan, CertifiedBound };

struct AkResult {
  double value = 0.0;
  AkMode mode = AkMode::ExactScan;
  bool clamped = false;  // certified bound fell below 0 and was clamped
};

/// Lower bound on the minorization sequence a_k.
///
/// ExactScan enumerates all 2^k windows of the envelope (pa-style variation
/// scan); CertifiedBound returns the closed-form bounds
/// 1 - 2 qprime_sup r_k (autoregressive) and 1 - 2 beta / k^{p-1} (ising).
inline AkResult a_k_uniform(const ModelSpec& model, std::uint64_t k, AkMode mode,
                            std::uint32_t k_scan_max = 20) {
  if (mode == AkMode::ExactScan) {
    const bool cheap = std::holds_alternative<MarkovOrder1Model>(model) ||
                       (std::holds_alternative<AutoregressiveModel>(model) &&
                        std::get<AutoregressiveModel>(model).order() <= k_scan_max);
    if (k > k_scan_max && !cheap)
      throw PreconditionError("a_k_uniform: k exceeds the exact-scan cutoff " +
                              std::to_string(k_scan_max));
    return {detail::min_mass_exact_scan(model, k), AkMode::ExactScan, false};
  }
  double bound;
  if (const auto* mk = std::get_if<MarkovOrder1Model>(&model)) {
    bound = (k >= 1) ? 1.0 : 1.0 - mk->var0();
  } else if (const auto* ar = std::get_if<AutoregressiveModel>(&model)) {
    bound = 1.0 - 2.0 * ar->qprime_sup() * ar->r(k);
  } else {
    const auto& is = std::get<IsingModel>(model);
    bound = (k >= 1) ? 1.0 - 2.0 * is.beta() * std::pow(static_cast<double>(k), 1.0 - is.p())
                     : 1.0 - 2.0 * is.beta() * is.tail_upper(0);
  }
  const bool clamped = bound < 0.0;
  return {std::clamp(bound, 0.0, 1.0), AkMode::CertifiedBound, clamped};
}

struct VarkResult {
  double value = 0.0;
  bool exact = false;  // exact scan (true) vs certified upper bound (false)
};

/// Variation var_k: sup over history pairs agreeing on the last k symbols of
/// |g(x|.) - g(x|.)|. Exact by window enumeration up to k_scan_max, certified
/// upper bound beyond.
inline VarkResult var_k(const ModelSpec& model, std::uint64_t k, std::uint32_t k_scan_max = 20) {
  const bool cheap = std::holds_alternative<MarkovOrder1Model>(model) ||
                     (std::holds_alternative<AutoregressiveModel>(model) &&
                      std::get<AutoregressiveModel>(model).order() <= k_scan_max);
  if (k <= k_scan_max || cheap)
    return {1.0 - detail::min_mass_exact_scan(model, k), true};
  return {1.0 - a_k_uniform(model, k, AkMode::CertifiedBound, k_scan_max).value, false};
}

// --- certified bounds feeding renewal detection and the renewal calculus ---

/// Per-level lower bounds on inf_w sum_x alpha_k(x|w), valid for this
/// library's envelopes: exact scan for small k, mass-form certified bounds
/// beyond. Raw (not yet regularized to be non-decreasing).
inline std::vector<double> detection_bounds(const ModelSpec& model, std::size_t levels,
                                            std::uint32_t scan_cap = 12) {
  std::vector<double> a(levels, 1.0);
  for (std::size_t k = 0; k < levels; ++k) {
    if (const auto* mk = std::get_if<MarkovOrder1Model>(&model)) {
      a[k] = (k >= 1) ? 1.0 : 1.0 - mk->var0();
    } else if (k <= scan_cap) {
      a[k] = detail::min_mass_exact_scan(model, k);
    } else if (const auto* ar = std::get_if<AutoregressiveModel>(&model)) {
      a[k] = std::max(0.0, 1.0 - 2.0 * ar->qprime_sup() * ar->r(k));
    } else {
      const auto& is = std::get<IsingModel>(model);
      // Envelope mass is minimized at S = 0: mass >= 2 - 2 logistic(2 beta T).
      a[k] = std::max(0.0, 2.0 - 2.0 * logistic(2.0 * is.beta() * is.tail_upper(k)));
    }
  }
  return a;
}

/// Certified upper bound on sum_{k >= from} (1 - a_k); infinity when the sum
/// cannot be certified finite. Drives bias bounds and (hyp) certification.
inline double one_minus_a_tail_upper(const ModelSpec& model, std::uint64_t from) {
  if (const auto* mk = std::get_if<MarkovOrder1Model>(&model))
    return from == 0 ? mk->var0() : 0.0;

  if (const auto* ar = std::get_if<AutoregressiveModel>(&model)) {
    const double c = 2.0 * ar->qprime_sup();
    double sum = 0.0;
    for (std::uint64_t k = from; k < ar->order(); ++k) sum += ar->suffix_only(k);
    const auto& tl = ar->tail();
    if (tl.coeff > 0.0) {
      const std::uint64_t start = std::max(from, tl.threshold);
      const auto tail = log_power_tail_sum(tl.coeff, tl.log_exp, tl.pow_exp, start);
      if (!tail.finite) return std::numeric_limits<double>::infinity();
      double flat = 0.0;  // levels below the threshold use the threshold value
      if (from < tl.threshold)
        flat = static_cast<double>(tl.threshold - from) * tl.coeff *
               std::pow(std::log(static_cast<double>(tl.threshold)), tl.log_exp) *
               std::pow(static_cast<double>(tl.threshold), -tl.pow_exp);
      sum += flat + tail.upper;
    }
    return c * sum;
  }

  const auto& is = std::get<IsingModel>(model);
  if (!(is.p() > 2.0)) return std::numeric_limits<double>::infinity();
  const std::uint64_t start = std::max<std::uint64_t>(from, 1);
  const std::uint64_t cut = start + 2048;
  double sum = (from == 0)
                   ? std::min(1.0, 2.0 * logistic(2.0 * is.beta() * is.tail_upper(0)) - 1.0)
                   : 0.0;
  for (std::uint64_t k = start; k < cut; ++k)
    sum += std::min(1.0, 2.0 * logistic(2.0 * is.beta() * is.tail_upper(k)) - 1.0);
  // 1 - a_k <= beta * tail_upper(k) <= beta k^{1-p} / (p-1) beyond the cut.
  const double p = is.p();
  const double cutd = static_cast<double>(cut);
  sum += is.beta() / (p - 1.0) *
         (std::pow(cutd, 1.0 - p) + std::pow(cutd, 2.0 - p) / (p - 2.0));
  return sum;
}

/// Certified upper bound on the probability that a renewal confirmed with
/// the given margin is false: 1 - prod_{k>=margin} a_k <= sum_{k>=margin}(1-a_k).
inline double bias_upper_bound(const ModelSpec& model, std::uint64_t margin) {
  return std::min(1.0, one_minus_a_tail_upper(model, margin));
}

/// Smallest margin whose certified bias bound meets `bias_tolerance`.
/// Throws CertificationError when the regeneration product cannot be
/// certified positive (sum (1 - a_k) not certifiably finite).
inline std::uint64_t auto_margin(const ModelSpec& model, double bias_tolerance) {
  if (!(bias_tolerance > 0.0 && bias_tolerance < 1.0))
    throw std::invalid_argument("auto_margin: bias_tolerance must lie in (0,1)");
  std::uint64_t lo = 1, hi = 1;
  const std::uint64_t cap = std::uint64_t{1} << 24;
  if (bias_upper_bound(model, lo) <= bias_tolerance) return lo;
  while (bias_upper_bound(model, hi) > bias_tolerance) {
    if (hi >= cap)
      throw CertificationError(
          "regeneration certificate unavailable: sum(1 - a_k) is not certifiably "
          "finite for this model (product a_k may be zero)");
    lo = hi;
    hi *= 2;
  }
  while (lo + 1 < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (bias_upper_bound(model, mid) <= bias_tolerance)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Certified description of (1 - a_k): explicit prefix plus a decay-class
/// tail (or a zero tail for finite-order models).
struct AkCertificate {
  std::vector<double> prefix_one_minus_a;  // levels 0 .. prefix-1
  bool zero_tail = false;                  // 1 - a_k = 0 beyond the prefix
  DecayClass tail{};                       // valid for k >= max(prefix size, tail.threshold)
};

inline AkCertificate ak_certificate(const ModelSpec& model) {
  AkCertificate cert;
  if (const auto* mk = std::get_if<MarkovOrder1Model>(&model)) {
    cert.prefix_one_minus_a = {mk->var0()};
    cert.zero_tail = true;
    return cert;
  }
  if (const auto* ar = std::get_if<AutoregressiveModel>(&model)) {
    const double c = 2.0 * ar->qprime_sup();
    const auto& tl = ar->tail();
    if (tl.coeff == 0.0) {
      for (std::uint64_t k = 0; k < ar->order(); ++k)
        cert.prefix_one_minus_a.push_back(std::min(1.0, c * ar->r(k)));
      cert.zero_tail = true;
      return cert;
    }
    const std::uint64_t prefix = std::max<std::uint64_t>(ar->order(), tl.threshold);
    for (std::uint64_t k = 0; k < prefix; ++k)
      cert.prefix_one_minus_a.push_back(std::min(1.0, c * ar->r(k)));
    cert.tail = DecayClass{tl.log_exp, tl.pow_exp, c * tl.coeff,
                           std::max<std::uint64_t>(tl.threshold, 2)};
    return cert;
  }
  const auto& is = std::get<IsingModel>(model);
  cert.prefix_one_minus_a = {
      std::min(1.0, 2.0 * is.beta() * is.tail_upper(0)),
      std::min(1.0, 2.0 * is.beta()),
  };
  // var_k <= 2 beta sum_{j>k} j^{-p} <= 2 beta max(1, 1/(p-1)) k^{1-p}; the
  // max keeps the constant certified for every p > 1.
  cert.tail = DecayClass{0.0, is.p() - 1.0, 2.0 * is.beta() * std::max(1.0, 1.0 / (is.p() - 1.0)),
                         2};
  return cert;
}

enum class UniquenessClass { PositiveProduct, SquareSummableVariation, NoneDetected };

inline std::string to_string(UniquenessClass u) {
  switch (u) {
    case UniquenessClass::PositiveProduct:
      return "positive_product";
    case UniquenessClass::SquareSummableVariation:
      return "square_summable_variation";
    default:
      return "none_detected";
  }
}

/// Classifies which sufficient uniqueness criterion the certified bounds
/// establish: sum(1-a_k) < inf (regeneration, reported first when available)
/// or sum var_k^2 < inf (variation criterion). Never claims non-uniqueness.
inline UniquenessClass uniqueness_class(const ModelSpec& model) {
  if (const auto* mk = std::get_if<MarkovOrder1Model>(&model)) {
    if (!mk->is_regular()) return UniquenessClass::NoneDetected;
    return UniquenessClass::PositiveProduct;
  }
  const AkCertificate cert = ak_certificate(model);
  bool prefix_positive = true;
  for (double eps : cert.prefix_one_minus_a)
    if (eps >= 1.0) prefix_positive = false;
  if (cert.zero_tail)
    return prefix_positive ? UniquenessClass::PositiveProduct
                           : UniquenessClass::SquareSummableVariation;
  if (prefix_positive && log_power_sum_finite(cert.tail.log_exp, cert.tail.pow_exp))
    return UniquenessClass::PositiveProduct;
  if (log_power_sum_finite(2.0 * cert.tail.log_exp, 2.0 * cert.tail.pow_exp))
    return UniquenessClass::SquareSummableVariation;
  return UniquenessClass::NoneDetected;
}

/// A pair of equal-depth histories (most-recent-first) for the variation
/// inequality check.
struct HistoryPair {
  std::vector<Symbol> omega;
  std::vector<Symbol> sigma;
};

/// Numeric check of the interpolation bound: for each pair, the h-weighted
/// conditional-probability difference must not exceed sup|h| times the
/// worst-case interaction difference. Both sides are evaluated at the pair's
/// truncation depth; the tail allowance accounts for a common (cancelling)
/// infinite tail. Returns the maximum over pairs of lhs - rhs - allowance,
/// which is <= 0 when the bound holds.
inline double check_sim_bound(const IsingModel& model, std::span<const HistoryPair> pairs,
                              double h_minus, double h_plus) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pr : pairs) {
    if (pr.omega.size() != pr.sigma.size())
      throw std::invalid_argument("check_sim_bound: pair depths differ");
    const std::size_t depth = pr.omega.size();
    double s_omega = 0.0, s_sigma = 0.0;
    for (std::size_t j = 1; j <= depth; ++j) {
      const double w = model.lag_weight(j);
      s_omega += w * value(pr.omega[j - 1]);
      s_sigma += w * value(pr.sigma[j - 1]);
    }
    const double g_omega = logistic(2.0 * model.beta() * s_omega);
    const double g_sigma = logistic(2.0 * model.beta() * s_sigma);
    const double lhs = std::fabs((h_plus - h_minus) * (g_omega - g_sigma));
    const double rhs =
        std::max(std::fabs(h_minus), std::fabs(h_plus)) * model.beta() * std::fabs(s_omega - s_sigma);
    const double allowance =
        std::fabs(h_plus - h_minus) * model.beta() * model.tail_upper(depth);
    worst = std::max(worst, lhs - rhs - allowance);
  }
  return worst;
}

}  // namespace gchain
