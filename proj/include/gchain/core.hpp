#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gchain {

/// Binary alphabet E = {-1, +1}.
enum class Symbol : std::int8_t { Minus = -1, Plus = +1 };

constexpr int value(Symbol s) noexcept { return static_cast<int>(s); }

constexpr Symbol flip(Symbol s) noexcept {
  return s == Symbol::Plus ? Symbol::Minus : Symbol::Plus;
}

inline Symbol symbol_from_value(int v) {
  if (v == -1) return Symbol::Minus;
  if (v == +1) return Symbol::Plus;
  throw std::invalid_argument("symbol value must be -1 or +1, got " + std::to_string(v));
}

// Error hierarchy. CLI maps these to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A certified bound required by the construction could not be established
/// (e.g. the regeneration product is not certifiably positive).
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// An operation precondition was violated (insufficient blocks, lag too
/// large, non-centered observable, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A uniform exceeded the achievable envelope mass within the allowed
/// lookback. This signals an implementation bug, not a data condition.
class ThresholdOverflowError : public Error {
 public:
  using Error::Error;
};

/// Non-owning view of a finite history window (sigma_{-1}, sigma_{-2}, ...),
/// most-recent-first: at_lag(1) is the symbol immediately before the present.
///
/// Depth 0 is the empty window. The view adapts both storage orders:
/// a trajectory stored forward in time and a buffer already written
/// most-recent-first.
class HistoryWindow {
 public:
  HistoryWindow() = default;

  /// data[0] = sigma_{-1}, data[1] = sigma_{-2}, ...
  static HistoryWindow recent_first(const Symbol* data, std::size_t depth) {
    HistoryWindow w;
    w.most_recent_ = data;
    w.stride_ = +1;
    w.depth_ = depth;
    return w;
  }

  static HistoryWindow recent_first(const std::vector<Symbol>& data) {
    return recent_first(data.data(), data.size());
  }

  /// Window seen at time t of a forward-stored path: path[0..t-1] generated,
  /// sigma_{-j} = path[t - j].
  static HistoryWindow at_time(const Symbol* path, std::size_t t) {
    HistoryWindow w;
    w.most_recent_ = (t == 0) ? nullptr : path + (t - 1);
    w.stride_ = -1;
    w.depth_ = t;
    return w;
  }

  /// Same as at_time but with the visible depth capped.
  static HistoryWindow at_time(const Symbol* path, std::size_t t, std::size_t depth_cap) {
    HistoryWindow w = at_time(path, t);
    w.depth_ = std::min(t, depth_cap);
    return w;
  }

  std::size_t depth() const noexcept { return depth_; }

  /// lag in [1, depth()].
  Symbol at_lag(std::size_t lag) const {
    return most_recent_[stride_ * static_cast<std::ptrdiff_t>(lag - 1)];
  }

 private:
  const Symbol* most_recent_ = nullptr;
  std::ptrdiff_t stride_ = 0;
  std::size_t depth_ = 0;
};

}  // namespace gchain
