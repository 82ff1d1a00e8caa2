#pragma once

#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "gchain/core.hpp"
#include "gchain/regen.hpp"
#include "gchain/renewal.hpp"

namespace gchain {

/// RFC-4180-style field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,symbol,lookback,is_renewal\n";
  std::size_t next_renewal = 0;
  for (std::size_t t = 0; t < traj.n(); ++t) {
    bool renewal = false;
    if (next_renewal < traj.renewal_indices.size() && traj.renewal_indices[next_renewal] == t) {
      renewal = true;
      ++next_renewal;
    }
    os << t << ',' << value(traj.symbols[t]) << ',' << traj.lookbacks[t] << ','
       << (renewal ? 1 : 0) << '\n';
  }
}

/// (M, rho_M, empirical gap survival) table.
inline void write_renewal_csv(std::ostream& os, const RhoTable& table,
                              const std::vector<double>& empirical_survival) {
  os << "M,rho_M,empirical_gap_survival\n";
  os.precision(17);
  for (std::size_t m = 1; m < table.rho.size(); ++m) {
    os << m << ',' << table.rho[m] << ',';
    if (m < empirical_survival.size())
      os << empirical_survival[m];
    else
      os << 0.0;
    os << '\n';
  }
}

inline void write_lag_profile_csv(std::ostream& os, const std::vector<double>& gamma) {
  os << "lag,autocovariance\n";
  os.precision(17);
  for (std::size_t i = 0; i < gamma.size(); ++i) os << i << ',' << gamma[i] << '\n';
}

/// Survival function P(gap >= m) of an empirical gap sample, on 1..m_max.
inline std::vector<double> survival_from_gaps(const std::vector<std::uint64_t>& gaps,
                                              std::size_t m_max) {
  std::vector<double> surv(m_max + 1, 0.0);
  if (gaps.empty()) return surv;
  for (std::uint64_t g : gaps) {
    const std::size_t cap = std::min<std::size_t>(g, m_max);
    for (std::size_t m = 1; m <= cap; ++m) surv[m] += 1.0;
  }
  for (double& v : surv) v /= static_cast<double>(gaps.size());
  return surv;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os << content;
  if (!os) throw Error("write failed: " + path);
}

}  // namespace gchain
