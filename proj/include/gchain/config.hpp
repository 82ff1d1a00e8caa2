#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gchain/kernel.hpp"

namespace gchain {

/// Flat key-value config: INI-style sections, `key = value` lines, `#` or `;`
/// comments. Keys are exposed as "section.key".
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line.erase(hash);
      std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.front() == '[') {
        if (trimmed.back() != ']')
          throw std::invalid_argument("config line " + std::to_string(line_no) +
                                      ": malformed section header");
        section = trim(trimmed.substr(1, trimmed.size() - 2));
        continue;
      }
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string val = trim(trimmed.substr(eq + 1));
      cfg.values_[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
  }

  static KeyValueConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw std::invalid_argument("config key " + key + ": not a number: " + it->second);
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      throw std::invalid_argument("config key " + key + ": not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config key " + key + ": not a boolean: " + v);
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::string s = it->second;
    for (char& c : s)
      if (c == ',') c = ' ';
    std::istringstream iss(s);
    double v;
    while (iss >> v) out.push_back(v);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

/// Declarative model description, buildable from a config file and
/// serializable in a canonical form for hashing and manifests.
struct ModelConfig {
  std::string variant = "markov1";  // markov1 | autoregressive | ising

  // ising
  double beta = 0.3;
  double p = 4.0;

  // autoregressive (logistic link)
  double theta0 = 0.0;
  std::vector<double> theta;
  double tail_coeff = 0.0;
  double tail_log_exp = 0.0;
  double tail_pow_exp = 2.0;
  std::uint64_t tail_threshold = 2;

  // markov1
  double stay_minus = 0.5;
  double stay_plus = 0.5;

  std::size_t truncation_depth = 4096;

  ModelSpec build() const {
    if (variant == "markov1") return MarkovOrder1Model(stay_minus, stay_plus);
    if (variant == "autoregressive")
      return AutoregressiveModel(theta0, theta,
                                 ThetaTail{tail_coeff, tail_log_exp, tail_pow_exp, tail_threshold});
    if (variant == "ising") return IsingModel(beta, p, truncation_depth);
    throw std::invalid_argument("unknown model variant: " + variant);
  }

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "variant=" << variant;
    if (variant == "ising") {
      os << ";beta=" << beta << ";p=" << p << ";depth=" << truncation_depth;
    } else if (variant == "autoregressive") {
      os << ";theta0=" << theta0 << ";theta=";
      for (double t : theta) os << t << ",";
      os << ";tail=" << tail_coeff << "," << tail_log_exp << "," << tail_pow_exp << ","
         << tail_threshold;
    } else {
      os << ";stay_minus=" << stay_minus << ";stay_plus=" << stay_plus;
    }
    return os.str();
  }

  static ModelConfig from_kv(const KeyValueConfig& kv) {
    ModelConfig m;
    m.variant = kv.get_str("model.variant", m.variant);
    m.beta = kv.get_double("model.beta", m.beta);
    m.p = kv.get_double("model.p", m.p);
    m.theta0 = kv.get_double("model.theta0", m.theta0);
    m.theta = kv.get_double_list("model.theta");
    m.tail_coeff = kv.get_double("model.tail_coeff", m.tail_coeff);
    m.tail_log_exp = kv.get_double("model.tail_log_exp", m.tail_log_exp);
    m.tail_pow_exp = kv.get_double("model.tail_pow_exp", m.tail_pow_exp);
    m.tail_threshold = kv.get_u64("model.tail_threshold", m.tail_threshold);
    m.stay_minus = kv.get_double("model.stay_minus", m.stay_minus);
    m.stay_plus = kv.get_double("model.stay_plus", m.stay_plus);
    m.truncation_depth = kv.get_u64("model.truncation_depth", m.truncation_depth);
    return m;
  }
};

/// Run parameters for the CLI; a config file provides defaults, flags win.
struct ExperimentConfig {
  ModelConfig model;

  std::size_t n = 10000;
  std::uint64_t replicas = 1;
  std::uint64_t seed = 12345;
  std::uint64_t margin = 0;  // 0 = auto
  double bias_tolerance = 1e-6;
  bool allow_uncertified = false;

  std::uint32_t k_scan_max = 20;
  std::size_t min_blocks = 30;
  std::size_t max_lag = 0;  // 0 = tail-bound policy
  std::size_t m_max = 10000;
  double observable_shift = 0.0;  // diagnostic mis-centering of f

  std::string out_dir = "out";
  unsigned workers = 1;

  void validate() const {
    if (replicas < 1) throw std::invalid_argument("config: replicas must be >= 1");
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (!(bias_tolerance > 0.0 && bias_tolerance < 1.0))
      throw std::invalid_argument("config: bias_tolerance must lie in (0,1)");
  }

  static ExperimentConfig from_kv(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.model = ModelConfig::from_kv(kv);
    c.n = kv.get_u64("run.n", c.n);
    c.replicas = kv.get_u64("run.replicas", c.replicas);
    c.seed = kv.get_u64("run.seed", c.seed);
    c.margin = kv.get_u64("run.margin", c.margin);
    c.bias_tolerance = kv.get_double("run.bias_tolerance", c.bias_tolerance);
    c.allow_uncertified = kv.get_bool("run.allow_uncertified", c.allow_uncertified);
    c.k_scan_max = static_cast<std::uint32_t>(kv.get_u64("estimators.k_scan_max", c.k_scan_max));
    c.min_blocks = kv.get_u64("estimators.min_blocks", c.min_blocks);
    c.max_lag = kv.get_u64("estimators.max_lag", c.max_lag);
    c.m_max = kv.get_u64("estimators.m_max", c.m_max);
    c.observable_shift = kv.get_double("estimators.observable_shift", c.observable_shift);
    c.out_dir = kv.get_str("output.dir", c.out_dir);
    c.workers = static_cast<unsigned>(kv.get_u64("run.workers", c.workers));
    return c;
  }
};

}  // namespace gchain
