// Batch experiment front-end: seeded parallel replicas of the regenerative
// sampler, renewal calculus, variance estimation, and the validation suite.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gchain/gchain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gchain;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kPathGrid[] = {0.25, 0.5, 0.75, 1.0};

struct CliOverrides {
  std::optional<std::string> model;
  std::optional<double> beta, p, theta0, stay_minus, stay_plus;
  std::optional<std::vector<double>> theta;
  std::optional<double> tail_coeff, tail_log_exp, tail_pow_exp;
  std::optional<std::uint64_t> tail_threshold;

  std::optional<std::uint64_t> n, replicas, seed, margin, max_lag, m_max;
  std::optional<double> bias_tolerance, observable_shift;
  std::optional<std::string> out_dir;
  std::optional<unsigned> workers;
  bool allow_uncertified = false;
};

ExperimentConfig make_config(const std::string& config_path, const CliOverrides& ov) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ExperimentConfig::from_kv(KeyValueConfig::parse_file(config_path));
  if (ov.model) cfg.model.variant = *ov.model;
  if (ov.beta) cfg.model.beta = *ov.beta;
  if (ov.p) cfg.model.p = *ov.p;
  if (ov.theta0) cfg.model.theta0 = *ov.theta0;
  if (ov.theta) cfg.model.theta = *ov.theta;
  if (ov.tail_coeff) cfg.model.tail_coeff = *ov.tail_coeff;
  if (ov.tail_log_exp) cfg.model.tail_log_exp = *ov.tail_log_exp;
  if (ov.tail_pow_exp) cfg.model.tail_pow_exp = *ov.tail_pow_exp;
  if (ov.tail_threshold) cfg.model.tail_threshold = *ov.tail_threshold;
  if (ov.n) cfg.n = *ov.n;
  if (ov.replicas) cfg.replicas = *ov.replicas;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.margin) cfg.margin = *ov.margin;
  if (ov.max_lag) cfg.max_lag = *ov.max_lag;
  if (ov.m_max) cfg.m_max = *ov.m_max;
  if (ov.bias_tolerance) cfg.bias_tolerance = *ov.bias_tolerance;
  if (ov.observable_shift) cfg.observable_shift = *ov.observable_shift;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.workers) cfg.workers = *ov.workers;
  if (ov.allow_uncertified) cfg.allow_uncertified = true;
  if (ov.stay_minus) cfg.model.stay_minus = *ov.stay_minus;
  if (ov.stay_plus) cfg.model.stay_plus = *ov.stay_plus;
  cfg.validate();
  return cfg;
}

void add_common_options(CLI::App* cmd, std::string& config_path, CliOverrides& ov) {
  cmd->add_option("--config", config_path, "Key-value config file; flags win over it");
  cmd->add_option("--model", ov.model, "Model variant: markov1 | autoregressive | ising");
  cmd->add_option("--beta", ov.beta, "Ising inverse temperature");
  cmd->add_option("--p", ov.p, "Ising power-law exponent");
  cmd->add_option("--theta0", ov.theta0, "Autoregressive intercept");
  cmd->add_option("--theta", ov.theta, "Autoregressive coefficients theta_1..theta_L");
  cmd->add_option("--tail-coeff", ov.tail_coeff, "Autoregressive r_k tail: C");
  cmd->add_option("--tail-log-exp", ov.tail_log_exp, "Autoregressive r_k tail: a");
  cmd->add_option("--tail-pow-exp", ov.tail_pow_exp, "Autoregressive r_k tail: b");
  cmd->add_option("--tail-threshold", ov.tail_threshold, "Autoregressive r_k tail: K");
  cmd->add_option("--stay-minus", ov.stay_minus, "Markov P(-1 -> -1)");
  cmd->add_option("--stay-plus", ov.stay_plus, "Markov P(+1 -> +1)");
  cmd->add_option("--n", ov.n, "Trajectory length");
  cmd->add_option("--replicas", ov.replicas, "Number of independent replicas");
  cmd->add_option("--seed", ov.seed, "Base seed; replica r uses stream (seed, r)");
  cmd->add_option("--margin", ov.margin, "Renewal confirmation margin (0 = auto)");
  cmd->add_option("--bias-tolerance", ov.bias_tolerance, "Certified false-renewal budget");
  cmd->add_option("--max-lag", ov.max_lag, "Autocovariance truncation lag (0 = policy)");
  cmd->add_option("--m-max", ov.m_max, "Renewal table horizon");
  cmd->add_option("--out", ov.out_dir, "Output directory");
  cmd->add_option("--workers", ov.workers, "Worker threads for replicas");
  cmd->add_flag("--allow-uncertified", ov.allow_uncertified,
                "Run even when certification fails (explicit margin required)");
  cmd->add_option("--observable-shift", ov.observable_shift,
                  "Shift f by a constant (negative-control diagnostic)");
}

std::uint64_t resolve_margin(const ModelSpec& model, const ExperimentConfig& cfg) {
  if (cfg.margin != 0) return cfg.margin;
  if (cfg.allow_uncertified)
    throw PreconditionError("an explicit --margin is required with --allow-uncertified");
  return auto_margin(model, cfg.bias_tolerance);
}

SimulateOptions simulate_options(const ExperimentConfig& cfg, std::uint64_t margin) {
  SimulateOptions opt;
  opt.margin = margin;
  opt.bias_tolerance = cfg.bias_tolerance;
  opt.allow_uncertified = cfg.allow_uncertified;
  return opt;
}

std::vector<Trajectory> simulate_replicas(const ModelSpec& model, const ExperimentConfig& cfg,
                                          std::uint64_t margin, std::size_t n_override = 0,
                                          std::uint64_t replica_base = 0) {
  const std::size_t n = n_override ? n_override : cfg.n;
  std::vector<Trajectory> out(cfg.replicas);
  const SimulateOptions opt = simulate_options(cfg, margin);
  parallel_for(cfg.replicas, cfg.workers, [&](std::uint64_t r) {
    UniformStream stream(cfg.seed, replica_base + r);
    out[r] = simulate(model, n, stream, opt);
  });
  return out;
}

/// Observable for the configured model: exact centering where the stationary
/// mean is known (markov1 oracle, spin-flip-symmetric ising), an independent
/// pilot estimate for the autoregressive family.
ObservableF observable_for(const ModelSpec& model, const ExperimentConfig& cfg,
                           std::uint64_t margin) {
  ObservableF f = ObservableF::spin();
  if (const auto* mk = std::get_if<MarkovOrder1Model>(&model)) {
    try {
      const double mu = mk->stationary_mean();
      f = ObservableF{-1.0 - mu, 1.0 - mu, true, 0.0};
    } catch (const PreconditionError&) {
      // degenerate matrix: keep plain spin
    }
  } else if (std::holds_alternative<AutoregressiveModel>(model)) {
    const std::size_t n_pilot = std::max<std::size_t>(cfg.n, 20000);
    UniformStream pilot(cfg.seed, cfg.replicas + 0x9e3779b9ull);
    const Trajectory traj = simulate(model, n_pilot, pilot, simulate_options(cfg, margin));
    std::vector<double> xs(traj.n());
    for (std::size_t t = 0; t < traj.n(); ++t) xs[t] = value(traj.symbols[t]);
    const double mu = stats::mean_var(xs).mean;
    f = ObservableF::centered_spin(mu, stats::batch_means_se(xs, 32));
  }
  if (cfg.observable_shift != 0.0) {
    f.f_minus += cfg.observable_shift;
    f.f_plus += cfg.observable_shift;
  }
  return f;
}

json model_json(const ModelConfig& m) {
  json j;
  j["variant"] = m.variant;
  if (m.variant == "ising") {
    j["beta"] = m.beta;
    j["p"] = m.p;
    j["truncation_depth"] = m.truncation_depth;
  } else if (m.variant == "autoregressive") {
    j["theta0"] = m.theta0;
    j["theta"] = m.theta;
    j["tail_coeff"] = m.tail_coeff;
    j["tail_log_exp"] = m.tail_log_exp;
    j["tail_pow_exp"] = m.tail_pow_exp;
    j["tail_threshold"] = m.tail_threshold;
  } else {
    j["stay_minus"] = m.stay_minus;
    j["stay_plus"] = m.stay_plus;
  }
  j["hash"] = hex64(fnv1a64(m.canonical()));
  return j;
}

json estimate_json(const VarianceEstimate& e) {
  json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["method"] = to_string(e.method);
  j["n_effective"] = e.n_effective;
  j["details"] = e.details;
  return j;
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path.string(), j.dump(2) + "\n");
}

std::vector<Block> pooled_blocks(const std::vector<Trajectory>& trajs, const ObservableF& f) {
  std::vector<Block> blocks;
  for (const auto& traj : trajs) {
    if (traj.renewal_indices.size() < 2) continue;
    auto dec = extract_blocks(traj, f);
    blocks.insert(blocks.end(), dec.blocks.begin(), dec.blocks.end());
  }
  return blocks;
}

VarianceEstimate autocov_across_replicas(const std::vector<Trajectory>& trajs,
                                         const ObservableF& f, std::size_t max_lag,
                                         double rho_tail_bound) {
  std::vector<double> values;
  VarianceEstimate first{};
  for (const auto& traj : trajs) {
    const auto est = variance_autocov(traj.symbols, f, max_lag, rho_tail_bound);
    if (values.empty()) first = est;
    values.push_back(est.value);
  }
  if (values.size() == 1) return first;
  const auto mv = stats::mean_var(values);
  VarianceEstimate est = first;
  est.value = mv.mean;
  est.std_error = mv.se_mean;
  est.n_effective = values.size() * trajs.front().n();
  est.details["replicas"] = static_cast<double>(values.size());
  return est;
}

/// Lag policy input: rho table of the model's certified detection bounds.
RhoTable model_rho_table(const ModelSpec& model, std::size_t m_max) {
  return rho_table(detection_bounds(model, m_max), m_max);
}

std::size_t resolve_max_lag(const ModelSpec& model, const ExperimentConfig& cfg,
                            const Trajectory& traj, const ObservableF& f, double* tail_out) {
  if (cfg.max_lag != 0) return cfg.max_lag;
  const RhoTable rho = model_rho_table(model, std::min<std::size_t>(cfg.m_max, 2000));
  std::size_t lag = choose_max_lag(traj.symbols, f, rho, tail_out);
  // keep the estimator precondition n >= 50 lag satisfiable
  lag = std::min(lag, std::max<std::size_t>(1, traj.n() / 50));
  return lag;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const ExperimentConfig& cfg) {
  const ModelSpec model = cfg.model.build();
  const std::uint64_t margin = resolve_margin(model, cfg);
  const auto trajs = simulate_replicas(model, cfg, margin);

  fs::create_directories(cfg.out_dir);
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["command"] = "simulate";
  manifest["model"] = model_json(cfg.model);
  manifest["n"] = cfg.n;
  manifest["replicas"] = cfg.replicas;
  manifest["seed"] = cfg.seed;
  manifest["margin"] = margin;
  manifest["bias_bound"] = trajs.front().bias_bound;
  manifest["bias_tolerance"] = cfg.bias_tolerance;

  json files = json::array();
  json renewal_counts = json::array();
  for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
    const std::string name = "trajectory_r" + std::to_string(r) + ".csv";
    std::ostringstream os;
    write_trajectory_csv(os, trajs[r]);
    write_text_file((fs::path(cfg.out_dir) / name).string(), os.str());
    files.push_back(name);
    renewal_counts.push_back(trajs[r].renewal_indices.size());
  }
  manifest["files"] = files;
  manifest["renewal_counts"] = renewal_counts;
  write_json_file(fs::path(cfg.out_dir) / "manifest.json", manifest);
  std::cout << "wrote " << cfg.replicas << " trajectories to " << cfg.out_dir
            << " (margin " << margin << ", bias bound " << trajs.front().bias_bound << ")\n";
  return 0;
}

// ---------------------------------------------------------------- variance

int cmd_variance(const ExperimentConfig& cfg, const std::string& method) {
  const ModelSpec model = cfg.model.build();
  const std::uint64_t margin = resolve_margin(model, cfg);
  const ObservableF f = observable_for(model, cfg, margin);
  const auto trajs = simulate_replicas(model, cfg, margin);

  const bool want_block = method == "block" || method == "all";
  const bool want_autocov = method == "autocov" || method == "all";
  const bool want_repl = method == "replication" || method == "all";

  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "variance";
  report["model"] = model_json(cfg.model);
  report["observable"] = {{"f_minus", f.f_minus},
                          {"f_plus", f.f_plus},
                          {"exactly_centered", f.exactly_centered},
                          {"center_se", f.center_se}};

  std::vector<VarianceEstimate> estimates;
  if (want_block) {
    const auto blocks = pooled_blocks(trajs, f);
    estimates.push_back(variance_block(blocks, f, cfg.min_blocks));
  }
  if (want_autocov) {
    double tail_bound = -1.0;
    const std::size_t lag = resolve_max_lag(model, cfg, trajs.front(), f, &tail_bound);
    estimates.push_back(autocov_across_replicas(trajs, f, lag, tail_bound));

    fs::create_directories(cfg.out_dir);
    std::ostringstream os;
    write_lag_profile_csv(os, autocov_profile(trajs.front().symbols, f, lag));
    write_text_file((fs::path(cfg.out_dir) / "lag_profile.csv").string(), os.str());
  }
  if (want_repl) {
    std::vector<double> values;
    for (const auto& traj : trajs) {
      double s = 0.0;
      for (Symbol x : traj.symbols) s += f(x);
      values.push_back(s / std::sqrt(static_cast<double>(traj.n())));
    }
    estimates.push_back(variance_replication(values));
    fs::create_directories(cfg.out_dir);
    std::ostringstream os;
    os.precision(17);
    os << "replica,scaled_sum\n";
    for (std::size_t r = 0; r < values.size(); ++r) os << r << ',' << values[r] << '\n';
    write_text_file((fs::path(cfg.out_dir) / "replica_values.csv").string(), os.str());
  }

  json ests = json::array();
  for (const auto& e : estimates) ests.push_back(estimate_json(e));
  report["estimates"] = ests;

  json zs = json::array();
  for (std::size_t i = 0; i < estimates.size(); ++i)
    for (std::size_t j = i + 1; j < estimates.size(); ++j) {
      json z;
      z["a"] = to_string(estimates[i].method);
      z["b"] = to_string(estimates[j].method);
      z["z"] = agreement_z(estimates[i], estimates[j]);
      zs.push_back(z);
    }
  report["agreement_z"] = zs;

  fs::create_directories(cfg.out_dir);
  write_json_file(fs::path(cfg.out_dir) / "variance_report.json", report);
  for (const auto& e : estimates)
    std::cout << to_string(e.method) << ": " << e.value << " +- " << e.std_error << "\n";
  return 0;
}

// ----------------------------------------------------------------- renewal

int cmd_renewal(const ExperimentConfig& cfg) {
  const ModelSpec model = cfg.model.build();
  const std::size_t m_max = cfg.m_max;
  const RhoTable table = model_rho_table(model, m_max);

  std::vector<std::uint64_t> gaps;
  double empirical_mean = 0.0;
  bool simulated = false;
  try {
    const std::uint64_t margin = resolve_margin(model, cfg);
    const auto trajs = simulate_replicas(model, cfg, margin);
    for (const auto& traj : trajs) {
      const auto g = interior_gaps(traj);
      gaps.insert(gaps.end(), g.begin(), g.end());
    }
    simulated = true;
  } catch (const CertificationError&) {
    // renewal table is still reportable without a certified simulation
  }
  if (!gaps.empty()) {
    for (std::uint64_t g : gaps) empirical_mean += static_cast<double>(g);
    empirical_mean /= static_cast<double>(gaps.size());
  }

  const GapLaw first_return = first_return_law(table.a_regularized, m_max);

  fs::create_directories(cfg.out_dir);
  std::ostringstream os;
  write_renewal_csv(os, table, survival_from_gaps(gaps, std::min<std::size_t>(m_max, 1000)));
  write_text_file((fs::path(cfg.out_dir) / "renewal_table.csv").string(), os.str());

  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "renewal";
  report["model"] = model_json(cfg.model);
  report["m_max"] = m_max;
  report["rho_sum"] = table.mean_gap_partial;
  report["rho_sum_converged"] = table.mean_converged;
  report["rho_weighted_sum"] = table.weighted_partial;
  report["rho_weighted_sum_converged"] = table.second_moment_converged;
  report["dp_row_sum_max_error"] = table.row_sum_max_error;
  report["first_return_mean"] = first_return.mean();
  report["first_return_deficit"] = first_return.deficit();
  report["empirical_gap_mean"] = simulated && !gaps.empty() ? json(empirical_mean) : json();
  report["empirical_gap_count"] = gaps.size();
  report["regime"] = to_string(fclt_regime(model));
  report["uniqueness"] = to_string(uniqueness_class(model));

  const SummabilityReport summ = summability_checks(ak_certificate(model));
  report["summability"] = {
      {"sum_one_minus_a_finite", summ.sum_one_minus_a.finite},
      {"sum_one_minus_a_upper", summ.sum_one_minus_a.finite ? json(summ.sum_one_minus_a.upper) : json()},
      {"sum_k_one_minus_a_finite", summ.sum_k_one_minus_a.finite},
      {"sum_k_one_minus_a_upper",
       summ.sum_k_one_minus_a.finite ? json(summ.sum_k_one_minus_a.upper) : json()},
      {"product_positive", summ.product_positive},
      {"second_moment_certified", summ.second_moment_certified},
  };
  report["convention_note"] =
      "rho_M is the literal any-return probability of the house-of-cards chain; "
      "first_return_* uses the first-passage law; empirical_* comes from simulated "
      "confirmed renewals. The conventions are reported side by side, not reconciled.";
  write_json_file(fs::path(cfg.out_dir) / "renewal_report.json", report);

  std::cout << "rho table written (sum rho = " << table.mean_gap_partial
            << ", regime " << to_string(fclt_regime(model)) << ")\n";
  return 0;
}

// ----------------------------------------------------------------- classify

int cmd_classify(const ExperimentConfig& cfg, const std::optional<double>& da,
                 const std::optional<double>& db, const std::optional<double>& dc,
                 const std::optional<std::uint64_t>& dk) {
  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "classify";
  if (db) {
    DecayClass d;
    d.log_exp = da.value_or(0.0);
    d.pow_exp = *db;
    d.coeff = dc.value_or(1.0);
    d.threshold = dk.value_or(2);
    report["decay"] = {{"log_exp", d.log_exp},
                       {"pow_exp", d.pow_exp},
                       {"coeff", d.coeff},
                       {"threshold", d.threshold}};
    report["regime"] = to_string(classify_decay(d));
  } else {
    const ModelSpec model = cfg.model.build();
    report["model"] = model_json(cfg.model);
    report["regime"] = to_string(fclt_regime(model));
    report["uniqueness"] = to_string(uniqueness_class(model));
    const SummabilityReport summ = summability_checks(ak_certificate(model));
    report["product_positive"] = summ.product_positive;
    report["second_moment_certified"] = summ.second_moment_certified;
  }
  fs::create_directories(cfg.out_dir);
  write_json_file(fs::path(cfg.out_dir) / "classify_report.json", report);
  std::cout << report["regime"].get<std::string>() << "\n";
  return 0;
}

// ----------------------------------------------------------------- clt-test

int cmd_clt_test(const ExperimentConfig& cfg, const std::string& sigma_method) {
  const ModelSpec model = cfg.model.build();
  const std::uint64_t margin = resolve_margin(model, cfg);
  const ObservableF f = observable_for(model, cfg, margin);
  const auto trajs = simulate_replicas(model, cfg, margin);

  std::vector<double> replicas;
  std::vector<std::vector<double>> paths;
  for (const auto& traj : trajs) {
    const auto path = scaled_partial_sums(traj, f, kPathGrid);
    paths.push_back(path);
    replicas.push_back(path.back());
  }

  VarianceEstimate sigma_est;
  if (sigma_method == "block") {
    sigma_est = variance_block(pooled_blocks(trajs, f), f, cfg.min_blocks);
  } else if (sigma_method == "autocov") {
    double tail = -1.0;
    const std::size_t lag = resolve_max_lag(model, cfg, trajs.front(), f, &tail);
    sigma_est = autocov_across_replicas(trajs, f, lag, tail);
  } else {
    sigma_est = variance_replication(replicas);
  }
  if (!(sigma_est.value > 0.0)) throw PreconditionError("clt-test: sigma_nonpositive");
  const double sigma = std::sqrt(sigma_est.value);

  const CltTestResult res = clt_test(replicas, sigma);
  const auto profile = path_variance_profile(paths, kPathGrid);

  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "clt-test";
  report["model"] = model_json(cfg.model);
  report["sigma_sq"] = sigma_est.value;
  report["sigma_sq_se"] = sigma_est.std_error;
  report["sigma_method"] = to_string(sigma_est.method);
  report["ks_distance"] = res.ks_distance;
  report["ks_pvalue"] = res.ks_pvalue;
  report["skewness"] = res.skewness;
  report["excess_kurtosis"] = res.excess_kurtosis;
  json path = json::array();
  for (const auto& pt : profile) {
    path.push_back({{"t", pt.t_frac},
                    {"replica_var", pt.var},
                    {"replica_var_se", pt.se},
                    {"sigma_sq_t", sigma_est.value * pt.t_frac}});
  }
  report["path_variance"] = path;

  fs::create_directories(cfg.out_dir);
  write_json_file(fs::path(cfg.out_dir) / "clt_report.json", report);
  std::ostringstream os;
  os.precision(17);
  os << "replica,scaled_sum\n";
  for (std::size_t r = 0; r < replicas.size(); ++r) os << r << ',' << replicas[r] << '\n';
  write_text_file((fs::path(cfg.out_dir) / "replica_values.csv").string(), os.str());

  std::cout << "ks_pvalue " << res.ks_pvalue << " (sigma^2 " << sigma_est.value << " by "
            << to_string(sigma_est.method) << ")\n";
  return 0;
}

// ----------------------------------------------------------------- validate

struct CheckRecorder {
  json checks = json::array();
  int failures = 0;

  void record(const std::string& name, bool pass, json stats = json::object()) {
    stats["name"] = name;
    stats["pass"] = pass;
    checks.push_back(stats);
    if (!pass) ++failures;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << "\n";
  }
};

int cmd_validate(const ExperimentConfig& cfg) {
  const ModelSpec model = cfg.model.build();
  CheckRecorder rec;

  // Validation scale floors keep the statistical checks meaningful even with
  // the config defaults.
  ExperimentConfig vcfg = cfg;
  vcfg.replicas = std::max<std::uint64_t>(cfg.replicas, 200);
  vcfg.n = std::max<std::size_t>(cfg.n, 10000);

  const std::uint64_t margin = resolve_margin(model, vcfg);
  const ObservableF f = observable_for(model, vcfg, margin);

  // --- kernel invariants ---
  {
    UniformStream rng(vcfg.seed, 0xC0FFEE);
    bool norm_ok = true, mono_ok = true;
    for (int rep = 0; rep < 64 && (norm_ok || mono_ok); ++rep) {
      std::vector<Symbol> w;
      double prev_lo_p = 0.0, prev_hi_p = 1.0;
      for (int depth = 0; depth <= 12; ++depth) {
        const HistoryWindow win = HistoryWindow::recent_first(w);
        const ProbEnvelope ep = conditional_prob_envelope(model, Symbol::Plus, win);
        const ProbEnvelope em = conditional_prob_envelope(model, Symbol::Minus, win);
        if (ep.lower + em.lower > 1.0 + 1e-12 || ep.upper + em.upper < 1.0 - 1e-12)
          norm_ok = false;
        if (ep.lower < prev_lo_p - 1e-12 || ep.upper > prev_hi_p + 1e-12) mono_ok = false;
        prev_lo_p = ep.lower;
        prev_hi_p = ep.upper;
        w.push_back(rng.next_u01() < 0.5 ? Symbol::Minus : Symbol::Plus);
      }
    }
    rec.record("envelope_normalization", norm_ok);
    rec.record("envelope_monotone_in_depth", mono_ok);
  }
  {
    bool scan_ge_bound = true, akvark = true;
    double worst_gap = 0.0;
    for (std::uint64_t k = 0; k <= 8; ++k) {
      const double scan = a_k_uniform(model, k, AkMode::ExactScan, vcfg.k_scan_max).value;
      const double cert = a_k_uniform(model, k, AkMode::CertifiedBound, vcfg.k_scan_max).value;
      if (scan + 1e-12 < cert) scan_ge_bound = false;
      const double vk = var_k(model, k, vcfg.k_scan_max).value;
      worst_gap = std::max(worst_gap, std::fabs(scan - (1.0 - vk)));
      if (std::fabs(scan - (1.0 - vk)) > 1e-12) akvark = false;
    }
    rec.record("ak_scan_ge_certified_bound", scan_ge_bound);
    rec.record("ak_equals_one_minus_vark", akvark, {{"worst_abs_gap", worst_gap}});
  }
  if (const auto* ar = std::get_if<AutoregressiveModel>(&model)) {
    bool ok = true;
    for (std::uint64_t k = 0; k <= 8; ++k)
      if (var_k(model, k, vcfg.k_scan_max).value > 2.0 * ar->qprime_sup() * ar->r(k) + 1e-12)
        ok = false;
    rec.record("vark_autoregressive_bound", ok);
  }
  if (const auto* is = std::get_if<IsingModel>(&model)) {
    UniformStream rng(vcfg.seed, 0xBEEF);
    std::vector<HistoryPair> pairs(2000);
    for (auto& pr : pairs) {
      pr.omega.resize(64);
      pr.sigma.resize(64);
      for (std::size_t j = 0; j < 64; ++j) {
        pr.omega[j] = rng.next_u01() < 0.5 ? Symbol::Minus : Symbol::Plus;
        pr.sigma[j] = rng.next_u01() < 0.5 ? Symbol::Minus : Symbol::Plus;
      }
    }
    const double worst = check_sim_bound(*is, pairs, 1.0, -0.5);
    rec.record("interpolation_bound", worst <= 0.0, {{"max_violation", worst}});
  }

  // --- simulation invariants ---
  const auto trajs = simulate_replicas(model, vcfg, margin);
  {
    bool containment = true;
    bool telescoping = true;
    std::vector<double> gaps_d, xis;
    std::vector<std::uint64_t> all_gaps;
    for (const auto& traj : trajs) {
      if (traj.renewal_indices.size() < 2) continue;
      const auto dec = extract_blocks(traj, f);
      double total = dec.head_sum + dec.tail_sum;
      for (const auto& b : dec.blocks) {
        total += b.xi;
        gaps_d.push_back(static_cast<double>(b.gap()));
        xis.push_back(b.xi);
        all_gaps.push_back(b.gap());
        for (std::uint64_t t = b.start; t < b.end; ++t)
          if (traj.lookbacks[t] > t - b.start) containment = false;
      }
      double direct = 0.0;
      for (Symbol x : traj.symbols) direct += f(x);
      if (std::fabs(total - direct) > 1e-9 * std::max(1.0, std::fabs(direct)) + 1e-9)
        telescoping = false;
    }
    rec.record("lookback_containment", containment);
    rec.record("block_telescoping_identity", telescoping);

    const double thresh_g = 3.0 / std::sqrt(static_cast<double>(gaps_d.size()));
    rec.record("block_independence_lag1",
               std::fabs(stats::lag1_autocorr(gaps_d)) <= thresh_g &&
                   std::fabs(stats::lag1_autocorr(xis)) <= thresh_g,
               {{"gap_corr", stats::lag1_autocorr(gaps_d)},
                {"xi_corr", stats::lag1_autocorr(xis)},
                {"threshold", thresh_g}});

    // identical distribution of first-half vs second-half gaps
    const std::size_t half = all_gaps.size() / 2;
    const std::uint64_t max_gap =
        all_gaps.empty() ? 1 : *std::max_element(all_gaps.begin(), all_gaps.end());
    std::vector<double> h1(max_gap + 1, 0.0), h2(max_gap + 1, 0.0);
    for (std::size_t i = 0; i < all_gaps.size(); ++i)
      (i < half ? h1 : h2)[all_gaps[i]] += 1.0;
    const auto two = stats::chi_square_two_sample(h1, h2);
    rec.record("gap_distribution_halves", two.pvalue > 0.01,
               {{"chi2", two.stat}, {"pvalue", two.pvalue}, {"df", two.df}});

    // mean-zero blocks (negative control: --observable-shift)
    const auto mv = stats::mean_var(xis);
    rec.record("block_mean_zero",
               std::fabs(mv.mean) <= 3.0 * (mv.se_mean + f.center_se *
                                                            stats::mean_var(gaps_d).mean),
               {{"mean_xi", mv.mean}, {"se", mv.se_mean}});
  }
  {
    UniformStream s1(vcfg.seed, 0), s2(vcfg.seed, 0);
    const Trajectory a = simulate(model, std::min<std::size_t>(vcfg.n, 20000), s1,
                                  simulate_options(vcfg, margin));
    const Trajectory b = simulate(model, std::min<std::size_t>(vcfg.n, 20000), s2,
                                  simulate_options(vcfg, margin));
    rec.record("determinism",
               a.symbols == b.symbols && a.renewal_indices == b.renewal_indices &&
                   a.lookbacks == b.lookbacks);
  }
  if (std::holds_alternative<IsingModel>(model)) {
    std::vector<double> xs;
    for (const auto& traj : trajs)
      for (Symbol x : traj.symbols) xs.push_back(value(x));
    const double se = stats::batch_means_se(xs, 64);
    const double mean = stats::mean_var(xs).mean;
    rec.record("spin_flip_symmetry", std::fabs(mean) <= 3.0 * se,
               {{"mean", mean}, {"se", se}});
  }

  // --- renewal calculus invariants ---
  {
    const RhoTable table = model_rho_table(model, 400);
    rec.record("rho_dp_row_sums", table.row_sum_max_error <= 1e-12,
               {{"max_error", table.row_sum_max_error}});

    UniformStream rng(vcfg.seed, 0xD1CE);
    std::vector<double> a_seq(60);
    double run = 0.0;
    for (auto& v : a_seq) {
      run = std::max(run, 0.2 + 0.75 * rng.next_u01());
      v = run;
    }
    const RhoTable base = rho_table(a_seq, 80);
    bool monotone = true;
    for (int rep = 0; rep < 5; ++rep) {
      auto raised = a_seq;
      const std::size_t at = static_cast<std::size_t>(rng.next_u01() * raised.size());
      for (std::size_t k = at; k < raised.size(); ++k)
        raised[k] = std::min(1.0, std::max(raised[k], raised[at] + 0.05));
      const RhoTable up = rho_table(raised, 80);
      for (std::size_t m = 1; m < up.rho.size(); ++m)
        if (up.rho[m] > base.rho[m] + 1e-12) monotone = false;
    }
    rec.record("rho_monotone_in_a", monotone);

    GapLaw toy;
    toy.pmf = {0.0, 0.5, 0.5};
    const GapLaw sb = size_biased_gap(toy);
    const bool identity =
        std::fabs(sb.mean() * toy.mean() - toy.second_moment()) <= 1e-10 &&
        std::fabs(sb.pmf[1] - 1.0 / 3.0) <= 1e-12 && std::fabs(sb.pmf[2] - 2.0 / 3.0) <= 1e-12;
    rec.record("size_bias_second_moment_identity", identity);
  }

  // --- estimator invariants ---
  {
    const auto blocks = pooled_blocks(trajs, f);
    bool scaling_ok = true;
    if (blocks.size() >= vcfg.min_blocks) {
      const auto base = variance_block(blocks, f, vcfg.min_blocks);
      std::vector<Block> scaled_blocks = blocks;
      for (auto& b : scaled_blocks) b.xi *= 2.5;
      const auto scaled = variance_block(scaled_blocks, ObservableF::scaled(f, 2.5),
                                         vcfg.min_blocks);
      scaling_ok = std::fabs(scaled.value - 2.5 * 2.5 * base.value) <=
                   1e-12 * std::max(1.0, std::fabs(scaled.value));
      rec.record("variance_scaling_c_squared", scaling_ok,
                 {{"base", base.value}, {"scaled", scaled.value}});
      rec.record("variance_block_nonnegative", base.value >= 0.0);

      std::vector<double> repl;
      std::vector<std::vector<double>> paths;
      for (const auto& traj : trajs) {
        const auto path = scaled_partial_sums(traj, f, kPathGrid);
        paths.push_back(path);
        repl.push_back(path.back());
      }
      double tail = -1.0;
      const std::size_t lag = resolve_max_lag(model, vcfg, trajs.front(), f, &tail);
      const auto est_b = base;
      const auto est_a = autocov_across_replicas(trajs, f, lag, tail);
      const auto est_r = variance_replication(repl);
      const double zab = std::fabs(agreement_z(est_b, est_a));
      const double zar = std::fabs(agreement_z(est_a, est_r));
      const double zbr = std::fabs(agreement_z(est_b, est_r));
      rec.record("estimator_agreement_3way", zab <= 3.0 && zar <= 3.0 && zbr <= 3.0,
                 {{"z_block_autocov", zab},
                  {"z_autocov_replication", zar},
                  {"z_block_replication", zbr},
                  {"block", est_b.value},
                  {"autocov", est_a.value},
                  {"replication", est_r.value}});

      const auto profile = path_variance_profile(paths, kPathGrid);
      bool linear = true;
      for (const auto& pt : profile) {
        const double target = est_b.value * pt.t_frac;
        const double tol = 3.0 * (pt.se + pt.t_frac * est_b.std_error);
        if (std::fabs(pt.var - target) > tol) linear = false;
      }
      rec.record("path_variance_linearity", linear);
    }
  }
  {
    // Wald identity over fresh replicas with a lookahead buffer.
    const std::size_t n_wald = std::min<std::size_t>(vcfg.n, 20000);
    const std::size_t buffer = margin + 2000;
    std::vector<WaldSample> samples(vcfg.replicas);
    const SimulateOptions opt = simulate_options(vcfg, margin);
    parallel_for(vcfg.replicas, vcfg.workers, [&](std::uint64_t r) {
      UniformStream stream(vcfg.seed, 0xA11CE000 + r);
      const Trajectory traj = simulate(model, n_wald + buffer, stream, opt);
      samples[r] = wald_sample(traj, f, n_wald);
    });
    try {
      const auto res = wald_check(samples);
      rec.record("wald_identity", std::fabs(res.relative_error) <= 3.0 * res.std_error + 1e-9,
                 {{"relative_error", res.relative_error},
                  {"se", res.std_error},
                  {"replicas", res.replicas_used}});
    } catch (const PreconditionError& e) {
      rec.record("wald_identity", false, {{"error", std::string(e.what())}});
    }
  }
  {
    // consistency of the sampled law with the conditional probabilities
    UniformStream stream(vcfg.seed, 0xC0151);
    const Trajectory traj =
        simulate(model, std::max<std::size_t>(vcfg.n, 60000), stream, simulate_options(vcfg, margin));
    const auto h = [](HistoryWindow w) {
      return (w.depth() >= 1 && w.at_lag(1) == Symbol::Plus) ? 1.0 : 0.0;
    };
    const auto res = consistency_check(model, traj, h, 1, Symbol::Plus, 128);
    rec.record("consistency_identity",
               std::fabs(res.value) <= 3.0 * res.std_error + res.envelope_halfwidth,
               {{"value", res.value},
                {"se", res.std_error},
                {"halfwidth", res.envelope_halfwidth}});
  }

  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "validate";
  report["model"] = model_json(cfg.model);
  report["n"] = vcfg.n;
  report["replicas"] = vcfg.replicas;
  report["checks"] = rec.checks;
  report["failures"] = rec.failures;
  fs::create_directories(cfg.out_dir);
  write_json_file(fs::path(cfg.out_dir) / "validate_report.json", report);

  std::cout << (rec.failures == 0 ? "validation passed" : "validation FAILED") << " ("
            << rec.checks.size() << " checks, " << rec.failures << " failures)\n";
  return rec.failures == 0 ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regenerative simulation of binary chains with complete connections"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides ov;
  std::string method = "all";
  std::string sigma_method = "block";
  std::optional<double> decay_a, decay_b, decay_c;
  std::optional<std::uint64_t> decay_k;

  auto* c_sim = app.add_subcommand("simulate", "sample trajectories + manifest");
  add_common_options(c_sim, config_path, ov);

  auto* c_var = app.add_subcommand("variance", "long-run variance estimates");
  add_common_options(c_var, config_path, ov);
  c_var->add_option("--method", method, "block | autocov | replication | all");

  auto* c_ren = app.add_subcommand("renewal", "rho table, gap laws, classification");
  add_common_options(c_ren, config_path, ov);

  auto* c_cls = app.add_subcommand("classify", "decay-regime / uniqueness classification");
  add_common_options(c_cls, config_path, ov);
  c_cls->add_option("--decay-a", decay_a, "explicit decay class: log exponent a");
  c_cls->add_option("--decay-b", decay_b, "explicit decay class: power b");
  c_cls->add_option("--decay-c", decay_c, "explicit decay class: constant C");
  c_cls->add_option("--decay-k", decay_k, "explicit decay class: threshold K");

  auto* c_clt = app.add_subcommand("clt-test", "normality + path variance diagnostics");
  add_common_options(c_clt, config_path, ov);
  c_clt->add_option("--sigma-method", sigma_method, "block | autocov | replication");

  auto* c_val = app.add_subcommand("validate", "run the invariant suite");
  add_common_options(c_val, config_path, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = make_config(config_path, ov);
    if (c_sim->parsed()) return cmd_simulate(cfg);
    if (c_var->parsed()) return cmd_variance(cfg, method);
    if (c_ren->parsed()) return cmd_renewal(cfg);
    if (c_cls->parsed()) return cmd_classify(cfg, decay_a, decay_b, decay_c, decay_k);
    if (c_clt->parsed()) return cmd_clt_test(cfg, sigma_method);
    if (c_val->parsed()) return cmd_validate(cfg);
    return 2;
  } catch (const ThresholdOverflowError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  } catch (const CertificationError& e) {
    std::cerr << "certification error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
