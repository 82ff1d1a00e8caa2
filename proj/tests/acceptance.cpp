// Acceptance suite: one criterion per function, one pass/fail line each.
// Every tolerance is pinned here. Run with no argument for all criteria or
// with a single number to run one.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "gchain/gchain.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace gchain;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

constexpr unsigned kWorkers = 4;
constexpr double kPathGrid[] = {0.25, 0.5, 0.75, 1.0};

struct ReplicaPool {
  std::vector<Block> blocks;        // pooled from the first block_replicas replicas
  std::vector<double> values;       // S_n / sqrt(n) per replica
  std::vector<std::vector<double>> paths;
  Trajectory first;                 // replica 0 kept whole
};

ReplicaPool run_pool(const ModelSpec& model, std::size_t n, std::size_t replicas,
                     std::uint64_t seed, const ObservableF& f,
                     std::size_t block_replicas) {
  ReplicaPool pool;
  pool.values.assign(replicas, 0.0);
  pool.paths.assign(replicas, {});
  std::mutex mtx;
  parallel_for(replicas, kWorkers, [&](std::uint64_t r) {
    UniformStream stream(seed, r);
    Trajectory traj = simulate(model, n, stream);
    pool.paths[r] = scaled_partial_sums(traj, f, kPathGrid);
    pool.values[r] = pool.paths[r].back();
    if (r < block_replicas) {
      auto dec = extract_blocks(traj, f);
      std::lock_guard<std::mutex> lock(mtx);
      pool.blocks.insert(pool.blocks.end(), dec.blocks.begin(), dec.blocks.end());
    }
    if (r == 0) {
      std::lock_guard<std::mutex> lock(mtx);
      pool.first = std::move(traj);
    }
  });
  return pool;
}

// 1. Memoryless oracle: three estimators within 3 SE of 1, normality, unit gaps.
Outcome criterion1() {
  Outcome out;
  const ModelSpec model = MarkovOrder1Model::memoryless(0.5);
  const ObservableF f = ObservableF::spin();
  const std::size_t n = 10000, replicas = 1000;

  bool dense = true;
  {
    UniformStream probe(20261, 0);
    const Trajectory traj = simulate(model, n, probe);
    dense = traj.renewal_indices.size() == n - traj.margin;
    for (auto g : interior_gaps(traj))
      if (g != 1) dense = false;
  }
  out.require(dense, "every eligible index must be a renewal with unit gaps");

  const ReplicaPool pool = run_pool(model, n, replicas, 20261, f, 50);

  const auto block = variance_block(pool.blocks, f);
  out.require(std::fabs(block.value - 1.0) <= 3.0 * block.std_error + 1e-12,
              "block estimator off 1: " + std::to_string(block.value));

  const auto autocov = variance_autocov(pool.first.symbols, f, 10);
  out.require(std::fabs(autocov.value - 1.0) <= 3.0 * autocov.std_error,
              "autocov estimator off 1: " + std::to_string(autocov.value));

  const auto repl = variance_replication(pool.values);
  out.require(std::fabs(repl.value - 1.0) <= 3.0 * repl.std_error,
              "replication estimator off 1: " + std::to_string(repl.value));

  const auto clt = clt_test(pool.values, std::sqrt(block.value));
  out.require(clt.ks_pvalue > 0.01, "ks_pvalue " + std::to_string(clt.ks_pvalue));
  out.note("block " + std::to_string(block.value) + ", autocov " +
           std::to_string(autocov.value) + ", repl " + std::to_string(repl.value) +
           ", ks_p " + std::to_string(clt.ks_pvalue));
  return out;
}

// 2. Markov oracle, sigma^2 = 9: 3 SE and 5% at n = 10^6.
Outcome criterion2() {
  Outcome out;
  const ModelSpec model = MarkovOrder1Model(0.9, 0.9);
  const ObservableF f = ObservableF::spin();
  UniformStream stream(20262, 0);
  const Trajectory traj = simulate(model, 1000000, stream);

  const auto dec = extract_blocks(traj, f);
  const auto block = variance_block(dec.blocks, f);
  out.require(std::fabs(block.value - 9.0) <= 3.0 * block.std_error,
              "block off 9 beyond 3 SE: " + std::to_string(block.value));
  out.require(std::fabs(block.value - 9.0) <= 0.05 * 9.0,
              "block off 9 beyond 5%: " + std::to_string(block.value));

  const RhoTable rho = rho_table(detection_bounds(model, 400), 400);
  double tail = -1.0;
  const std::size_t lag = choose_max_lag(traj.symbols, f, rho, &tail);
  const auto autocov = variance_autocov(traj.symbols, f, lag, tail);
  out.require(std::fabs(autocov.value - 9.0) <= 3.0 * autocov.std_error,
              "autocov off 9 beyond 3 SE: " + std::to_string(autocov.value));
  out.require(std::fabs(autocov.value - 9.0) <= 0.05 * 9.0,
              "autocov off 9 beyond 5%: " + std::to_string(autocov.value));
  out.note("block " + std::to_string(block.value) + ", autocov " +
           std::to_string(autocov.value) + " (lag " + std::to_string(lag) + ")");
  return out;
}

// 3. rho DP exactness on constant chains.
Outcome criterion3() {
  Outcome out;
  for (const double a : {0.3, 0.5, 0.9}) {
    const RhoTable table = rho_table(std::vector<double>(4, a), 1000);
    double worst = 0.0;
    for (std::size_t m = 1; m <= 1000; ++m)
      worst = std::max(worst, std::fabs(table.rho[m] - (1.0 - a)));
    out.require(worst <= 1e-12,
                "constant a=" + std::to_string(a) + " worst error " + std::to_string(worst));
  }
  const RhoTable zero = rho_table(std::vector<double>(4, 0.0), 1000);
  const RhoTable one = rho_table(std::vector<double>(4, 1.0), 1000);
  for (std::size_t m = 1; m <= 1000; ++m) {
    out.require(zero.rho[m] == 1.0, "a=0 must give rho=1");
    out.require(one.rho[m] == 0.0, "a=1 must give rho=0");
  }
  return out;
}

// 4. Size-bias identity on simulated ising gaps.
Outcome criterion4() {
  Outcome out;
  const ModelSpec model = IsingModel(0.3, 4.0);
  UniformStream stream(20264, 0);
  const std::size_t n = 1000000;
  const Trajectory traj = simulate(model, n, stream);

  const auto gaps = interior_gaps(traj);
  out.require(gaps.size() > 100000, "needs a dense renewal set");
  const GapLaw interior = empirical_gap_law(gaps);
  const GapLaw expected = size_biased_gap(interior);

  double mean_gap = 0.0;
  for (auto g : gaps) mean_gap += static_cast<double>(g);
  mean_gap /= static_cast<double>(gaps.size());
  const std::uint64_t stride = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(10.0 * mean_gap));
  const auto straddle =
      straddling_gaps(traj, traj.renewal_indices.front() + n / 10, stride);
  out.require(straddle.size() > 5000, "needs enough straddle samples");

  std::vector<double> observed(expected.pmf.size(), 0.0);
  for (auto g : straddle)
    if (g < observed.size()) observed[g] += 1.0;
  const auto chi = stats::chi_square_gof(
      std::span<const double>(observed.data() + 1, observed.size() - 1),
      std::span<const double>(expected.pmf.data() + 1, expected.pmf.size() - 1));
  out.require(chi.pvalue > 0.01, "chi-square p " + std::to_string(chi.pvalue));
  out.note("mean gap " + std::to_string(mean_gap) + ", straddle samples " +
           std::to_string(straddle.size()) + ", chi2 p " + std::to_string(chi.pvalue));
  return out;
}

// 5. Corollary classifier table.
Outcome criterion5() {
  Outcome out;
  const auto classify = [](double a, double b) {
    return classify_decay(DecayClass{a, b, 1.0, 2});
  };
  out.require(classify(0.0, 3.0) == FcltRegime::Var2, "(0,3) -> var2");
  out.require(classify(-2.0, 2.0) == FcltRegime::Var2, "(-2,2) -> var2");
  out.require(classify(0.0, 1.5) == FcltRegime::Var1, "(0,1.5) -> var1");
  out.require(classify(-2.0, 1.0) == FcltRegime::Var1, "(-2,1) -> var1");
  out.require(classify(0.0, 1.0) == FcltRegime::None, "(0,1) -> none");
  out.require(classify(2.0, 2.0) == FcltRegime::Var1, "(2,2) -> var1");
  return out;
}

// 6. Model-regime endpoints.
Outcome criterion6() {
  Outcome out;
  out.require(fclt_regime(IsingModel(0.3, 4.0)) == FcltRegime::Var2, "ising p=4 -> var2");
  out.require(fclt_regime(AutoregressiveModel(0.0, {0.5}, ThetaTail{1.0, 0.0, 3.0, 2})) ==
                  FcltRegime::Var2,
              "autoregressive r_k <= 1/k^3 -> var2");
  out.require(uniqueness_class(IsingModel(0.7, 1.6)) == UniquenessClass::SquareSummableVariation,
              "ising p=1.6 unique via square-summable variation");
  return out;
}

// 7. FCLT end to end on the power-law ising chain.
Outcome criterion7() {
  Outcome out;
  const ModelSpec model = IsingModel(0.3, 4.0);
  const ObservableF f = ObservableF::spin();
  const std::size_t n = 10000, replicas = 1000;
  const ReplicaPool pool = run_pool(model, n, replicas, 20267, f, 100);

  const auto block = variance_block(pool.blocks, f);
  out.require(block.value > 0.0, "positive variance");

  const auto clt = clt_test(pool.values, std::sqrt(block.value));
  out.require(clt.ks_pvalue > 0.01, "ks_pvalue " + std::to_string(clt.ks_pvalue));

  const auto profile = path_variance_profile(pool.paths, kPathGrid);
  for (const auto& pt : profile) {
    const double target = block.value * pt.t_frac;
    const double tol = 3.0 * (pt.se + pt.t_frac * block.std_error);
    out.require(std::fabs(pt.var - target) <= tol,
                "path variance at t=" + std::to_string(pt.t_frac) + ": " +
                    std::to_string(pt.var) + " vs " + std::to_string(target));
  }
  out.note("sigma^2 " + std::to_string(block.value) + ", ks_p " +
           std::to_string(clt.ks_pvalue));
  return out;
}

// 8. Interpolation inequality over random history pairs.
Outcome criterion8() {
  Outcome out;
  const IsingModel model(0.5, 2.5, 2048);
  UniformStream rng(20268, 0);
  std::vector<HistoryPair> pairs(10000);
  for (auto& pr : pairs) {
    pr.omega.resize(200);
    pr.sigma.resize(200);
    for (std::size_t j = 0; j < 200; ++j) {
      pr.omega[j] = rng.next_u01() < 0.5 ? Symbol::Minus : Symbol::Plus;
      pr.sigma[j] = rng.next_u01() < 0.5 ? Symbol::Minus : Symbol::Plus;
    }
  }
  const double worst = check_sim_bound(model, pairs, 1.0, -1.0);
  out.require(worst <= 0.0, "max violation " + std::to_string(worst));
  out.note("max violation " + std::to_string(worst));
  return out;
}

// 9. Internal identities: telescoping, a_k = 1 - var_k, rho monotonicity, Wald.
Outcome criterion9() {
  Outcome out;
  {
    const ModelSpec model = IsingModel(0.3, 4.0);
    UniformStream stream(20269, 0);
    const Trajectory traj = simulate(model, 30000, stream);
    const ObservableF f = ObservableF::spin();
    const auto dec = extract_blocks(traj, f);
    double total = dec.head_sum + dec.tail_sum;
    for (const auto& b : dec.blocks) total += b.xi;
    double direct = 0.0;
    for (Symbol x : traj.symbols) direct += f(x);
    out.require(std::fabs(total - direct) <= 1e-9, "telescoping identity");
  }
  {
    const std::vector<ModelSpec> models = {
        MarkovOrder1Model::memoryless(0.5), MarkovOrder1Model(0.9, 0.9),
        AutoregressiveModel(0.0, {0.5}),
        AutoregressiveModel(0.2, {0.4, -0.3, 0.1}, ThetaTail{0.3, 0.0, 2.5, 2}),
        IsingModel(0.3, 4.0), IsingModel(0.5, 2.5)};
    double worst = 0.0;
    for (const auto& m : models)
      for (std::uint64_t k = 0; k <= 8; ++k) {
        const double a = a_k_uniform(m, k, AkMode::ExactScan).value;
        const double v = var_k(m, k).value;
        worst = std::max(worst, std::fabs(a - (1.0 - v)));
      }
    out.require(worst <= 1e-12, "a_k = 1 - var_k worst gap " + std::to_string(worst));
  }
  {
    UniformStream rng(20270, 0);
    std::vector<double> a(50);
    double run = 0.0;
    for (auto& v : a) {
      run = std::max(run, 0.2 + 0.7 * rng.next_u01());
      v = run;
    }
    const RhoTable base = rho_table(a, 80);
    bool monotone = true;
    for (int rep = 0; rep < 6; ++rep) {
      auto raised = a;
      const std::size_t at = static_cast<std::size_t>(rng.next_u01() * raised.size());
      for (std::size_t k = at; k < raised.size(); ++k)
        raised[k] = std::min(1.0, std::max(raised[k], raised[at] + 0.07));
      const RhoTable up = rho_table(raised, 80);
      for (std::size_t m = 1; m <= 80; ++m)
        if (up.rho[m] > base.rho[m] + 1e-12) monotone = false;
    }
    out.require(monotone, "rho must not increase when a_k increases");
  }
  {
    const ModelSpec model = MarkovOrder1Model(0.9, 0.9);
    const ObservableF f = ObservableF::spin();
    const std::size_t cutoff = 10000;
    std::vector<WaldSample> samples(200);
    parallel_for(samples.size(), kWorkers, [&](std::uint64_t r) {
      UniformStream stream(20271, r);
      const Trajectory traj = simulate(model, cutoff + 1500, stream);
      samples[r] = wald_sample(traj, f, cutoff);
    });
    const auto res = wald_check(samples);
    out.require(std::fabs(res.relative_error) <= 3.0 * res.std_error,
                "wald relative error " + std::to_string(res.relative_error) + " vs 3 SE " +
                    std::to_string(3.0 * res.std_error));
    out.note("wald rel " + std::to_string(res.relative_error) + " +- " +
             std::to_string(res.std_error));
  }
  return out;
}

// 10. Determinism of the CLI: byte-identical reruns, worker invariance.
Outcome criterion10() {
  Outcome out;
  const std::string cli = GCHAIN_CLI_PATH;
  const fs::path base = fs::temp_directory_path() / "gchain_acceptance10";
  fs::remove_all(base);
  fs::create_directories(base);

  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  const std::string args =
      "simulate --model ising --beta 0.3 --p 4 --n 4000 --replicas 6 --seed 77 ";
  out.require(run(args + "--workers 1 --out " + (base / "a").string()) == 0, "run a");
  out.require(run(args + "--workers 1 --out " + (base / "b").string()) == 0, "run b");
  out.require(run(args + "--workers 4 --out " + (base / "c").string()) == 0, "run c");

  bool identical = true;
  for (int r = 0; r < 6; ++r) {
    const std::string name = "trajectory_r" + std::to_string(r) + ".csv";
    const std::string ref = slurp(base / "a" / name);
    if (ref.empty() || ref != slurp(base / "b" / name) || ref != slurp(base / "c" / name))
      identical = false;
  }
  if (slurp(base / "a" / "manifest.json") != slurp(base / "b" / "manifest.json") ||
      slurp(base / "a" / "manifest.json") != slurp(base / "c" / "manifest.json"))
    identical = false;
  out.require(identical, "outputs must be byte-identical across reruns and workers");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const Criterion kCriteria[] = {
    {1, "memoryless oracle: estimators, normality, unit gaps", criterion1},
    {2, "markov oracle: sigma^2 = 9 within 3 SE and 5%", criterion2},
    {3, "rho DP exactness on constant chains", criterion3},
    {4, "size-bias identity of straddling gaps", criterion4},
    {5, "corollary decay classifier table", criterion5},
    {6, "model regime endpoints", criterion6},
    {7, "fclt end-to-end on the power-law ising chain", criterion7},
    {8, "interpolation bound over random history pairs", criterion8},
    {9, "internal identities (telescoping, akvark, rho, wald)", criterion9},
    {10, "byte-identical outputs, worker invariance", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << "[criterion " << (c.id < 10 ? "0" : "") << c.id << "] "
         << (out.pass ? "PASS" : "FAIL") << " " << c.name << " (" << std::fixed;
    line.precision(1);
    line << secs << "s)";
    if (!out.detail.empty()) line << " -- " << out.detail;
    std::cout << line.str() << std::endl;
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
