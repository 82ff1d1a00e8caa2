#include <catch2/catch_amalgamated.hpp>

#include "gchain/kernel.hpp"
#include "gchain/rng.hpp"
#include "test_support.hpp"

#include <cmath>
#include <vector>

using namespace gchain;

namespace {

std::vector<Symbol> random_window(UniformStream& rng, std::size_t depth) {
  std::vector<Symbol> w(depth);
  for (auto& s : w) s = rng.next_u01() < 0.5 ? Symbol::Minus : Symbol::Plus;
  return w;
}

const std::vector<ModelSpec> kSampleModels = {
    MarkovOrder1Model::memoryless(0.5),
    MarkovOrder1Model(0.9, 0.9),
    AutoregressiveModel(0.0, {0.5}),
    AutoregressiveModel(0.2, {0.4, -0.3, 0.1}),
    AutoregressiveModel(0.0, {0.5, 0.25}, ThetaTail{0.5, 0.0, 3.0, 2}),
    IsingModel(0.3, 4.0),
    IsingModel(0.5, 2.5),
};

}  // namespace

TEST_CASE("memoryless autoregressive envelope is the point mass 1/2") {
  const ModelSpec m = AutoregressiveModel(0.0, {});
  const auto env = conditional_prob_envelope(m, Symbol::Plus, HistoryWindow());
  REQUIRE(env.lower == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(env.upper == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("order-1 autoregressive envelope at depth 0 is [q(-r0), q(+r0)]") {
  const ModelSpec m = AutoregressiveModel(0.0, {0.5});
  const auto env = conditional_prob_envelope(m, Symbol::Plus, HistoryWindow());
  REQUIRE(env.lower == Catch::Approx(1.0 / (1.0 + std::exp(0.5))).margin(1e-12));
  REQUIRE(env.upper == Catch::Approx(1.0 / (1.0 + std::exp(-0.5))).margin(1e-12));
  REQUIRE(env.lower == Catch::Approx(0.3775406687981454).margin(1e-9));
  REQUIRE(env.upper == Catch::Approx(0.6224593312018546).margin(1e-9));
}

TEST_CASE("ising all-plus envelopes bracket the zeta(2) limit and shrink") {
  const IsingModel ising(0.5, 2.0, 20000);
  const ModelSpec m = ising;
  // Oracle: S = zeta(2) bracketed independently; g(+1 | all plus) = logistic(2 beta S).
  const auto z = testsupport::zeta_bracket(2.0, 50000);
  const double target_lo = testsupport::logistic(2.0 * 0.5 * z.lo);
  const double target_hi = testsupport::logistic(2.0 * 0.5 * z.hi);
  REQUIRE(target_lo == Catch::Approx(0.8383).margin(5e-4));  // also pins ~1/(1+e^-pi^2/6)

  double prev_width = 1.0;
  for (const std::size_t depth : {16u, 256u, 4096u}) {
    const std::vector<Symbol> w(depth, Symbol::Plus);
    const auto env = conditional_prob_envelope(m, Symbol::Plus, HistoryWindow::recent_first(w));
    REQUIRE(env.lower <= target_lo + 1e-12);
    REQUIRE(env.upper >= target_hi - 1e-12);
    REQUIRE(env.width() < prev_width);
    prev_width = env.width();
  }
  REQUIRE(prev_width < 2e-3);
}

TEST_CASE("envelope normalization and monotonicity across models") {
  UniformStream rng(101, 0);
  for (const auto& m : kSampleModels) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto full = random_window(rng, 14);
      double prev_lower_p = 0.0, prev_upper_p = 1.0;
      for (std::size_t depth = 0; depth <= full.size(); ++depth) {
        const HistoryWindow w = HistoryWindow::recent_first(full.data(), depth);
        const auto ep = conditional_prob_envelope(m, Symbol::Plus, w);
        const auto em = conditional_prob_envelope(m, Symbol::Minus, w);
        REQUIRE(ep.lower + em.lower <= 1.0 + 1e-12);
        REQUIRE(ep.upper + em.upper >= 1.0 - 1e-12);
        REQUIRE(ep.lower >= prev_lower_p - 1e-12);
        REQUIRE(ep.upper <= prev_upper_p + 1e-12);
        prev_lower_p = ep.lower;
        prev_upper_p = ep.upper;
      }
    }
  }
}

TEST_CASE("a_k certified bound reproduces the published ising value") {
  const ModelSpec m = IsingModel(0.3, 3.5);
  const auto cert = a_k_uniform(m, 2, AkMode::CertifiedBound);
  REQUIRE(cert.value == Catch::Approx(1.0 - 0.6 * std::pow(2.0, -2.5)).margin(1e-12));
  REQUIRE(cert.value == Catch::Approx(0.8939339828220179).margin(1e-9));
  const auto scan = a_k_uniform(m, 2, AkMode::ExactScan);
  REQUIRE(scan.value >= cert.value - 1e-12);
}

TEST_CASE("memoryless models have a_k = 1 at every depth") {
  for (const ModelSpec m :
       {ModelSpec(MarkovOrder1Model::memoryless(0.3)), ModelSpec(AutoregressiveModel(0.7, {}))}) {
    for (std::uint64_t k : {0, 1, 5}) {
      REQUIRE(a_k_uniform(m, k, AkMode::ExactScan).value == Catch::Approx(1.0).margin(1e-12));
      REQUIRE(var_k(m, k).value == Catch::Approx(0.0).margin(1e-12));
    }
  }
}

TEST_CASE("finite-order autoregressive model has a_1 = 1") {
  const ModelSpec m = AutoregressiveModel(0.0, {0.5});
  REQUIRE(a_k_uniform(m, 1, AkMode::ExactScan).value == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("var_0 of the order-1 autoregressive model is q(1/2) - q(-1/2)") {
  const ModelSpec m = AutoregressiveModel(0.0, {0.5});
  const auto v = var_k(m, 0);
  REQUIRE(v.exact);
  REQUIRE(v.value == Catch::Approx(std::tanh(0.25)).margin(1e-12));
  REQUIRE(v.value == Catch::Approx(0.2449186624037092).margin(1e-9));
}

TEST_CASE("ising variation scan respects the published power-law bound") {
  const ModelSpec m = IsingModel(0.4, 2.5);
  for (std::uint64_t k = 1; k <= 6; ++k) {
    const auto v = var_k(m, k);
    REQUIRE(v.exact);
    REQUIRE(v.value <= 2.0 * 0.4 * std::pow(static_cast<double>(k), -1.5) + 1e-12);
  }
}

TEST_CASE("a_k = 1 - var_k under the exact scan") {
  for (const auto& m : kSampleModels) {
    for (std::uint64_t k = 0; k <= 8; ++k) {
      const double a = a_k_uniform(m, k, AkMode::ExactScan).value;
      const double v = var_k(m, k).value;
      REQUIRE(a == Catch::Approx(1.0 - v).margin(1e-12));
    }
  }
}

TEST_CASE("exact scan dominates the certified bound") {
  for (const auto& m : kSampleModels) {
    for (std::uint64_t k = 0; k <= 6; ++k) {
      const double scan = a_k_uniform(m, k, AkMode::ExactScan).value;
      const double cert = a_k_uniform(m, k, AkMode::CertifiedBound).value;
      REQUIRE(scan >= cert - 1e-12);
    }
  }
}

TEST_CASE("exact scan depth limit is enforced") {
  const ModelSpec m = IsingModel(0.3, 4.0);
  REQUIRE_THROWS_AS(a_k_uniform(m, 25, AkMode::ExactScan, 20), PreconditionError);
}

TEST_CASE("autoregressive variation obeys the mean-value bound") {
  const AutoregressiveModel ar(0.2, {0.4, -0.3, 0.1}, ThetaTail{0.3, 0.0, 2.5, 2});
  const ModelSpec m = ar;
  for (std::uint64_t k = 0; k <= 10; ++k)
    REQUIRE(var_k(m, k).value <= 2.0 * ar.qprime_sup() * ar.r(k) + 1e-12);
}

TEST_CASE("autoregressive remainder is non-increasing and differs by |theta_k|") {
  const AutoregressiveModel ar(0.0, {0.5, 0.25, 0.1}, ThetaTail{0.4, 0.5, 2.0, 2});
  double prev = ar.r(0);
  for (std::uint64_t k = 1; k <= 30; ++k) {
    const double cur = ar.r(k);
    REQUIRE(cur <= prev + 1e-15);
    if (k <= ar.order())
      REQUIRE(prev - cur >= std::fabs(ar.coefficient(k)) - 1e-15);
    prev = cur;
  }
}

TEST_CASE("ising tail bound nests envelopes across the table boundary") {
  const IsingModel ising(0.3, 3.0, 64);  // small table to exercise the fallback
  for (std::uint64_t k = 1; k <= 200; ++k) {
    REQUIRE(ising.tail_upper(k - 1) - ising.tail_upper(k) >= ising.lag_weight(k) - 1e-15);
  }
  // still an upper bound on the true tail
  const auto z = testsupport::zeta_bracket(3.0, 10000);
  REQUIRE(ising.tail_upper(0) >= z.hi - 1e-12);
}

TEST_CASE("uniqueness classification endpoints") {
  REQUIRE(uniqueness_class(IsingModel(0.7, 1.6)) == UniquenessClass::SquareSummableVariation);
  REQUIRE(uniqueness_class(IsingModel(0.7, 1.2)) == UniquenessClass::NoneDetected);
  REQUIRE(uniqueness_class(AutoregressiveModel(0.0, {0.5}, ThetaTail{1.0, 0.0, 3.0, 2})) ==
          UniquenessClass::PositiveProduct);
  REQUIRE(uniqueness_class(MarkovOrder1Model(0.9, 0.9)) == UniquenessClass::PositiveProduct);
  // degenerate chains earn no certificate
  REQUIRE(uniqueness_class(MarkovOrder1Model(1.0, 1.0)) == UniquenessClass::NoneDetected);
}

TEST_CASE("interpolation bound check") {
  const IsingModel ising(0.5, 2.5, 2048);

  SECTION("identical histories give a non-positive result") {
    HistoryPair pr;
    pr.omega.assign(50, Symbol::Plus);
    pr.sigma = pr.omega;
    REQUIRE(check_sim_bound(ising, std::vector<HistoryPair>{pr}, 1.0, 1.0) <= 0.0);
  }

  SECTION("single-spin difference at lag m bounds the g difference by 2 beta m^-p") {
    for (const std::size_t lag : {1u, 3u, 10u}) {
      std::vector<Symbol> omega(20, Symbol::Plus), sigma(20, Symbol::Plus);
      sigma[lag - 1] = Symbol::Minus;
      const double g_omega =
          ising.g_plus_truncated(HistoryWindow::recent_first(omega));
      const double g_sigma =
          ising.g_plus_truncated(HistoryWindow::recent_first(sigma));
      REQUIRE(std::fabs(g_omega - g_sigma) <=
              2.0 * 0.5 * std::pow(static_cast<double>(lag), -2.5) + 1e-12);
    }
  }

  SECTION("random pair batch stays non-positive") {
    UniformStream rng(77, 0);
    std::vector<HistoryPair> pairs(2000);
    for (auto& pr : pairs) {
      pr.omega = random_window(rng, 100);
      pr.sigma = random_window(rng, 100);
    }
    REQUIRE(check_sim_bound(ising, pairs, -1.0, 2.0) <= 0.0);
  }
}

TEST_CASE("detection bounds are valid minorants of the exact scan") {
  for (const auto& m : kSampleModels) {
    const auto bounds = detection_bounds(m, 10, 4);  // scan only to depth 4
    for (std::size_t k = 0; k < bounds.size(); ++k) {
      const double scan = a_k_uniform(m, k, AkMode::ExactScan).value;
      REQUIRE(bounds[k] <= scan + 1e-12);
      REQUIRE(bounds[k] >= 0.0);
      REQUIRE(bounds[k] <= 1.0);
    }
  }
}

TEST_CASE("bias bounds and automatic margins") {
  SECTION("memoryless models have zero bias at margin 1") {
    const ModelSpec m = MarkovOrder1Model::memoryless(0.5);
    REQUIRE(bias_upper_bound(m, 1) == 0.0);
    REQUIRE(auto_margin(m, 1e-6) == 1);
  }
  SECTION("markov chains have zero bias beyond level 0") {
    const ModelSpec m = MarkovOrder1Model(0.9, 0.9);
    REQUIRE(bias_upper_bound(m, 1) == 0.0);
    REQUIRE(bias_upper_bound(m, 0) == Catch::Approx(0.8));
  }
  SECTION("ising margins meet the tolerance and shrink with it") {
    const ModelSpec m = IsingModel(0.3, 4.0);
    const auto m6 = auto_margin(m, 1e-6);
    REQUIRE(bias_upper_bound(m, m6) <= 1e-6);
    REQUIRE(bias_upper_bound(m, m6 - 1) > 1e-6);
    REQUIRE(auto_margin(m, 1e-3) < m6);
  }
  SECTION("uncertifiable models are rejected") {
    REQUIRE_THROWS_AS(auto_margin(ModelSpec(IsingModel(0.3, 1.8)), 1e-6), CertificationError);
  }
}

TEST_CASE("model parameter validation") {
  REQUIRE_THROWS_AS(IsingModel(0.0, 3.0), std::invalid_argument);
  REQUIRE_THROWS_AS(IsingModel(0.3, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(MarkovOrder1Model(-0.1, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(AutoregressiveModel(std::nan(""), {}), std::invalid_argument);
}
