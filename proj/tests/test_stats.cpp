#include <catch2/catch_amalgamated.hpp>

#include "gchain/stats.hpp"
#include "test_support.hpp"

#include <cmath>
#include <vector>

namespace st = gchain::stats;

TEST_CASE("normal cdf matches reference values") {
  REQUIRE(st::normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(st::normal_cdf(1.0) == Catch::Approx(0.8413447460685429).margin(1e-9));
  REQUIRE(st::normal_cdf(-1.0) == Catch::Approx(0.15865525393145707).margin(1e-9));
  REQUIRE(st::normal_cdf(2.0) == Catch::Approx(0.9772498680518208).margin(1e-9));
  REQUIRE(st::normal_cdf(0.5) == Catch::Approx(0.6914624612740131).margin(1e-9));
}

TEST_CASE("kolmogorov distribution") {
  // Q(1) = 2(e^-2 - e^-8 + e^-18 - ...) and Q(2) = 2(e^-8 - e^-32)
  REQUIRE(st::kolmogorov_q(1.0) == Catch::Approx(0.26999967167735456).margin(1e-6));
  REQUIRE(st::kolmogorov_q(2.0) == Catch::Approx(0.00067092525558050).margin(1e-9));
  REQUIRE(st::kolmogorov_q(0.05) == Catch::Approx(1.0).margin(1e-9));
  // monotone non-increasing across the series switch point
  double prev = 1.0;
  for (double lam = 0.3; lam < 3.0; lam += 0.01) {
    const double q = st::kolmogorov_q(lam);
    REQUIRE(q <= prev + 1e-12);
    prev = q;
  }
}

TEST_CASE("ks test calibrates under the null and rejects degenerate data") {
  gchain::UniformStream rng(11, 0);
  const auto z = testsupport::standard_normals(2000, rng);
  const auto res = st::ks_test_standard_normal(z);
  REQUIRE(res.pvalue > 0.01);

  std::vector<double> constant(500, 0.0);
  const auto bad = st::ks_test_standard_normal(constant);
  REQUIRE(bad.distance >= 0.5);
  REQUIRE(bad.pvalue < 1e-6);
}

TEST_CASE("chi-square survival matches closed forms for even and odd df") {
  // df=2: exp(-x/2); df=4: (1 + x/2) exp(-x/2); df=1: erfc(sqrt(x/2))
  REQUIRE(st::chi_square_sf(4.0, 2) == Catch::Approx(std::exp(-2.0)).margin(1e-12));
  REQUIRE(st::chi_square_sf(4.0, 4) == Catch::Approx(3.0 * std::exp(-2.0)).margin(1e-12));
  REQUIRE(st::chi_square_sf(4.0, 1) == Catch::Approx(0.04550026389635842).margin(1e-9));
  REQUIRE(st::chi_square_sf(0.0, 3) == 1.0);
}

TEST_CASE("chi-square gof pools small bins and accepts exact fits") {
  const std::vector<double> obs{50, 30, 15, 3, 2};
  const std::vector<double> expected{50, 30, 15, 3, 2};
  const auto res = st::chi_square_gof(obs, expected);
  REQUIRE(res.stat == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(res.pvalue == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(res.bins_used < obs.size());  // the 3,2 tail was pooled
}

TEST_CASE("two-sample chi-square sees identical and different histograms") {
  const std::vector<double> a{100, 200, 300};
  const auto same = st::chi_square_two_sample(a, a);
  REQUIRE(same.pvalue > 0.99);
  const std::vector<double> b{300, 200, 100};
  const auto diff = st::chi_square_two_sample(a, b);
  REQUIRE(diff.pvalue < 1e-6);
}

TEST_CASE("moments on a known sample") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto mv = st::mean_var(xs);
  REQUIRE(mv.mean == Catch::Approx(2.5));
  REQUIRE(mv.var == Catch::Approx(5.0 / 3.0));
  const auto mom = st::standardized_moments(xs);
  REQUIRE(mom.skewness == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(mom.excess_kurtosis == Catch::Approx(-1.36).margin(1e-12));
}

TEST_CASE("batch means se tracks the iid se") {
  gchain::UniformStream rng(5, 0);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = rng.next_u01();
  const auto mv = st::mean_var(xs);
  const double se = st::batch_means_se(xs, 32);
  REQUIRE(se > 0.5 * mv.se_mean);
  REQUIRE(se < 2.0 * mv.se_mean);
}

TEST_CASE("lag-1 autocorrelation") {
  std::vector<double> alternating;
  for (int i = 0; i < 1000; ++i) alternating.push_back(i % 2 == 0 ? 1.0 : -1.0);
  REQUIRE(st::lag1_autocorr(alternating) == Catch::Approx(-1.0).margin(0.01));

  gchain::UniformStream rng(6, 0);
  std::vector<double> iid(5000);
  for (auto& x : iid) x = rng.next_u01();
  REQUIRE(std::fabs(st::lag1_autocorr(iid)) < 0.05);
}
