#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cannings/rng.hpp"
#include "cannings/stats.hpp"

using namespace cannings;
using Catch::Matchers::WithinAbs;

TEST_CASE("ks_two_sample") {
  std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(ks_two_sample(a, a).statistic == 0.0);

  CHECK_THROWS_AS(ks_two_sample({1, 2, 3}, a), TooFewSamples);

  Rng rng(1);
  std::vector<double> u, shifted;
  for (int i = 0; i < 10000; ++i) {
    u.push_back(rng.uniform());
    shifted.push_back(rng.uniform() + 0.5);
  }
  const KsResult ks = ks_two_sample(u, shifted);
  CHECK_THAT(ks.statistic, WithinAbs(0.5, 0.02));
  CHECK(ks.p_value < 1e-6);
}

TEST_CASE("ks null p-values are uniform") {
  std::vector<double> pvals;
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 500);
    std::vector<double> a(10000), b(10000);
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = rng.uniform();
    pvals.push_back(ks_two_sample(std::move(a), std::move(b)).p_value);
  }
  const KsResult gof = ks_one_sample(pvals, [](double p) {
    return std::clamp(p, 0.0, 1.0);
  });
  CHECK(gof.p_value > 0.01);
}

TEST_CASE("ks_two_sample rejects at the nominal rate") {
  int rejects = 0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 9000);
    std::vector<double> a(1000), b(1000);
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = rng.uniform();
    if (ks_two_sample(std::move(a), std::move(b)).p_value < 0.05) ++rejects;
  }
  // 0.05 * 200 = 10 expected, +- 2 standard errors
  const double se = std::sqrt(0.05 * 0.95 * seeds);
  CHECK(rejects >= 10 - static_cast<int>(std::ceil(2 * se)));
  CHECK(rejects <= 10 + static_cast<int>(std::ceil(2 * se)));
}

TEST_CASE("kolmogorov survival values") {
  // classical critical value: Q(1.358) ~ 0.05
  CHECK_THAT(kolmogorov_q(1.358), WithinAbs(0.05, 0.002));
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(3.0) < 1e-6);
}

TEST_CASE("chi-square survival and two-sample test") {
  CHECK_THAT(chi_square_survival(5.991, 2), WithinAbs(0.05, 0.001));
  CHECK(chi_square_survival(0.0, 3) == 1.0);

  // identical count vectors: statistic 0
  const ChiSquareResult same = chi_square_two_sample({100, 200, 300},
                                                     {100, 200, 300});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);

  // clearly different distributions
  const ChiSquareResult diff = chi_square_two_sample({1000, 100}, {100, 1000});
  CHECK(diff.p_value < 1e-10);

  // null calibration
  Rng rng(3);
  int rejects = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    std::vector<double> ca(4, 0.0), cb(4, 0.0);
    for (int i = 0; i < 500; ++i) {
      ca[static_cast<std::size_t>(rng.uniform_below(4))] += 1;
      cb[static_cast<std::size_t>(rng.uniform_below(4))] += 1;
    }
    if (chi_square_two_sample(ca, cb).p_value < 0.05) ++rejects;
  }
  const double se = std::sqrt(0.05 * 0.95 * seeds);
  CHECK(rejects <= 10 + static_cast<int>(std::ceil(2 * se)));
}

TEST_CASE("two-proportion z-test") {
  CHECK(two_proportion_p(50, 100, 50, 100) == 1.0);
  CHECK(two_proportion_p(10, 1000, 100, 1000) < 1e-10);
  // null calibration
  Rng rng(4);
  int rejects = 0;
  for (int s = 0; s < 200; ++s) {
    double a = 0, b = 0;
    for (int i = 0; i < 1000; ++i) {
      a += rng.bernoulli(0.3);
      b += rng.bernoulli(0.3);
    }
    if (two_proportion_p(a, 1000, b, 1000) < 0.05) ++rejects;
  }
  CHECK(rejects <= 20);
}

TEST_CASE("empirical quantiles and bootstrap") {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(empirical_quantile(v, 0.5) == 5.0);
  CHECK(empirical_quantile(v, 0.95) == 10.0);
  CHECK(empirical_quantile(v, 0.0) == 1.0);

  Rng rng(5);
  std::vector<double> sample(500);
  for (auto& x : sample) x = rng.uniform();
  const QuantileEstimate est = bootstrap_quantile(sample, 0.9, 1000, rng);
  CHECK(est.ci_low <= est.point);
  CHECK(est.point <= est.ci_high);
  CHECK_THAT(est.point, WithinAbs(0.9, 0.06));
}

TEST_CASE("symmetry chi-square flags asymmetric pairs") {
  Rng rng(6);
  std::vector<std::pair<std::int64_t, std::int64_t>> sym, asym;
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t a = rng.uniform_below(4), b = rng.uniform_below(4);
    sym.emplace_back(a, b);
    asym.emplace_back(std::min(a, b), std::max(a, b));  // forced asymmetry
  }
  CHECK(symmetry_chi_square(sym).p_value > 0.001);
  CHECK(symmetry_chi_square(asym).p_value < 1e-10);
}
