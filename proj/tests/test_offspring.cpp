#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "cannings/offspring.hpp"
#include "cannings/stats.hpp"
#include "support.hpp"

using namespace cannings;
using Catch::Matchers::WithinAbs;

TEST_CASE("sample_offspring basic contracts") {
  Rng rng(1);
  CHECK(sample_offspring(WrightFisher{}, 1, 7, rng) ==
        std::vector<std::int64_t>{7});
  CHECK(sample_offspring(WrightFisher{}, 3, 0, rng) ==
        std::vector<std::int64_t>{0, 0, 0});
  CHECK(sample_offspring(DirichletMultinomial{2.0}, 4, 0, rng) ==
        std::vector<std::int64_t>{0, 0, 0, 0});

  // mass conservation holds on every sample, exactly
  for (int rep = 0; rep < 200; ++rep) {
    for (const OffspringLaw& law :
         {OffspringLaw{WrightFisher{}}, OffspringLaw{DirichletMultinomial{0.5}},
          OffspringLaw{DirichletMultinomial{8.0}}}) {
      const std::int64_t q_s = 1 + rng.uniform_below(12);
      const std::int64_t q_s1 = rng.uniform_below(30);
      const auto nu = sample_offspring(law, q_s, q_s1, rng);
      CHECK(std::accumulate(nu.begin(), nu.end(), std::int64_t{0}) == q_s1);
      for (auto x : nu) CHECK(x >= 0);
    }
    const Counterexample ce{0.5, 55};
    const auto nu = sample_offspring(ce, 55, 55, rng);
    CHECK(std::accumulate(nu.begin(), nu.end(), std::int64_t{0}) == 55);
  }
}

TEST_CASE("counterexample law constants and branch structure at n=55") {
  const Counterexample ce{0.5, 55};
  CHECK(ce.burst_size() == 27);  // floor(55 / (log 55)^{1/2})
  CHECK_THAT(ce.burst_prob(), WithinAbs(0.0728606, 1e-6));

  Rng rng(9);
  int bursts = 0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const auto nu = sample_offspring(ce, 55, 55, rng);
    int big = 0, zero = 0, one = 0;
    for (auto x : nu) {
      if (x == 27) ++big;
      else if (x == 0) ++zero;
      else if (x == 1) ++one;
      else FAIL("unexpected offspring value");
    }
    if (big == 1) {
      ++bursts;
      CHECK(zero == 26);
      CHECK(one == 55 - 27);
    } else {
      CHECK(one == 55);
    }
  }
  const double freq = static_cast<double>(bursts) / reps;
  const double se = std::sqrt(ce.burst_prob() * (1 - ce.burst_prob()) / reps);
  CHECK(std::abs(freq - ce.burst_prob()) < 3 * se);

  Rng bad(0);
  CHECK_THROWS_AS(sample_offspring(ce, 54, 54, bad), LawProfileMismatch);
}

TEST_CASE("exact Wright-Fisher moments against exhaustive enumeration") {
  const MomentReport m22 = exact_moments(WrightFisher{}, 2, 2);
  CHECK(m22.mean == 1.0);
  CHECK(m22.falling2 == 0.5);
  CHECK(m22.sigma2 == 0.5);
  CHECK(m22.third == 2.5);

  const oracle::WrightFisherEnumerator enum22(2, 2);
  CHECK_THAT(enum22.cross_falling_moment({2}), WithinAbs(m22.falling2, 1e-12));
  CHECK_THAT(enum22.moment(3), WithinAbs(m22.third, 1e-12));

  for (std::int64_t n : {3, 20, 50}) {
    const MomentReport m = exact_moments(WrightFisher{}, n, n);
    CHECK_THAT(m.falling2,
               WithinAbs(static_cast<double>(n - 1) / static_cast<double>(n), 1e-12));
    CHECK_THAT(m.sigma2,
               WithinAbs(1.0 - 1.0 / static_cast<double>(n), 1e-12));
  }
  const oracle::WrightFisherEnumerator enum33(3, 3);
  const MomentReport m33 = exact_moments(WrightFisher{}, 3, 3);
  CHECK_THAT(enum33.cross_falling_moment({2}), WithinAbs(m33.falling2, 1e-12));
  CHECK_THAT(enum33.cross_falling_moment({2, 2}), WithinAbs(m33.cross22, 1e-12));
  CHECK_THAT(enum33.moment(3), WithinAbs(m33.third, 1e-12));
}

TEST_CASE("counterexample exact moments match the two-branch formulas and MC") {
  const Counterexample ce{0.5, 55};
  const double n = 55, r = 27, p = ce.burst_prob();
  const MomentReport m = exact_moments(ce, 55, 55);
  CHECK_THAT(m.mean, WithinAbs(1.0, 1e-12));
  CHECK_THAT(m.falling2, WithinAbs(p * r * (r - 1) / n, 1e-12));
  CHECK_THAT(m.third, WithinAbs(p * r * r * r / n + (1.0 - p * r / n), 1e-12));
  CHECK(m.cross22 == 0.0);

  Rng rng(11);
  const MomentReport est = estimate_moments(ce, 55, 55, 200000, rng);
  CHECK(std::abs(est.falling2 - m.falling2) < 3 * est.se_falling2);
  CHECK(std::abs(est.third - m.third) < 3 * est.se_third);
  CHECK(std::abs(est.mean - m.mean) < 3 * std::max(est.se_mean, 1e-9));
}

TEST_CASE("estimate_moments recovers analytic values") {
  Rng rng(5);
  const MomentReport est = estimate_moments(WrightFisher{}, 50, 50, 100000, rng);
  CHECK(std::abs(est.sigma2 - 0.98) < 3 * est.se_sigma2);

  // Dirichlet-multinomial with huge theta approaches Wright-Fisher
  const MomentReport wf = exact_moments(WrightFisher{}, 20, 20);
  const MomentReport dm = estimate_moments(DirichletMultinomial{1e4}, 20, 20,
                                           100000, rng);
  CHECK(std::abs(dm.sigma2 - wf.sigma2) < 3 * dm.se_sigma2 + 1e-3);
  CHECK(std::abs(dm.falling2 - wf.falling2) < 3 * dm.se_falling2 + 1e-3);

  CHECK_THROWS_AS(estimate_moments(WrightFisher{}, 5, 5, 10, rng),
                  TooFewSamples);
}

TEST_CASE("dirichlet-multinomial exact moments match Monte Carlo") {
  Rng rng(23);
  const DirichletMultinomial dm{1.5};
  const MomentReport exact = exact_moments(dm, 8, 10);
  const MomentReport est = estimate_moments(dm, 8, 10, 200000, rng);
  CHECK_THAT(exact.mean, WithinAbs(10.0 / 8.0, 1e-12));
  CHECK(std::abs(est.falling2 - exact.falling2) < 3 * est.se_falling2);
  CHECK(std::abs(est.third - exact.third) < 3 * est.se_third);
  CHECK(std::abs(est.cross22 - exact.cross22) < 3 * est.se_cross22);
  CHECK(std::abs(est.sigma2 - exact.sigma2) < 3 * est.se_sigma2);
}

TEST_CASE("coal_event_prob closed forms") {
  // two uniform children share a parent with probability exactly 1/N
  CHECK(coal_event_prob(WrightFisher{}, 4, 4, {2}) == 0.25);
  CHECK(coal_event_prob(WrightFisher{}, 50, 50, {2}) == 1.0 / 50.0);
  // one child certainly has a parent
  for (const OffspringLaw& law :
       {OffspringLaw{WrightFisher{}}, OffspringLaw{DirichletMultinomial{2.0}}}) {
    CHECK_THAT(coal_event_prob(law, 6, 9, {1}), WithinAbs(1.0, 1e-12));
  }
  CHECK_THAT(coal_event_prob(Counterexample{0.5, 55}, 55, 55, {1}),
             WithinAbs(1.0, 1e-12));

  // [2,1] at N=3 against the 27-outcome enumeration
  const oracle::WrightFisherEnumerator e(3, 3);
  CHECK_THAT(coal_event_prob(WrightFisher{}, 3, 3, {2, 1}),
             WithinAbs(e.coal_event_prob({2, 1}), 1e-12));
  CHECK_THAT(coal_event_prob(WrightFisher{}, 3, 3, {3}),
             WithinAbs(e.coal_event_prob({3}), 1e-12));
  CHECK_THAT(coal_event_prob(WrightFisher{}, 3, 3, {2}),
             WithinAbs(e.coal_event_prob({2}), 1e-12));

  CHECK_THROWS_AS(coal_event_prob(WrightFisher{}, 3, 3, {2, 2}),
                  InfeasibleEvent);
  CHECK_THROWS_AS(coal_event_prob(WrightFisher{}, 2, 9, {1, 1, 1}),
                  InfeasibleEvent);
}

TEST_CASE("counterexample cross moments agree with Monte Carlo event counts") {
  const Counterexample ce{0.7, 40};
  Rng rng(31);
  const int reps = 300000;
  double hit_pair = 0.0;
  for (int i = 0; i < reps; ++i) {
    const auto nu = sample_offspring(ce, 40, 40, rng);
    // place two tagged children uniformly: P(same parent | nu)
    double pairs = 0.0;
    for (auto x : nu) pairs += static_cast<double>(x) * (x - 1.0);
    hit_pair += pairs / (40.0 * 39.0);
  }
  const double est = hit_pair / reps;
  const double exact = coal_event_prob(ce, 40, 40, {2});
  CHECK(std::abs(est - exact) < 3 * std::sqrt(est * (1 - est) / reps) + 1e-4);
}

TEST_CASE("exchangeability: (nu1, nu2) symmetric in law") {
  Rng rng(77);
  for (const OffspringLaw& law :
       {OffspringLaw{WrightFisher{}}, OffspringLaw{DirichletMultinomial{0.7}},
        OffspringLaw{Counterexample{0.5, 55}}}) {
    const std::int64_t q = std::holds_alternative<Counterexample>(law) ? 55 : 6;
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    pairs.reserve(100000);
    std::vector<std::int64_t> nu;
    for (int i = 0; i < 100000; ++i) {
      sample_offspring_into(law, q, q, rng, nu);
      pairs.emplace_back(nu[0], nu[1]);
    }
    const ChiSquareResult res = symmetry_chi_square(pairs);
    CHECK(res.p_value > 0.001);
  }
}

TEST_CASE("second-falling-moment product bound holds exactly for analytic laws") {
  // E[(nu1)_2 (nu2)_2] <= (q(s+1)/(q(s)-1)) E[nu1^3]
  for (const OffspringLaw& law :
       {OffspringLaw{WrightFisher{}}, OffspringLaw{DirichletMultinomial{0.3}},
        OffspringLaw{DirichletMultinomial{5.0}}}) {
    for (std::int64_t q_s : {2, 5, 16, 64}) {
      for (std::int64_t q_s1 : {q_s, q_s + 3, 2 * q_s}) {
        const MomentReport m = exact_moments(law, q_s, q_s1);
        CHECK(m.cross22 <= static_cast<double>(q_s1) /
                               static_cast<double>(q_s - 1) * m.third + 1e-12);
      }
    }
  }
  const Counterexample ce{0.5, 128};
  const MomentReport m = exact_moments(ce, 128, 128);
  CHECK(m.cross22 <= 128.0 / 127.0 * m.third);
}

TEST_CASE("tail second moment matches Monte Carlo and separates the laws") {
  Rng rng(41);
  for (const OffspringLaw& law :
       {OffspringLaw{WrightFisher{}}, OffspringLaw{DirichletMultinomial{0.2}},
        OffspringLaw{Counterexample{0.5, 200}}}) {
    const std::int64_t q = std::holds_alternative<Counterexample>(law) ? 200 : 24;
    const std::int64_t cutoff = std::holds_alternative<Counterexample>(law) ? 10 : 2;
    const double exact = l2_tail_moment(law, q, q, cutoff);
    const int reps = 200000;
    std::vector<std::int64_t> nu;
    std::vector<double> draws(reps);
    for (int i = 0; i < reps; ++i) {
      sample_offspring_into(law, q, q, rng, nu);
      draws[static_cast<std::size_t>(i)] =
          nu[0] > cutoff ? static_cast<double>(nu[0]) * static_cast<double>(nu[0]) : 0.0;
    }
    double m = 0.0, ss = 0.0;
    for (double x : draws) m += x;
    m /= reps;
    for (double x : draws) ss += (x - m) * (x - m);
    const double se = std::sqrt(ss / (reps - 1.0) / reps);
    INFO(law_name(law) << " exact " << exact << " mc " << m << " se " << se);
    CHECK(std::abs(m - exact) < 3 * se + 1e-12);
  }

  // burst law: the tail mass at any fixed cutoff stays near 1 (uniform
  // L2-integrability fails); Wright-Fisher tails vanish
  for (std::int64_t n : {1 << 10, 1 << 12, 1 << 14}) {
    CHECK(l2_tail_moment(Counterexample{0.5, n}, n, n, 10) > 0.8);
    CHECK(l2_tail_moment(WrightFisher{}, n, n, 10) < 1e-5);
  }
}

TEST_CASE("extinct next generation yields zero moments") {
  const MomentReport m = exact_moments(WrightFisher{}, 5, 0);
  CHECK(m.mean == 0.0);
  CHECK(m.falling2 == 0.0);
  CHECK(m.sigma2 == 0.0);
  CHECK(m.third == 0.0);
  CHECK(m.cross22 == 0.0);
}

TEST_CASE("h-predicate trends separate the laws") {
  // burst law: E[nu^3] ~ n/(log n)^alpha, so E[nu^3]/n -> 0 (sharper
  // third-moment condition holds) while E[nu^3] (log n)^{2+eps}/n -> infinity
  // (the stronger tail condition fails)
  const double eps = 0.5;
  double prev_ratio = 0.0, prev_h2pp = 1e100;
  for (std::int64_t n : {1 << 10, 1 << 12, 1 << 14}) {
    const Counterexample ce{0.5, n};
    const MomentReport m = exact_moments(ce, n, n);
    const double h2i = m.third * std::pow(std::log(static_cast<double>(n)), 2 + eps) /
                       static_cast<double>(n);
    const double h2pp = m.third / static_cast<double>(n);
    CHECK(h2i > prev_ratio);
    CHECK(h2pp < prev_h2pp);
    prev_ratio = h2i;
    prev_h2pp = h2pp;
  }
  // Wright-Fisher: third moment bounded, both ratios vanish
  double prev = 1e100;
  for (std::int64_t n : {1 << 10, 1 << 12, 1 << 14}) {
    const MomentReport m = exact_moments(WrightFisher{}, n, n);
    const double h2i = m.third * std::pow(std::log(static_cast<double>(n)), 2 + eps) /
                       static_cast<double>(n);
    CHECK(h2i < prev);
    prev = h2i;
  }
}
