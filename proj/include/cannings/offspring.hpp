#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cannings/errors.hpp"
#include "cannings/rng.hpp"

namespace cannings {

// Exchangeable offspring laws. A law describes one generation step:
// q_s parents produce a vector nu of length q_s with sum q_s1.

struct WrightFisher {};

struct DirichletMultinomial {
  double theta = 1.0;
};

// Rare-burst law on a constant population of size n: with probability
// p_n = (log n)^(2*alpha)/n one uniformly chosen parent gets
// r_n = floor(n/(log n)^alpha) children, r_n - 1 uniformly chosen others get
// none, and the rest get one each; otherwise every parent has exactly one
// child. Only valid with q_s = q_s1 = n.
struct Counterexample {
  double alpha = 0.5;
  std::int64_t n = 0;

  std::int64_t burst_size() const {
    return static_cast<std::int64_t>(
        std::floor(n / std::pow(std::log(static_cast<double>(n)), alpha)));
  }
  double burst_prob() const {
    return std::pow(std::log(static_cast<double>(n)), 2.0 * alpha) / n;
  }
};

using OffspringLaw = std::variant<WrightFisher, DirichletMultinomial, Counterexample>;

inline void validate_law(const OffspringLaw& law) {
  if (const auto* dm = std::get_if<DirichletMultinomial>(&law)) {
    if (!(dm->theta > 0.0)) throw ValidationError("law.theta", "must be > 0");
  } else if (const auto* ce = std::get_if<Counterexample>(&law)) {
    if (!(ce->alpha > 0.0)) throw ValidationError("law.alpha", "must be > 0");
    if (ce->n < 3) throw ValidationError("law.n", "must be >= 3");
    if (ce->burst_size() < 1)
      throw ValidationError("law.alpha", "burst size floor(n/(log n)^alpha) < 1");
    if (ce->burst_prob() > 1.0)
      throw ValidationError("law.alpha", "burst probability (log n)^(2 alpha)/n > 1");
  }
}

inline std::string law_name(const OffspringLaw& law) {
  if (std::holds_alternative<WrightFisher>(law)) return "wright_fisher";
  if (std::holds_alternative<DirichletMultinomial>(law)) return "dirichlet_multinomial";
  return "counterexample";
}

namespace detail {

inline void check_law_profile(const OffspringLaw& law, std::int64_t q_s,
                              std::int64_t q_s1) {
  if (q_s < 1) throw InfeasibleCount("q_s must be >= 1");
  if (q_s1 < 0) throw InfeasibleCount("q_s1 must be >= 0");
  if (const auto* ce = std::get_if<Counterexample>(&law)) {
    if (q_s != ce->n || (q_s1 != ce->n && q_s1 != 0))
      throw LawProfileMismatch(
          "counterexample law requires the constant profile q == n");
  }
}

// Multinomial(q_s1; uniform over q_s cells) by sequential binomial splitting.
inline void sample_wright_fisher(std::int64_t q_s, std::int64_t q_s1, Rng& rng,
                                 std::vector<std::int64_t>& out) {
  std::int64_t remaining = q_s1;
  for (std::int64_t i = 0; i < q_s - 1; ++i) {
    const std::int64_t v =
        rng.binomial(remaining, 1.0 / static_cast<double>(q_s - i));
    out[static_cast<std::size_t>(i)] = v;
    remaining -= v;
  }
  out[static_cast<std::size_t>(q_s - 1)] = remaining;
}

// Dirichlet-multinomial by sequential beta-binomial splitting.
inline void sample_dirichlet_multinomial(double theta, std::int64_t q_s,
                                         std::int64_t q_s1, Rng& rng,
                                         std::vector<std::int64_t>& out) {
  std::int64_t remaining = q_s1;
  for (std::int64_t i = 0; i < q_s - 1 && remaining > 0; ++i) {
    const double p = rng.beta(theta, theta * static_cast<double>(q_s - 1 - i));
    const std::int64_t v = rng.binomial(remaining, p);
    out[static_cast<std::size_t>(i)] = v;
    remaining -= v;
  }
  out[static_cast<std::size_t>(q_s - 1)] = remaining;
}

inline void sample_counterexample(const Counterexample& ce, Rng& rng,
                                  std::vector<std::int64_t>& out) {
  std::fill(out.begin(), out.end(), 1);
  if (!rng.bernoulli(ce.burst_prob())) return;
  const std::int64_t r = ce.burst_size();
  const auto picks = rng.sample_without_replacement(ce.n, r);
  out[static_cast<std::size_t>(picks[0])] = r;
  for (std::size_t i = 1; i < picks.size(); ++i)
    out[static_cast<std::size_t>(picks[i])] = 0;
}

inline double fall(double x, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= x - i;
  return p;
}

inline double rise(double x, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= x + i;
  return p;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) /
                   static_cast<double>(v.size()));
}

}  // namespace detail

inline void sample_offspring_into(const OffspringLaw& law, std::int64_t q_s,
                                  std::int64_t q_s1, Rng& rng,
                                  std::vector<std::int64_t>& out) {
  detail::check_law_profile(law, q_s, q_s1);
  out.assign(static_cast<std::size_t>(q_s), 0);
  if (q_s1 == 0) return;
  if (std::holds_alternative<WrightFisher>(law)) {
    detail::sample_wright_fisher(q_s, q_s1, rng, out);
  } else if (const auto* dm = std::get_if<DirichletMultinomial>(&law)) {
    detail::sample_dirichlet_multinomial(dm->theta, q_s, q_s1, rng, out);
  } else {
    detail::sample_counterexample(std::get<Counterexample>(law), rng, out);
  }
}

inline std::vector<std::int64_t> sample_offspring(const OffspringLaw& law,
                                                  std::int64_t q_s,
                                                  std::int64_t q_s1, Rng& rng) {
  std::vector<std::int64_t> out;
  sample_offspring_into(law, q_s, q_s1, rng, out);
  return out;
}

struct MomentReport {
  double mean = 0.0;      // E[nu_1]
  double falling2 = 0.0;  // E[(nu_1)_2]
  double sigma2 = 0.0;    // Var(nu_1)
  double third = 0.0;     // E[nu_1^3]
  double cross22 = 0.0;   // E[(nu_1)_2 (nu_2)_2]
  double se_mean = 0.0;
  double se_falling2 = 0.0;
  double se_sigma2 = 0.0;
  double se_third = 0.0;
  double se_cross22 = 0.0;
};

// E[prod_i (nu_i)_{N_i}] for distinct indices i = 1..B, in closed form.
inline double cross_falling_moment(const OffspringLaw& law, std::int64_t q_s,
                                   std::int64_t q_s1,
                                   const std::vector<int>& mult) {
  detail::check_law_profile(law, q_s, q_s1);
  int total = 0;
  for (int m : mult) {
    if (m < 1) throw InfeasibleEvent("multiplicities must be >= 1");
    total += m;
  }
  const int blocks = static_cast<int>(mult.size());
  const auto qs = static_cast<double>(q_s);
  const auto qs1 = static_cast<double>(q_s1);
  if (std::holds_alternative<WrightFisher>(law)) {
    return detail::fall(qs1, total) / std::pow(qs, total);
  }
  if (const auto* dm = std::get_if<DirichletMultinomial>(&law)) {
    double num = detail::fall(qs1, total);
    for (int m : mult) num *= detail::rise(dm->theta, m);
    return num / detail::rise(qs * dm->theta, total);
  }
  const auto& ce = std::get<Counterexample>(law);
  const double n = static_cast<double>(ce.n);
  const double r = static_cast<double>(ce.burst_size());
  const double p = ce.burst_prob();
  int big = 0;
  int big_mult = 0;
  for (int m : mult)
    if (m >= 2) {
      ++big;
      big_mult = m;
    }
  if (big >= 2) return 0.0;  // only one parent can exceed one child
  if (big == 1) {
    return (p / n) * detail::fall(r, big_mult) *
           detail::fall(n - r, blocks - 1) / detail::fall(n - 1, blocks - 1);
  }
  // all multiplicities equal to one
  const int b = blocks;
  const double burst_branch =
      b * (r / n) * detail::fall(n - r, b - 1) / detail::fall(n - 1, b - 1) +
      ((n - b) / n) * detail::fall(n - r, b) / detail::fall(n - 1, b);
  return (1.0 - p) + p * burst_branch;
}

inline MomentReport exact_moments(const OffspringLaw& law, std::int64_t q_s,
                                  std::int64_t q_s1) {
  detail::check_law_profile(law, q_s, q_s1);
  MomentReport r;
  if (q_s1 == 0) return r;
  r.mean = cross_falling_moment(law, q_s, q_s1, {1});
  r.falling2 = cross_falling_moment(law, q_s, q_s1, {2});
  const double falling3 = cross_falling_moment(law, q_s, q_s1, {3});
  r.sigma2 = r.falling2 + r.mean - r.mean * r.mean;
  r.third = falling3 + 3.0 * r.falling2 + r.mean;
  r.cross22 = q_s >= 2 ? cross_falling_moment(law, q_s, q_s1, {2, 2}) : 0.0;
  return r;
}

inline MomentReport estimate_moments(const OffspringLaw& law, std::int64_t q_s,
                                     std::int64_t q_s1, std::int64_t reps,
                                     Rng& rng) {
  if (reps < 100) throw TooFewSamples("estimate_moments needs reps >= 100");
  std::vector<std::int64_t> nu;
  std::vector<double> v1(static_cast<std::size_t>(reps));
  std::vector<double> f2(static_cast<std::size_t>(reps));
  std::vector<double> p3(static_cast<std::size_t>(reps));
  std::vector<double> c22(static_cast<std::size_t>(reps));
  for (std::int64_t i = 0; i < reps; ++i) {
    sample_offspring_into(law, q_s, q_s1, rng, nu);
    const double a = static_cast<double>(nu[0]);
    const double b = q_s >= 2 ? static_cast<double>(nu[1]) : 0.0;
    const auto idx = static_cast<std::size_t>(i);
    v1[idx] = a;
    f2[idx] = a * (a - 1.0);
    p3[idx] = a * a * a;
    c22[idx] = a * (a - 1.0) * b * (b - 1.0);
  }
  MomentReport rep;
  rep.mean = detail::mean_of(v1);
  rep.se_mean = detail::se_of(v1);
  rep.falling2 = detail::mean_of(f2);
  rep.se_falling2 = detail::se_of(f2);
  rep.third = detail::mean_of(p3);
  rep.se_third = detail::se_of(p3);
  rep.cross22 = detail::mean_of(c22);
  rep.se_cross22 = detail::se_of(c22);
  // sample variance of nu_1 plus its large-sample standard error
  double m2 = 0.0, m4 = 0.0;
  for (double x : v1) {
    const double d = x - rep.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(reps);
  m4 /= static_cast<double>(reps);
  rep.sigma2 = m2 * static_cast<double>(reps) / static_cast<double>(reps - 1);
  rep.se_sigma2 = std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(reps));
  return rep;
}

// Tail second moment E[nu_1^2 1{nu_1 > cutoff}], the uniform-L2-integrability
// probe. Exact summation over the marginal pmf.
inline double l2_tail_moment(const OffspringLaw& law, std::int64_t q_s,
                             std::int64_t q_s1, std::int64_t cutoff) {
  detail::check_law_profile(law, q_s, q_s1);
  if (q_s1 == 0) return 0.0;
  if (const auto* ce = std::get_if<Counterexample>(&law)) {
    // values are 0, 1, or the burst size
    const double r = static_cast<double>(ce->burst_size());
    double tail = 0.0;
    if (r > static_cast<double>(cutoff))
      tail += r * r * ce->burst_prob() / static_cast<double>(ce->n);
    if (cutoff < 1) {
      const double p_burst = ce->burst_prob();
      const double p_one = (1.0 - p_burst) +
                           p_burst * (static_cast<double>(ce->n) - r) /
                               static_cast<double>(ce->n);
      tail += p_one;
    }
    return tail;
  }
  // log-pmf recursions keep the sums stable for large sizes
  double tail = 0.0;
  if (std::holds_alternative<WrightFisher>(law)) {
    // Binomial(q_s1, 1/q_s): pmf(j+1)/pmf(j) = (m-j)/(j+1) * p/(1-p)
    const double m = static_cast<double>(q_s1);
    const double p = 1.0 / static_cast<double>(q_s);
    double log_pmf = m * std::log1p(-p);
    for (std::int64_t j = 0; j < q_s1; ++j) {
      if (j > cutoff) tail += static_cast<double>(j) * static_cast<double>(j) *
                              std::exp(log_pmf);
      log_pmf += std::log((m - static_cast<double>(j)) /
                          (static_cast<double>(j) + 1.0)) +
                 std::log(p) - std::log1p(-p);
      if (j > cutoff && log_pmf < -60.0) break;
    }
    if (q_s1 > cutoff)
      tail += m * m * std::exp(m * std::log(p));  // j = q_s1 term
    return tail;
  }
  const auto& dm = std::get<DirichletMultinomial>(law);
  // BetaBinomial(q_s1; theta, theta (q_s - 1)):
  // pmf(j+1)/pmf(j) = (m-j)(theta+j) / ((j+1)(theta (q_s-1) + m - j - 1))
  const double m = static_cast<double>(q_s1);
  const double a = dm.theta;
  const double b = dm.theta * static_cast<double>(q_s - 1);
  double log_pmf = std::lgamma(b + m) + std::lgamma(a + b) -
                   std::lgamma(b) - std::lgamma(a + b + m);
  for (std::int64_t j = 0; j <= q_s1; ++j) {
    if (j > cutoff) tail += static_cast<double>(j) * static_cast<double>(j) *
                            std::exp(log_pmf);
    if (j == q_s1) break;
    const double jd = static_cast<double>(j);
    log_pmf += std::log((m - jd) * (a + jd)) -
               std::log((jd + 1.0) * (b + m - jd - 1.0));
  }
  return tail;
}

// Probability that uniformly chosen children of the next generation realize
// the given coalescence multiplicities: the first N_1 children share one
// parent, the next N_2 share another, ..., all those parents distinct.
inline double coal_event_prob(const OffspringLaw& law, std::int64_t q_s,
                              std::int64_t q_s1,
                              const std::vector<int>& mult) {
  detail::check_law_profile(law, q_s, q_s1);
  std::int64_t total = 0;
  for (int m : mult) total += m;
  if (total > q_s1)
    throw InfeasibleEvent("sum of multiplicities exceeds q(s+1)");
  if (static_cast<std::int64_t>(mult.size()) > q_s)
    throw InfeasibleEvent("more blocks than parents");
  const int blocks = static_cast<int>(mult.size());
  if (std::holds_alternative<WrightFisher>(law)) {
    // direct cancellation of (q_s1)_total keeps small cases exact
    return detail::fall(static_cast<double>(q_s), blocks) /
           std::pow(static_cast<double>(q_s), static_cast<int>(total));
  }
  return detail::fall(static_cast<double>(q_s), blocks) *
         cross_falling_moment(law, q_s, q_s1, mult) /
         detail::fall(static_cast<double>(q_s1), static_cast<int>(total));
}

}  // namespace cannings
