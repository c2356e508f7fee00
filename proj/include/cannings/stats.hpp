#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "cannings/errors.hpp"
#include "cannings/rng.hpp"

namespace cannings {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

// Empirical quantile: smallest order statistic with at least a q-fraction of
// the sample at or below it.
inline double empirical_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto n = static_cast<std::int64_t>(v.size());
  std::int64_t idx = static_cast<std::int64_t>(std::ceil(q * n)) - 1;
  idx = std::clamp<std::int64_t>(idx, 0, n - 1);
  return v[static_cast<std::size_t>(idx)];
}

// Survival function of the Kolmogorov distribution.
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value
// (Stephens' finite-sample correction). Ties are handled by advancing both
// empirical CDFs past equal values before comparing.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 10 || b.size() < 10)
    throw TooFewSamples("ks_two_sample needs at least 10 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sqne = std::sqrt(ne);
  const double lambda = (sqne + 0.12 + 0.11 / sqne) * d;
  return {d, kolmogorov_q(lambda)};
}

// One-sample KS against an analytic CDF.
inline KsResult ks_one_sample(std::vector<double> samples,
                              const std::function<double(double)>& cdf) {
  if (samples.size() < 10)
    throw TooFewSamples("ks_one_sample needs at least 10 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  const double sqn = std::sqrt(n);
  const double lambda = (sqn + 0.12 + 0.11 / sqn) * d;
  return {d, kolmogorov_q(lambda)};
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

inline double chi_square_survival(double x, int dof) {
  if (dof <= 0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

// Two-sample homogeneity chi-square on aligned count vectors. Bins whose
// pooled expected count falls below 5 are merged into the previous bin.
inline ChiSquareResult chi_square_two_sample(std::vector<double> ca,
                                             std::vector<double> cb) {
  const double na = std::accumulate(ca.begin(), ca.end(), 0.0);
  const double nb = std::accumulate(cb.begin(), cb.end(), 0.0);
  std::vector<std::pair<double, double>> bins;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    const double pooled = ca[i] + cb[i];
    const bool tiny_a = pooled * na / (na + nb) < 5.0;
    const bool tiny_b = pooled * nb / (na + nb) < 5.0;
    if (!bins.empty() && (tiny_a || tiny_b)) {
      bins.back().first += ca[i];
      bins.back().second += cb[i];
    } else {
      bins.emplace_back(ca[i], cb[i]);
    }
  }
  if (bins.size() < 2) return {0.0, 0, 1.0};
  double chi2 = 0.0;
  for (const auto& [oa, ob] : bins) {
    const double total = oa + ob;
    if (total == 0.0) continue;
    const double ea = total * na / (na + nb);
    const double eb = total * nb / (na + nb);
    chi2 += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  const int dof = static_cast<int>(bins.size()) - 1;
  return {chi2, dof, chi_square_survival(chi2, dof)};
}

// Symmetry test for a paired sample: chi-square over off-diagonal cells,
// (N_ab - N_ba)^2 / (N_ab + N_ba). Detects asymmetry in the joint law.
inline ChiSquareResult symmetry_chi_square(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
  std::map<std::pair<std::int64_t, std::int64_t>, double> counts;
  for (const auto& p : pairs) counts[p] += 1.0;
  double chi2 = 0.0;
  int dof = 0;
  for (const auto& [cell, n_ab] : counts) {
    if (cell.first >= cell.second) continue;
    const auto mirrored = counts.find({cell.second, cell.first});
    const double n_ba = mirrored == counts.end() ? 0.0 : mirrored->second;
    const double total = n_ab + n_ba;
    if (total < 5.0) continue;
    chi2 += (n_ab - n_ba) * (n_ab - n_ba) / total;
    ++dof;
  }
  if (dof == 0) return {0.0, 0, 1.0};
  return {chi2, dof, chi_square_survival(chi2, dof)};
}

inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Pooled two-proportion z-test, two-sided p-value.
inline double two_proportion_p(double hits_a, double n_a, double hits_b,
                               double n_b) {
  const double pooled = (hits_a + hits_b) / (n_a + n_b);
  const double se =
      std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b));
  if (se == 0.0) return 1.0;
  const double z = (hits_a / n_a - hits_b / n_b) / se;
  return normal_two_sided_p(z);
}

struct QuantileEstimate {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Percentile-bootstrap confidence interval for an empirical quantile.
inline QuantileEstimate bootstrap_quantile(const std::vector<double>& samples,
                                           double q, int resamples, Rng& rng,
                                           double ci_level = 0.95) {
  QuantileEstimate est;
  est.point = empirical_quantile(samples, q);
  std::vector<double> boot(static_cast<std::size_t>(resamples));
  std::vector<double> draw(samples.size());
  for (int r = 0; r < resamples; ++r) {
    for (auto& x : draw)
      x = samples[static_cast<std::size_t>(
          rng.uniform_below(static_cast<std::int64_t>(samples.size())))];
    boot[static_cast<std::size_t>(r)] = empirical_quantile(draw, q);
  }
  const double alpha = 1.0 - ci_level;
  est.ci_low = empirical_quantile(boot, alpha / 2.0);
  est.ci_high = empirical_quantile(boot, 1.0 - alpha / 2.0);
  est.ci_low = std::min(est.ci_low, est.point);
  est.ci_high = std::max(est.ci_high, est.point);
  return est;
}

}  // namespace cannings
