#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cannings/coalescent.hpp"
#include "cannings/limit.hpp"
#include "cannings/offspring.hpp"
#include "cannings/parallel.hpp"
#include "cannings/profile.hpp"
#include "cannings/stats.hpp"
#include "cannings/tree.hpp"

namespace cannings {

// All acceptance tolerances in one frozen record (configs/thresholds.json
// mirrors it for CLI runs).
struct Thresholds {
  double p_min = 0.01;        // Bonferroni-adjusted p-value floor
  double ks_max = 0.05;       // marginal KS statistic ceiling
  double se_mult = 3.0;       // moment tolerances in standard errors
  double chi2_p_min = 0.001;  // per-level chi-square p-value floor
  double cdfi_quantile = 0.95;
  double cdfi_bound = 25.0;   // lineage-count quantile bound
};

inline const Thresholds& default_thresholds() {
  static const Thresholds t;
  return t;
}

struct MarginalStat {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  bool is_ks = false;          // statistic is a KS sup-gap
  bool gate_statistic = false; // compare the statistic against ks_max
  bool gate_p = true;          // include the adjusted p in the p_min gate
};

struct ComparisonReport {
  std::string test;
  std::int64_t reps_a = 0;
  std::int64_t reps_b = 0;
  std::vector<MarginalStat> marginals;
  bool pass = false;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;

  // largest statistic among the marginals gated on the KS ceiling
  double max_ks() const {
    double m = 0.0;
    for (const auto& s : marginals)
      if (s.gate_statistic) m = std::max(m, s.statistic);
    return m;
  }
  double min_adjusted_p() const {
    double m = 1.0;
    for (const auto& s : marginals) m = std::min(m, s.p_adjusted);
    return m;
  }
};

namespace detail {

inline void bonferroni(std::vector<MarginalStat>& stats) {
  const double m = static_cast<double>(stats.size());
  for (auto& s : stats) s.p_adjusted = std::min(1.0, s.p_value * m);
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

// Per-replicate k-point summaries: ascending leaf heights and descending
// positive merge heights.
struct KPointSummary {
  std::vector<double> leaves;
  std::vector<double> merges;
};

inline KPointSummary summarize(const KPointTree& t) {
  KPointSummary s;
  s.leaves = t.leaf_heights;
  std::sort(s.leaves.begin(), s.leaves.end());
  for (const auto& m : t.merges) s.merges.push_back(m.height);
  std::sort(s.merges.begin(), s.merges.end(), std::greater<>());
  return s;
}

inline ProfilePair scale_sigma(const ProfilePair& pair, double factor) {
  std::vector<Knot> knots = pair.sigma().knots();
  for (Knot& k : knots) k.v *= factor;
  return ProfilePair(pair.ell(), validate_profile(std::move(knots)),
                     pair.ratio_at_zero() / (factor * factor));
}

}  // namespace detail

enum class FddOp : std::uint64_t {
  DiscreteSide = 1,
  LimitSide = 2,
  TransitionTrees = 3,
  TransitionTraces = 4,
  Quantiles = 5,
  Bootstrap = 6,
  AppendixDiscrete = 7,
  AppendixLimit = 8,
  Moments = 9,
  NullA = 10,
  NullB = 11,
};

// Marginal comparison of two k-point summary batches. Per sorted leaf
// height: a KS test gated on both the statistic and the adjusted p. Per
// merge slot, the height law is mixed (atom at zero plus a density), so the
// slot contributes three marginals:
//   merge_j        full-sample KS sup-gap including the atom; statistic
//                  gate only (the tie-heavy p-value would be conservative)
//   merge_j_atom   two-proportion z on the atom frequency; p gate
//   merge_j_pos    KS on the positive parts; p gate (its effective sample
//                  is the conditional one, which the p-value accounts for)
inline ComparisonReport compare_summaries(
    const std::vector<detail::KPointSummary>& a,
    const std::vector<detail::KPointSummary>& b, std::int64_t k,
    const Thresholds& thr) {
  ComparisonReport rep;
  rep.reps_a = static_cast<std::int64_t>(a.size());
  rep.reps_b = static_cast<std::int64_t>(b.size());
  for (std::int64_t i = 0; i < k; ++i) {
    std::vector<double> xa, xb;
    xa.reserve(a.size());
    xb.reserve(b.size());
    for (const auto& s : a) xa.push_back(s.leaves[static_cast<std::size_t>(i)]);
    for (const auto& s : b) xb.push_back(s.leaves[static_cast<std::size_t>(i)]);
    const KsResult ks = ks_two_sample(std::move(xa), std::move(xb));
    rep.marginals.push_back({"leaf_" + std::to_string(i + 1), ks.statistic,
                             ks.p_value, 1.0, true, true, true});
  }
  for (std::int64_t slot = 0; slot + 1 < k; ++slot) {
    std::vector<double> xa, xb;        // positive parts
    std::vector<double> mixed_a, mixed_b;  // zero-padded full samples
    for (const auto& s : a) {
      const bool has = static_cast<std::int64_t>(s.merges.size()) > slot;
      if (has) xa.push_back(s.merges[static_cast<std::size_t>(slot)]);
      mixed_a.push_back(has ? s.merges[static_cast<std::size_t>(slot)] : 0.0);
    }
    for (const auto& s : b) {
      const bool has = static_cast<std::int64_t>(s.merges.size()) > slot;
      if (has) xb.push_back(s.merges[static_cast<std::size_t>(slot)]);
      mixed_b.push_back(has ? s.merges[static_cast<std::size_t>(slot)] : 0.0);
    }
    const KsResult mixed = ks_two_sample(std::move(mixed_a), std::move(mixed_b));
    rep.marginals.push_back({"merge_" + std::to_string(slot + 1),
                             mixed.statistic, mixed.p_value, 1.0, true, true,
                             false});
    const double freq_p = two_proportion_p(
        static_cast<double>(xa.size()), static_cast<double>(a.size()),
        static_cast<double>(xb.size()), static_cast<double>(b.size()));
    rep.marginals.push_back(
        {"merge_" + std::to_string(slot + 1) + "_atom",
         std::abs(static_cast<double>(xa.size()) / static_cast<double>(a.size()) -
                  static_cast<double>(xb.size()) / static_cast<double>(b.size())),
         freq_p, 1.0, false, false, true});
    if (xa.size() >= 10 && xb.size() >= 10) {
      const KsResult ks = ks_two_sample(std::move(xa), std::move(xb));
      rep.marginals.push_back({"merge_" + std::to_string(slot + 1) + "_pos",
                               ks.statistic, ks.p_value, 1.0, true, false,
                               true});
    }
  }
  detail::bonferroni(rep.marginals);
  rep.pass = true;
  for (const auto& s : rep.marginals) {
    if (s.gate_statistic && s.statistic >= thr.ks_max) rep.pass = false;
    if (s.gate_p && s.p_adjusted <= thr.p_min) rep.pass = false;
  }
  return rep;
}

// Finite-dimensional comparison: k-point subtrees of built Cannings trees
// against the limiting sampler. Marginals: each sorted leaf height (KS),
// each sorted positive merge height (atom at 0 by frequency, positive part
// by KS), Bonferroni-adjusted. `limit_sigma_scale` != 1 plants a rate
// distortion on the limit side (sensitivity control).
inline ComparisonReport compare_fdd(const ProfilePair& pair,
                                    const OffspringLaw& law, std::int64_t n,
                                    std::int64_t k, std::int64_t reps,
                                    std::uint64_t seed,
                                    const Thresholds& thr = default_thresholds(),
                                    int workers = default_workers(),
                                    double limit_sigma_scale = 1.0) {
  detail::Stopwatch watch;
  ComparisonReport rep;
  rep.test = "compare_fdd";
  rep.reps_a = rep.reps_b = reps;
  rep.seed = seed;

  const DiscreteProfile profile = discretize(pair.ell(), n);
  std::vector<detail::KPointSummary> discrete(static_cast<std::size_t>(reps));
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng rng(StreamKey{seed, static_cast<std::uint64_t>(FddOp::DiscreteSide),
                      static_cast<std::uint64_t>(r)});
    const CanningsTree tree = build_tree(profile, law, rng);
    discrete[static_cast<std::size_t>(r)] =
        detail::summarize(sample_k_point_subtree(tree, k, n, rng));
  });

  const ProfilePair limit_pair = limit_sigma_scale == 1.0
                                     ? pair
                                     : detail::scale_sigma(pair, limit_sigma_scale);
  const LimitSampler sampler(limit_pair);
  std::vector<detail::KPointSummary> limit(static_cast<std::size_t>(reps));
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng rng(StreamKey{seed, static_cast<std::uint64_t>(FddOp::LimitSide),
                      static_cast<std::uint64_t>(r)});
    limit[static_cast<std::size_t>(r)] = detail::summarize(sampler.sample(k, rng));
  });

  ComparisonReport core = compare_summaries(discrete, limit, k, thr);
  rep.marginals = std::move(core.marginals);
  rep.pass = core.pass;
  rep.runtime_seconds = watch.seconds();
  return rep;
}

// Same-sampler sanity: limit side against itself on independent streams.
inline ComparisonReport compare_fdd_null(const ProfilePair& pair, std::int64_t k,
                                         std::int64_t reps, std::uint64_t seed,
                                         const Thresholds& thr = default_thresholds(),
                                         int workers = default_workers()) {
  detail::Stopwatch watch;
  const LimitSampler sampler(pair);
  std::vector<detail::KPointSummary> a(static_cast<std::size_t>(reps));
  std::vector<detail::KPointSummary> b(static_cast<std::size_t>(reps));
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng ra(StreamKey{seed, static_cast<std::uint64_t>(FddOp::NullA),
                     static_cast<std::uint64_t>(r)});
    Rng rb(StreamKey{seed, static_cast<std::uint64_t>(FddOp::NullB),
                     static_cast<std::uint64_t>(r)});
    a[static_cast<std::size_t>(r)] = detail::summarize(sampler.sample(k, ra));
    b[static_cast<std::size_t>(r)] = detail::summarize(sampler.sample(k, rb));
  });
  ComparisonReport rep = compare_summaries(a, b, k, thr);
  rep.test = "compare_fdd_null";
  rep.seed = seed;
  rep.runtime_seconds = watch.seconds();
  return rep;
}

// Oracle equivalence of the two exact samplers: lineage counts read from
// built trees vs simulate_trace, per-level chi-square.
inline ComparisonReport check_transition_law(const OffspringLaw& law,
                                             std::int64_t q_const,
                                             std::int64_t h_star, std::int64_t k,
                                             std::int64_t reps, std::uint64_t seed,
                                             const Thresholds& thr = default_thresholds(),
                                             int workers = default_workers()) {
  detail::Stopwatch watch;
  ComparisonReport rep;
  rep.test = "check_transition_law";
  rep.reps_a = rep.reps_b = reps;
  rep.seed = seed;

  const DiscreteProfile profile = DiscreteProfile::constant(q_const, h_star);
  const auto levels = static_cast<std::size_t>(h_star) + 1;
  std::vector<std::vector<std::int64_t>> from_trees(
      static_cast<std::size_t>(reps));
  std::vector<std::vector<std::int64_t>> from_traces(
      static_cast<std::size_t>(reps));
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng rng(StreamKey{seed, static_cast<std::uint64_t>(FddOp::TransitionTrees),
                      static_cast<std::uint64_t>(r)});
    const CanningsTree tree = build_tree(profile, law, rng);
    from_trees[static_cast<std::size_t>(r)] =
        tree_lineage_counts(tree, h_star, k, rng).counts;
  });
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng rng(StreamKey{seed, static_cast<std::uint64_t>(FddOp::TransitionTraces),
                      static_cast<std::uint64_t>(r)});
    from_traces[static_cast<std::size_t>(r)] =
        simulate_trace(profile, law, h_star, k, rng).counts;
  });

  for (std::size_t level = 1; level + 1 < levels; ++level) {
    std::vector<double> ca(static_cast<std::size_t>(k), 0.0);
    std::vector<double> cb(static_cast<std::size_t>(k), 0.0);
    for (const auto& c : from_trees) ca[static_cast<std::size_t>(c[level] - 1)] += 1.0;
    for (const auto& c : from_traces) cb[static_cast<std::size_t>(c[level] - 1)] += 1.0;
    const ChiSquareResult res = chi_square_two_sample(ca, cb);
    rep.marginals.push_back({"level_" + std::to_string(level), res.statistic,
                             res.p_value, res.p_value, false});
  }
  rep.pass = true;
  for (const auto& s : rep.marginals)
    if (s.p_value <= thr.chi2_p_min) rep.pass = false;
  rep.runtime_seconds = watch.seconds();
  return rep;
}

// --- moment asymptotics ----------------------------------------------------

struct MomentAsymptoticsRow {
  std::int64_t n = 0;
  std::int64_t s = 0;            // probe generation
  double sigma2 = 0.0;           // law variance at (q(s), q(s+1))
  double n_collision = 0.0;      // n * P(two children share a parent), exact
  double distinct3 = 0.0;        // q (1 - P(3 parents distinct)) / 3, Monte Carlo
  double distinct3_se = 0.0;
  double limit22_residual = 0.0; // (q'/(q-1)) E[nu^3] - E[(nu)_2(nu)_2], exact
  double third_over_n = 0.0;     // E[nu^3]/n
  double h2i_ratio = 0.0;        // E[nu^3] (log n)^{2+eps} / n
  double l2_tail = 0.0;          // E[nu^2 1{nu > 10}]
};

struct MomentAsymptoticsReport {
  std::vector<MomentAsymptoticsRow> rows;
  bool pass = false;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

// Tabulates the mid-height moment quantities on an n-grid. The distinct-3
// probability is estimated by plain Monte Carlo (draw the offspring vector,
// place three uniform children); everything else is analytic.
inline MomentAsymptoticsReport check_moment_asymptotics(
    const std::function<OffspringLaw(std::int64_t)>& law_for_n,
    const ContinuousProfile& ell, const std::vector<std::int64_t>& n_grid,
    std::int64_t mc_reps, std::uint64_t seed,
    const Thresholds& thr = default_thresholds(),
    int workers = default_workers(), double h2_epsilon = 0.5) {
  detail::Stopwatch watch;
  MomentAsymptoticsReport out;
  out.seed = seed;
  out.pass = true;
  for (const std::int64_t n : n_grid) {
    const OffspringLaw law = law_for_n(n);
    const DiscreteProfile profile = discretize(ell, n);
    const std::int64_t s = n / 2;
    const std::int64_t q_s = profile.size(s);
    const std::int64_t q_s1 = profile.size(s + 1);
    MomentAsymptoticsRow row;
    row.n = n;
    row.s = s;
    const MomentReport m = exact_moments(law, q_s, q_s1);
    row.sigma2 = m.sigma2;
    row.n_collision = static_cast<double>(n) * coal_event_prob(law, q_s, q_s1, {2});
    row.limit22_residual =
        static_cast<double>(q_s1) / static_cast<double>(q_s - 1) * m.third -
        m.cross22;
    row.third_over_n = m.third / static_cast<double>(n);
    row.h2i_ratio = m.third *
                    std::pow(std::log(static_cast<double>(n)), 2.0 + h2_epsilon) /
                    static_cast<double>(n);
    row.l2_tail = l2_tail_moment(law, q_s, q_s1, 10);

    std::vector<std::uint8_t> distinct(static_cast<std::size_t>(mc_reps), 0);
    replicate_map(mc_reps, workers, [&](std::int64_t r) {
      Rng rng(StreamKey{seed ^ static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(FddOp::Moments),
                        static_cast<std::uint64_t>(r)});
      std::vector<std::int64_t> nu;
      sample_offspring_into(law, q_s, q_s1, rng, nu);
      std::vector<std::pair<std::size_t, std::int64_t>> hits;
      detail::place_tagged(nu, q_s1, 3, rng, hits);
      distinct[static_cast<std::size_t>(r)] = hits.size() == 3 ? 1 : 0;
    });
    double hit = 0.0;
    for (auto d : distinct) hit += d;
    const double p_distinct = hit / static_cast<double>(mc_reps);
    const double se_p = std::sqrt(p_distinct * (1.0 - p_distinct) /
                                  static_cast<double>(mc_reps));
    row.distinct3 = static_cast<double>(q_s) * (1.0 - p_distinct) / 3.0;
    row.distinct3_se = static_cast<double>(q_s) * se_p / 3.0;
    if (std::abs(row.distinct3 - row.sigma2) >
        thr.se_mult * row.distinct3_se)
      out.pass = false;
    if (row.limit22_residual < 0.0) out.pass = false;
    out.rows.push_back(row);
  }
  out.runtime_seconds = watch.seconds();
  return out;
}

// --- lineage-count quantile curves ------------------------------------------

struct QuantilePoint {
  std::int64_t n = 0;
  QuantileEstimate estimate;
  std::vector<double> samples;
};

struct QuantileCurve {
  std::string probe;
  double quantile = 0.0;
  std::vector<QuantilePoint> points;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

enum class LineageProbe { Cdfi, X1 };

// cdfi probe: full top generation at h* = n/2, lineage count read at
// h* - n/4. x1 probe: constant profile of height n, count of
// generation-1 ancestors of the whole top generation.
inline QuantileCurve lineage_quantiles(
    const std::function<OffspringLaw(std::int64_t)>& law_for_n,
    const ContinuousProfile& ell, LineageProbe probe,
    const std::vector<std::int64_t>& n_grid, double quantile,
    std::int64_t reps, std::uint64_t seed, int workers = default_workers(),
    int bootstrap_resamples = 1000) {
  detail::Stopwatch watch;
  QuantileCurve curve;
  curve.probe = probe == LineageProbe::Cdfi ? "cdfi" : "x1";
  curve.quantile = quantile;
  curve.seed = seed;
  for (const std::int64_t n : n_grid) {
    const OffspringLaw law = law_for_n(n);
    DiscreteProfile profile = probe == LineageProbe::Cdfi
                                  ? discretize(ell, n)
                                  : DiscreteProfile::constant(n, n);
    const std::int64_t h_star = probe == LineageProbe::Cdfi ? n / 2 : n;
    const std::int64_t probe_height =
        probe == LineageProbe::Cdfi ? h_star - n / 4 : 1;
    const std::int64_t k = profile.size(h_star);
    QuantilePoint point;
    point.n = n;
    point.samples.assign(static_cast<std::size_t>(reps), 0.0);
    replicate_map(reps, workers, [&](std::int64_t r) {
      Rng rng(StreamKey{seed ^ static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(FddOp::Quantiles),
                        static_cast<std::uint64_t>(r)});
      const CoalescentTrace tr = simulate_trace(profile, law, h_star, k, rng);
      point.samples[static_cast<std::size_t>(r)] =
          static_cast<double>(tr.at(probe_height));
    });
    Rng boot(StreamKey{seed ^ static_cast<std::uint64_t>(n),
                       static_cast<std::uint64_t>(FddOp::Bootstrap), 0});
    point.estimate =
        bootstrap_quantile(point.samples, quantile, bootstrap_resamples, boot);
    curve.points.push_back(std::move(point));
  }
  curve.runtime_seconds = watch.seconds();
  return curve;
}

// sup_i |C_{2i} - H_i| / n over i < |V| - 1, indices clamped to the contour
// domain. The final vertex is excluded: there the walk has already returned
// to the root, which would register the last vertex's full depth.
inline double contour_height_discrepancy(const CanningsTree& t, std::int64_t n) {
  const TraversalData data = traverse(t);
  const auto last = static_cast<std::int64_t>(data.contour.size()) - 1;
  double sup = 0.0;
  for (std::size_t i = 0; i + 1 < data.heights.size(); ++i) {
    const std::int64_t ci = std::min<std::int64_t>(2 * static_cast<std::int64_t>(i), last);
    sup = std::max(sup, std::abs(static_cast<double>(
                            data.contour[static_cast<std::size_t>(ci)] -
                            data.heights[i])));
  }
  return sup / static_cast<double>(n);
}

// First-merge times of the discrete coalescent (k lineages from h* = n/2,
// rescaled by 1/n) against the continuous block-counting process, plus the
// closed-form truncated-exponential check for constant profiles.
inline ComparisonReport appendix_a_check(const ProfilePair& pair,
                                         const OffspringLaw& law, std::int64_t n,
                                         std::int64_t k, std::int64_t reps,
                                         std::uint64_t seed,
                                         const Thresholds& thr = default_thresholds(),
                                         int workers = default_workers()) {
  detail::Stopwatch watch;
  ComparisonReport rep;
  rep.test = "appendix_a_check";
  rep.reps_a = rep.reps_b = reps;
  rep.seed = seed;

  const DiscreteProfile profile = discretize(pair.ell(), n);
  const std::int64_t h_star = n / 2;
  const double horizon = static_cast<double>(h_star) / static_cast<double>(n);
  constexpr double kNoMerge = -1.0;

  if (k < 2) {
    // a single lineage never merges on either side
    rep.marginals.push_back({"no_merges_possible", 0.0, 1.0, 1.0, false, false, true});
    rep.pass = true;
    rep.runtime_seconds = watch.seconds();
    return rep;
  }

  std::vector<double> discrete(static_cast<std::size_t>(reps), kNoMerge);
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng rng(StreamKey{seed, static_cast<std::uint64_t>(FddOp::AppendixDiscrete),
                      static_cast<std::uint64_t>(r)});
    const CoalescentTrace tr = simulate_trace(profile, law, h_star, k, rng);
    for (std::int64_t j = h_star - 1; j >= 1; --j) {
      if (tr.at(j) < k) {
        discrete[static_cast<std::size_t>(r)] =
            static_cast<double>(h_star - j) / static_cast<double>(n);
        break;
      }
    }
  });

  const LimitSampler sampler(pair);
  std::vector<double> continuous(static_cast<std::size_t>(reps), kNoMerge);
  replicate_map(reps, workers, [&](std::int64_t r) {
    Rng rng(StreamKey{seed, static_cast<std::uint64_t>(FddOp::AppendixLimit),
                      static_cast<std::uint64_t>(r)});
    const auto path = sampler.block_count(horizon, k, rng);
    if (path.size() > 1) continuous[static_cast<std::size_t>(r)] = path[1].first;
  });

  std::vector<double> disc_pos, cont_pos;
  std::vector<double> disc_mixed, cont_mixed;  // no-merge as a right atom
  for (double t : discrete) {
    if (t >= 0.0) disc_pos.push_back(t);
    disc_mixed.push_back(t >= 0.0 ? t : horizon + 1.0);
  }
  for (double t : continuous) {
    if (t >= 0.0) cont_pos.push_back(t);
    cont_mixed.push_back(t >= 0.0 ? t : horizon + 1.0);
  }

  const KsResult mixed = ks_two_sample(std::move(disc_mixed), std::move(cont_mixed));
  rep.marginals.push_back({"first_merge", mixed.statistic, mixed.p_value, 1.0,
                           true, true, false});
  const double atom_p = two_proportion_p(
      static_cast<double>(reps - static_cast<std::int64_t>(disc_pos.size())),
      static_cast<double>(reps),
      static_cast<double>(reps - static_cast<std::int64_t>(cont_pos.size())),
      static_cast<double>(reps));
  rep.marginals.push_back({"no_merge_atom",
                           std::abs(static_cast<double>(disc_pos.size()) -
                                    static_cast<double>(cont_pos.size())) /
                               static_cast<double>(reps),
                           atom_p, 1.0, false, false, true});
  const KsResult two = ks_two_sample(disc_pos, cont_pos);
  rep.marginals.push_back({"first_merge_two_sample", two.statistic, two.p_value,
                           1.0, true, false, true});

  // constant-rate closed form: rate C(k,2) sigma^2/ell, conditioned on a
  // merge before the horizon
  const double ell0 = pair.ell().eval(horizon / 2.0);
  const double sig0 = pair.sigma().eval(horizon / 2.0);
  const double rate = 0.5 * static_cast<double>(k) * static_cast<double>(k - 1) *
                      sig0 * sig0 / ell0;
  const double denom = 1.0 - std::exp(-rate * horizon);
  const KsResult one = ks_one_sample(disc_pos, [&](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= horizon) return 1.0;
    return (1.0 - std::exp(-rate * t)) / denom;
  });
  rep.marginals.push_back({"first_merge_vs_truncated_exp", one.statistic,
                           one.p_value, 1.0, true, true, true});

  detail::bonferroni(rep.marginals);
  rep.pass = true;
  for (const auto& s : rep.marginals) {
    if (s.gate_statistic && s.statistic >= thr.ks_max) rep.pass = false;
    if (s.gate_p && s.p_adjusted <= thr.p_min) rep.pass = false;
  }
  rep.runtime_seconds = watch.seconds();
  return rep;
}

}  // namespace cannings
