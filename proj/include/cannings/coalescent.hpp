#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cannings/errors.hpp"
#include "cannings/offspring.hpp"
#include "cannings/profile.hpp"
#include "cannings/rng.hpp"
#include "cannings/tree.hpp"

namespace cannings {

// Lineage counts X_j for j = base_height down to 0.
struct CoalescentTrace {
  std::int64_t base_height = 0;
  std::int64_t k = 0;
  std::vector<std::int64_t> counts;  // counts[j] = X_j, indices 0..base_height

  std::int64_t at(std::int64_t j) const {
    return counts[static_cast<std::size_t>(j)];
  }
};

struct MergeRecord {
  std::int64_t generation = 0;  // height of the shared parent
  std::int64_t blocks_before = 0;
  std::int64_t blocks_after = 0;
  // leaf labels (in injection order) of the blocks united per shared parent
  std::vector<std::vector<int>> groups;
};

struct MarkedTrace {
  CoalescentTrace trace;
  std::vector<MergeRecord> merges;
};

enum class TraceMode { Auto, Generic };

namespace detail {

// Multivariate hypergeometric placement of m tagged children into parent
// blocks of sizes nu; returns tagged counts per parent with at least one tag.
// Parents are visited in order; early exit once all tags are placed.
inline void place_tagged(const std::vector<std::int64_t>& nu, std::int64_t q_cur,
                         std::int64_t m, Rng& rng,
                         std::vector<std::pair<std::size_t, std::int64_t>>& hits) {
  hits.clear();
  std::int64_t pool = q_cur;
  std::int64_t tags = m;
  for (std::size_t i = 0; i < nu.size() && tags > 0; ++i) {
    const std::int64_t block = nu[i];
    if (block <= 0) continue;
    const std::int64_t got = rng.hypergeometric(pool, tags, block);
    if (got > 0) hits.emplace_back(i, got);
    pool -= block;
    tags -= got;
  }
}

inline bool has_analytic_falling2(const OffspringLaw& law) {
  return !std::holds_alternative<Counterexample>(law);
}

// Exact one-step merge probability for two lineages:
// q_prev * E[(nu_1)_2] / (q_cur)_2.
inline double pair_merge_prob(const OffspringLaw& law, std::int64_t q_prev,
                              std::int64_t q_cur) {
  if (q_cur < 2) return 1.0;
  return coal_event_prob(law, q_prev, q_cur, {2});
}

}  // namespace detail

// One backward step: distribute m uniformly chosen children of the next
// generation over a freshly drawn offspring vector and group them by parent.
// Returns the induced partition of {0, ..., m-1}.
inline std::vector<std::vector<int>> transition_sample(const OffspringLaw& law,
                                                       std::int64_t q_prev,
                                                       std::int64_t q_cur,
                                                       std::int64_t m, Rng& rng) {
  if (m < 1 || m > q_cur)
    throw InfeasibleCount("lineage count must lie in [1, q_cur]");
  std::vector<std::int64_t> nu;
  sample_offspring_into(law, q_prev, q_cur, rng, nu);
  std::vector<std::pair<std::size_t, std::int64_t>> hits;
  detail::place_tagged(nu, q_cur, m, rng, hits);
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i);
  rng.shuffle(labels);
  std::vector<std::vector<int>> blocks;
  blocks.reserve(hits.size());
  std::size_t next = 0;
  for (const auto& [parent, count] : hits) {
    (void)parent;
    std::vector<int> block(labels.begin() + static_cast<std::ptrdiff_t>(next),
                           labels.begin() + static_cast<std::ptrdiff_t>(next + static_cast<std::size_t>(count)));
    std::sort(block.begin(), block.end());
    blocks.push_back(std::move(block));
    next += static_cast<std::size_t>(count);
  }
  return blocks;
}

// Lineage-count path from k lineages at h_star down to the root, law-exact
// without building a tree. Per generation the generic path draws the
// offspring vector and places lineages by sequential hypergeometric
// assignment; two exact shortcuts keep large runs cheap:
//  - counterexample law: all-ones generations leave the count unchanged and
//    are skipped with one geometric draw;
//  - two lineages under a law with analytic E[(nu_1)_2]: the step is a
//    Bernoulli with the exact one-step merge probability.
inline CoalescentTrace simulate_trace(const DiscreteProfile& profile,
                                      const OffspringLaw& law,
                                      std::int64_t h_star, std::int64_t k,
                                      Rng& rng, TraceMode mode = TraceMode::Auto) {
  if (h_star < 0 || h_star > profile.top_generation())
    throw InfeasibleCount("h_star outside the profile support");
  if (k < 1 || k > profile.size(h_star))
    throw InfeasibleCount("k must lie in [1, q(h_star)]");
  CoalescentTrace out;
  out.base_height = h_star;
  out.k = k;
  out.counts.assign(static_cast<std::size_t>(h_star) + 1, 1);
  std::int64_t x = k;
  out.counts[static_cast<std::size_t>(h_star)] = x;

  const auto* ce = std::get_if<Counterexample>(&law);
  std::vector<std::int64_t> nu;
  std::vector<std::pair<std::size_t, std::int64_t>> hits;

  std::int64_t j = h_star;
  while (j > 1) {
    if (x == 1) {
      for (std::int64_t l = 1; l < j; ++l) out.counts[static_cast<std::size_t>(l)] = 1;
      break;
    }
    if (ce != nullptr && mode == TraceMode::Auto) {
      // skip the run of trivial generations in one geometric draw
      const double p = ce->burst_prob();
      const std::int64_t avail = j - 1;  // steps until the root step
      std::int64_t skip;
      if (p >= 1.0) {
        skip = 0;
      } else {
        const double g = std::floor(std::log1p(-rng.uniform()) / std::log1p(-p));
        skip = g > static_cast<double>(avail) ? avail : static_cast<std::int64_t>(g);
      }
      for (std::int64_t l = 0; l < skip; ++l)
        out.counts[static_cast<std::size_t>(j - 1 - l)] = x;
      j -= skip;
      if (j <= 1) break;
      const std::int64_t burst =
          rng.hypergeometric(ce->n, ce->burst_size(), x);
      x = (x - burst) + (burst > 0 ? 1 : 0);
      out.counts[static_cast<std::size_t>(j - 1)] = x;
      --j;
      continue;
    }
    const std::int64_t q_prev = profile.size(j - 1);
    const std::int64_t q_cur = profile.size(j);
    if (x == 2 && mode == TraceMode::Auto && detail::has_analytic_falling2(law)) {
      if (rng.bernoulli(detail::pair_merge_prob(law, q_prev, q_cur))) x = 1;
    } else {
      sample_offspring_into(law, q_prev, q_cur, rng, nu);
      detail::place_tagged(nu, q_cur, x, rng, hits);
      x = static_cast<std::int64_t>(hits.size());
    }
    out.counts[static_cast<std::size_t>(j - 1)] = x;
    --j;
  }
  if (h_star >= 1) out.counts[0] = 1;  // artificial root gathers everyone
  return out;
}

struct MarkedTraceResult {
  MarkedTrace marked;
  KPointTree tree;
};

// Backward coalescent carrying merge topology. Leaves enter at the given
// generations (sorted descending); the returned KPointTree has the law of
// the spanning subtree conditioned on those leaf generations, heights
// rescaled by 1/n. Left/right order is a fair coin at every merge and a
// uniform shuffle at the root gathering.
inline MarkedTraceResult simulate_marked_trace(const DiscreteProfile& profile,
                                               const OffspringLaw& law,
                                               std::vector<std::int64_t> leaf_gens,
                                               std::int64_t n, Rng& rng) {
  if (leaf_gens.empty()) throw InfeasibleCount("need at least one leaf");
  std::sort(leaf_gens.begin(), leaf_gens.end(), std::greater<>());
  const std::int64_t h_star = leaf_gens.front();
  if (h_star > profile.top_generation() || leaf_gens.back() < 1)
    throw InfeasibleCount("leaf generations outside the profile support");
  const int k = static_cast<int>(leaf_gens.size());

  MarkedTraceResult out;
  out.marked.trace.base_height = h_star;
  out.marked.trace.k = k;
  out.marked.trace.counts.assign(static_cast<std::size_t>(h_star) + 1, 0);

  detail::KPointBuilder builder(k);
  std::vector<int> active;                      // live builder cluster ids
  std::vector<std::vector<int>> leaf_labels;    // leaf labels per live cluster
  std::size_t injected = 0;
  std::vector<std::int64_t> nu;
  std::vector<std::pair<std::size_t, std::int64_t>> hits;

  for (std::int64_t j = h_star; j >= 1; --j) {
    while (injected < leaf_gens.size() && leaf_gens[injected] == j) {
      const int id = builder.add_leaf(static_cast<double>(j) /
                                      static_cast<double>(n));
      active.push_back(id);
      leaf_labels.push_back({id});
      ++injected;
    }
    const auto m = static_cast<std::int64_t>(active.size());
    if (m > profile.size(j))
      throw InfeasibleCount("more lineages than vertices at a generation");
    out.marked.trace.counts[static_cast<std::size_t>(j)] = m;
    if (j == 1) break;
    const std::int64_t q_prev = profile.size(j - 1);
    const std::int64_t q_cur = profile.size(j);
    const bool pending = injected < leaf_gens.size();
    if (m <= 1 && !pending) {
      for (std::int64_t l = 1; l < j; ++l)
        out.marked.trace.counts[static_cast<std::size_t>(l)] = m;
      break;
    }
    sample_offspring_into(law, q_prev, q_cur, rng, nu);
    detail::place_tagged(nu, q_cur, m, rng, hits);
    if (static_cast<std::int64_t>(hits.size()) == m) continue;
    // clusters land on parents in exchangeable order: shuffle, then split
    std::vector<std::size_t> order(active.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    MergeRecord rec;
    rec.generation = j - 1;
    rec.blocks_before = m;
    rec.blocks_after = static_cast<std::int64_t>(hits.size());
    std::vector<int> next_active;
    std::vector<std::vector<int>> next_labels;
    std::size_t cursor = 0;
    for (const auto& [parent, count] : hits) {
      (void)parent;
      if (count == 1) {
        next_active.push_back(active[order[cursor]]);
        next_labels.push_back(std::move(leaf_labels[order[cursor]]));
        ++cursor;
        continue;
      }
      std::vector<int> labels;
      int acc = active[order[cursor]];
      labels = std::move(leaf_labels[order[cursor]]);
      ++cursor;
      for (std::int64_t i = 1; i < count; ++i, ++cursor) {
        const double height = static_cast<double>(j - 1) / static_cast<double>(n);
        const int other = active[order[cursor]];
        acc = rng.bernoulli(0.5) ? builder.merge(acc, other, height)
                                 : builder.merge(other, acc, height);
        const auto& extra = leaf_labels[order[cursor]];
        labels.insert(labels.end(), extra.begin(), extra.end());
      }
      std::sort(labels.begin(), labels.end());
      rec.groups.push_back(labels);
      next_active.push_back(acc);
      next_labels.push_back(std::move(labels));
    }
    out.marked.merges.push_back(std::move(rec));
    active = std::move(next_active);
    leaf_labels = std::move(next_labels);
  }
  out.marked.trace.counts[0] = 1;
  std::vector<std::size_t> root_perm(active.size());
  for (std::size_t i = 0; i < root_perm.size(); ++i) root_perm[i] = i;
  rng.shuffle(root_perm);
  std::vector<int> root_order;
  root_order.reserve(active.size());
  for (std::size_t i : root_perm) root_order.push_back(active[i]);
  out.tree = builder.finish(std::move(root_order));
  return out;
}

// Convenience form: all k leaves at h_star.
inline MarkedTraceResult simulate_marked_trace(const DiscreteProfile& profile,
                                               const OffspringLaw& law,
                                               std::int64_t h_star,
                                               std::int64_t k, std::int64_t n,
                                               Rng& rng) {
  if (k < 1 || k > profile.size(h_star))
    throw InfeasibleCount("k must lie in [1, q(h_star)]");
  return simulate_marked_trace(
      profile, law, std::vector<std::int64_t>(static_cast<std::size_t>(k), h_star), n, rng);
}

// Distinct ancestors per height of k uniformly chosen vertices at h_star,
// read off a built tree. The oracle route for the transition-law check.
inline CoalescentTrace tree_lineage_counts(const CanningsTree& t,
                                           std::int64_t h_star, std::int64_t k,
                                           Rng& rng) {
  if (h_star < 0 || h_star > t.top_generation())
    throw InfeasibleCount("h_star outside the tree height");
  if (k < 1 || k > t.profile().size(h_star))
    throw InfeasibleCount("k must lie in [1, q(h_star)]");
  CoalescentTrace out;
  out.base_height = h_star;
  out.k = k;
  out.counts.assign(static_cast<std::size_t>(h_star) + 1, 1);
  std::vector<std::int64_t> current;
  for (std::int64_t idx : rng.sample_without_replacement(t.profile().size(h_star), k))
    current.push_back(idx);
  std::sort(current.begin(), current.end());
  out.counts[static_cast<std::size_t>(h_star)] = static_cast<std::int64_t>(current.size());
  for (std::int64_t j = h_star; j >= 1; --j) {
    if (j == 1) {
      out.counts[0] = 1;
      break;
    }
    const auto& row = t.parent_row(j);
    for (auto& idx : current) idx = row[static_cast<std::size_t>(idx)];
    std::sort(current.begin(), current.end());
    current.erase(std::unique(current.begin(), current.end()), current.end());
    out.counts[static_cast<std::size_t>(j - 1)] =
        static_cast<std::int64_t>(current.size());
  }
  return out;
}

// Number of coalescent anchor vertices for interval width w: for each
// s = 1..H-2 with H = floor(h_q / w), the distinct height-(s*w) ancestors of
// every vertex at height (s+1)*w, summed over s (the height levels are
// disjoint, so the union size is the sum).
inline std::int64_t delta_coalescent_count_width(const CanningsTree& t,
                                                 std::int64_t w) {
  const std::int64_t h_q = t.profile().extinction_generation();
  if (w < 1 || w >= h_q)
    throw DeltaOutOfRange("interval width must lie in [1, h_q)");
  const std::int64_t H = h_q / w;
  std::int64_t total = 0;
  std::vector<std::int64_t> level;
  for (std::int64_t s = 1; s + 2 <= H; ++s) {
    const std::int64_t hi = (s + 1) * w;
    const std::int64_t lo = s * w;
    level.resize(static_cast<std::size_t>(t.profile().size(hi)));
    for (std::size_t i = 0; i < level.size(); ++i)
      level[i] = static_cast<std::int64_t>(i);
    for (std::int64_t j = hi; j > lo; --j) {
      const auto& row = t.parent_row(j);
      for (auto& idx : level) idx = row[static_cast<std::size_t>(idx)];
      std::sort(level.begin(), level.end());
      level.erase(std::unique(level.begin(), level.end()), level.end());
    }
    total += static_cast<std::int64_t>(level.size());
  }
  return total;
}

inline std::int64_t delta_coalescent_count(const CanningsTree& t, double delta,
                                           std::int64_t n) {
  const std::int64_t h_q = t.profile().extinction_generation();
  if (!(delta > 0.0) ||
      delta >= static_cast<double>(h_q) / static_cast<double>(n))
    throw DeltaOutOfRange("delta must lie in (0, h_q/n)");
  const auto w = static_cast<std::int64_t>(std::floor(delta * static_cast<double>(n)));
  if (w < 1) throw DeltaOutOfRange("delta * n below one generation");
  return delta_coalescent_count_width(t, w);
}

}  // namespace cannings
