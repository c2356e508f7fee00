#pragma once

// Test-only oracles, independent of the library implementation paths they
// cross-check.

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "cannings/coalescent.hpp"
#include "cannings/profile.hpp"
#include "cannings/tree.hpp"

namespace oracle {

// Exhaustive ball-in-cell enumeration of the Wright-Fisher step: q_s1
// children each pick a uniform parent among q_s. Enumerates all
// q_s^{q_s1} assignments with equal weight.
class WrightFisherEnumerator {
 public:
  WrightFisherEnumerator(int q_s, int q_s1) : q_s_(q_s), q_s1_(q_s1) {
    std::vector<int> assignment(static_cast<std::size_t>(q_s1), 0);
    enumerate(assignment, 0);
  }

  // E[prod_i (nu_i)_{mult_i}] over the first |mult| parents.
  double cross_falling_moment(const std::vector<int>& mult) const {
    double total = 0.0;
    for (const auto& nu : offspring_) {
      double term = 1.0;
      for (std::size_t b = 0; b < mult.size(); ++b)
        for (int j = 0; j < mult[b]; ++j) term *= nu[b] - j;
      total += term;
    }
    return total / static_cast<double>(offspring_.size());
  }

  double moment(int power) const {
    double total = 0.0;
    for (const auto& nu : offspring_) {
      double term = 1.0;
      for (int j = 0; j < power; ++j) term *= nu[0];
      total += term;
    }
    return total / static_cast<double>(offspring_.size());
  }

  // P(the first N_1 uniformly chosen distinct children share one parent,
  // the next N_2 share another, ..., parents distinct across groups).
  double coal_event_prob(const std::vector<int>& mult) const {
    int m = 0;
    for (int x : mult) m += x;
    std::vector<int> children(static_cast<std::size_t>(q_s1_));
    for (int i = 0; i < q_s1_; ++i) children[static_cast<std::size_t>(i)] = i;
    std::sort(children.begin(), children.end());
    double hits = 0.0, tuples = 0.0;
    std::vector<int> tuple(static_cast<std::size_t>(m));
    std::vector<bool> used(static_cast<std::size_t>(q_s1_), false);
    enumerate_tuples(tuple, used, 0, m, mult, hits, tuples);
    return hits / tuples;
  }

  // Distribution of the number of distinct parents of m uniformly chosen
  // distinct children; out[d-1] = P(d distinct parents).
  std::vector<double> distinct_parent_distribution(int m) const {
    std::vector<double> out(static_cast<std::size_t>(m), 0.0);
    std::vector<int> subset;
    double total = 0.0;
    enumerate_subsets(subset, 0, m, out, total);
    for (auto& p : out) p /= total;
    return out;
  }

 private:
  void enumerate(std::vector<int>& assignment, int child) {
    if (child == q_s1_) {
      std::vector<int> nu(static_cast<std::size_t>(q_s_), 0);
      for (int c : assignment) ++nu[static_cast<std::size_t>(c)];
      offspring_.push_back(nu);
      assignments_.push_back(assignment);
      return;
    }
    for (int p = 0; p < q_s_; ++p) {
      assignment[static_cast<std::size_t>(child)] = p;
      enumerate(assignment, child + 1);
    }
  }

  void enumerate_tuples(std::vector<int>& tuple, std::vector<bool>& used,
                        int pos, int m, const std::vector<int>& mult,
                        double& hits, double& tuples) const {
    if (pos == m) {
      tuples += static_cast<double>(assignments_.size());
      for (const auto& a : assignments_) {
        bool ok = true;
        std::vector<int> parents;
        int idx = 0;
        for (std::size_t b = 0; b < mult.size() && ok; ++b) {
          const int p = a[static_cast<std::size_t>(tuple[static_cast<std::size_t>(idx)])];
          for (int j = 0; j < mult[b] && ok; ++j) {
            if (a[static_cast<std::size_t>(tuple[static_cast<std::size_t>(idx)])] != p)
              ok = false;
            ++idx;
          }
          for (int q : parents)
            if (q == p) ok = false;
          parents.push_back(p);
        }
        if (ok) hits += 1.0;
      }
      return;
    }
    for (int c = 0; c < q_s1_; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      used[static_cast<std::size_t>(c)] = true;
      tuple[static_cast<std::size_t>(pos)] = c;
      enumerate_tuples(tuple, used, pos + 1, m, mult, hits, tuples);
      used[static_cast<std::size_t>(c)] = false;
    }
  }

  void enumerate_subsets(std::vector<int>& subset, int from, int m,
                         std::vector<double>& out, double& total) const {
    if (static_cast<int>(subset.size()) == m) {
      for (const auto& a : assignments_) {
        std::vector<int> parents;
        for (int c : subset) parents.push_back(a[static_cast<std::size_t>(c)]);
        std::sort(parents.begin(), parents.end());
        parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
        out[parents.size() - 1] += 1.0;
        total += 1.0;
      }
      return;
    }
    for (int c = from; c < q_s1_; ++c) {
      subset.push_back(c);
      enumerate_subsets(subset, c + 1, m, out, total);
      subset.pop_back();
    }
  }

  int q_s_;
  int q_s1_;
  std::vector<std::vector<int>> offspring_;
  std::vector<std::vector<int>> assignments_;
};

// Heights in lexicographic order computed by sorting full root paths —
// a different route than the library's depth-first walk.
inline std::vector<std::int64_t> heights_by_lex_sort(const cannings::CanningsTree& t) {
  std::vector<std::vector<std::int64_t>> paths;
  for (std::int64_t id = 0; id < t.num_vertices(); ++id)
    paths.push_back(t.root_path(t.vertex_by_id(id)));
  std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
    const std::size_t m = std::min(a.size(), b.size());
    for (std::size_t g = 1; g < m; ++g)
      if (a[g] != b[g]) return a[g] < b[g];
    return a.size() < b.size();
  });
  std::vector<std::int64_t> heights;
  heights.reserve(paths.size());
  for (const auto& p : paths)
    heights.push_back(static_cast<std::int64_t>(p.size()) - 1);
  return heights;
}

// Ancestor of v at generation g via repeated parent lookups.
inline cannings::Vertex ancestor_at(const cannings::CanningsTree& t,
                                    cannings::Vertex v, std::int64_t g) {
  while (v.generation > g) v = t.parent(v);
  return v;
}

// Direct-definition count of coalescent anchor vertices for width w.
inline std::int64_t naive_delta_coalescent_count(const cannings::CanningsTree& t,
                                                 std::int64_t w) {
  const std::int64_t h_q = t.profile().extinction_generation();
  const std::int64_t big_h = h_q / w;
  std::int64_t total = 0;
  for (std::int64_t s = 1; s + 2 <= big_h; ++s) {
    std::vector<std::int64_t> anc;
    for (std::int64_t i = 0; i < t.profile().size((s + 1) * w); ++i)
      anc.push_back(ancestor_at(t, {(s + 1) * w, i}, s * w).index);
    std::sort(anc.begin(), anc.end());
    anc.erase(std::unique(anc.begin(), anc.end()), anc.end());
    total += static_cast<std::int64_t>(anc.size());
  }
  return total;
}

// Structural checks every constructed tree must satisfy (acceptance AC-2
// runs these on every tree the suite builds).
inline void require_tree_invariants(const cannings::CanningsTree& t) {
  const auto data = cannings::traverse(t);
  const std::int64_t total = t.num_vertices();
  REQUIRE(static_cast<std::int64_t>(data.contour.size()) == 2 * (total - 1) + 1);
  REQUIRE(data.contour.front() == 0);
  REQUIRE(data.contour.back() == 0);
  for (std::size_t i = 1; i < data.contour.size(); ++i) {
    const auto step = data.contour[i] - data.contour[i - 1];
    REQUIRE((step == 1 || step == -1));
  }
  REQUIRE(static_cast<std::int64_t>(data.heights.size()) == total);
  REQUIRE(data.heights.front() == 0);
  for (std::size_t i = 0; i < data.heights.size(); ++i) {
    // first-visit identity and contour/height consistency, both exact
    REQUIRE(data.first_visit[i] + data.heights[i] ==
            2 * static_cast<std::int64_t>(i));
    REQUIRE(data.contour[static_cast<std::size_t>(data.first_visit[i])] ==
            data.heights[i]);
  }
  // parent rows nondecreasing with multiplicities matching the offspring
  for (std::int64_t s = 2; s <= t.top_generation(); ++s) {
    const auto& row = t.parent_row(s);
    REQUIRE(static_cast<std::int64_t>(row.size()) == t.profile().size(s));
    for (std::size_t i = 1; i < row.size(); ++i) REQUIRE(row[i - 1] <= row[i]);
    const auto nu = t.offspring_counts(s - 1);
    std::int64_t sum = 0;
    for (auto x : nu) sum += x;
    REQUIRE(sum == t.profile().size(s));
  }
}

}  // namespace oracle
