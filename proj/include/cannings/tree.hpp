#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "cannings/errors.hpp"
#include "cannings/offspring.hpp"
#include "cannings/profile.hpp"
#include "cannings/rng.hpp"

namespace cannings {

struct Vertex {
  std::int64_t generation = 0;
  std::int64_t index = 0;  // position within the generation, 0-based
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

// Rooted ordered genealogy: vertex (s, i) is the i-th individual of
// generation s. parent_of[s-2][i] maps generation-s children to their
// generation-(s-1) parents and is nondecreasing (children of earlier parents
// come first); generation 1 hangs off the artificial root (0, 0).
class CanningsTree {
 public:
  CanningsTree(DiscreteProfile profile,
               std::vector<std::vector<std::int32_t>> parents)
      : profile_(std::move(profile)), parents_(std::move(parents)) {
    cumulative_.push_back(0);
    for (std::int64_t s = 0; s <= profile_.top_generation(); ++s)
      cumulative_.push_back(cumulative_.back() + profile_.size(s));
  }

  const DiscreteProfile& profile() const { return profile_; }
  std::int64_t num_vertices() const { return cumulative_.back(); }
  std::int64_t top_generation() const { return profile_.top_generation(); }

  Vertex parent(Vertex v) const {
    if (v.generation <= 1) return {0, 0};
    return {v.generation - 1,
            parents_[static_cast<std::size_t>(v.generation - 2)]
                    [static_cast<std::size_t>(v.index)]};
  }

  const std::vector<std::int32_t>& parent_row(std::int64_t generation) const {
    return parents_[static_cast<std::size_t>(generation - 2)];
  }

  Vertex vertex_by_id(std::int64_t id) const {
    const auto it =
        std::upper_bound(cumulative_.begin(), cumulative_.end(), id);
    const auto g = static_cast<std::int64_t>(it - cumulative_.begin()) - 1;
    return {g, id - cumulative_[static_cast<std::size_t>(g)]};
  }

  std::int64_t id_of(Vertex v) const {
    return cumulative_[static_cast<std::size_t>(v.generation)] + v.index;
  }

  // nu^s recovered from the generation-(s+1) parent row
  std::vector<std::int64_t> offspring_counts(std::int64_t s) const {
    std::vector<std::int64_t> nu(static_cast<std::size_t>(profile_.size(s)), 0);
    if (s == 0) {
      nu[0] = profile_.size(1);
      return nu;
    }
    for (std::int32_t p : parent_row(s + 1)) ++nu[static_cast<std::size_t>(p)];
    return nu;
  }

  // child_offsets(s)[i] = first index in generation s+1 whose parent is >= i;
  // size q(s)+1. Valid while the tree is alive.
  std::vector<std::int64_t> child_offsets(std::int64_t s) const {
    const std::int64_t q = profile_.size(s);
    std::vector<std::int64_t> off(static_cast<std::size_t>(q) + 1, 0);
    if (s == 0) {
      off[1] = profile_.size(1);
      return off;
    }
    const auto nu = offspring_counts(s);
    for (std::int64_t i = 0; i < q; ++i)
      off[static_cast<std::size_t>(i + 1)] =
          off[static_cast<std::size_t>(i)] + nu[static_cast<std::size_t>(i)];
    return off;
  }

  // Root path of v as per-generation indices, path[g] for g = 0..|v|.
  std::vector<std::int64_t> root_path(Vertex v) const {
    std::vector<std::int64_t> path(static_cast<std::size_t>(v.generation) + 1);
    Vertex cur = v;
    for (std::int64_t g = v.generation; g >= 0; --g) {
      path[static_cast<std::size_t>(g)] = cur.index;
      cur = parent(cur);
    }
    return path;
  }

 private:
  DiscreteProfile profile_;
  std::vector<std::vector<std::int32_t>> parents_;
  std::vector<std::int64_t> cumulative_;  // vertices before each generation
};

inline CanningsTree build_tree(const DiscreteProfile& profile,
                               const OffspringLaw& law, Rng& rng) {
  std::vector<std::vector<std::int32_t>> parents;
  std::vector<std::int64_t> nu;
  for (std::int64_t s = 1; s + 1 <= profile.top_generation(); ++s) {
    sample_offspring_into(law, profile.size(s), profile.size(s + 1), rng, nu);
    std::vector<std::int32_t> row;
    row.reserve(static_cast<std::size_t>(profile.size(s + 1)));
    for (std::size_t i = 0; i < nu.size(); ++i)
      row.insert(row.end(), static_cast<std::size_t>(nu[i]),
                 static_cast<std::int32_t>(i));
    parents.push_back(std::move(row));
  }
  return CanningsTree(profile, std::move(parents));
}

struct LatticePath {
  enum class Kind { height, contour };
  Kind kind = Kind::height;
  std::vector<std::int64_t> values;
};

// One depth-first walk yields all three encodings: the contour (depth at
// every step), the heights in preorder (= lexicographic order), and the
// first-visit steps tau with tau_i + H_i = 2i.
struct TraversalData {
  std::vector<std::int64_t> contour;
  std::vector<std::int64_t> heights;
  std::vector<std::int64_t> first_visit;
};

inline TraversalData traverse(const CanningsTree& t) {
  const std::int64_t total = t.num_vertices();
  TraversalData out;
  out.contour.reserve(static_cast<std::size_t>(2 * (total - 1) + 1));
  out.heights.reserve(static_cast<std::size_t>(total));
  out.first_visit.reserve(static_cast<std::size_t>(total));

  const std::int64_t top = t.top_generation();
  std::vector<std::vector<std::int64_t>> offsets;
  offsets.reserve(static_cast<std::size_t>(top));
  for (std::int64_t s = 0; s < top; ++s) offsets.push_back(t.child_offsets(s));

  // path[g] = index of the current vertex's ancestor at generation g;
  // cursor[g] = next child of path[g] to visit (absolute index in gen g+1).
  std::vector<std::int64_t> path{0};
  std::vector<std::int64_t> cursor{0};
  std::int64_t step = 0;
  out.contour.push_back(0);
  out.heights.push_back(0);
  out.first_visit.push_back(0);

  while (!path.empty()) {
    const auto g = static_cast<std::int64_t>(path.size()) - 1;
    const std::int64_t v = path.back();
    const bool has_child =
        g < top && cursor.back() <
                       offsets[static_cast<std::size_t>(g)]
                              [static_cast<std::size_t>(v) + 1];
    if (has_child) {
      const std::int64_t c = cursor.back()++;
      path.push_back(c);
      cursor.push_back(
          g + 1 < top
              ? offsets[static_cast<std::size_t>(g + 1)][static_cast<std::size_t>(c)]
              : 0);
      ++step;
      out.contour.push_back(g + 1);
      out.heights.push_back(g + 1);
      out.first_visit.push_back(step);
    } else {
      path.pop_back();
      cursor.pop_back();
      if (!path.empty()) {
        ++step;
        out.contour.push_back(static_cast<std::int64_t>(path.size()) - 1);
      }
    }
  }
  return out;
}

inline LatticePath height_function(const CanningsTree& t) {
  return {LatticePath::Kind::height, traverse(t).heights};
}

inline LatticePath contour_function(const CanningsTree& t) {
  return {LatticePath::Kind::contour, traverse(t).contour};
}

inline std::vector<std::int64_t> first_visit_times(const CanningsTree& t) {
  return traverse(t).first_visit;
}

// --- k-point subtrees ---------------------------------------------------

struct KPointMerge {
  double height = 0.0;
  int left = 0;
  int right = 0;
  int id = 0;
};

// Rooted ordered tree on k sampled leaves. Leaf ids 0..k-1 follow the
// left-to-right tree order; merge ids continue from k in creation
// (descending-height) order. All survivors gather at the root, whose
// left-to-right order is root_order.
struct KPointTree {
  int k = 0;
  std::vector<double> leaf_heights;
  std::vector<KPointMerge> merges;
  std::vector<int> root_order;
};

namespace detail {

// Assembles a KPointTree from leaves, binary merges, and the root order,
// then relabels leaves so ids follow the tree order.
class KPointBuilder {
 public:
  explicit KPointBuilder(int k) : k_(k) { heights_.reserve(static_cast<std::size_t>(k)); }

  int add_leaf(double height) {
    heights_.push_back(height);
    return next_leaf_++;
  }

  int merge(int left, int right, double height) {
    KPointMerge m;
    m.left = left;
    m.right = right;
    m.height = height;
    m.id = k_ + static_cast<int>(merges_.size());
    merges_.push_back(m);
    return m.id;
  }

  KPointTree finish(std::vector<int> root_order) {
    // tree order = in-order over root_order then (left, right) recursion
    std::vector<int> planar;
    planar.reserve(static_cast<std::size_t>(k_));
    for (int id : root_order) collect(id, planar);
    std::vector<int> relabel(static_cast<std::size_t>(k_));
    for (int pos = 0; pos < static_cast<int>(planar.size()); ++pos)
      relabel[static_cast<std::size_t>(planar[static_cast<std::size_t>(pos)])] = pos;
    KPointTree t;
    t.k = k_;
    t.leaf_heights.resize(static_cast<std::size_t>(k_));
    for (int old = 0; old < k_; ++old)
      t.leaf_heights[static_cast<std::size_t>(relabel[static_cast<std::size_t>(old)])] =
          heights_[static_cast<std::size_t>(old)];
    t.merges = merges_;
    for (auto& m : t.merges) {
      if (m.left < k_) m.left = relabel[static_cast<std::size_t>(m.left)];
      if (m.right < k_) m.right = relabel[static_cast<std::size_t>(m.right)];
    }
    t.root_order = std::move(root_order);
    for (auto& id : t.root_order)
      if (id < k_) id = relabel[static_cast<std::size_t>(id)];
    return t;
  }

 private:
  void collect(int id, std::vector<int>& planar) const {
    if (id < k_) {
      planar.push_back(id);
      return;
    }
    const auto& m = merges_[static_cast<std::size_t>(id - k_)];
    collect(m.left, planar);
    collect(m.right, planar);
  }

  int k_;
  int next_leaf_ = 0;
  std::vector<double> heights_;
  std::vector<KPointMerge> merges_;
};

}  // namespace detail

// Spanning subtree of the root and the given vertices, edge lengths 1/n.
// Left-right order is inherited from the lexicographic order; simultaneous
// merges into one parent decompose into equal-height binary merges,
// leftmost first.
inline KPointTree k_point_subtree_of(const CanningsTree& t,
                                     std::vector<Vertex> vertices,
                                     std::int64_t n) {
  const int k = static_cast<int>(vertices.size());
  std::vector<std::vector<std::int64_t>> paths;
  paths.reserve(vertices.size());
  for (const Vertex& v : vertices) paths.push_back(t.root_path(v));

  // planar (preorder) comparison: first differing generation decides,
  // a proper ancestor precedes its descendants
  std::vector<int> order(vertices.size());
  for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = paths[static_cast<std::size_t>(a)];
    const auto& pb = paths[static_cast<std::size_t>(b)];
    const std::size_t m = std::min(pa.size(), pb.size());
    for (std::size_t g = 1; g < m; ++g)
      if (pa[g] != pb[g]) return pa[g] < pb[g];
    return pa.size() < pb.size();
  });

  detail::KPointBuilder builder(k);
  std::vector<int> cluster;  // live cluster ids in planar order
  for (int i = 0; i < k; ++i) {
    const auto& p = paths[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    builder.add_leaf(static_cast<double>(p.size() - 1) / static_cast<double>(n));
    cluster.push_back(i);
  }
  // lca generation of planar-adjacent leaves
  std::vector<std::int64_t> adj;
  for (int i = 0; i + 1 < k; ++i) {
    const auto& pa = paths[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    const auto& pb = paths[static_cast<std::size_t>(order[static_cast<std::size_t>(i + 1)])];
    const std::size_t m = std::min(pa.size(), pb.size());
    std::size_t g = 0;
    while (g + 1 < m && pa[g + 1] == pb[g + 1]) ++g;
    adj.push_back(static_cast<std::int64_t>(g));
  }
  while (!adj.empty()) {
    const auto it = std::max_element(adj.begin(), adj.end());
    if (*it <= 0) break;
    const auto pos = static_cast<std::size_t>(it - adj.begin());
    const int merged = builder.merge(cluster[pos], cluster[pos + 1],
                                     static_cast<double>(*it) / static_cast<double>(n));
    cluster[pos] = merged;
    cluster.erase(cluster.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
    adj.erase(adj.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return builder.finish(std::move(cluster));
}

inline std::vector<Vertex> sample_vertices(const CanningsTree& t,
                                           std::int64_t k, Rng& rng) {
  if (k < 1 || k > t.num_vertices())
    throw KTooLarge("k must lie in [1, |V|]");
  const auto ids = rng.sample_without_replacement(t.num_vertices(), k);
  std::vector<Vertex> vertices;
  vertices.reserve(ids.size());
  for (std::int64_t id : ids) vertices.push_back(t.vertex_by_id(id));
  return vertices;
}

// Uniform k-point subtree: k vertices without replacement plus the root,
// heights rescaled by 1/n.
inline KPointTree sample_k_point_subtree(const CanningsTree& t, std::int64_t k,
                                         std::int64_t n, Rng& rng) {
  return k_point_subtree_of(t, sample_vertices(t, k, rng), n);
}

// max over vertices of the graph distance to the spanning subtree of the
// root and `vertices`, rescaled by 1/n; one multi-source BFS.
inline double net_radius_of(const CanningsTree& t,
                            const std::vector<Vertex>& vertices,
                            std::int64_t n) {
  const std::int64_t total = t.num_vertices();
  std::vector<std::int32_t> dist(static_cast<std::size_t>(total), -1);
  std::vector<std::int64_t> frontier;
  // the subtree contains every vertex on a root path
  for (const Vertex& v : vertices) {
    Vertex cur = v;
    while (true) {
      const std::int64_t id = t.id_of(cur);
      if (dist[static_cast<std::size_t>(id)] == 0) break;
      dist[static_cast<std::size_t>(id)] = 0;
      frontier.push_back(id);
      if (cur.generation == 0) break;
      cur = t.parent(cur);
    }
  }
  if (dist[0] != 0) {
    dist[0] = 0;
    frontier.push_back(0);
  }

  const std::int64_t top = t.top_generation();
  std::vector<std::vector<std::int64_t>> offsets;
  offsets.reserve(static_cast<std::size_t>(top));
  for (std::int64_t s = 0; s < top; ++s) offsets.push_back(t.child_offsets(s));

  std::int32_t radius = 0;
  std::vector<std::int64_t> next;
  while (!frontier.empty()) {
    next.clear();
    for (const std::int64_t id : frontier) {
      const Vertex v = t.vertex_by_id(id);
      const std::int32_t d = dist[static_cast<std::size_t>(id)];
      auto relax = [&](Vertex u) {
        const std::int64_t uid = t.id_of(u);
        if (dist[static_cast<std::size_t>(uid)] < 0) {
          dist[static_cast<std::size_t>(uid)] = d + 1;
          radius = std::max(radius, static_cast<std::int32_t>(d + 1));
          next.push_back(uid);
        }
      };
      if (v.generation > 0) relax(t.parent(v));
      if (v.generation < top) {
        const auto& off = offsets[static_cast<std::size_t>(v.generation)];
        for (std::int64_t c = off[static_cast<std::size_t>(v.index)];
             c < off[static_cast<std::size_t>(v.index) + 1]; ++c)
          relax({v.generation + 1, c});
      }
    }
    frontier.swap(next);
  }
  return static_cast<double>(radius) / static_cast<double>(n);
}

inline double net_radius(const CanningsTree& t, std::int64_t k, std::int64_t n,
                         Rng& rng) {
  return net_radius_of(t, sample_vertices(t, k, rng), n);
}

// --- KPointTree queries ---------------------------------------------------

// Heights of the branch points between tree-order-adjacent leaves
// (entry i = branch of leaves i and i+1); 0 when they only meet at the root.
inline std::vector<double> adjacent_branch_heights(const KPointTree& t) {
  std::vector<int> owner(static_cast<std::size_t>(t.k));
  for (int i = 0; i < t.k; ++i) owner[static_cast<std::size_t>(i)] = i;
  std::vector<double> branch(static_cast<std::size_t>(t.k > 0 ? t.k - 1 : 0), 0.0);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(t.k + t.merges.size()));
  for (int i = 0; i < t.k; ++i) members[static_cast<std::size_t>(i)] = {i};
  for (const auto& m : t.merges) {
    auto& left = members[static_cast<std::size_t>(m.left)];
    auto& right = members[static_cast<std::size_t>(m.right)];
    for (int a : left)
      for (int b : right) {
        const int lo = std::min(a, b), hi = std::max(a, b);
        if (hi == lo + 1) branch[static_cast<std::size_t>(lo)] = m.height;
      }
    auto& out = members[static_cast<std::size_t>(m.id)];
    out = left;
    out.insert(out.end(), right.begin(), right.end());
  }
  return branch;
}

// The 2k-entry distance vector of the k-marked-tree metric: root-to-branch
// distances d(root, b_i) for i = 1..k (b_k = root), then the alternating
// leg lengths d(b_{i-1}, V_i) for i = 1..k.
inline std::vector<double> fidis_vector(const KPointTree& t) {
  const auto branch = adjacent_branch_heights(t);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * t.k));
  for (int i = 1; i < t.k; ++i) out.push_back(branch[static_cast<std::size_t>(i - 1)]);
  out.push_back(0.0);
  for (int i = 0; i < t.k; ++i) {
    const double below = i == 0 ? 0.0 : branch[static_cast<std::size_t>(i - 1)];
    out.push_back(t.leaf_heights[static_cast<std::size_t>(i)] - below);
  }
  return out;
}

// Structural invariants. Limit samples use strict merge-height comparison;
// discrete extraction allows equality (a sampled vertex may be an ancestor
// of another sampled vertex).
inline void validate_k_point_tree(const KPointTree& t, bool strict) {
  if (t.k < 1) throw Error("k-point tree must have at least one leaf");
  if (static_cast<int>(t.leaf_heights.size()) != t.k)
    throw Error("leaf count mismatch");
  if (static_cast<int>(t.merges.size()) > t.k - 1) throw Error("too many merges");
  std::vector<double> min_leaf(static_cast<std::size_t>(t.k + t.merges.size()), 0.0);
  std::vector<bool> live(static_cast<std::size_t>(t.k + t.merges.size()), false);
  for (int i = 0; i < t.k; ++i) {
    min_leaf[static_cast<std::size_t>(i)] = t.leaf_heights[static_cast<std::size_t>(i)];
    live[static_cast<std::size_t>(i)] = true;
  }
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t.merges.size(); ++j) {
    const auto& m = t.merges[j];
    if (m.id != t.k + static_cast<int>(j)) throw Error("merge ids must be sequential");
    if (m.height <= 0.0) throw Error("positive-height merges only");
    if (m.height > prev) throw Error("merge heights must be non-increasing");
    prev = m.height;
    for (int side : {m.left, m.right}) {
      if (side < 0 || side >= m.id || !live[static_cast<std::size_t>(side)])
        throw Error("merge references a dead or unknown cluster");
      const double lim = min_leaf[static_cast<std::size_t>(side)];
      if (strict ? m.height >= lim : m.height > lim)
        throw Error("merge height above a participating leaf");
      live[static_cast<std::size_t>(side)] = false;
    }
    live[static_cast<std::size_t>(m.id)] = true;
    min_leaf[static_cast<std::size_t>(m.id)] =
        std::min(min_leaf[static_cast<std::size_t>(m.left)],
                 min_leaf[static_cast<std::size_t>(m.right)]);
  }
  std::vector<int> survivors;
  for (std::size_t i = 0; i < live.size(); ++i)
    if (live[i]) survivors.push_back(static_cast<int>(i));
  auto sorted_roots = t.root_order;
  std::sort(sorted_roots.begin(), sorted_roots.end());
  if (sorted_roots != survivors)
    throw Error("root_order must list exactly the surviving clusters");
}

}  // namespace cannings
