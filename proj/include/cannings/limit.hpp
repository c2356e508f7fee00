#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cannings/errors.hpp"
#include "cannings/profile.hpp"
#include "cannings/rng.hpp"
#include "cannings/tree.hpp"

namespace cannings {

// Integrated pair-coalescence rate of the limiting tree. The per-pair rate
// is r(s) = 4/ell_sigma(s) = sigma(s)^2/ell(s); the cumulative hazard
// Lambda(b, a) integrates r downward in height. r may diverge at 0, so the
// grid refines geometrically down to `grid_floor`; inversion clamps to 0
// once the hazard budget below is exhausted (the construction gathers all
// remaining clusters at height 0 anyway).
class PairRateClock {
 public:
  explicit PairRateClock(const ProfilePair& pair, int points_per_interval = 16,
                         double grid_floor = 1e-12)
      : grid_floor_(grid_floor) {
    const ContinuousProfile derived = ell_sigma(pair, points_per_interval);
    std::vector<double> xs;
    for (const Knot& kn : derived.knots()) xs.push_back(kn.x);
    // geometric refinement between the floor and the first interior node
    std::vector<double> head;
    for (double x = xs[1] / 2.0; x > grid_floor_; x /= 2.0) head.push_back(x);
    head.push_back(grid_floor_);
    xs.erase(xs.begin());  // drop the node at 0; the floor takes its place
    xs.insert(xs.begin(), head.rbegin(), head.rend());

    grid_ = std::move(xs);
    rate_.reserve(grid_.size());
    for (double x : grid_) {
      const double v = std::max(derived.left_value(x), kTinyValue);
      rate_.push_back(4.0 / v);
    }
    cumulative_.assign(grid_.size(), 0.0);
    for (std::size_t i = 1; i < grid_.size(); ++i)
      cumulative_[i] = cumulative_[i - 1] + 0.5 * (rate_[i] + rate_[i - 1]) *
                                                (grid_[i] - grid_[i - 1]);
    height_ = grid_.back();
  }

  double extinction_height() const { return height_; }
  double grid_floor() const { return grid_floor_; }

  double rate(double s) const {
    if (s <= grid_floor_) return rate_.front();
    if (s >= height_) return rate_.back();
    const std::size_t i = cell_of(s);
    const double w = (s - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return rate_[i] + w * (rate_[i + 1] - rate_[i]);
  }

  // Lambda(floor, a): total hazard available below a.
  double total_hazard_below(double a) const { return cumulative_at(a); }

  double hazard_between(double b, double a) const {
    if (b >= a) return 0.0;
    return cumulative_at(a) - cumulative_at(b);
  }

  // Height b < start with Lambda(b, start) = hazard; 0 if the budget below
  // start is smaller. Monotone bisection to 1e-9 absolute height tolerance.
  double invert(double start, double hazard) const {
    if (hazard <= 0.0) return start;
    const double target = cumulative_at(start) - hazard;
    if (target <= 0.0) return 0.0;
    double lo = grid_floor_;
    double hi = std::min(start, height_);
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (cumulative_at(mid) < target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  static constexpr double kTinyValue = 1e-300;

  std::size_t cell_of(double x) const {
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    auto i = static_cast<std::size_t>(it - grid_.begin());
    i = std::clamp<std::size_t>(i, 1, grid_.size() - 1);
    return i - 1;
  }

  double cumulative_at(double x) const {
    if (x <= grid_floor_) return 0.0;
    if (x >= height_) return cumulative_.back();
    const std::size_t i = cell_of(x);
    const double t = x - grid_[i];
    const double slope = (rate_[i + 1] - rate_[i]) / (grid_[i + 1] - grid_[i]);
    return cumulative_[i] + t * (rate_[i] + 0.5 * slope * t);
  }

  double grid_floor_;
  double height_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> rate_;
  std::vector<double> cumulative_;
};

inline double kingman_clock_invert(const PairRateClock& clock,
                                   double start_height, double hazard) {
  return clock.invert(start_height, hazard);
}

// Descending-height sweep of the piecewise Kingman coalescent: between
// consecutive leaf heights b live clusters merge pairwise with total rate
// C(b,2) r(s); a new cluster enters at each leaf height; the survivors
// gather at height 0. Pair choice is uniform, left/right order a fair coin,
// root order a uniform shuffle.
inline KPointTree piecewise_kingman_tree(const PairRateClock& clock,
                                         std::vector<double> leaf_heights,
                                         Rng& rng) {
  const double h = clock.extinction_height();
  for (double x : leaf_heights)
    if (!(x > 0.0) || x > h)
      throw HeightOutOfRange("leaf heights must lie in (0, h)");
  // stable order so ties keep their input order; the fair-coin left/right
  // draw at each merge preserves exchangeability
  std::stable_sort(leaf_heights.begin(), leaf_heights.end(), std::greater<>());
  const int k = static_cast<int>(leaf_heights.size());

  detail::KPointBuilder builder(k);
  std::vector<int> active;
  std::size_t injected = 0;
  double cur = leaf_heights.front();
  while (injected < leaf_heights.size() && leaf_heights[injected] >= cur) {
    active.push_back(builder.add_leaf(leaf_heights[injected]));
    ++injected;
  }
  while (true) {
    const double next_leaf =
        injected < leaf_heights.size() ? leaf_heights[injected] : 0.0;
    const auto b = static_cast<std::int64_t>(active.size());
    double merge_at = 0.0;
    if (b >= 2) {
      const double pairs = 0.5 * static_cast<double>(b) * static_cast<double>(b - 1);
      merge_at = clock.invert(cur, rng.exponential() / pairs);
    }
    if (injected < leaf_heights.size() && merge_at <= next_leaf) {
      cur = next_leaf;
      while (injected < leaf_heights.size() && leaf_heights[injected] >= cur) {
        active.push_back(builder.add_leaf(leaf_heights[injected]));
        ++injected;
      }
      continue;
    }
    if (merge_at <= 0.0) break;
    // uniform pair among active clusters, fair-coin orientation
    const auto i = static_cast<std::size_t>(rng.uniform_below(b));
    auto j = static_cast<std::size_t>(rng.uniform_below(b - 1));
    if (j >= i) ++j;
    const int left = rng.bernoulli(0.5) ? active[i] : active[j];
    const int right = active[i] == left ? active[j] : active[i];
    const int merged = builder.merge(left, right, merge_at);
    active[std::min(i, j)] = merged;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
    cur = merge_at;
  }
  rng.shuffle(active);
  return builder.finish(std::move(active));
}

// Convenience overload constructing the clock on the fly.
inline KPointTree piecewise_kingman_tree(const ProfilePair& pair,
                                         std::vector<double> leaf_heights,
                                         Rng& rng) {
  return piecewise_kingman_tree(PairRateClock(pair), std::move(leaf_heights), rng);
}

// Reusable sampler of the limiting k-point subtree law: leaf heights with
// density ell/I(ell), then the piecewise Kingman sweep.
class LimitSampler {
 public:
  explicit LimitSampler(ProfilePair pair, int points_per_interval = 16)
      : pair_(std::move(pair)), clock_(pair_, points_per_interval) {}

  const ProfilePair& pair() const { return pair_; }
  const PairRateClock& clock() const { return clock_; }

  KPointTree sample(std::int64_t k, Rng& rng) const {
    std::vector<double> heights;
    heights.reserve(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i)
      heights.push_back(sample_height(pair_.ell(), rng.uniform_open()));
    return piecewise_kingman_tree(clock_, std::move(heights), rng);
  }

  // Jump times and block counts of the k-particle block-counting process on
  // [0, h_star]: all particles alive at time 0 (height h_star), pairs merge
  // at rate r(h_star - t); the process simply stops at t = h_star.
  std::vector<std::pair<double, std::int64_t>> block_count(
      double h_star, std::int64_t k, Rng& rng) const {
    if (!(h_star > 0.0) || h_star > pair_.extinction_height())
      throw HeightOutOfRange("h_star must lie in (0, h]");
    std::vector<std::pair<double, std::int64_t>> out{{0.0, k}};
    double height = h_star;
    std::int64_t b = k;
    while (b >= 2) {
      const double pairs = 0.5 * static_cast<double>(b) * static_cast<double>(b - 1);
      const double merge_at = clock_.invert(height, rng.exponential() / pairs);
      if (merge_at <= 0.0) break;
      --b;
      out.emplace_back(h_star - merge_at, b);
      height = merge_at;
    }
    return out;
  }

 private:
  ProfilePair pair_;
  PairRateClock clock_;
};

inline KPointTree sample_limit_subtree(const ProfilePair& pair, std::int64_t k,
                                       Rng& rng) {
  return LimitSampler(pair).sample(k, rng);
}

inline std::vector<std::pair<double, std::int64_t>> continuous_block_count(
    const ProfilePair& pair, double h_star, std::int64_t k, Rng& rng) {
  return LimitSampler(pair).block_count(h_star, k, rng);
}

}  // namespace cannings
