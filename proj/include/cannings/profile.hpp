#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cannings/errors.hpp"

namespace cannings {

struct Knot {
  double x = 0.0;
  double v = 0.0;
  friend bool operator==(const Knot&, const Knot&) = default;
};

// Piecewise-linear profile on [0, h): positive on (0, h), zero from h on.
// The last knot's value is the (finite) left limit at h, which the
// evaluation does not return: eval(x) == 0 for every x >= h.
class ContinuousProfile {
 public:
  const std::vector<Knot>& knots() const { return knots_; }
  double extinction_height() const { return knots_.back().x; }

  double eval(double x) const {
    const double h = extinction_height();
    if (x < 0.0 || x >= h) return 0.0;
    return interpolate(x);
  }

  // Left limit at h; equals eval elsewhere on [0, h).
  double left_value(double x) const {
    const double h = extinction_height();
    if (x < 0.0 || x > h) return 0.0;
    if (x == h) return knots_.back().v;
    return interpolate(x);
  }

  double integral() const { return cumulative_.back(); }

  // Exact trapezoid integral of the interpolant over [a, b] /\ [0, h].
  double integral(double a, double b) const {
    const double h = extinction_height();
    a = std::max(a, 0.0);
    b = std::min(b, h);
    if (a >= b) return 0.0;
    return cumulative_at(b) - cumulative_at(a);
  }

  // Inverse CDF of the density eval/I. Monotone in u; u in [0, 1].
  double quantile(double u) const {
    const double target = u * integral();
    if (target <= 0.0) return 0.0;
    if (target >= integral()) return extinction_height();
    std::size_t i = 1;
    while (cumulative_[i] < target) ++i;
    const Knot& a = knots_[i - 1];
    const Knot& b = knots_[i];
    const double area = target - cumulative_[i - 1];
    const double slope = (b.v - a.v) / (b.x - a.x);
    // Solve a.v*t + slope*t^2/2 == area with the stable root form.
    const double disc = std::max(a.v * a.v + 2.0 * slope * area, 0.0);
    const double t = 2.0 * area / (a.v + std::sqrt(disc));
    return a.x + std::min(t, b.x - a.x);
  }

  friend ContinuousProfile validate_profile(std::vector<Knot> knots);

 private:
  double interpolate(double x) const {
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (knots_[mid].x <= x) lo = mid; else hi = mid;
    }
    const Knot& a = knots_[lo];
    const Knot& b = knots_[hi];
    const double w = (x - a.x) / (b.x - a.x);
    return a.v + w * (b.v - a.v);
  }

  double cumulative_at(double x) const {
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (knots_[mid].x <= x) lo = mid; else hi = mid;
    }
    const Knot& a = knots_[lo];
    const double t = x - a.x;
    return cumulative_[lo] + t * (a.v + 0.5 * t * (knots_[hi].v - a.v) / (knots_[hi].x - a.x));
  }

  std::vector<Knot> knots_;
  std::vector<double> cumulative_;  // trapezoid integral up to each knot
};

inline ContinuousProfile validate_profile(std::vector<Knot> knots) {
  if (knots.empty()) throw NonMonotonePositions("empty knot list");
  if (knots.front().x != 0.0)
    throw NonMonotonePositions("first knot position must be 0");
  if (knots.size() < 2 || knots.back().x <= 0.0)
    throw NonMonotonePositions("extinction height must be positive");
  const double h = knots.back().x;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].x) || !std::isfinite(knots[i].v))
      throw NegativeValue("non-finite knot");
    if (i > 0 && knots[i].x <= knots[i - 1].x)
      throw NonMonotonePositions("knot positions must be strictly increasing");
    if (knots[i].v < 0.0) throw NegativeValue("negative knot value");
    if (knots[i].v == 0.0 && knots[i].x > 0.0 && knots[i].x < h)
      throw InteriorZero("zero value strictly inside (0, h)");
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i].v == 0.0 && knots[i + 1].v == 0.0)
      throw InteriorZero("interpolant vanishes on an interval inside (0, h)");
  }
  ContinuousProfile p;
  p.knots_ = std::move(knots);
  p.cumulative_.resize(p.knots_.size(), 0.0);
  for (std::size_t i = 1; i < p.knots_.size(); ++i) {
    const Knot& a = p.knots_[i - 1];
    const Knot& b = p.knots_[i];
    p.cumulative_[i] = p.cumulative_[i - 1] + 0.5 * (a.v + b.v) * (b.x - a.x);
  }
  return p;
}

inline ContinuousProfile constant_profile(double value, double h) {
  return validate_profile({{0.0, value}, {h, value}});
}

inline double integral(const ContinuousProfile& p) { return p.integral(); }

// Height with density ell/I(ell); deterministic in u.
inline double sample_height(const ContinuousProfile& p, double u) {
  return p.quantile(u);
}

// ell and sigma with matching extinction heights plus the limit of
// ell/sigma^2 at 0.
class ProfilePair {
 public:
  ProfilePair(ContinuousProfile ell, ContinuousProfile sigma,
              std::optional<double> ratio_at_zero = std::nullopt)
      : ell_(std::move(ell)), sigma_(std::move(sigma)) {
    if (ell_.extinction_height() != sigma_.extinction_height())
      throw InvalidProfilePair("ell and sigma must share the extinction height");
    if (sigma_.knots().back().v == 0.0)
      throw InvalidProfilePair(
          "sigma vanishes at the extinction height; 4*ell/sigma^2 has no finite left limit");
    if (ratio_at_zero) {
      if (!(*ratio_at_zero >= 0.0) || !std::isfinite(*ratio_at_zero))
        throw InvalidProfilePair("ratio_at_zero must be finite and nonnegative");
      ratio_at_zero_ = *ratio_at_zero;
    } else {
      const double s0 = sigma_.knots().front().v;
      if (s0 == 0.0)
        throw InvalidProfilePair(
            "sigma(0) = 0: ell/sigma^2 has no finite limit at 0 for piecewise-linear "
            "profiles; supply ratio_at_zero explicitly");
      ratio_at_zero_ = ell_.knots().front().v / (s0 * s0);
    }
  }

  const ContinuousProfile& ell() const { return ell_; }
  const ContinuousProfile& sigma() const { return sigma_; }
  double ratio_at_zero() const { return ratio_at_zero_; }
  double extinction_height() const { return ell_.extinction_height(); }

 private:
  ContinuousProfile ell_;
  ContinuousProfile sigma_;
  double ratio_at_zero_ = 0.0;
};

// 4*ell/sigma^2 tabulated on the merged knot grid refined with
// `points_per_interval` subintervals per merged interval. The exact ratio is
// piecewise rational; the refinement keeps the piecewise-linear stand-in
// close enough for the downstream clock integration.
inline ContinuousProfile ell_sigma(const ProfilePair& pair,
                                   int points_per_interval = 16) {
  const double h = pair.extinction_height();
  std::vector<double> grid;
  for (const Knot& k : pair.ell().knots()) grid.push_back(k.x);
  for (const Knot& k : pair.sigma().knots()) grid.push_back(k.x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<Knot> out;
  out.push_back({0.0, 4.0 * pair.ratio_at_zero()});
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    for (int j = 1; j <= points_per_interval; ++j) {
      const double x = a + (b - a) * j / points_per_interval;
      const double lv = pair.ell().left_value(x);
      const double sv = pair.sigma().left_value(x);
      if (sv == 0.0 && x < h)
        throw SigmaZeroInside("sigma vanishes at an interior grid point");
      out.push_back({x, 4.0 * lv / (sv * sv)});
    }
  }
  out.back().x = h;
  return validate_profile(std::move(out));
}

// Per-generation population sizes q(1 .. h_q - 1); q(s) = 0 for s >= h_q.
// The artificial root is generation 0, so size(0) = 1.
class DiscreteProfile {
 public:
  DiscreteProfile() = default;
  explicit DiscreteProfile(std::vector<std::int64_t> sizes)
      : sizes_(std::move(sizes)) {
    for (std::int64_t q : sizes_)
      if (q < 1) throw NegativeValue("generation sizes must be >= 1");
  }

  static DiscreteProfile constant(std::int64_t n, std::int64_t generations) {
    return DiscreteProfile(std::vector<std::int64_t>(
        static_cast<std::size_t>(generations), n));
  }

  std::int64_t extinction_generation() const {
    return static_cast<std::int64_t>(sizes_.size()) + 1;
  }

  std::int64_t size(std::int64_t s) const {
    if (s == 0) return 1;
    if (s < 0 || s > static_cast<std::int64_t>(sizes_.size())) return 0;
    return sizes_[static_cast<std::size_t>(s - 1)];
  }

  std::int64_t top_generation() const {
    return static_cast<std::int64_t>(sizes_.size());
  }

  // All vertices including the root.
  std::int64_t total_vertices() const {
    std::int64_t total = 1;
    for (std::int64_t q : sizes_) total += q;
    return total;
  }

  const std::vector<std::int64_t>& sizes() const { return sizes_; }

 private:
  std::vector<std::int64_t> sizes_;
};

// q(s) = max(1, round(n * ell(s/n))); h_q = ceil(n * h).
inline DiscreteProfile discretize(const ContinuousProfile& ell, std::int64_t n) {
  const std::int64_t h_q = static_cast<std::int64_t>(
      std::ceil(n * ell.extinction_height()));
  std::vector<std::int64_t> sizes;
  sizes.reserve(static_cast<std::size_t>(h_q - 1));
  for (std::int64_t s = 1; s < h_q; ++s) {
    const double v = ell.eval(static_cast<double>(s) / static_cast<double>(n));
    sizes.push_back(std::max<std::int64_t>(1, std::llround(n * v)));
  }
  return DiscreteProfile(std::move(sizes));
}

}  // namespace cannings
